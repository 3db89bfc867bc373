#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ytm/expfam.hpp"
#include "ytm/observables.hpp"

using namespace ytm;
namespace tt = ytm::testing;

namespace {

Generator coordinate_generator(const YTransitionModel& m, int y, int x,
                               int xp) {
  Generator g(static_cast<std::size_t>(m.dY), Matrix::Zero(m.d, m.d));
  g[static_cast<std::size_t>(y)](x, xp) = 1.0;
  return g;
}

Generator output_indicator(const YTransitionModel& m, int y) {
  Generator g(static_cast<std::size_t>(m.dY), Matrix::Zero(m.d, m.d));
  g[static_cast<std::size_t>(y)] = Matrix::Ones(m.d, m.d);
  return g;
}

Generator constant_generator(const YTransitionModel& m) {
  Generator g(static_cast<std::size_t>(m.dY), Matrix::Ones(m.d, m.d));
  return g;
}

Vector scalar(double v) {
  Vector t(1);
  t << v;
  return t;
}

}  // namespace

TEST_CASE("tilt basics") {
  auto m = tt::m2();
  GeneratorSet gens = make_generator_set(m, {coordinate_generator(m, 0, 0, 0)});
  CHECK((tilt(m, gens, scalar(0.0)) - m.bar()).cwiseAbs().maxCoeff() < 1e-15);

  // A constant tilt scales the whole transition matrix.
  GeneratorSet cg;
  cg.gens = {constant_generator(m)};
  Matrix scaled = tilt(m, cg, scalar(0.7));
  CHECK((scaled - std::exp(0.7) * m.bar()).cwiseAbs().maxCoeff() < 1e-12);

  // A coordinate tilt touches exactly one entry of one output block.
  Matrix one = tilt(m, gens, scalar(0.1));
  Matrix expect = m.bar();
  expect(0, 0) += (std::exp(0.1) - 1.0) * m.W[0](0, 0);
  CHECK((one - expect).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(tilt(m, gens, scalar(1e5)), IndeterminateError);
}

TEST_CASE("generator sets reject dependence modulo null functions") {
  auto m = tt::m2();
  // f(x) - f(x') + c is the null form; its indicator difference is a
  // combination of coordinate patterns.
  Generator null_like(static_cast<std::size_t>(m.dY), Matrix::Zero(2, 2));
  for (int y = 0; y < 2; ++y)
    null_like[static_cast<std::size_t>(y)] =
        (Matrix(2, 2) << 0.0, 1.0, -1.0, 0.0).finished();
  CHECK_THROWS_AS(make_generator_set(m, {null_like}), ValidationError);
  CHECK_THROWS_AS(make_generator_set(m, {constant_generator(m)}),
                  ValidationError);
  CHECK_NOTHROW(make_generator_set(m, {coordinate_generator(m, 0, 0, 0)}));
}

TEST_CASE("family points at distinguished parameters") {
  auto m = tt::m2();
  GeneratorSet gens = make_generator_set(m, {coordinate_generator(m, 0, 0, 0)});
  auto origin = at(m, gens, scalar(0.0));
  CHECK(origin.phi == 0.0);
  CHECK(origin.lambda == 1.0);
  for (int y = 0; y < 2; ++y)
    CHECK((origin.model.W[y] - m.W[y]).cwiseAbs().maxCoeff() == 0.0);

  // The constant generator moves the potential but not the model.
  GeneratorSet cg;
  cg.gens = {constant_generator(m)};
  auto shifted = at(m, cg, scalar(0.4));
  CHECK(shifted.phi == doctest::Approx(0.4).epsilon(1e-12));
  for (int y = 0; y < 2; ++y)
    CHECK((shifted.model.W[y] - m.W[y]).cwiseAbs().maxCoeff() < 1e-12);

  auto pt = at(m, gens, scalar(0.5));
  CHECK(validate(pt.model).ok());
  // The tilt of the normalized model at zero is column-stochastic again.
  PerronData pd = perron(pt.model.bar());
  CHECK(pd.lambda == doctest::Approx(1.0).epsilon(1e-10));
  // Entrywise reconstruction from the definition.
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x)
      for (int xp = 0; xp < 2; ++xp) {
        double g = y == 0 && x == 0 && xp == 0 ? 1.0 : 0.0;
        double expect = std::exp(0.5 * g) * m.W[y](x, xp) * pt.pbar(x) /
                        (pt.lambda * pt.pbar(xp));
        CHECK(pt.model.W[y](x, xp) == doctest::Approx(expect).epsilon(1e-10));
      }
}

TEST_CASE("potential gradient at the origin is the stationary mean") {
  auto m = tt::m2();
  GeneratorSet gens;
  gens.gens = {output_indicator(m, 0)};
  Vector grad = potential_gradient(m, gens, scalar(0.0));
  CHECK(grad(0) == doctest::Approx(0.6).epsilon(1e-10));

  Vector p = stationary(m);
  Vector law = exact_output_law(m, p, 1);
  CHECK(grad(0) == doctest::Approx(law(0)).epsilon(1e-10));
}

TEST_CASE("potential gradient matches central finite differences") {
  auto m = tt::m2();
  std::mt19937_64 rng(9);
  GeneratorSet gens = make_generator_set(
      m, {coordinate_generator(m, 0, 0, 0), coordinate_generator(m, 1, 1, 0),
          output_indicator(m, 1)});
  for (int trial = 0; trial < 5; ++trial) {
    Vector theta(3);
    for (int j = 0; j < 3; ++j) theta(j) = 2.0 * tt::uniform01(rng) - 1.0;
    Vector grad = potential_gradient(m, gens, theta);
    const double h = 1e-5;
    for (int j = 0; j < 3; ++j) {
      Vector up = theta, dn = theta;
      up(j) += h;
      dn(j) -= h;
      double fd = (potential(m, gens, up) - potential(m, gens, dn)) / (2 * h);
      CHECK(grad(j) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("divergence is a proper Bregman gap") {
  auto m = tt::m2();
  GeneratorSet gens = make_generator_set(
      m, {coordinate_generator(m, 0, 0, 0), output_indicator(m, 1)});
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(2), b(2);
    for (int j = 0; j < 2; ++j) {
      a(j) = 2.0 * tt::uniform01(rng) - 1.0;
      b(j) = 2.0 * tt::uniform01(rng) - 1.0;
    }
    CHECK(divergence(m, gens, a, a) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(divergence(m, gens, a, b) >= -1e-12);
  }
  // Asymmetry witness.
  Vector t1(2), t0(2);
  t1 << 0.3, 0.0;
  t0 << 0.0, 0.0;
  double fwd = divergence(m, gens, t1, t0);
  double bwd = divergence(m, gens, t0, t1);
  CHECK(std::abs(fwd - bwd) > 1e-6);
}

TEST_CASE("projection onto the normalized representatives") {
  auto m = tt::m2();
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    Generator g = tt::random_generator(m, rng);
    Generator proj = g1_project(m, g);
    // Post 1: the m-representation has vanishing summed column totals.
    Generator mp = m_rep(m, proj);
    Vector colsum = Vector::Zero(2);
    for (const auto& my : mp) colsum += my.colwise().sum().transpose();
    CHECK(colsum.cwiseAbs().maxCoeff() < 1e-10);
    // Post 2: the difference is a null function f(x) - f(x') + c, identical
    // across outputs.
    Matrix diff0 = g[0] - proj[0];
    for (int y = 1; y < m.dY; ++y)
      CHECK((g[y] - proj[y] - diff0).cwiseAbs().maxCoeff() < 1e-12);
    // Null form: diff(x, xp) + diff(xp, x) = 2c and diagonal entries equal c.
    double c = diff0(0, 0);
    CHECK(diff0(1, 1) == doctest::Approx(c).epsilon(1e-10));
    CHECK(diff0(0, 1) + diff0(1, 0) == doctest::Approx(2 * c).epsilon(1e-10));
  }

  // Already-normalized inputs are fixed points.
  Generator g = tt::random_generator(m, rng);
  Generator proj = g1_project(m, g);
  Generator twice = g1_project(m, proj);
  for (int y = 0; y < m.dY; ++y)
    CHECK((twice[y] - proj[y]).cwiseAbs().maxCoeff() < 1e-12);

  // Constants project to zero.
  Generator ones(static_cast<std::size_t>(m.dY), Matrix::Ones(2, 2));
  Generator zeroed = g1_project(m, ones);
  for (int y = 0; y < m.dY; ++y)
    CHECK(zeroed[y].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("m-representation basics") {
  auto m = tt::m2();
  Generator ones(static_cast<std::size_t>(m.dY), Matrix::Ones(2, 2));
  Generator rep = m_rep(m, ones);
  for (int y = 0; y < 2; ++y)
    CHECK((rep[y] - m.W[y]).cwiseAbs().maxCoeff() == 0.0);
  Generator zero(static_cast<std::size_t>(m.dY), Matrix::Zero(2, 2));
  Generator rz = m_rep(m, zero);
  for (int y = 0; y < 2; ++y) CHECK(rz[y].cwiseAbs().maxCoeff() == 0.0);
  Generator coord = coordinate_generator(m, 0, 1, 0);
  Generator rc = m_rep(m, coord);
  CHECK(rc[0](1, 0) == doctest::Approx(m.W[0](1, 0)));
  CHECK(rc[0].cwiseAbs().sum() == doctest::Approx(m.W[0](1, 0)));
}

TEST_CASE("the model derivative equals the projected m-representation") {
  // The first derivative of W_theta,y along g is exactly the
  // m-representation of the normalized representative (W_* g~)_y.
  auto m = tt::m2();
  std::mt19937_64 rng(57);
  Generator g = tt::random_generator(m, rng);
  GeneratorSet gens;
  gens.gens = {g};
  Generator expected = m_rep(m, g1_project(m, g));
  const double h = 1e-6;
  auto up = at(m, gens, scalar(h));
  auto dn = at(m, gens, scalar(-h));
  for (int y = 0; y < m.dY; ++y) {
    Matrix fd = (up.model.W[y] - dn.model.W[y]) / (2 * h);
    CHECK((fd - expected[y]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("law derivatives match finite differences in both modes") {
  auto m = tt::m2();
  std::mt19937_64 rng(77);
  GeneratorSet gens;
  gens.gens = {tt::random_generator(m, rng), tt::random_generator(m, rng)};
  Vector p = tt::random_distribution(2, rng);
  Vector p_stat = stationary(m);
  const double h = 1e-5;
  const int k = 3;

  for (int trial = 0; trial < 10; ++trial) {
    Vector a(2);
    a << 2.0 * tt::uniform01(rng) - 1.0, 2.0 * tt::uniform01(rng) - 1.0;

    Vector d_fixed = law_derivative(m, gens, a, p, k, DerivativeMode::kFixedP);
    auto up = at(m, gens, Vector(h * a));
    auto dn = at(m, gens, Vector(-h * a));
    Vector fd_fixed = (exact_output_law(up.model, p, k) -
                       exact_output_law(dn.model, p, k)) /
                      (2 * h);
    CHECK((d_fixed - fd_fixed).cwiseAbs().maxCoeff() <
          std::max(1e-8, 1e-6 * fd_fixed.cwiseAbs().maxCoeff()));

    Vector d_stat =
        law_derivative(m, gens, a, p_stat, k, DerivativeMode::kStationary);
    Vector fd_stat = (exact_output_law(up.model, stationary(up.model), k) -
                      exact_output_law(dn.model, stationary(dn.model), k)) /
                     (2 * h);
    CHECK((d_stat - fd_stat).cwiseAbs().maxCoeff() <
          std::max(1e-8, 1e-6 * fd_stat.cwiseAbs().maxCoeff()));
  }

  // Zero direction and additivity.
  Vector zero = law_derivative(m, gens, Vector::Zero(2), p, k,
                               DerivativeMode::kFixedP);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
  Vector e0 = Vector::Zero(2), e1 = Vector::Zero(2), both(2);
  e0(0) = 0.7;
  e1(1) = -0.4;
  both << 0.7, -0.4;
  Vector da = law_derivative(m, gens, e0, p, k, DerivativeMode::kFixedP);
  Vector db = law_derivative(m, gens, e1, p, k, DerivativeMode::kFixedP);
  Vector dab = law_derivative(m, gens, both, p, k, DerivativeMode::kFixedP);
  CHECK((da + db - dab).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalized family points agree with the path oracle") {
  auto m = tt::m2();
  std::mt19937_64 rng(97);
  GeneratorSet gens;
  gens.gens = {tt::random_generator(m, rng), tt::random_generator(m, rng)};
  for (int trial = 0; trial < 5; ++trial) {
    Vector theta(2);
    theta << 2.0 * tt::uniform01(rng) - 1.0, 2.0 * tt::uniform01(rng) - 1.0;
    auto pt = at(m, gens, theta);
    Vector p = stationary(pt.model);
    Vector law = exact_output_law(pt.model, p, 3);
    Vector brute = tt::brute_output_law(pt.model, p, 3);
    CHECK((law - brute).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("stationary-mode derivative of the window-1 law") {
  auto m = tt::m2();
  GeneratorSet gens;
  gens.gens = {coordinate_generator(m, 0, 0, 0)};
  Vector d = law_derivative(m, gens, scalar(1.0), Vector(), 1,
                            DerivativeMode::kStationary);
  const double h = 1e-5;
  auto up = at(m, gens, scalar(h));
  auto dn = at(m, gens, scalar(-h));
  Vector fd = (exact_output_law(up.model, stationary(up.model), 1) -
               exact_output_law(dn.model, stationary(dn.model), 1)) /
              (2 * h);
  CHECK((d - fd).cwiseAbs().maxCoeff() < 1e-8);
}
