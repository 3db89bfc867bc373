#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ytm/linalg.hpp"

using namespace ytm;
using ytm::testing::random_column_stochastic;
using ytm::testing::uniform01;

TEST_CASE("kernel basics") {
  CHECK(kernel(Matrix::Identity(3, 3)).dim() == 0);

  Matrix rank1 = (Matrix(2, 2) << 1, 1, 1, 1).finished();
  Subspace k = kernel(rank1);
  REQUIRE(k.dim() == 1);
  Vector expected(2);
  expected << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  CHECK(k.contains(expected));

  // The window-1 observed map of the worked example is its emission matrix,
  // whose columns are independent (2x2 determinant 0.7).
  Matrix v = (Matrix(2, 2) << 0.9, 0.2, 0.1, 0.8).finished();
  CHECK(kernel(v).dim() == 0);
}

TEST_CASE("rank decisions are stable under 1e-14 perturbations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 3 + static_cast<int>(rng() % 3);
    int r = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1));
    Matrix a(n, r), b(r, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < r; ++j) {
        a(i, j) = 2.0 * uniform01(rng) - 1.0;
        b(j, i) = 2.0 * uniform01(rng) - 1.0;
      }
    Matrix m = a * b;
    int dim0 = kernel(m).dim();
    Matrix noise(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) noise(i, j) = 2.0 * uniform01(rng) - 1.0;
    CHECK(kernel(Matrix(m + 1e-14 * noise)).dim() == dim0);
  }
}

TEST_CASE("subspace algebra") {
  Matrix e12(3, 2), e23(3, 2);
  e12 << 1, 0, 0, 1, 0, 0;
  e23 << 0, 0, 1, 0, 0, 1;
  Subspace a = Subspace::span(e12);
  Subspace b = Subspace::span(e23);

  Subspace meet = intersect(a, b);
  REQUIRE(meet.dim() == 1);
  Vector e2 = Vector::Zero(3);
  e2(1) = 1.0;
  CHECK(meet.contains(e2));

  CHECK(sum(a, Subspace::zero(3)).dim() == a.dim());
  CHECK(equal(sum(a, Subspace::zero(3)), a));

  Vector v(2);
  v << 2, 2;
  Subspace diag = Subspace::span(v);
  Vector w(2);
  w << 2, 2;
  CHECK(diag.contains(w));
}

TEST_CASE("sum/intersect dimension formula on random subspaces") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 4 + static_cast<int>(rng() % 4);
    auto random_space = [&](int r) {
      Matrix m(n, r);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < r; ++j) m(i, j) = 2.0 * uniform01(rng) - 1.0;
      return Subspace::span(m);
    };
    Subspace a = random_space(1 + static_cast<int>(rng() % 3));
    Subspace b = random_space(1 + static_cast<int>(rng() % 3));
    CHECK(a.dim() + b.dim() == sum(a, b).dim() + intersect(a, b).dim());
  }
}

TEST_CASE("perron on stochastic and symmetric matrices") {
  Settings s;
  std::mt19937_64 rng(3);
  Matrix w = random_column_stochastic(4, rng);
  PerronData pd = perron(w, s);
  CHECK(std::abs(pd.lambda - 1.0) < 1e-10);
  // Left vector proportional to all-ones.
  Vector l = pd.left / pd.left.maxCoeff();
  CHECK((l - Vector::Ones(4)).cwiseAbs().maxCoeff() < 1e-9);

  Matrix a = (Matrix(2, 2) << 2, 1, 1, 2).finished();
  PerronData pa = perron(a, s);
  CHECK(std::abs(pa.lambda - 3.0) < 1e-10);
  CHECK(std::abs(pa.right(0) - pa.right(1)) < 1e-10);
}

TEST_CASE("perron eigenvalue is 1 for 1000 random column-stochastic matrices") {
  std::mt19937_64 rng(5);
  Settings s;
  for (int trial = 0; trial < 1000; ++trial) {
    int d = 2 + static_cast<int>(rng() % 4);
    Matrix w = random_column_stochastic(d, rng);
    PerronData pd = perron(w, s);
    CHECK(pd.lambda == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((w * pd.right - pd.lambda * pd.right).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(pd.left.dot(pd.right) - 1.0) < 1e-10);
  }
}

TEST_CASE("perron matches a dense eigensolver on a tilted matrix") {
  // Tilt the worked example by a coordinate exponential factor.
  auto m = ytm::testing::m2();
  Matrix bar = m.bar();
  Matrix tilted = bar;
  tilted(0, 0) = m.W[0](0, 0) * std::exp(0.1) + m.W[1](0, 0);
  PerronData pd = perron(tilted);
  Eigen::EigenSolver<Matrix> es(tilted);
  double lead = 0.0;
  for (int i = 0; i < 2; ++i) lead = std::max(lead, es.eigenvalues()(i).real());
  CHECK(std::abs(pd.lambda - lead) < 1e-10);
}

TEST_CASE("perron rejects reducible support") {
  Matrix id = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(perron(id), ReducibleError);
  try {
    perron(id);
  } catch (const ReducibleError& e) {
    CHECK(e.components.size() == 3);
  }
}

TEST_CASE("strongly connected components") {
  Matrix a = Matrix::Zero(4, 4);
  a(1, 0) = 1.0;  // 0 -> 1
  a(0, 1) = 1.0;  // 1 -> 0
  a(2, 1) = 0.5;  // 1 -> 2
  a(3, 2) = 1.0;  // 2 -> 3
  a(2, 3) = 1.0;  // 3 -> 2
  auto sccs = strongly_connected_components(a);
  REQUIRE(sccs.size() == 2);
  CHECK(!is_irreducible(a));
  Matrix cycle = Matrix::Zero(3, 3);
  cycle(1, 0) = cycle(2, 1) = cycle(0, 2) = 1.0;
  CHECK(is_irreducible(cycle));
}

TEST_CASE("solve_on_complement") {
  auto m2 = ytm::testing::m2();
  Matrix m = Matrix::Identity(2, 2) - m2.bar();
  Vector ones = Vector::Ones(2);

  Vector x0 = solve_on_complement(m, Vector::Zero(2), ones);
  CHECK(x0.cwiseAbs().maxCoeff() < 1e-12);

  Vector b(2);
  b << 0.1, -0.1;
  Vector x = solve_on_complement(m, b, ones);
  CHECK((m * x - b).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(ones.dot(x)) < 1e-10);

  // b with a component along the cokernel direction is rejected.
  Vector bad(2);
  bad << 0.1, 0.1;
  CHECK_THROWS_AS(solve_on_complement(m, bad, ones), IndeterminateError);
}
