#include "ytm/expfam.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace ytm {

Vector flatten(const Generator& g) {
  const int dY = static_cast<int>(g.size());
  const int d = static_cast<int>(g[0].rows());
  Vector v(dY * d * d);
  for (int y = 0; y < dY; ++y)
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp)
        v((y * d + x) * d + xp) = g[static_cast<std::size_t>(y)](x, xp);
  return v;
}

Generator unflatten(const Vector& v, int d, int dY) {
  Generator g(static_cast<std::size_t>(dY), Matrix::Zero(d, d));
  for (int y = 0; y < dY; ++y)
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp)
        g[static_cast<std::size_t>(y)](x, xp) = v((y * d + x) * d + xp);
  return g;
}

int flat_index(int y, int x, int xp, int d) { return (y * d + x) * d + xp; }

Generator m_rep(const YTransitionModel& base, const Generator& g) {
  Generator out;
  out.reserve(g.size());
  for (int y = 0; y < base.dY; ++y)
    out.push_back(g[static_cast<std::size_t>(y)].cwiseProduct(
        base.W[static_cast<std::size_t>(y)]));
  return out;
}

namespace {

void check_generator_shape(const YTransitionModel& base, const Generator& g) {
  if (static_cast<int>(g.size()) != base.dY)
    throw ValidationError("generator must hold dY matrices");
  for (const auto& gy : g)
    if (gy.rows() != base.d || gy.cols() != base.d)
      throw ValidationError("generator block has wrong shape");
}

void check_support(const YTransitionModel& base, const Generator& g,
                   const Settings& settings) {
  for (int y = 0; y < base.dY; ++y)
    for (int x = 0; x < base.d; ++x)
      for (int xp = 0; xp < base.d; ++xp)
        if (base.W[static_cast<std::size_t>(y)](x, xp) <= settings.support_tol &&
            g[static_cast<std::size_t>(y)](x, xp) != 0.0) {
          std::ostringstream os;
          os << "generator has mass off the model support at (y=" << y
             << ", x=" << x << ", xp=" << xp << ")";
          throw ValidationError(os.str());
        }
}

// m-representations of the null functions f(x) - f(x') + c: a basis of
// W_*(N) as flattened vectors.
Matrix null_mreps(const YTransitionModel& base) {
  const int d = base.d, n = base.dY * d * d;
  Matrix cols(n, d + 1);
  for (int i = 0; i < d; ++i) {
    Generator g(static_cast<std::size_t>(base.dY), Matrix::Zero(d, d));
    for (int y = 0; y < base.dY; ++y)
      for (int x = 0; x < d; ++x)
        for (int xp = 0; xp < d; ++xp) {
          double f = (x == i ? 1.0 : 0.0) - (xp == i ? 1.0 : 0.0);
          g[static_cast<std::size_t>(y)](x, xp) =
              f * base.W[static_cast<std::size_t>(y)](x, xp);
        }
    cols.col(i) = flatten(g);
  }
  Generator ones(static_cast<std::size_t>(base.dY), Matrix::Zero(d, d));
  for (int y = 0; y < base.dY; ++y)
    ones[static_cast<std::size_t>(y)] = base.W[static_cast<std::size_t>(y)];
  cols.col(d) = flatten(ones);
  return cols;
}

}  // namespace

GeneratorSet make_generator_set(const YTransitionModel& base,
                                std::vector<Generator> gens,
                                const Settings& settings) {
  require_valid(base, settings);
  for (const auto& g : gens) {
    check_generator_shape(base, g);
    check_support(base, g, settings);
  }
  if (!gens.empty()) {
    const int n = base.dY * base.d * base.d;
    Matrix nulls = null_mreps(base);
    Matrix stacked(n, static_cast<int>(gens.size()) + nulls.cols());
    for (std::size_t j = 0; j < gens.size(); ++j)
      stacked.col(static_cast<int>(j)) = flatten(m_rep(base, gens[j]));
    stacked.rightCols(nulls.cols()) = nulls;
    int null_rank = numeric_rank(nulls, settings.rank_rel_tol);
    int full_rank = numeric_rank(stacked, settings.rank_rel_tol);
    if (full_rank != static_cast<int>(gens.size()) + null_rank)
      throw ValidationError(
          "generators are linearly dependent modulo the null functions "
          "f(x) - f(x') + c");
  }
  GeneratorSet out;
  out.gens = std::move(gens);
  return out;
}

namespace {

// Exponent field sum_j theta_j g_j with an overflow guard.
Generator exponent_field(const YTransitionModel& base, const GeneratorSet& gens,
                         const Vector& theta, const Settings& settings) {
  if (theta.size() != gens.size())
    throw ValidationError("theta length does not match the generator count");
  Generator s(static_cast<std::size_t>(base.dY), Matrix::Zero(base.d, base.d));
  for (int j = 0; j < theta.size(); ++j) {
    if (!std::isfinite(theta(j)))
      throw ValidationError("theta must be finite");
    for (int y = 0; y < base.dY; ++y)
      s[static_cast<std::size_t>(y)] +=
          theta(j) * gens.gens[static_cast<std::size_t>(j)][static_cast<std::size_t>(y)];
  }
  for (const auto& sy : s)
    if (sy.cwiseAbs().maxCoeff() > settings.exp_guard)
      throw IndeterminateError(
          "tilt: exponent exceeds the overflow guard; rescale theta or the "
          "generators");
  return s;
}

}  // namespace

Matrix tilt(const YTransitionModel& base, const GeneratorSet& gens,
            const Vector& theta, const Settings& settings) {
  require_valid(base, settings);
  Generator s = exponent_field(base, gens, theta, settings);
  Matrix out = Matrix::Zero(base.d, base.d);
  for (int y = 0; y < base.dY; ++y)
    out += s[static_cast<std::size_t>(y)].array().exp().matrix().cwiseProduct(
        base.W[static_cast<std::size_t>(y)]);
  // exp(0) contributions off the support must not create new edges.
  for (int x = 0; x < base.d; ++x)
    for (int xp = 0; xp < base.d; ++xp) {
      bool supported = false;
      for (int y = 0; y < base.dY; ++y)
        if (base.W[static_cast<std::size_t>(y)](x, xp) > settings.support_tol)
          supported = true;
      if (!supported) out(x, xp) = 0.0;
    }
  return out;
}

ExpFamilyPoint at(const YTransitionModel& base, const GeneratorSet& gens,
                  const Vector& theta, const Settings& settings) {
  require_valid(base, settings);
  ExpFamilyPoint pt;
  pt.theta = theta;
  if (theta.size() != gens.size())
    throw ValidationError("theta length does not match the generator count");
  if (theta.isZero(0.0)) {
    pt.lambda = 1.0;
    pt.pbar = Vector::Ones(base.d);
    pt.phi = 0.0;
    pt.model = base;
    return pt;
  }
  Matrix bar = tilt(base, gens, theta, settings);
  PerronData pd = perron(bar.transpose(), settings);
  pt.lambda = pd.lambda;
  pt.pbar = pd.right;  // Perron vector of the transposed tilt
  pt.phi = std::log(pt.lambda);

  Generator s = exponent_field(base, gens, theta, settings);

  // Consistency with the joint-lift picture: the vector pbar copied across
  // the output coordinate is an eigenvector of the transposed lifted tilt
  // with the same eigenvalue, which pins lambda as its spectral radius.
  {
    Vector lifted_res = Vector::Zero(base.d);
    for (int xp = 0; xp < base.d; ++xp) {
      double acc = 0.0;
      for (int y = 0; y < base.dY; ++y)
        for (int x = 0; x < base.d; ++x)
          if (base.W[static_cast<std::size_t>(y)](x, xp) > settings.support_tol)
            acc += std::exp(s[static_cast<std::size_t>(y)](x, xp)) *
                   base.W[static_cast<std::size_t>(y)](x, xp) * pt.pbar(x);
      lifted_res(xp) = acc - pt.lambda * pt.pbar(xp);
    }
    if (lifted_res.cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, pt.lambda * pt.pbar.maxCoeff()))
      throw InternalCheckError(
          "exp family: the lifted tilt does not share the Perron data");
  }
  pt.model.d = base.d;
  pt.model.dY = base.dY;
  pt.model.W.reserve(static_cast<std::size_t>(base.dY));
  for (int y = 0; y < base.dY; ++y) {
    Matrix wy = s[static_cast<std::size_t>(y)].array().exp().matrix().cwiseProduct(
        base.W[static_cast<std::size_t>(y)]);
    for (int x = 0; x < base.d; ++x)
      for (int xp = 0; xp < base.d; ++xp) {
        if (base.W[static_cast<std::size_t>(y)](x, xp) <= settings.support_tol)
          wy(x, xp) = 0.0;
        else
          wy(x, xp) *= pt.pbar(x) / (pt.lambda * pt.pbar(xp));
      }
    pt.model.W.push_back(wy);
  }
  Settings relaxed = settings;
  relaxed.stochastic_tol = std::max(settings.stochastic_tol, 1e-9);
  require_valid(pt.model, relaxed);
  return pt;
}

double potential(const YTransitionModel& base, const GeneratorSet& gens,
                 const Vector& theta, const Settings& settings) {
  return at(base, gens, theta, settings).phi;
}

Vector potential_gradient(const YTransitionModel& base,
                          const GeneratorSet& gens, const Vector& theta,
                          const Settings& settings) {
  require_valid(base, settings);
  if (theta.size() != gens.size())
    throw ValidationError("theta length does not match the generator count");
  Matrix bar = tilt(base, gens, theta, settings);
  PerronData pd = perron(bar, settings);
  Generator s = exponent_field(base, gens, theta, settings);
  Generator weighted(static_cast<std::size_t>(base.dY));
  for (int y = 0; y < base.dY; ++y)
    weighted[static_cast<std::size_t>(y)] =
        s[static_cast<std::size_t>(y)].array().exp().matrix().cwiseProduct(
            base.W[static_cast<std::size_t>(y)]);
  Vector grad(theta.size());
  double denom = pd.lambda * pd.left.dot(pd.right);
  for (int j = 0; j < theta.size(); ++j) {
    Matrix dbar = Matrix::Zero(base.d, base.d);
    for (int y = 0; y < base.dY; ++y)
      dbar += gens.gens[static_cast<std::size_t>(j)][static_cast<std::size_t>(y)]
                  .cwiseProduct(weighted[static_cast<std::size_t>(y)]);
    grad(j) = pd.left.dot(dbar * pd.right) / denom;
  }
  return grad;
}

double divergence(const YTransitionModel& base, const GeneratorSet& gens,
                  const Vector& theta, const Vector& theta_prime,
                  const Settings& settings) {
  Vector grad = potential_gradient(base, gens, theta, settings);
  double phi = potential(base, gens, theta, settings);
  double phi_prime = potential(base, gens, theta_prime, settings);
  return (theta - theta_prime).dot(grad) - phi + phi_prime;
}

Generator g1_project(const YTransitionModel& base, const Generator& g,
                     const Settings& settings) {
  require_valid(base, settings);
  check_generator_shape(base, g);
  Generator mg = m_rep(base, g);
  Vector v = Vector::Zero(base.d);
  for (const auto& my : mg) v += my.colwise().sum().transpose();

  Vector p = stationary(base, settings);
  double c = p.dot(v);
  Matrix bar = base.bar();
  // (I - |W|^T) f = c 1 - v, minimum-norm solution (gauge orthogonal to the
  // kernel direction 1).
  Vector f = solve_on_complement(
      Matrix(Matrix::Identity(base.d, base.d) - bar.transpose()),
      Vector(c * Vector::Ones(base.d) - v), Vector::Ones(base.d), settings);

  Generator out = g;
  for (int y = 0; y < base.dY; ++y)
    for (int x = 0; x < base.d; ++x)
      for (int xp = 0; xp < base.d; ++xp) {
        if (base.W[static_cast<std::size_t>(y)](x, xp) <= settings.support_tol)
          out[static_cast<std::size_t>(y)](x, xp) = 0.0;
        else
          out[static_cast<std::size_t>(y)](x, xp) -= f(x) - f(xp) + c;
      }
  return out;
}

Vector law_derivative(const YTransitionModel& base, const GeneratorSet& gens,
                      const Vector& a, const Vector& p, int k,
                      DerivativeMode mode, const Settings& settings) {
  require_valid(base, settings);
  if (a.size() != gens.size())
    throw ValidationError("direction length does not match the generator count");
  Vector base_p =
      mode == DerivativeMode::kStationary ? stationary(base, settings) : p;
  require_distribution(base_p, settings);
  if (base_p.size() != base.d)
    throw ValidationError("law_derivative: distribution has wrong length");
  if (k < 1) throw ValidationError("law_derivative: k must be >= 1");
  double rows = std::pow(static_cast<double>(base.dY), k);
  if (rows > static_cast<double>(settings.enumeration_cap))
    throw CapExceededError("law_derivative: dY^k exceeds the enumeration cap");

  Generator dir(static_cast<std::size_t>(base.dY), Matrix::Zero(base.d, base.d));
  for (int j = 0; j < a.size(); ++j)
    for (int y = 0; y < base.dY; ++y)
      dir[static_cast<std::size_t>(y)] +=
          a(j) * gens.gens[static_cast<std::size_t>(j)][static_cast<std::size_t>(y)];
  Generator l = m_rep(base, g1_project(base, dir, settings));

  Vector q = Vector::Zero(base.d);
  if (mode == DerivativeMode::kStationary) {
    Vector rhs = Vector::Zero(base.d);
    for (const auto& ly : l) rhs += ly * base_p;
    q = solve_on_complement(
        Matrix(Matrix::Identity(base.d, base.d) - base.bar()), rhs,
        Vector::Ones(base.d), settings);
  }

  // Depth-first over words; carry u^T (product) and the accumulated
  // insertion sum u^T (product with one factor replaced by L).
  const std::int64_t total = static_cast<std::int64_t>(rows);
  Vector out(total);
  std::vector<Eigen::RowVectorXd> prod(static_cast<std::size_t>(k) + 1);
  std::vector<Eigen::RowVectorXd> dsum(static_cast<std::size_t>(k) + 1);
  prod[0] = Eigen::RowVectorXd::Ones(base.d);
  dsum[0] = Eigen::RowVectorXd::Zero(base.d);
  std::int64_t counter = 0;
  std::function<void(int)> rec = [&](int depth) {
    if (depth == k) {
      double val = dsum[static_cast<std::size_t>(k)].dot(base_p);
      if (mode == DerivativeMode::kStationary)
        val += prod[static_cast<std::size_t>(k)].dot(q);
      out(counter++) = val;
      return;
    }
    for (int y = 0; y < base.dY; ++y) {
      const std::size_t dd = static_cast<std::size_t>(depth);
      prod[dd + 1] = prod[dd] * base.W[static_cast<std::size_t>(y)];
      dsum[dd + 1] = dsum[dd] * base.W[static_cast<std::size_t>(y)] +
                     prod[dd] * l[static_cast<std::size_t>(y)];
      rec(depth + 1);
    }
  };
  rec(0);
  return out;
}

}  // namespace ytm
