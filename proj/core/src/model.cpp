#include "ytm/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ytm {

Matrix YTransitionModel::bar() const {
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& wy : W) sum += wy;
  return sum;
}

std::string ValidationReport::summary() const {
  if (issues.empty()) return "valid";
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].what;
  }
  return os.str();
}

ValidationReport validate(const YTransitionModel& model,
                          const Settings& settings) {
  ValidationReport rep;
  if (model.d < 1) rep.issues.push_back({"d must be >= 1"});
  if (model.dY < 1) rep.issues.push_back({"dY must be >= 1"});
  if (static_cast<int>(model.W.size()) != model.dY) {
    rep.issues.push_back({"W must hold dY matrices"});
    return rep;
  }
  for (int y = 0; y < model.dY; ++y) {
    if (model.W[y].rows() != model.d || model.W[y].cols() != model.d) {
      std::ostringstream os;
      os << "W[" << y << "] is not " << model.d << "x" << model.d;
      rep.issues.push_back({os.str(), y});
      continue;
    }
    for (int x = 0; x < model.d; ++x)
      for (int xp = 0; xp < model.d; ++xp)
        if (model.W[y](x, xp) < 0.0) {
          std::ostringstream os;
          os << "negative entry at (y=" << y << ", x=" << x << ", xp=" << xp
             << ")";
          rep.issues.push_back({os.str(), y, x, xp});
        }
  }
  if (rep.ok()) {
    Matrix bar = model.bar();
    for (int xp = 0; xp < model.d; ++xp) {
      double colsum = bar.col(xp).sum();
      if (std::abs(colsum - 1.0) > settings.stochastic_tol) {
        std::ostringstream os;
        os << "column " << xp << " sums to " << colsum << " (expected 1)";
        rep.issues.push_back({os.str(), -1, -1, xp});
      }
    }
  }
  return rep;
}

ValidationReport validate(const IndepModel& model, const Settings& settings) {
  ValidationReport rep;
  const int d = static_cast<int>(model.W.rows());
  if (d < 1 || model.W.cols() != d)
    rep.issues.push_back({"W must be square and nonempty"});
  if (model.V.cols() != d || model.V.rows() < 1)
    rep.issues.push_back({"V must have one column per hidden state"});
  if (!rep.ok()) return rep;
  if (model.W.minCoeff() < 0.0)
    rep.issues.push_back({"W has a negative entry"});
  if (model.V.minCoeff() < 0.0)
    rep.issues.push_back({"V has a negative entry"});
  for (int xp = 0; xp < d; ++xp) {
    double sw = model.W.col(xp).sum();
    if (std::abs(sw - 1.0) > settings.stochastic_tol) {
      std::ostringstream os;
      os << "W column " << xp << " sums to " << sw;
      rep.issues.push_back({os.str(), -1, -1, xp});
    }
    double sv = model.V.col(xp).sum();
    if (std::abs(sv - 1.0) > settings.stochastic_tol) {
      std::ostringstream os;
      os << "V column " << xp << " sums to " << sv;
      rep.issues.push_back({os.str(), -1, -1, xp});
    }
  }
  return rep;
}

ValidationReport validate_distribution(const Vector& p,
                                       const Settings& settings) {
  ValidationReport rep;
  if (p.size() < 1) rep.issues.push_back({"distribution is empty"});
  for (int x = 0; x < p.size(); ++x)
    if (p(x) < 0.0) {
      std::ostringstream os;
      os << "negative mass at state " << x;
      rep.issues.push_back({os.str(), -1, x, -1});
    }
  if (rep.ok() && std::abs(p.sum() - 1.0) > settings.stochastic_tol) {
    std::ostringstream os;
    os << "total mass " << p.sum() << " (expected 1)";
    rep.issues.push_back({os.str()});
  }
  return rep;
}

void require_valid(const YTransitionModel& model, const Settings& settings) {
  auto rep = validate(model, settings);
  if (!rep.ok()) throw ValidationError("invalid model: " + rep.summary());
}

void require_valid(const IndepModel& model, const Settings& settings) {
  auto rep = validate(model, settings);
  if (!rep.ok())
    throw ValidationError("invalid independent model: " + rep.summary());
}

void require_distribution(const Vector& p, const Settings& settings) {
  auto rep = validate_distribution(p, settings);
  if (!rep.ok())
    throw ValidationError("invalid distribution: " + rep.summary());
}

YTransitionModel from_independent(const IndepModel& m,
                                  const Settings& settings) {
  require_valid(m, settings);
  YTransitionModel out;
  out.d = static_cast<int>(m.W.rows());
  out.dY = static_cast<int>(m.V.rows());
  out.W.reserve(out.dY);
  for (int y = 0; y < out.dY; ++y)
    out.W.push_back(m.W * m.V.row(y).asDiagonal());
  return out;
}

YTransitionModel from_function(const Matrix& w, const std::vector<int>& f,
                               int dY, const Settings& settings) {
  const int d = static_cast<int>(w.rows());
  if (w.cols() != d) throw ValidationError("from_function: W must be square");
  if (static_cast<int>(f.size()) != d)
    throw ValidationError("from_function: f must be total on the states");
  for (int x = 0; x < d; ++x)
    if (f[x] < 0 || f[x] >= dY)
      throw ValidationError("from_function: f value out of range");
  YTransitionModel out;
  out.d = d;
  out.dY = dY;
  out.W.assign(dY, Matrix::Zero(d, d));
  for (int x = 0; x < d; ++x) out.W[f[x]].row(x) = w.row(x);
  require_valid(out, settings);
  return out;
}

Matrix lift_joint(const YTransitionModel& model, const Settings& settings) {
  require_valid(model, settings);
  const int d = model.d, dY = model.dY, n = d * dY;
  Matrix big = Matrix::Zero(n, n);
  for (int y = 0; y < dY; ++y)
    for (int yp = 0; yp < dY; ++yp)
      big.block(y * d, yp * d, d, d) = model.W[y];
  return big;
}

Vector stationary(const YTransitionModel& model, const Settings& settings) {
  require_valid(model, settings);
  Matrix bar = model.bar();
  if (model.d == 1) return Vector::Ones(1);
  auto sccs = strongly_connected_components(bar, settings.support_tol);
  if (sccs.size() != 1) {
    std::ostringstream os;
    os << "stationary: chain is reducible (" << sccs.size()
       << " strongly connected components)";
    throw ReducibleError(os.str(), sccs);
  }
  // Eigenvector of eigenvalue 1, unique for irreducible chains (no
  // aperiodicity needed).
  Subspace k = kernel(Matrix::Identity(model.d, model.d) - bar,
                      settings.rank_rel_tol);
  if (k.dim() != 1)
    throw IndeterminateError(
        "stationary: fixed space is not one-dimensional at the current "
        "tolerance");
  Vector p = k.basis().col(0);
  if (p.sum() < 0) p = -p;
  p /= p.sum();
  double res = (bar * p - p).cwiseAbs().maxCoeff();
  if (res > settings.residual_tol)
    throw IndeterminateError("stationary: residual above tolerance");
  return p;
}

Vector lifted_stationary(const YTransitionModel& model,
                         const Settings& settings) {
  Vector p = stationary(model, settings);
  Vector out(model.d * model.dY);
  for (int y = 0; y < model.dY; ++y)
    out.segment(y * model.d, model.d) = model.W[y] * p;
  return out;
}

std::vector<std::pair<int, int>> sample(const YTransitionModel& model,
                                        const Vector& p0, std::int64_t n,
                                        std::uint64_t seed,
                                        const Settings& settings) {
  require_valid(model, settings);
  require_distribution(p0, settings);
  if (p0.size() != model.d)
    throw ValidationError("sample: initial distribution has wrong length");

  std::mt19937_64 rng(seed);
  // Uniform double in [0, 1) built from the top 53 bits; avoids the
  // implementation-defined std distributions so runs are reproducible
  // across standard libraries.
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  auto draw = [&](const Vector& weights) {
    double total = weights.sum();
    double r = uniform() * total;
    double acc = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
      acc += weights(i);
      if (r < acc) return i;
    }
    return static_cast<int>(weights.size() - 1);
  };

  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(n));
  int x = draw(p0);
  Vector joint(model.d * model.dY);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int y = 0; y < model.dY; ++y)
      joint.segment(y * model.d, model.d) = model.W[y].col(x);
    int idx = draw(joint);
    x = idx % model.d;
    out.emplace_back(x, idx / model.d);
  }
  return out;
}

bool full_support(const YTransitionModel& model, const Settings& settings) {
  for (const auto& wy : model.W)
    if (wy.minCoeff() <= settings.support_tol) return false;
  return true;
}

}  // namespace ytm
