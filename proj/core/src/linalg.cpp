#include "ytm/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace ytm {

Subspace::Subspace(int ambient_dim, Matrix orthonormal_basis, double tol)
    : n_(ambient_dim), basis_(std::move(orthonormal_basis)), tol_(tol) {
  if (basis_.size() == 0) basis_ = Matrix::Zero(n_, 0);
  if (basis_.rows() != n_)
    throw ValidationError("subspace basis has wrong ambient dimension");
  if (basis_.cols() > 0) {
    Matrix gram = basis_.transpose() * basis_;
    double err = (gram - Matrix::Identity(gram.rows(), gram.cols()))
                     .cwiseAbs()
                     .maxCoeff();
    if (err > 1e-8)
      throw ValidationError("subspace basis is not orthonormal");
  }
}

Subspace Subspace::zero(int ambient_dim, double tol) {
  return Subspace(ambient_dim, Matrix::Zero(ambient_dim, 0), tol);
}

Subspace Subspace::span(const Matrix& columns, double rank_rel_tol,
                        double tol) {
  const int n = static_cast<int>(columns.rows());
  if (columns.cols() == 0) return zero(n, tol);
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  // A matrix that is zero up to roundoff spans nothing; without the
  // absolute guard the relative cut would keep noise directions.
  if (sv.size() == 0 || sv(0) <= 1e-12) return zero(n, tol);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_rel_tol * sv(0)) ++r;
  return Subspace(n, svd.matrixU().leftCols(r), tol);
}

double Subspace::residual(const Vector& v) const {
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  Vector r = v - project(v);
  return r.norm() / nv;
}

bool Subspace::contains(const Vector& v) const { return residual(v) <= tol_; }

bool Subspace::contains(const Subspace& other) const {
  for (int j = 0; j < other.dim(); ++j)
    if (!contains(Vector(other.basis().col(j)))) return false;
  return true;
}

Vector Subspace::project(const Vector& v) const {
  if (dim() == 0) return Vector::Zero(n_);
  return basis_ * (basis_.transpose() * v);
}

Matrix Subspace::complement_basis() const {
  if (dim() == 0) return Matrix::Identity(n_, n_);
  if (dim() == n_) return Matrix::Zero(n_, 0);
  // Columns of the full-space identity minus the projector, orthonormalized.
  Matrix proj = Matrix::Identity(n_, n_) - basis_ * basis_.transpose();
  Eigen::JacobiSVD<Matrix> svd(proj, Eigen::ComputeThinU);
  int r = n_ - dim();
  return svd.matrixU().leftCols(r);
}

Subspace sum(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw ValidationError("subspace sum: ambient dimensions differ");
  Matrix cat(a.ambient_dim(), a.dim() + b.dim());
  cat << a.basis(), b.basis();
  return Subspace::span(cat, 1e-9, std::min(a.tol(), b.tol()));
}

Subspace sum(const std::vector<Subspace>& spaces) {
  if (spaces.empty()) throw ValidationError("subspace sum: empty list");
  Subspace acc = spaces.front();
  for (std::size_t i = 1; i < spaces.size(); ++i) acc = sum(acc, spaces[i]);
  return acc;
}

Subspace intersect(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw ValidationError("subspace intersect: ambient dimensions differ");
  if (a.dim() == 0 || b.dim() == 0)
    return Subspace::zero(a.ambient_dim(), std::min(a.tol(), b.tol()));
  // v = A x = B y  <=>  (x; y) in the kernel of [A, -B].
  Matrix cat(a.ambient_dim(), a.dim() + b.dim());
  cat << a.basis(), -b.basis();
  Subspace k = kernel(cat, 1e-9);
  if (k.dim() == 0)
    return Subspace::zero(a.ambient_dim(), std::min(a.tol(), b.tol()));
  Matrix xs = k.basis().topRows(a.dim());
  return Subspace::span(a.basis() * xs, 1e-9, std::min(a.tol(), b.tol()));
}

bool equal(const Subspace& a, const Subspace& b) {
  return a.dim() == b.dim() && a.contains(b) && b.contains(a);
}

Subspace kernel(const Matrix& m, double tol_rel) {
  const int n = static_cast<int>(m.cols());
  if (m.rows() == 0) return Subspace(n, Matrix::Identity(n, n), 1e-9);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax <= 0.0) return Subspace(n, Matrix::Identity(n, n), 1e-9);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol_rel * smax) ++r;
  return Subspace(n, svd.matrixV().rightCols(n - r), 1e-9);
}

int numeric_rank(const Matrix& m, double tol_rel) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol_rel * smax) ++r;
  return r;
}

namespace {

// Iterative Tarjan SCC on the directed graph with edge x' -> x whenever
// A(x, x') exceeds the support tolerance.
struct TarjanState {
  std::vector<int> index, lowlink, stack;
  std::vector<bool> on_stack;
  std::vector<std::vector<int>> adj;
  std::vector<std::vector<int>> sccs;
  int counter = 0;
};

void tarjan_visit(TarjanState& st, int root) {
  struct Frame {
    int v;
    std::size_t next_child;
  };
  std::vector<Frame> frames{{root, 0}};
  st.index[root] = st.lowlink[root] = st.counter++;
  st.stack.push_back(root);
  st.on_stack[root] = true;
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.next_child < st.adj[f.v].size()) {
      int w = st.adj[f.v][f.next_child++];
      if (st.index[w] < 0) {
        st.index[w] = st.lowlink[w] = st.counter++;
        st.stack.push_back(w);
        st.on_stack[w] = true;
        frames.push_back({w, 0});
      } else if (st.on_stack[w]) {
        st.lowlink[f.v] = std::min(st.lowlink[f.v], st.index[w]);
      }
    } else {
      if (st.lowlink[f.v] == st.index[f.v]) {
        std::vector<int> comp;
        int w;
        do {
          w = st.stack.back();
          st.stack.pop_back();
          st.on_stack[w] = false;
          comp.push_back(w);
        } while (w != f.v);
        std::sort(comp.begin(), comp.end());
        st.sccs.push_back(std::move(comp));
      }
      int v = f.v;
      frames.pop_back();
      if (!frames.empty())
        st.lowlink[frames.back().v] =
            std::min(st.lowlink[frames.back().v], st.lowlink[v]);
    }
  }
}

}  // namespace

std::vector<std::vector<int>> strongly_connected_components(
    const Matrix& a, double support_tol) {
  const int n = static_cast<int>(a.rows());
  TarjanState st;
  st.index.assign(n, -1);
  st.lowlink.assign(n, 0);
  st.on_stack.assign(n, false);
  st.adj.assign(n, {});
  for (int xp = 0; xp < n; ++xp)
    for (int x = 0; x < n; ++x)
      if (x != xp && a(x, xp) > support_tol) st.adj[xp].push_back(x);
  for (int v = 0; v < n; ++v)
    if (st.index[v] < 0) tarjan_visit(st, v);
  std::sort(st.sccs.begin(), st.sccs.end());
  return st.sccs;
}

bool is_irreducible(const Matrix& a, double support_tol) {
  return strongly_connected_components(a, support_tol).size() == 1;
}

PerronData perron(const Matrix& a, const Settings& settings) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw ValidationError("perron: matrix must be square");
  if (a.minCoeff() < -settings.support_tol)
    throw ValidationError("perron: matrix has negative entries");
  if (n == 1) {
    double lam = a(0, 0);
    if (lam <= 0.0) throw ValidationError("perron: 1x1 matrix must be positive");
    PerronData out;
    out.lambda = lam;
    out.right = Vector::Ones(1);
    out.left = Vector::Ones(1);
    return out;
  }
  auto sccs = strongly_connected_components(a, settings.support_tol);
  if (sccs.size() != 1) {
    std::ostringstream os;
    os << "perron: support graph is reducible (" << sccs.size()
       << " strongly connected components)";
    throw ReducibleError(os.str(), sccs);
  }

  // A + I is primitive for irreducible nonnegative A, so plain power
  // iteration converges on it and shares eigenvectors with A.
  Matrix shifted = a + Matrix::Identity(n, n);
  auto iterate = [&](const Matrix& m) {
    Vector v = Vector::Ones(n) / static_cast<double>(n);
    double lam = 0.0;
    for (std::int64_t it = 0; it < settings.perron_max_iter; ++it) {
      Vector w = m * v;
      double s = w.sum();
      if (s <= 0.0) break;
      w /= s;
      lam = s;
      double delta = (w - v).cwiseAbs().maxCoeff();
      v = w;
      if (delta < 1e-16) break;
    }
    return std::make_pair(lam - 1.0, v);
  };

  auto [lam_r, right] = iterate(shifted);
  auto [lam_l, left] = iterate(Matrix(shifted.transpose()));
  double lambda = 0.5 * (lam_r + lam_l);

  auto residual = [&](double lam, const Vector& r, const Vector& l) {
    double rr = (a * r - lam * r).cwiseAbs().maxCoeff();
    double rl = (a.transpose() * l - lam * l).cwiseAbs().maxCoeff();
    return std::max(rr, rl) / std::max(1.0, std::abs(lam));
  };

  if (residual(lambda, right, left) > settings.perron_tol) {
    // Dense fallback: take the eigenpair of largest real part.
    Eigen::EigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
      throw IndeterminateError("perron: dense eigensolver failed");
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    lambda = es.eigenvalues()(best).real();
    Eigen::VectorXcd rc = es.eigenvectors().col(best);
    right = rc.real();
    if (right.sum() < 0) right = -right;
    Eigen::EigenSolver<Matrix> esl(a.transpose());
    if (esl.info() != Eigen::Success)
      throw IndeterminateError("perron: dense eigensolver failed");
    int bestl = 0;
    for (int i = 1; i < n; ++i)
      if (esl.eigenvalues()(i).real() > esl.eigenvalues()(bestl).real())
        bestl = i;
    left = esl.eigenvectors().col(bestl).real();
    if (left.sum() < 0) left = -left;
    double res = residual(lambda, right, left);
    if (res > settings.perron_tol) {
      std::ostringstream os;
      os << "perron: no eigenpair below residual tolerance (residual " << res
         << ")";
      throw IndeterminateError(os.str());
    }
  }

  if (right.minCoeff() <= 0.0 || left.minCoeff() <= 0.0)
    throw IndeterminateError(
        "perron: eigenvector has a nonpositive entry for irreducible input");

  right /= right.sum();
  left /= left.dot(right);
  PerronData out;
  out.lambda = lambda;
  out.right = right;
  out.left = left;
  return out;
}

Vector solve_on_complement(const Matrix& m, const Vector& b,
                           const Vector& constraint,
                           const Settings& settings) {
  if (m.rows() != b.size())
    throw ValidationError("solve_on_complement: size mismatch");
  if (m.cols() != constraint.size())
    throw ValidationError("solve_on_complement: constraint size mismatch");
  Matrix aug(m.rows() + 1, m.cols());
  aug.topRows(m.rows()) = m;
  aug.bottomRows(1) = constraint.transpose();
  Vector rhs(b.size() + 1);
  rhs.head(b.size()) = b;
  rhs(b.size()) = 0.0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(aug);
  Vector x = cod.solve(rhs);
  double scale = std::max({1.0, b.cwiseAbs().maxCoeff()});
  double res = (m * x - b).cwiseAbs().maxCoeff() / scale;
  double cres = std::abs(constraint.dot(x)) /
                std::max(1.0, constraint.norm() * x.norm());
  if (res > settings.residual_tol || cres > settings.residual_tol) {
    std::ostringstream os;
    os << "solve_on_complement: inconsistent system (residual " << res
       << ", constraint residual " << cres << ")";
    throw IndeterminateError(os.str());
  }
  return x;
}

}  // namespace ytm
