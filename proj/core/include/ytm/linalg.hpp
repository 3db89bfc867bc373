#ifndef YTM_LINALG_HPP
#define YTM_LINALG_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ytm/errors.hpp"
#include "ytm/settings.hpp"

namespace ytm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numerically represented linear subspace of R^n: an orthonormal basis
// stored column-wise plus the residual tolerance used for membership tests.
class Subspace {
 public:
  Subspace(int ambient_dim, Matrix orthonormal_basis, double tol);

  // The zero subspace of R^n.
  static Subspace zero(int ambient_dim, double tol = 1e-9);
  // Orthonormalized span of the given columns (rank decided by SVD).
  static Subspace span(const Matrix& columns, double rank_rel_tol = 1e-9,
                       double tol = 1e-9);

  int ambient_dim() const { return n_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }
  double tol() const { return tol_; }

  bool contains(const Vector& v) const;
  bool contains(const Subspace& other) const;
  // Residual of v against the subspace, relative to ||v||.
  double residual(const Vector& v) const;
  // Orthogonal projection of v onto the subspace.
  Vector project(const Vector& v) const;
  // Orthonormal basis of the orthogonal complement.
  Matrix complement_basis() const;

 private:
  int n_;
  Matrix basis_;  // n x r, orthonormal columns
  double tol_;
};

Subspace sum(const Subspace& a, const Subspace& b);
Subspace sum(const std::vector<Subspace>& spaces);
Subspace intersect(const Subspace& a, const Subspace& b);
bool equal(const Subspace& a, const Subspace& b);

// Kernel of M with singular values <= tol_rel * sigma_max treated as zero.
Subspace kernel(const Matrix& m, double tol_rel = 1e-9);
int numeric_rank(const Matrix& m, double tol_rel = 1e-9);

// Perron-Frobenius data of a nonnegative irreducible matrix:
// A right = lambda right, left^T A = lambda left^T, <left, right> = 1.
struct PerronData {
  double lambda;
  Vector right;
  Vector left;
};

// Strongly connected components of the support graph of A (entries
// > support_tol are edges x' -> x for A(x, x') > 0).
std::vector<std::vector<int>> strongly_connected_components(
    const Matrix& a, double support_tol = 1e-12);
bool is_irreducible(const Matrix& a, double support_tol = 1e-12);

// Shifted power iteration with a dense eigensolver fallback.  Throws
// ReducibleError on reducible support, NumericalError-style
// IndeterminateError when no residual below settings.perron_tol is reached.
PerronData perron(const Matrix& a,
                  const Settings& settings = Settings::defaults());

// Minimum-norm x with M x = b and <constraint, x> = 0.  Throws
// IndeterminateError with the residual when the system is inconsistent.
Vector solve_on_complement(const Matrix& m, const Vector& b,
                           const Vector& constraint,
                           const Settings& settings = Settings::defaults());

}  // namespace ytm

#endif
