#include "ytm/indep.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ytm {

namespace {

int dim_bc(int d, int dY) { return d * d + d * dY; }
int idx_b(int x, int xp, int d) { return x * d + xp; }
int idx_c(int y, int xp, int d) { return d * d + y * d + xp; }

Vector stationary_of(const Matrix& w, const Settings& settings) {
  const int d = static_cast<int>(w.rows());
  if (d == 1) return Vector::Ones(1);
  auto sccs = strongly_connected_components(w, settings.support_tol);
  if (sccs.size() != 1)
    throw ReducibleError("independent model: hidden chain is reducible", sccs);
  Subspace k = kernel(Matrix(Matrix::Identity(d, d) - w), settings.rank_rel_tol);
  if (k.dim() != 1)
    throw IndeterminateError("independent model: fixed space not 1-dim");
  Vector p = k.basis().col(0);
  if (p.sum() < 0) p = -p;
  return p / p.sum();
}

Subspace support_subspace_bc(const IndepModel& m, const Settings& settings) {
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  std::vector<int> idx;
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp)
      if (m.W(x, xp) > settings.support_tol) idx.push_back(idx_b(x, xp, d));
  for (int y = 0; y < dY; ++y)
    for (int xp = 0; xp < d; ++xp)
      if (m.V(y, xp) > settings.support_tol) idx.push_back(idx_c(y, xp, d));
  Matrix basis = Matrix::Zero(dim_bc(d, dY), static_cast<int>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    basis(idx[j], static_cast<int>(j)) = 1.0;
  return Subspace(dim_bc(d, dY), basis, settings.residual_tol);
}

bool full_support(const IndepModel& m, const Settings& settings) {
  return m.W.minCoeff() > settings.support_tol &&
         m.V.minCoeff() > settings.support_tol;
}

void append_offsupport_rows(const IndepModel& m,
                            std::vector<Eigen::RowVectorXd>& rows,
                            const Settings& settings) {
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  const int n = dim_bc(d, dY);
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp)
      if (m.W(x, xp) <= settings.support_tol) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
        r(idx_b(x, xp, d)) = 1.0;
        rows.push_back(r);
      }
  for (int y = 0; y < dY; ++y)
    for (int xp = 0; xp < d; ++xp)
      if (m.V(y, xp) <= settings.support_tol) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
        r(idx_c(y, xp, d)) = 1.0;
        rows.push_back(r);
      }
}

Matrix rows_to_matrix(const std::vector<Eigen::RowVectorXd>& rows, int n) {
  Matrix c(static_cast<int>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    c.row(static_cast<int>(i)) = rows[i];
  return c;
}

}  // namespace

Vector flatten_bc(const IndepTangentPair& t) {
  const int d = static_cast<int>(t.B.rows());
  const int dY = static_cast<int>(t.C.rows());
  Vector v(dim_bc(d, dY));
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp) v(idx_b(x, xp, d)) = t.B(x, xp);
  for (int y = 0; y < dY; ++y)
    for (int xp = 0; xp < d; ++xp) v(idx_c(y, xp, d)) = t.C(y, xp);
  return v;
}

IndepTangentPair unflatten_bc(const Vector& v, int d, int dY) {
  IndepTangentPair t{Matrix::Zero(d, d), Matrix::Zero(dY, d)};
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp) t.B(x, xp) = v(idx_b(x, xp, d));
  for (int y = 0; y < dY; ++y)
    for (int xp = 0; xp < d; ++xp) t.C(y, xp) = v(idx_c(y, xp, d));
  return t;
}

Generator star_map(const IndepModel& m, const IndepTangentPair& t,
                   const Settings& settings) {
  require_valid(m, settings);
  const int dY = static_cast<int>(m.V.rows());
  Generator out(static_cast<std::size_t>(dY));
  for (int y = 0; y < dY; ++y)
    out[static_cast<std::size_t>(y)] =
        t.B * m.V.row(y).asDiagonal() + m.W * t.C.row(y).asDiagonal();
  return out;
}

Subspace l1I_space(const IndepModel& m, const Settings& settings) {
  require_valid(m, settings);
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  const int n = dim_bc(d, dY);
  std::vector<Eigen::RowVectorXd> rows;
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int x = 0; x < d; ++x) r(idx_b(x, xp, d)) = 1.0;
    rows.push_back(r);
  }
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int y = 0; y < dY; ++y) r(idx_c(y, xp, d)) = 1.0;
    rows.push_back(r);
  }
  append_offsupport_rows(m, rows, settings);
  return kernel(rows_to_matrix(rows, n), settings.rank_rel_tol);
}

namespace {

// Joint kernel of the FET2 constraints on (A, C):
//   A^T 1 = 0,  W [D(V_y), A] = W D(C_y) for every y,
// optionally A p = 0; mapped through (A, C) -> ([W, A], C).
Subspace fet2_image(const IndepModel& m, const Vector* p,
                    const Settings& settings) {
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  const int nvar = d * d + d * dY;  // A then C
  std::vector<Eigen::RowVectorXd> rows;
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nvar);
    for (int x = 0; x < d; ++x) r(idx_b(x, xp, d)) = 1.0;
    rows.push_back(r);
  }
  for (int y = 0; y < dY; ++y)
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nvar);
        // sum_z W(x,z) (V(y,z) - V(y,xp)) A(z,xp) - W(x,xp) C(y,xp) = 0
        for (int z = 0; z < d; ++z)
          r(idx_b(z, xp, d)) += m.W(x, z) * (m.V(y, z) - m.V(y, xp));
        r(idx_c(y, xp, d)) -= m.W(x, xp);
        rows.push_back(r);
      }
  if (p) {
    for (int x = 0; x < d; ++x) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nvar);
      for (int xp = 0; xp < d; ++xp) r(idx_b(x, xp, d)) = (*p)(xp);
      rows.push_back(r);
    }
  }
  Matrix dom = kernel(rows_to_matrix(rows, nvar), settings.rank_rel_tol).basis();
  Matrix cols(dim_bc(d, dY), dom.cols());
  for (int j = 0; j < dom.cols(); ++j) {
    Matrix a = Matrix::Zero(d, d);
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp) a(x, xp) = dom(idx_b(x, xp, d), j);
    IndepTangentPair t{m.W * a - a * m.W, Matrix::Zero(dY, d)};
    for (int y = 0; y < dY; ++y)
      for (int xp = 0; xp < d; ++xp) t.C(y, xp) = dom(idx_c(y, xp, d), j);
    cols.col(j) = flatten_bc(t);
  }
  Subspace img = Subspace::span(cols, settings.rank_rel_tol);
  if (full_support(m, settings)) return img;
  return intersect(img, support_subspace_bc(m, settings));
}

bool w_invertible(const IndepModel& m, const Settings& settings) {
  Eigen::JacobiSVD<Matrix> svd(m.W);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > settings.rank_rel_tol * sv(0);
}

bool w_uniform(const IndepModel& m, const Settings& settings) {
  const double inv_d = 1.0 / static_cast<double>(m.W.rows());
  return (m.W.array() - inv_d).abs().maxCoeff() <= settings.residual_tol;
}

// Equal-emission blocks S(V)_x for the invertible-W specialization.
std::vector<int> emission_block_of(const IndepModel& m,
                                   const Settings& settings) {
  const int d = static_cast<int>(m.W.rows());
  std::vector<int> block(static_cast<std::size_t>(d), -1);
  int next = 0;
  for (int x = 0; x < d; ++x) {
    if (block[static_cast<std::size_t>(x)] >= 0) continue;
    block[static_cast<std::size_t>(x)] = next;
    for (int xp = x + 1; xp < d; ++xp)
      if ((m.V.col(x) - m.V.col(xp)).cwiseAbs().maxCoeff() <=
          settings.residual_tol)
        block[static_cast<std::size_t>(xp)] = next;
    ++next;
  }
  return block;
}

Subspace fet_invertible_image(const IndepModel& m, const Vector* p,
                              const Settings& settings) {
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  auto block = emission_block_of(m, settings);
  std::vector<Eigen::RowVectorXd> rows;
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(d * d);
    for (int x = 0; x < d; ++x) r(idx_b(x, xp, d)) = 1.0;
    rows.push_back(r);
  }
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp)
      if (block[static_cast<std::size_t>(x)] !=
          block[static_cast<std::size_t>(xp)]) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(d * d);
        r(idx_b(x, xp, d)) = 1.0;
        rows.push_back(r);
      }
  if (p) {
    for (int x = 0; x < d; ++x) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(d * d);
      for (int xp = 0; xp < d; ++xp) r(idx_b(x, xp, d)) = (*p)(xp);
      rows.push_back(r);
    }
  }
  Matrix dom = kernel(rows_to_matrix(rows, d * d), settings.rank_rel_tol).basis();
  Matrix cols(dim_bc(d, dY), dom.cols());
  for (int j = 0; j < dom.cols(); ++j) {
    Matrix a = Matrix::Zero(d, d);
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp) a(x, xp) = dom(idx_b(x, xp, d), j);
    IndepTangentPair t{m.W * a - a * m.W, Matrix::Zero(dY, d)};
    cols.col(j) = flatten_bc(t);
  }
  return Subspace::span(cols, settings.rank_rel_tol);
}

Subspace fete_uniform_image(const IndepModel& m, const Vector* p,
                            const Settings& settings) {
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  std::vector<Eigen::RowVectorXd> rows;
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(d * d);
    for (int x = 0; x < d; ++x) r(idx_b(x, xp, d)) = 1.0;
    rows.push_back(r);
  }
  if (p) {
    for (int x = 0; x < d; ++x) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(d * d);
      for (int xp = 0; xp < d; ++xp) r(idx_b(x, xp, d)) = (*p)(xp);
      rows.push_back(r);
    }
  }
  Matrix dom = kernel(rows_to_matrix(rows, d * d), settings.rank_rel_tol).basis();
  Matrix cols(dim_bc(d, dY), dom.cols());
  for (int j = 0; j < dom.cols(); ++j) {
    Matrix a = Matrix::Zero(d, d);
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp) a(x, xp) = dom(idx_b(x, xp, d), j);
    IndepTangentPair t{m.W * a - a * m.W, Matrix::Zero(dY, d)};
    for (int y = 0; y < dY; ++y)
      t.C.row(y) = (a.transpose() * m.V.row(y).transpose()).transpose();
    cols.col(j) = flatten_bc(t);
  }
  return Subspace::span(cols, settings.rank_rel_tol);
}

Subspace l2I_impl(const IndepModel& m, const Vector* p,
                  const Settings& settings) {
  Subspace general = fet2_image(m, p, settings);
  if (w_invertible(m, settings)) {
    Subspace special = fet_invertible_image(m, p, settings);
    if (!equal(general, special))
      throw InternalCheckError(
          "independent tangent space: invertible-W specialization disagrees "
          "with the general computation");
  } else if (w_uniform(m, settings)) {
    Subspace special = fete_uniform_image(m, p, settings);
    if (!equal(general, special))
      throw InternalCheckError(
          "independent tangent space: uniform-W specialization disagrees "
          "with the general computation");
  }
  return general;
}

}  // namespace

Subspace l2I_space(const IndepModel& m, const Settings& settings) {
  require_valid(m, settings);
  return l2I_impl(m, nullptr, settings);
}

Subspace l2PI_space(const IndepModel& m, const Vector& p,
                    const Settings& settings) {
  require_valid(m, settings);
  require_distribution(p, settings);
  return l2I_impl(m, &p, settings);
}

Subspace lPI_space(const IndepModel& m, const Vector& p,
                   const Settings& settings) {
  require_valid(m, settings);
  require_distribution(p, settings);
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  const int n = dim_bc(d, dY);
  YTransitionModel embedded = from_independent(m, settings);
  auto obs = observability_profile(embedded, settings);
  auto reach = reachability_profile(embedded, p, settings);
  const Subspace& ker = obs.terminal_kernel();
  Matrix reps = reach.quotient_basis * reach.terminal_space().basis();
  Matrix span_cat(d, reps.cols() + ker.dim());
  span_cat.leftCols(reps.cols()) = reps;
  span_cat.rightCols(ker.dim()) = ker.basis();
  Matrix reach_basis = Subspace::span(span_cat, settings.rank_rel_tol).basis();
  Matrix comp = ker.dim() == 0 ? Matrix(Matrix::Identity(d, d))
                               : ker.complement_basis();

  std::vector<Eigen::RowVectorXd> rows;
  // (B, C) in l1I.
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int x = 0; x < d; ++x) r(idx_b(x, xp, d)) = 1.0;
    rows.push_back(r);
  }
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int y = 0; y < dY; ++y) r(idx_c(y, xp, d)) = 1.0;
    rows.push_back(r);
  }
  append_offsupport_rows(m, rows, settings);
  // (B D(V_y) + W D(C_y)) (reach + ker) inside ker, for every y.
  for (int y = 0; y < dY; ++y)
    for (int mcol = 0; mcol < reach_basis.cols(); ++mcol)
      for (int i = 0; i < comp.cols(); ++i) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
        for (int x = 0; x < d; ++x)
          for (int xp = 0; xp < d; ++xp) {
            double w = comp(x, i) * reach_basis(xp, mcol);
            r(idx_b(x, xp, d)) += w * m.V(y, xp);
            r(idx_c(y, xp, d)) += comp(x, i) * m.W(x, xp) * reach_basis(xp, mcol);
          }
        rows.push_back(r);
      }
  return kernel(rows_to_matrix(rows, n), settings.rank_rel_tol);
}

DecomposeResult decompose(const YTransitionModel& model,
                          const Settings& settings) {
  require_valid(model, settings);
  DecomposeResult result;
  const int d = model.d, dY = model.dY;
  Matrix bar = model.bar();
  {
    Eigen::JacobiSVD<Matrix> svd(bar);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= settings.rank_rel_tol * sv(0))
      throw ValidationError(
          "decompose: |W| is numerically singular; the factorization test "
          "requires an invertible hidden transition matrix");
  }
  if (dY == 1) {
    result.diag.simple_real_spectra = true;
    result.diag.common_eigenvectors = true;
    result.diag.nonnegative_conjugate = true;
    IndepModel m;
    m.W = bar;
    m.V = Matrix::Ones(1, d);
    result.factors = m;
    result.transform = Matrix::Identity(d, d);
    return result;
  }

  Eigen::PartialPivLU<Matrix> lu(bar);
  std::vector<Matrix> u(static_cast<std::size_t>(dY));
  for (int y = 0; y < dY; ++y)
    u[static_cast<std::size_t>(y)] = lu.solve(model.W[static_cast<std::size_t>(y)]);

  // G2-1: simple, real, nonnegative spectra.
  std::vector<Eigen::VectorXcd> spectra(static_cast<std::size_t>(dY));
  int best_y = -1;
  double best_gap = -1.0;
  std::ostringstream detail;
  bool g21 = true;
  for (int y = 0; y < dY; ++y) {
    Eigen::EigenSolver<Matrix> es(u[static_cast<std::size_t>(y)]);
    if (es.info() != Eigen::Success)
      throw IndeterminateError("decompose: eigensolver failed");
    spectra[static_cast<std::size_t>(y)] = es.eigenvalues();
    const auto& ev = spectra[static_cast<std::size_t>(y)];
    double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        gap = std::min(gap, std::abs(ev(i) - ev(j)) / scale);
    if (d == 1) gap = 1.0;
    for (int i = 0; i < d; ++i) {
      if (std::abs(ev(i).imag()) > settings.imag_tol) {
        g21 = false;
        detail << "U_" << y << " has a complex eigenvalue pair; ";
      }
      if (ev(i).real() < -settings.imag_tol) {
        g21 = false;
        detail << "U_" << y << " has a negative eigenvalue; ";
      }
    }
    if (gap <= settings.eig_gap_hard) {
      g21 = false;
      detail << "U_" << y << " has a multiple eigenvalue (gap " << gap
             << "); ";
    } else if (gap <= settings.eig_gap_tol) {
      result.diag.indeterminate = true;
      detail << "U_" << y << " eigenvalue gap " << gap
             << " falls in the indeterminate band; ";
    }
    if (gap > best_gap) {
      best_gap = gap;
      best_y = y;
    }
  }
  result.diag.simple_real_spectra = g21;
  if (!g21 || result.diag.indeterminate) {
    result.diag.detail = detail.str();
    return result;
  }

  // G2-2: the left eigenvectors of the best-conditioned U_y must
  // diagonalize all the others.
  Eigen::EigenSolver<Matrix> es(
      Matrix(u[static_cast<std::size_t>(best_y)].transpose()));
  if (es.info() != Eigen::Success)
    throw IndeterminateError("decompose: eigensolver failed");
  Matrix tbase(d, d);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    if (v.imag().cwiseAbs().maxCoeff() >
        settings.imag_tol * std::max(1.0, v.real().cwiseAbs().maxCoeff())) {
      result.diag.detail = "left eigenvectors are not real";
      return result;
    }
    tbase.row(i) = v.real().transpose();
  }
  bool g22 = true;
  Matrix tbase_inv = tbase.fullPivLu().inverse();
  Matrix vmat(dY, d);
  for (int y = 0; y < dY && g22; ++y) {
    Matrix diag = tbase * u[static_cast<std::size_t>(y)] * tbase_inv;
    Matrix off = diag;
    for (int i = 0; i < d; ++i) off(i, i) = 0.0;
    if (off.cwiseAbs().maxCoeff() >
        settings.codiag_tol * std::max(1.0, diag.cwiseAbs().maxCoeff())) {
      g22 = false;
      detail << "U_" << y << " is not diagonal in the common eigenbasis; ";
      break;
    }
    for (int i = 0; i < d; ++i) vmat(y, i) = std::max(0.0, diag(i, i));
  }
  if (g22) {
    // Scale the rows so that their sum is the all-ones functional; this is
    // what makes the conjugated transition matrix stochastic, and it fails
    // exactly when 1 lacks full support in the eigenbasis.
    Vector c = tbase.transpose().fullPivLu().solve(Vector::Ones(d));
    double cmax = c.cwiseAbs().maxCoeff();
    for (int i = 0; i < d; ++i)
      if (std::abs(c(i)) <= 1e-10 * std::max(cmax, 1e-300)) {
        g22 = false;
        detail << "the all-ones functional lacks support on eigenvector " << i
               << "; ";
        break;
      }
    if (g22) tbase = c.asDiagonal() * tbase;
  }
  result.diag.common_eigenvectors = g22;
  if (!g22) {
    result.diag.detail = detail.str();
    return result;
  }

  // G2-3: the conjugated transition matrix must be entrywise nonnegative.
  Matrix t = tbase;
  Matrix w_rec = t * bar * t.fullPivLu().inverse();
  double min_entry = w_rec.minCoeff();
  if (min_entry < -1e-9) {
    result.diag.nonnegative_conjugate = false;
    detail << "conjugated transition matrix has entry " << min_entry << "; ";
    result.diag.detail = detail.str();
    return result;
  }
  result.diag.nonnegative_conjugate = true;

  IndepModel m;
  m.W = w_rec.cwiseMax(0.0);
  for (int xp = 0; xp < d; ++xp) m.W.col(xp) /= m.W.col(xp).sum();
  m.V = vmat;
  for (int xp = 0; xp < d; ++xp) m.V.col(xp) /= m.V.col(xp).sum();
  result.factors = m;
  result.transform = t;
  result.diag.detail = detail.str();

  // The recovered factors must reproduce the observed behavior.
  auto cert = are_equivalent_stationary(model, from_independent(m, settings),
                                        1e-6, settings);
  if (!cert.equivalent)
    throw InternalCheckError(
        "decompose: recovered factors are not equivalent to the input "
        "(tv distance " +
        std::to_string(cert.tv_distance) + ")");
  return result;
}

IdentifiabilityReport check_identifiability(const IndepModel& m,
                                            const Vector& p,
                                            const Settings& settings) {
  require_valid(m, settings);
  require_distribution(p, settings);
  const int d = static_cast<int>(m.W.rows());
  IdentifiabilityReport rep;
  rep.v_columns_independent =
      numeric_rank(m.V, settings.rank_rel_tol) == d;
  YTransitionModel embedded = from_independent(m, settings);
  auto obs = observability_profile(embedded, settings);
  rep.k_model = obs.k_W;
  rep.kernel_zero = obs.terminal_kernel().dim() == 0;
  if (rep.v_columns_independent && (!rep.kernel_zero || rep.k_model != 1))
    throw InternalCheckError(
        "check_identifiability: independent emission columns must force a "
        "zero kernel at window one");
  rep.p_full_support = p.minCoeff() > settings.support_tol;
  if (d <= 6) {
    // Every relabeled copy must compare equivalent; under independent
    // emission columns and full support these are the only equivalent
    // factorized pairs, so the sweep realizes the whole equivalence class.
    rep.permutation_sweep_done = true;
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      auto permuted_model = permuted(embedded, perm, settings);
      Vector permuted_p = permute_distribution(p, perm);
      auto cert = are_equivalent(embedded, p, permuted_model, permuted_p,
                                 settings.equiv_tol, settings);
      if (cert.equivalent) {
        rep.equivalent_permutations.push_back(perm);
      } else {
        throw InternalCheckError(
            "check_identifiability: a relabeled copy compared "
            "distinguishable (tv " +
            std::to_string(cert.tv_distance) + ")");
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return rep;
}

Generator embed(const IndepGenerator& g, int dY) {
  const int d = static_cast<int>(g.ga.rows());
  Generator out(static_cast<std::size_t>(dY), Matrix::Zero(d, d));
  for (int y = 0; y < dY; ++y)
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp)
        out[static_cast<std::size_t>(y)](x, xp) = g.ga(x, xp) + g.gb(y, xp);
  return out;
}

GeneratorSet embed(const IndepModel& m, const IndepGeneratorSet& gens,
                   const Settings& settings) {
  const int dY = static_cast<int>(m.V.rows());
  YTransitionModel base = from_independent(m, settings);
  std::vector<Generator> out;
  out.reserve(gens.gens.size());
  for (const auto& g : gens.gens) {
    Generator e = embed(g, dY);
    for (int y = 0; y < dY; ++y)
      for (int x = 0; x < base.d; ++x)
        for (int xp = 0; xp < base.d; ++xp)
          if (base.W[static_cast<std::size_t>(y)](x, xp) <=
              settings.support_tol)
            e[static_cast<std::size_t>(y)](x, xp) = 0.0;
    out.push_back(std::move(e));
  }
  return make_generator_set(base, std::move(out), settings);
}

IndepGeneratorSet ert_generators(const IndepModel& m,
                                 const Settings& settings) {
  require_valid(m, settings);
  if (!full_support(m, settings))
    throw ValidationError(
        "ert_generators: the delta-pattern basis requires full support of "
        "both factors");
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  IndepGeneratorSet out;
  auto blank = [&] {
    return IndepGenerator{Matrix::Zero(d, d), Matrix::Zero(dY, d)};
  };
  // Output tilts: g_b = delta_{y,j}, independent of the state.
  for (int j = 0; j < dY - 1; ++j) {
    auto g = blank();
    g.gb.row(j).setOnes();
    out.gens.push_back(g);
  }
  // Per-state output tilts for all but one state.
  for (int i = 0; i < d - 1; ++i)
    for (int j = 0; j < dY - 1; ++j) {
      auto g = blank();
      g.gb(j, i) = 1.0;
      out.gens.push_back(g);
    }
  // Hidden-transition tilts for all but one row.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d - 1; ++j) {
      auto g = blank();
      g.ga(j, i) = 1.0;
      out.gens.push_back(g);
    }
  const int l = d * (d + dY - 2);
  if (out.size() != l)
    throw InternalCheckError("ert_generators: unexpected generator count");

  // Linear independence modulo the null split (f(x) - f(x') + c, 0).
  const int n = dim_bc(d, dY);
  Matrix cat(n, l + d + 1);
  for (int j = 0; j < l; ++j) {
    IndepTangentPair t{out.gens[static_cast<std::size_t>(j)].ga,
                       out.gens[static_cast<std::size_t>(j)].gb};
    cat.col(j) = flatten_bc(t);
  }
  for (int i = 0; i < d; ++i) {
    Matrix ga = Matrix::Zero(d, d);
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp)
        ga(x, xp) = (x == i ? 1.0 : 0.0) - (xp == i ? 1.0 : 0.0);
    cat.col(l + i) = flatten_bc({ga, Matrix::Zero(dY, d)});
  }
  cat.col(l + d) = flatten_bc({Matrix::Ones(d, d), Matrix::Zero(dY, d)});
  int null_rank = numeric_rank(Matrix(cat.rightCols(d + 1)), settings.rank_rel_tol);
  if (numeric_rank(cat, settings.rank_rel_tol) != l + null_rank)
    throw InternalCheckError(
        "ert_generators: generators are dependent modulo the null split");
  return out;
}

IndepExpFamilyPoint indep_exp_family(const IndepModel& m,
                                     const IndepGeneratorSet& gens,
                                     const Vector& theta,
                                     const Settings& settings) {
  require_valid(m, settings);
  if (theta.size() != gens.size())
    throw ValidationError("theta length does not match the generator count");
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());

  // Gauge: shift each split so that sum_y V(y|x') g_b(y, x') = 0; the
  // embedded function is unchanged.
  std::vector<IndepGenerator> gauged;
  gauged.reserve(gens.gens.size());
  for (const auto& g : gens.gens) {
    IndepGenerator h = g;
    for (int xp = 0; xp < d; ++xp) {
      double fbar = 0.0;
      for (int y = 0; y < dY; ++y) fbar += m.V(y, xp) * g.gb(y, xp);
      for (int y = 0; y < dY; ++y) h.gb(y, xp) -= fbar;
      for (int x = 0; x < d; ++x) h.ga(x, xp) += fbar;
    }
    gauged.push_back(h);
  }

  Matrix sa = Matrix::Zero(d, d);    // sum_j theta_j g_a
  Matrix sb = Matrix::Zero(dY, d);   // sum_j theta_j g_b
  for (int j = 0; j < theta.size(); ++j) {
    sa += theta(j) * gauged[static_cast<std::size_t>(j)].ga;
    sb += theta(j) * gauged[static_cast<std::size_t>(j)].gb;
  }
  if (sa.cwiseAbs().maxCoeff() > settings.exp_guard ||
      sb.cwiseAbs().maxCoeff() > settings.exp_guard)
    throw IndeterminateError(
        "indep_exp_family: exponent exceeds the overflow guard; rescale");

  IndepExpFamilyPoint pt;
  pt.theta = theta;
  // V_theta: per-column exponential family of output distributions.
  Matrix vt(dY, d);
  Vector colnorm(d);
  for (int xp = 0; xp < d; ++xp) {
    double z = 0.0;
    for (int y = 0; y < dY; ++y) {
      vt(y, xp) = std::exp(sb(y, xp)) * m.V(y, xp);
      z += vt(y, xp);
    }
    vt.col(xp) /= z;
    colnorm(xp) = z;
  }
  // Tilted hidden matrix and its Perron normalization.
  Matrix wbar(d, d);
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp)
      wbar(x, xp) = std::exp(sa(x, xp)) * m.W(x, xp) * colnorm(xp);
  PerronData pd = perron(Matrix(wbar.transpose()), settings);
  pt.lambda = pd.lambda;
  pt.pbar = pd.right;
  pt.phi = std::log(pt.lambda);
  Matrix wt(d, d);
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp)
      wt(x, xp) = wbar(x, xp) * pt.pbar(x) / (pt.lambda * pt.pbar(xp));
  pt.model.W = wt;
  pt.model.V = vt;
  {
    Settings relaxed = settings;
    relaxed.stochastic_tol = std::max(settings.stochastic_tol, 1e-9);
    require_valid(pt.model, relaxed);
  }

  // Product identity against the general family at the embedded generators.
  YTransitionModel base = from_independent(m, settings);
  std::vector<Generator> embedded;
  embedded.reserve(gens.gens.size());
  for (const auto& g : gens.gens) embedded.push_back(embed(g, dY));
  GeneratorSet gset;
  gset.gens = std::move(embedded);
  pt.embedded = at(base, gset, theta, settings);
  double worst = 0.0;
  for (int y = 0; y < dY; ++y) {
    Matrix prod = wt * vt.row(y).asDiagonal();
    worst = std::max(
        worst, (prod - pt.embedded.model.W[static_cast<std::size_t>(y)])
                   .cwiseAbs()
                   .maxCoeff());
  }
  if (worst > 1e-10)
    throw InternalCheckError(
        "indep_exp_family: product identity against the general family "
        "fails (max deviation " +
        std::to_string(worst) + ")");
  return pt;
}

TwoStateReport two_hidden_state_report(const IndepModel& m, const Vector& p,
                                       const Settings& settings) {
  require_valid(m, settings);
  require_distribution(p, settings);
  const int d = static_cast<int>(m.W.rows());
  const int dY = static_cast<int>(m.V.rows());
  if (d != 2)
    throw ValidationError("two_hidden_state_report: requires two hidden states");

  TwoStateReport rep;
  rep.equal_emission_columns =
      (m.V.col(0) - m.V.col(1)).cwiseAbs().maxCoeff() <= settings.residual_tol;
  rep.w_invertible = w_invertible(m, settings);
  if (!rep.equal_emission_columns)
    rep.classification = rep.w_invertible ? TwoStateCase::kNonSingular
                                          : TwoStateCase::kNoninvertibleW;
  else
    rep.classification = rep.w_invertible
                             ? TwoStateCase::kEqualEmission
                             : TwoStateCase::kEqualEmissionUniformW;

  Vector p_stat = stationary_of(m.W, settings);
  rep.p_stationary =
      (p - p_stat).cwiseAbs().maxCoeff() <= settings.residual_tol;

  Subspace l1 = l1I_space(m, settings);
  Subspace l2 = l2I_space(m, settings);
  Subspace lp = lPI_space(m, p, settings);
  Subspace l2p = l2PI_space(m, p, settings);
  Subspace lp_stat = rep.p_stationary ? lp : lPI_space(m, p_stat, settings);
  rep.dim_l1I = l1.dim();
  rep.dim_l2I = l2.dim();
  rep.dim_lPI = lp.dim();
  rep.dim_l2PI = l2p.dim();
  rep.quotient_asymptotic = l1.dim() - sum(l2, lp_stat).dim();
  rep.quotient_fixed = l1.dim() - sum(lp, l2p).dim();

  if (rep.classification != TwoStateCase::kNonSingular) {
    // ert ordering: the first dY - 1 output tilts move inside the stratum;
    // the per-state output tilts (noninvertible case) or the transition
    // tilts (equal-emission cases) leave it.
    for (int j = 0; j < dY - 1; ++j) rep.in_stratum.push_back(j);
    if (rep.classification == TwoStateCase::kNoninvertibleW)
      for (int j = d * (dY - 1); j < d * (d + dY - 2); ++j)
        rep.transversal.push_back(j);
    else
      for (int j = dY - 1; j < d * (dY - 1); ++j) rep.transversal.push_back(j);
  }
  return rep;
}

}  // namespace ytm
