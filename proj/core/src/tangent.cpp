#include "ytm/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace ytm {

namespace {

int flat2(int x, int xp, int d) { return x * d + xp; }

Vector flatten2(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  Vector v(d * d);
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp) v(flat2(x, xp, d)) = a(x, xp);
  return v;
}

Matrix unflatten2(const Vector& v, int d) {
  Matrix a(d, d);
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp) a(x, xp) = v(flat2(x, xp, d));
  return a;
}

bool supported(const YTransitionModel& model, int y, int x, int xp,
               const Settings& settings) {
  return model.W[static_cast<std::size_t>(y)](x, xp) > settings.support_tol;
}

Subspace support_subspace(const YTransitionModel& model,
                          const Settings& settings) {
  const int n = model.dY * model.d * model.d;
  std::vector<int> idx;
  for (int y = 0; y < model.dY; ++y)
    for (int x = 0; x < model.d; ++x)
      for (int xp = 0; xp < model.d; ++xp)
        if (supported(model, y, x, xp, settings))
          idx.push_back(flat_index(y, x, xp, model.d));
  Matrix basis = Matrix::Zero(n, static_cast<int>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    basis(idx[j], static_cast<int>(j)) = 1.0;
  return Subspace(n, basis, settings.residual_tol);
}

Subspace clip_to_support(const YTransitionModel& model, const Subspace& s,
                         const Settings& settings) {
  if (full_support(model, settings)) return s;
  return intersect(s, support_subspace(model, settings));
}

// Domain basis { A : A^T 1 = 0 } as flattened d x d matrices.
Matrix domain_colsum_zero(int d, const Settings& settings) {
  Matrix constraints(d, d * d);
  constraints.setZero();
  for (int xp = 0; xp < d; ++xp)
    for (int x = 0; x < d; ++x) constraints(xp, flat2(x, xp, d)) = 1.0;
  return kernel(constraints, settings.rank_rel_tol).basis();
}

Matrix commutator_image_columns(const YTransitionModel& model,
                                const Matrix& domain_basis) {
  const int n = model.dY * model.d * model.d;
  Matrix cols(n, domain_basis.cols());
  for (int j = 0; j < domain_basis.cols(); ++j) {
    Matrix a = unflatten2(domain_basis.col(j), model.d);
    Generator img(static_cast<std::size_t>(model.dY));
    for (int y = 0; y < model.dY; ++y)
      img[static_cast<std::size_t>(y)] =
          model.W[static_cast<std::size_t>(y)] * a -
          a * model.W[static_cast<std::size_t>(y)];
    cols.col(j) = flatten(img);
  }
  return cols;
}

// Representatives in R^d of the reachable space plus the terminal kernel.
Matrix reach_plus_kernel(const YTransitionModel& model, const Vector& p,
                         const Settings& settings) {
  auto obs = observability_profile(model, settings);
  auto reach = reachability_profile(model, p, settings);
  Matrix reps = reach.quotient_basis * reach.terminal_space().basis();
  Matrix cat(model.d, reps.cols() + obs.terminal_kernel().dim());
  cat.leftCols(reps.cols()) = reps;
  cat.rightCols(obs.terminal_kernel().dim()) = obs.terminal_kernel().basis();
  return Subspace::span(cat, settings.rank_rel_tol).basis();
}

// m-representations of N_3 = N + N_2: (alpha_y(A) + c W_y) over traceless-sum
// A, per the quotient characterization, clipped to the support pattern.
Subspace n3_mrep_space(const YTransitionModel& model,
                       const Settings& settings) {
  const int d = model.d;
  // Domain { A : <1| A |1> = 0 }.
  Matrix constraint(1, d * d);
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp) constraint(0, flat2(x, xp, d)) = 1.0;
  Matrix dom = kernel(constraint, settings.rank_rel_tol).basis();
  Matrix cols(model.dY * d * d, dom.cols() + 1);
  cols.leftCols(dom.cols()) = commutator_image_columns(model, dom);
  Generator ws(static_cast<std::size_t>(model.dY));
  for (int y = 0; y < model.dY; ++y)
    ws[static_cast<std::size_t>(y)] = model.W[static_cast<std::size_t>(y)];
  cols.col(dom.cols()) = flatten(ws);
  return clip_to_support(model,
                         Subspace::span(cols, settings.rank_rel_tol), settings);
}

}  // namespace

Subspace l1_space(const YTransitionModel& model, const Settings& settings) {
  require_valid(model, settings);
  const int d = model.d, dY = model.dY, n = dY * d * d;
  std::vector<Eigen::RowVectorXd> rows;
  // Summed column totals vanish: one constraint per x'.
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int y = 0; y < dY; ++y)
      for (int x = 0; x < d; ++x) r(flat_index(y, x, xp, d)) = 1.0;
    rows.push_back(r);
  }
  // Coordinates off the support vanish.
  for (int y = 0; y < dY; ++y)
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp)
        if (!supported(model, y, x, xp, settings)) {
          Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
          r(flat_index(y, x, xp, d)) = 1.0;
          rows.push_back(r);
        }
  Matrix constraints(static_cast<int>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    constraints.row(static_cast<int>(i)) = rows[i];
  return kernel(constraints, settings.rank_rel_tol);
}

Subspace l2_space(const YTransitionModel& model, const Settings& settings) {
  require_valid(model, settings);
  Matrix dom = domain_colsum_zero(model.d, settings);
  return Subspace::span(commutator_image_columns(model, dom),
                        settings.rank_rel_tol);
}

Subspace l2_space_relaxed(const YTransitionModel& model,
                          const Settings& settings) {
  require_valid(model, settings);
  const int d = model.d;
  // Domain { (A, c) : A^T 1 = c 1 }; c never enters the image.
  Matrix constraints = Matrix::Zero(d, d * d + 1);
  for (int xp = 0; xp < d; ++xp) {
    for (int x = 0; x < d; ++x) constraints(xp, flat2(x, xp, d)) = 1.0;
    constraints(xp, d * d) = -1.0;
  }
  Matrix dom = kernel(constraints, settings.rank_rel_tol).basis();
  return Subspace::span(
      commutator_image_columns(model, dom.topRows(d * d)),
      settings.rank_rel_tol);
}

Subspace lP_space(const YTransitionModel& model, const Vector& p,
                  const Settings& settings) {
  require_valid(model, settings);
  require_distribution(p, settings);
  const int d = model.d, dY = model.dY, n = dY * d * d;
  auto obs = observability_profile(model, settings);
  const Subspace& ker = obs.terminal_kernel();
  Matrix reach = reach_plus_kernel(model, p, settings);
  Matrix comp = ker.dim() == 0 ? Matrix(Matrix::Identity(d, d))
                               : ker.complement_basis();

  std::vector<Eigen::RowVectorXd> rows;
  for (int xp = 0; xp < d; ++xp) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int y = 0; y < dY; ++y)
      for (int x = 0; x < d; ++x) r(flat_index(y, x, xp, d)) = 1.0;
    rows.push_back(r);
  }
  for (int y = 0; y < dY; ++y)
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp)
        if (!supported(model, y, x, xp, settings)) {
          Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
          r(flat_index(y, x, xp, d)) = 1.0;
          rows.push_back(r);
        }
  // For every y, reachable vector m and complement direction i:
  // sum_{x,xp} comp(x,i) m(xp) B_y(x,xp) = 0.
  for (int y = 0; y < dY; ++y)
    for (int m = 0; m < reach.cols(); ++m)
      for (int i = 0; i < comp.cols(); ++i) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
        for (int x = 0; x < d; ++x)
          for (int xp = 0; xp < d; ++xp)
            r(flat_index(y, x, xp, d)) = comp(x, i) * reach(xp, m);
        rows.push_back(r);
      }
  Matrix constraints(static_cast<int>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    constraints.row(static_cast<int>(i)) = rows[i];
  return kernel(constraints, settings.rank_rel_tol);
}

Subspace l2P_space(const YTransitionModel& model, const Vector& p,
                   const Settings& settings) {
  require_valid(model, settings);
  require_distribution(p, settings);
  const int d = model.d;
  Matrix constraints = Matrix::Zero(2 * d, d * d);
  for (int xp = 0; xp < d; ++xp)
    for (int x = 0; x < d; ++x) constraints(xp, flat2(x, xp, d)) = 1.0;
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp)
      constraints(d + x, flat2(x, xp, d)) = p(xp);
  Matrix dom = kernel(constraints, settings.rank_rel_tol).basis();
  return Subspace::span(commutator_image_columns(model, dom),
                        settings.rank_rel_tol);
}

TangentReport tangent_report(const YTransitionModel& model,
                             const std::optional<Vector>& p,
                             const Settings& settings) {
  require_valid(model, settings);
  Vector p_stat = stationary(model, settings);
  Vector p_used = p.value_or(p_stat);
  require_distribution(p_used, settings);

  TangentReport rep;
  rep.d = model.d;
  rep.dY = model.dY;
  rep.stationary_initial = !p.has_value() ||
                           (p_used - p_stat).cwiseAbs().maxCoeff() <=
                               settings.residual_tol;
  Subspace l1 = l1_space(model, settings);
  Subspace l2 = clip_to_support(model, l2_space(model, settings), settings);
  Subspace lp = lP_space(model, p_used, settings);
  Subspace l2p =
      clip_to_support(model, l2P_space(model, p_used, settings), settings);
  Subspace lp_stat = rep.stationary_initial
                         ? lp
                         : lP_space(model, p_stat, settings);

  rep.dim_l1 = l1.dim();
  rep.dim_l2 = l2.dim();
  rep.dim_lP = lp.dim();
  rep.dim_l2P = l2p.dim();

  // The asymptotic-sum rank decision, with its singular-value bracket for
  // coincidence logging.
  Matrix asym_cols(model.dY * model.d * model.d, l2.dim() + lp_stat.dim());
  asym_cols.leftCols(l2.dim()) = l2.basis();
  asym_cols.rightCols(lp_stat.dim()) = lp_stat.basis();
  if (asym_cols.cols() == 0) {
    rep.dim_sum_asymptotic = 0;
  } else {
    Eigen::JacobiSVD<Matrix> svd(asym_cols);
    const auto& sv = svd.singularValues();
    double smax = sv(0);
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > settings.rank_rel_tol * smax) ++r;
    rep.dim_sum_asymptotic = r;
    rep.sv_above_cut = r > 0 ? sv(r - 1) : 0.0;
    rep.sv_below_cut = r < sv.size() ? sv(r) : 0.0;
  }
  rep.dim_sum_fixed = sum(lp, l2p).dim();

  rep.local_dim_fixed = rep.dim_l1 - rep.dim_sum_fixed;
  rep.local_dim_asymptotic = rep.dim_l1 - rep.dim_sum_asymptotic;
  rep.generic_dim = model.d * model.d * (model.dY - 1);
  rep.observable_count = model.dY - 1;
  rep.singular = rep.local_dim_asymptotic < rep.generic_dim;
  return rep;
}

namespace {

bool local_equiv_impl(const YTransitionModel& model, const Vector& p,
                      const GeneratorSet& gens, const Vector& a,
                      DerivativeMode mode, const Settings& settings) {
  if (a.size() != gens.size())
    throw ValidationError("direction length does not match the generator count");
  Vector p_used =
      mode == DerivativeMode::kStationary ? stationary(model, settings) : p;

  Generator dir(static_cast<std::size_t>(model.dY),
                Matrix::Zero(model.d, model.d));
  for (int j = 0; j < a.size(); ++j)
    for (int y = 0; y < model.dY; ++y)
      dir[static_cast<std::size_t>(y)] +=
          a(j) *
          gens.gens[static_cast<std::size_t>(j)][static_cast<std::size_t>(y)];
  Generator proj = g1_project(model, dir, settings);
  Vector m = flatten(m_rep(model, proj));
  double mnorm = m.norm();
  if (mnorm <= settings.rank_rel_tol) return true;  // zero direction

  Subspace target =
      mode == DerivativeMode::kStationary
          ? sum(clip_to_support(model, l2_space(model, settings), settings),
                lP_space(model, p_used, settings))
          : sum(lP_space(model, p_used, settings),
                clip_to_support(model, l2P_space(model, p_used, settings),
                                settings));
  double sub_res = target.residual(m);
  bool member = sub_res <= settings.deriv_zero_tol;

  auto obs = observability_profile(model, settings);
  auto reach = reachability_profile(model, p_used, settings);
  int k = obs.k_W + reach.k_PW + 1;
  Vector an = a / mnorm;  // unit m-representation scale
  Vector deriv = law_derivative(model, gens, an, p_used, k, mode, settings);
  double dnorm = deriv.cwiseAbs().maxCoeff();

  if (dnorm > settings.deriv_zero_tol && dnorm <= settings.deriv_nonzero_tol) {
    std::ostringstream os;
    os << "local equivalence: derivative norm " << dnorm
       << " falls in the indeterminate band (" << settings.deriv_zero_tol
       << ", " << settings.deriv_nonzero_tol << "]";
    throw IndeterminateError(os.str());
  }
  bool vanishing = dnorm <= settings.deriv_zero_tol;
  if (member != vanishing) {
    std::ostringstream os;
    os << "local equivalence: subspace membership (residual " << sub_res
       << ") disagrees with the law derivative (norm " << dnorm
       << ") at window k = " << k;
    throw InternalCheckError(os.str());
  }
  return member;
}

}  // namespace

bool local_equiv_fixed(const YTransitionModel& model, const Vector& p,
                       const GeneratorSet& gens, const Vector& a,
                       const Settings& settings) {
  require_distribution(p, settings);
  return local_equiv_impl(model, p, gens, a, DerivativeMode::kFixedP, settings);
}

bool local_equiv_asymptotic(const YTransitionModel& model,
                            const GeneratorSet& gens, const Vector& a,
                            const Settings& settings) {
  return local_equiv_impl(model, Vector(), gens, a,
                          DerivativeMode::kStationary, settings);
}

bool check_E3(const YTransitionModel& model, int y0, int y1,
              const Settings& settings) {
  require_valid(model, settings);
  if (y0 == y1 || y0 < 0 || y1 < 0 || y0 >= model.dY || y1 >= model.dY)
    throw ValidationError("check_E3: need two distinct output indices");
  const int d = model.d;
  // (1) alpha_y0 injective on { A^T 1 = 0 }.
  Matrix dom1 = domain_colsum_zero(d, settings);
  Matrix img1(d * d, dom1.cols());
  const Matrix& w0 = model.W[static_cast<std::size_t>(y0)];
  const Matrix& w1 = model.W[static_cast<std::size_t>(y1)];
  for (int j = 0; j < dom1.cols(); ++j) {
    Matrix a = unflatten2(dom1.col(j), d);
    img1.col(j) = flatten2(w0 * a - a * w0);
  }
  if (numeric_rank(img1, settings.rank_rel_tol) != dom1.cols()) return false;
  // (2) A -> (alpha_y0(A), alpha_y1(A)) injective on { <1|A|1> = 0 }.
  Matrix constraint(1, d * d);
  constraint.setOnes();
  Matrix dom2 = kernel(constraint, settings.rank_rel_tol).basis();
  Matrix img2(2 * d * d, dom2.cols());
  for (int j = 0; j < dom2.cols(); ++j) {
    Matrix a = unflatten2(dom2.col(j), d);
    img2.col(j).head(d * d) = flatten2(w0 * a - a * w0);
    img2.col(j).tail(d * d) = flatten2(w1 * a - a * w1);
  }
  return numeric_rank(img2, settings.rank_rel_tol) == dom2.cols();
}

bool check_E3_sufficient(const YTransitionModel& model, int y0, int y1,
                         const Settings& settings) {
  require_valid(model, settings);
  if (y0 == y1 || y0 < 0 || y1 < 0 || y0 >= model.dY || y1 >= model.dY)
    throw ValidationError("check_E3_sufficient: need two distinct outputs");
  const int d = model.d;
  using CMatrix = Eigen::MatrixXcd;
  using CVector = Eigen::VectorXcd;

  auto eigensystem = [&](const Matrix& w, CMatrix& vecs, CVector& vals) {
    Eigen::EigenSolver<Matrix> es(w.transpose());
    if (es.info() != Eigen::Success) return false;
    vals = es.eigenvalues();
    vecs = es.eigenvectors();
    double scale = vals.cwiseAbs().maxCoeff();
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        if (std::abs(vals(i) - vals(j)) <=
            settings.eig_gap_tol * std::max(scale, 1e-300))
          return false;
    return true;
  };

  CMatrix f0, f1;
  CVector e0, e1;
  if (!eigensystem(model.W[static_cast<std::size_t>(y0)], f0, e0)) return false;
  if (!eigensystem(model.W[static_cast<std::size_t>(y1)], f1, e1)) return false;

  // 1 must have full support in the first eigenbasis.
  CVector coeff = f0.colPivHouseholderQr().solve(
      CVector(Vector::Ones(d).cast<std::complex<double>>()));
  double cmax = coeff.cwiseAbs().maxCoeff();
  for (int i = 0; i < d; ++i)
    if (std::abs(coeff(i)) <= 1e-8 * std::max(cmax, 1e-300)) return false;

  // No common invariant subspace spanned by eigenvector subsets of equal
  // size (pairwise distinctness alone is not enough beyond d = 2).
  for (int k = 1; k < d; ++k) {
    std::vector<std::vector<int>> subsets;
    std::vector<int> cur;
    std::function<void(int)> gen = [&](int start) {
      if (static_cast<int>(cur.size()) == k) {
        subsets.push_back(cur);
        return;
      }
      for (int i = start; i < d; ++i) {
        cur.push_back(i);
        gen(i + 1);
        cur.pop_back();
      }
    };
    gen(0);
    for (const auto& s0 : subsets)
      for (const auto& s1 : subsets) {
        CMatrix cat(d, 2 * k);
        for (int j = 0; j < k; ++j) {
          cat.col(j) = f0.col(s0[static_cast<std::size_t>(j)]);
          cat.col(k + j) = f1.col(s1[static_cast<std::size_t>(j)]);
        }
        Eigen::JacobiSVD<CMatrix> svd(cat);
        const auto& sv = svd.singularValues();
        int r = 0;
        for (int i = 0; i < sv.size(); ++i)
          if (sv(i) > settings.rank_rel_tol * sv(0)) ++r;
        if (r <= k) return false;  // shared invariant subspace
      }
  }
  return true;
}

namespace {

// Greedy rank-revealing selector: candidates are accepted when their
// residual against the span of the avoid set plus earlier picks is large
// enough.  The span is kept orthonormal incrementally.
struct Pivoter {
  Matrix q;  // n x r orthonormal
  double tol;
  Pivoter(int n, const Matrix& avoid_cols, double tol_rel)
      : q(Subspace::span(avoid_cols, tol_rel).basis()), tol(tol_rel) {
    if (q.rows() == 0) q = Matrix::Zero(n, 0);
  }
  bool try_add(const Vector& cand) {
    Vector r = cand;
    if (q.cols() > 0) r -= q * (q.transpose() * cand);
    // Twice-is-enough reorthogonalization.
    if (q.cols() > 0) r -= q * (q.transpose() * r);
    double cn = cand.norm();
    if (cn == 0.0 || r.norm() <= 1e-6 * cn) return false;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = r / r.norm();
    return true;
  }
};

// Greedy rank-revealing completion against an avoid space, walking the
// candidate list in order.
std::vector<Matrix> complete_block(const Matrix& avoid_cols,
                                   const std::vector<Matrix>& candidates,
                                   int needed, const Settings& settings,
                                   const char* what) {
  Pivoter piv(static_cast<int>(avoid_cols.rows()), avoid_cols,
              settings.rank_rel_tol);
  std::vector<Matrix> chosen;
  for (const auto& cand : candidates) {
    if (static_cast<int>(chosen.size()) == needed) break;
    if (piv.try_add(flatten2(cand))) chosen.push_back(cand);
  }
  if (static_cast<int>(chosen.size()) != needed) {
    std::ostringstream os;
    os << "build_generators: could not complete the " << what
       << " block (found " << chosen.size() << " of " << needed << ")";
    throw IndeterminateError(os.str());
  }
  return chosen;
}

std::vector<Matrix> coordinate_candidates(int d) {
  std::vector<Matrix> out;
  for (int x = 0; x < d; ++x)
    for (int xp = 0; xp < d; ++xp) {
      Matrix m = Matrix::Zero(d, d);
      m(x, xp) = 1.0;
      out.push_back(m);
    }
  return out;
}

Generator embed_block(const YTransitionModel& model, int y,
                      const Matrix& mrep_block) {
  // e-representation: divide the m-rep block by W_y entrywise.
  Generator g(static_cast<std::size_t>(model.dY),
              Matrix::Zero(model.d, model.d));
  g[static_cast<std::size_t>(y)] =
      mrep_block.cwiseQuotient(model.W[static_cast<std::size_t>(y)]);
  return g;
}

}  // namespace

GeneratorSet build_generators(const YTransitionModel& model, const Vector& p,
                              bool observable_first, const Settings& settings) {
  require_valid(model, settings);
  require_distribution(p, settings);
  auto flags = check_genericity(model, p, settings);
  if (!flags.E1)
    throw ValidationError(
        "build_generators: E1 fails (nonzero terminal kernel or deficient "
        "reachable space); use the two-state singular constructions or "
        "supply generators manually");
  if (!flags.E2)
    throw ValidationError(
        "build_generators: E2 fails (some W_y entry vanishes); use the "
        "two-state singular constructions or supply generators manually");
  int y0 = -1, y1 = -1;
  for (int i = 0; i < model.dY && y0 < 0; ++i)
    for (int j = 0; j < model.dY && y0 < 0; ++j)
      if (i != j && check_E3(model, i, j, settings)) {
        y0 = i;
        y1 = j;
      }
  if (y0 < 0)
    throw ValidationError(
        "build_generators: E3 fails (no output pair with injective "
        "commutator maps); use the two-state singular constructions or "
        "supply generators manually");

  const int d = model.d, dY = model.dY;
  const int l = d * d * (dY - 1);
  Vector p_stat = stationary(model, settings);
  const Matrix& w0 = model.W[static_cast<std::size_t>(y0)];
  const Matrix& w1 = model.W[static_cast<std::size_t>(y1)];

  // Avoid space for the y0 block: alpha_y0 over { A^T 1 = 0 }.
  Matrix dom1 = domain_colsum_zero(d, settings);
  Matrix avoid0(d * d, dom1.cols());
  for (int j = 0; j < dom1.cols(); ++j) {
    Matrix a = unflatten2(dom1.col(j), d);
    avoid0.col(j) = flatten2(w0 * a - a * w0);
  }

  // Avoid space for the y1 block: alpha_y1 over the kernel of alpha_y0 in
  // { <1|A|1> = 0 }, plus the constant direction c W_y1.
  Matrix tr_constraint(1, d * d);
  tr_constraint.setOnes();
  Matrix dom2 = kernel(tr_constraint, settings.rank_rel_tol).basis();
  Matrix a0_on_dom2(d * d, dom2.cols());
  for (int j = 0; j < dom2.cols(); ++j) {
    Matrix a = unflatten2(dom2.col(j), d);
    a0_on_dom2.col(j) = flatten2(w0 * a - a * w0);
  }
  Matrix ker0 = kernel(a0_on_dom2, settings.rank_rel_tol).basis();
  Matrix ker0_lift = dom2 * ker0;
  Matrix avoid1(d * d, ker0_lift.cols() + 1);
  for (int j = 0; j < ker0_lift.cols(); ++j) {
    Matrix a = unflatten2(ker0_lift.col(j), d);
    avoid1.col(j) = flatten2(w1 * a - a * w1);
  }
  avoid1.col(ker0_lift.cols()) = flatten2(w1);

  std::vector<Matrix> structured0, structured1;
  if (d == 2) {
    structured0.push_back((Matrix(2, 2) << 1, 1, -1, -1).finished());
    structured0.push_back((Matrix(2, 2) << 1, 1, 1, 1).finished());
    structured1.push_back((Matrix(2, 2) << 1, 0, -1, 0).finished());
    structured1.push_back((Matrix(2, 2) << 0, 1, 0, -1).finished());
  }
  auto coords = coordinate_candidates(d);
  std::vector<Matrix> cands0 = structured0, cands1 = structured1;
  cands0.insert(cands0.end(), coords.begin(), coords.end());
  cands1.insert(cands1.end(), coords.begin(), coords.end());

  auto block0 = complete_block(avoid0, cands0, d, settings, "y0");
  auto block1 = complete_block(avoid1, cands1, d * d - d, settings, "y1");

  std::vector<Generator> gens;
  for (const auto& m : block0) gens.push_back(embed_block(model, y0, m));
  for (const auto& m : block1) gens.push_back(embed_block(model, y1, m));
  for (int y = 0; y < dY; ++y) {
    if (y == y0 || y == y1) continue;
    for (const auto& m : coords)
      gens.push_back(embed_block(
          model, y, m.cwiseProduct(model.W[static_cast<std::size_t>(y)])));
  }

  // Identified-to-zero directions of the asymptotic quotient.
  Subspace n3 = n3_mrep_space(model, settings);
  Subspace lp = lP_space(model, p_stat, settings);
  Subspace avoid_all = sum(n3, lp);
  const int n = dY * d * d;

  auto verify = [&](const std::vector<Generator>& set) {
    Matrix cat(n, avoid_all.dim() + static_cast<int>(set.size()));
    cat.leftCols(avoid_all.dim()) = avoid_all.basis();
    for (std::size_t j = 0; j < set.size(); ++j)
      cat.col(avoid_all.dim() + static_cast<int>(j)) =
          flatten(m_rep(model, set[j]));
    return numeric_rank(cat, settings.rank_rel_tol) ==
           avoid_all.dim() + static_cast<int>(set.size());
  };

  if (static_cast<int>(gens.size()) != l || !verify(gens))
    throw InternalCheckError(
        "build_generators: constructed set fails the zero-intersection "
        "check against the identified-to-zero directions");
  if (n - avoid_all.dim() != l)
    throw InternalCheckError(
        "build_generators: quotient dimension disagrees with the generic "
        "count; the model looks singular despite passing E1-E3");

  if (observable_first) {
    std::vector<Generator> reordered;
    Pivoter piv(n, avoid_all.basis(), settings.rank_rel_tol);
    bool ok = true;
    for (int j = 0; j < dY - 1 && ok; ++j) {
      Generator q(static_cast<std::size_t>(dY), Matrix::Zero(d, d));
      q[static_cast<std::size_t>(j)] = Matrix::Ones(d, d);
      if (piv.try_add(flatten(m_rep(model, q))))
        reordered.push_back(q);
      else
        ok = false;
    }
    if (ok) {
      for (const auto& g : gens) {
        if (static_cast<int>(reordered.size()) == l) break;
        if (piv.try_add(flatten(m_rep(model, g)))) reordered.push_back(g);
      }
      if (static_cast<int>(reordered.size()) == l && verify(reordered))
        gens = std::move(reordered);
    }
  }

  return make_generator_set(model, std::move(gens), settings);
}

GeneratorSet two_state_singular_generators(const YTransitionModel& model,
                                           const Settings& settings) {
  require_valid(model, settings);
  if (model.d != 2)
    throw ValidationError(
        "two_state_singular_generators: requires two hidden states");
  for (int y = 0; y < model.dY; ++y) {
    double c0 = model.W[static_cast<std::size_t>(y)].col(0).sum();
    double c1 = model.W[static_cast<std::size_t>(y)].col(1).sum();
    if (std::abs(c0 - c1) > settings.residual_tol) {
      std::ostringstream os;
      os << "two_state_singular_generators: output " << y
         << " has unequal column sums (" << c0 << " vs " << c1
         << "); the model is not in the all-output singular stratum";
      throw ValidationError(os.str());
    }
  }
  const int d = 2, dY = model.dY;
  Matrix e1 = Matrix::Ones(2, 2);
  Matrix e2 = (Matrix(2, 2) << 1, -1, 1, -1).finished();

  std::vector<Generator> gens;
  auto clip = [&](int y, const Matrix& block) {
    Matrix out = block;
    for (int x = 0; x < d; ++x)
      for (int xp = 0; xp < d; ++xp)
        if (model.W[static_cast<std::size_t>(y)](x, xp) <= settings.support_tol)
          out(x, xp) = 0.0;
    return out;
  };
  auto add_family = [&](const Matrix& pattern) {
    for (int j = 0; j < dY - 1; ++j) {
      // b^j = e_j - e_{dY-1}; for dY = 2 this is (1, -1).
      Generator g(static_cast<std::size_t>(dY), Matrix::Zero(d, d));
      g[static_cast<std::size_t>(j)] = clip(j, pattern);
      g[static_cast<std::size_t>(dY - 1)] = clip(dY - 1, -pattern);
      gens.push_back(g);
    }
  };
  add_family(e1);
  add_family(e2);

  // The in-stratum plus transversal set must span the asymptotic quotient.
  Vector p_stat = stationary(model, settings);
  Subspace n3 = n3_mrep_space(model, settings);
  Subspace lp = lP_space(model, p_stat, settings);
  Subspace avoid_all = sum(n3, lp);
  const int n = dY * d * d;
  Matrix cat(n, avoid_all.dim() + static_cast<int>(gens.size()));
  cat.leftCols(avoid_all.dim()) = avoid_all.basis();
  for (std::size_t j = 0; j < gens.size(); ++j)
    cat.col(avoid_all.dim() + static_cast<int>(j)) =
        flatten(m_rep(model, gens[j]));
  int quotient_dim = l1_space(model, settings).dim() -
                     sum(clip_to_support(model, l2_space(model, settings),
                                         settings),
                         lp)
                         .dim();
  if (numeric_rank(cat, settings.rank_rel_tol) !=
          avoid_all.dim() + static_cast<int>(gens.size()) ||
      static_cast<int>(gens.size()) != quotient_dim)
    throw InternalCheckError(
        "two_state_singular_generators: the stratum generators do not span "
        "the singular quotient");
  return make_generator_set(model, std::move(gens), settings);
}

}  // namespace ytm
