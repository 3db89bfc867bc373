#include "ytm/observables.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace ytm {

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_cap(int dY, int k, const Settings& settings, const char* who) {
  if (k < 1) throw ValidationError(std::string(who) + ": k must be >= 1");
  double rows = std::pow(static_cast<double>(dY), k);
  if (rows > static_cast<double>(settings.enumeration_cap)) {
    std::ostringstream os;
    os << who << ": dY^k = " << rows << " exceeds the enumeration cap "
       << settings.enumeration_cap << "; lower k or raise the cap";
    throw CapExceededError(os.str());
  }
}

// Depth-first walk over output words (y_k, ..., y_1) choosing the most
// significant symbol y_k first, so leaves appear in row order
// r = sum_j y_j * dY^(j-1).  The carried row is u^T W_{y_k} ... W_{y_j};
// each leaf receives u^T W_{y_k} ... W_{y_1}.
void walk_rows(const YTransitionModel& model, int k,
               const std::function<void(std::int64_t, const Eigen::RowVectorXd&)>& leaf) {
  std::vector<Eigen::RowVectorXd> prefix(static_cast<std::size_t>(k) + 1);
  prefix[0] = Eigen::RowVectorXd::Ones(model.d);
  std::int64_t counter = 0;
  std::function<void(int)> rec = [&](int depth) {
    if (depth == k) {
      leaf(counter++, prefix[static_cast<std::size_t>(k)]);
      return;
    }
    for (int y = 0; y < model.dY; ++y) {
      prefix[static_cast<std::size_t>(depth) + 1] =
          prefix[static_cast<std::size_t>(depth)] * model.W[y];
      rec(depth + 1);
    }
  };
  rec(0);
}

}  // namespace

Matrix pk_map(const YTransitionModel& model, int k, const Settings& settings) {
  require_valid(model, settings);
  check_cap(model.dY, k, settings, "pk_map");
  Matrix out(ipow(model.dY, k), model.d);
  walk_rows(model, k, [&](std::int64_t r, const Eigen::RowVectorXd& row) {
    out.row(r) = row;
  });
  return out;
}

Vector exact_output_law(const YTransitionModel& model, const Vector& p, int k,
                        const Settings& settings) {
  require_valid(model, settings);
  require_distribution(p, settings);
  if (p.size() != model.d)
    throw ValidationError("exact_output_law: distribution has wrong length");
  check_cap(model.dY, k, settings, "exact_output_law");
  Vector law(ipow(model.dY, k));
  walk_rows(model, k, [&](std::int64_t r, const Eigen::RowVectorXd& row) {
    law(r) = row.dot(p);
  });
  return law;
}

ObservabilityProfile observability_profile(const YTransitionModel& model,
                                           const Settings& settings) {
  require_valid(model, settings);
  ObservabilityProfile prof;
  // Ker P^1 from the dY x d matrix of per-output column sums.
  Matrix p1(model.dY, model.d);
  for (int y = 0; y < model.dY; ++y)
    p1.row(y) = model.W[y].colwise().sum();
  prof.kernels.push_back(kernel(p1, settings.rank_rel_tol));
  // Refinement Ker P^(k+1) = { v : W_y v in Ker P^k for all y } avoids
  // materializing P^k; identical object, polynomial cost.
  while (true) {
    const Subspace& cur = prof.kernels.back();
    if (cur.dim() == 0) break;
    Matrix proj_out = Matrix::Identity(model.d, model.d) -
                      cur.basis() * cur.basis().transpose();
    Matrix stacked(model.d * model.dY, model.d);
    for (int y = 0; y < model.dY; ++y)
      stacked.middleRows(y * model.d, model.d) = proj_out * model.W[y];
    Subspace next = kernel(stacked, settings.rank_rel_tol);
    if (next.dim() == cur.dim()) break;
    prof.kernels.push_back(next);
  }
  prof.k_W = static_cast<int>(prof.kernels.size());
  prof.d_W = model.d - prof.kernels.back().dim();
  return prof;
}

ReachabilityProfile reachability_profile(const YTransitionModel& model,
                                         const Vector& p,
                                         const Settings& settings) {
  require_valid(model, settings);
  require_distribution(p, settings);
  if (p.size() != model.d)
    throw ValidationError("reachability_profile: distribution has wrong length");
  auto obs = observability_profile(model, settings);
  const Subspace& ker = obs.terminal_kernel();
  ReachabilityProfile prof;
  prof.quotient_basis = ker.dim() == 0 ? Matrix(Matrix::Identity(model.d, model.d))
                                       : ker.complement_basis();
  const Matrix& q = prof.quotient_basis;
  const int qdim = static_cast<int>(q.cols());

  std::vector<Matrix> actions;
  actions.reserve(static_cast<std::size_t>(model.dY));
  for (int y = 0; y < model.dY; ++y)
    actions.push_back(q.transpose() * model.W[y] * q);

  auto grow = [&](const Subspace& s) {
    Matrix cat(qdim, s.dim() * (model.dY + 1));
    cat.leftCols(s.dim()) = s.basis();
    for (int y = 0; y < model.dY; ++y)
      cat.middleCols((y + 1) * s.dim(), s.dim()) =
          actions[static_cast<std::size_t>(y)] * s.basis();
    return Subspace::span(cat, settings.rank_rel_tol);
  };

  Subspace cur = Subspace::span(q.transpose() * p, settings.rank_rel_tol);
  if (cur.dim() == 0)
    throw IndeterminateError(
        "reachability_profile: [P] vanishes in the quotient");
  while (true) {
    Subspace next = grow(cur);  // V^(j+1) from V^j
    if (next.dim() == cur.dim() && !prof.spaces.empty()) break;
    prof.spaces.push_back(next);
    if (next.dim() == cur.dim()) break;  // V^1 = V^0, chain stabilizes at 1
    cur = next;
  }
  prof.k_PW = static_cast<int>(prof.spaces.size());
  prof.d_PW = prof.spaces.back().dim();
  return prof;
}

Matrix quotient_action(const YTransitionModel& model, int y,
                       const Settings& settings) {
  require_valid(model, settings);
  if (y < 0 || y >= model.dY)
    throw ValidationError("quotient_action: output index out of range");
  auto obs = observability_profile(model, settings);
  const Subspace& ker = obs.terminal_kernel();
  if (ker.dim() == 0) return model.W[y];
  Matrix proj_out = Matrix::Identity(model.d, model.d) -
                    ker.basis() * ker.basis().transpose();
  double leak = (proj_out * model.W[y] * ker.basis()).cwiseAbs().maxCoeff();
  if (leak > settings.residual_tol) {
    std::ostringstream os;
    os << "quotient_action: W_y does not preserve the terminal kernel (leak "
       << leak << "); tolerance breakdown";
    throw InternalCheckError(os.str());
  }
  Matrix q = ker.complement_basis();
  return q.transpose() * model.W[y] * q;
}

GenericityFlags check_genericity(const YTransitionModel& model,
                                 const Vector& p, const Settings& settings) {
  GenericityFlags flags;
  auto obs = observability_profile(model, settings);
  auto reach = reachability_profile(model, p, settings);
  flags.E1 = obs.terminal_kernel().dim() == 0 &&
             reach.d_PW == static_cast<int>(reach.quotient_basis.cols());
  flags.E2 = full_support(model, settings);
  return flags;
}

}  // namespace ytm
