#ifndef YTM_EQUIVALENCE_HPP
#define YTM_EQUIVALENCE_HPP

#include <optional>

#include "ytm/observables.hpp"

namespace ytm {

// Result of an equivalence test between (A, pA) and (B, pB).  When the
// verdict is "equivalent" and both initial laws have full support, the
// certificate can carry an invertible intertwiner T between the reachable
// quotient subspaces, satisfying T [W_y] = [W'_y] T and T [pA] = [pB].
struct EquivalenceCertificate {
  bool equivalent = false;
  int k_used = 0;
  double tv_distance = 0.0;
  std::optional<Matrix> intertwiner;
  // Orthonormal bases (in the respective quotient coordinates) of the two
  // reachable spaces the intertwiner acts between.
  std::optional<Matrix> basis_a;
  std::optional<Matrix> basis_b;
};

// Compares output laws at the window max(k_W) + max(k_PW) + 1 in total
// variation.  Hidden state-space sizes may differ; output alphabets must
// match.
EquivalenceCertificate are_equivalent(
    const YTransitionModel& a, const Vector& pa, const YTransitionModel& b,
    const Vector& pb, double tol = 1e-9,
    const Settings& settings = Settings::defaults());

// Convenience form with both chains started from their stationary laws.
EquivalenceCertificate are_equivalent_stationary(
    const YTransitionModel& a, const YTransitionModel& b, double tol = 1e-9,
    const Settings& settings = Settings::defaults());

// Extracts the intertwiner for a pair already known to be equivalent.
// Requires full-support pa, pb and equal reachable dimensions.
Matrix intertwiner(const YTransitionModel& a, const Vector& pa,
                   const YTransitionModel& b, const Vector& pb,
                   Matrix* basis_a_out = nullptr, Matrix* basis_b_out = nullptr,
                   const Settings& settings = Settings::defaults());

// Conjugation by a state relabeling: W'_y = P W_y P^-1 for the permutation
// matrix P with P e_i = e_perm[i].
YTransitionModel permuted(const YTransitionModel& model,
                          const std::vector<int>& perm,
                          const Settings& settings = Settings::defaults());
Vector permute_distribution(const Vector& p, const std::vector<int>& perm);

// Splits hidden state x_star into two copies receiving incoming mass in
// proportions (split, 1 - split); both copies emit and transition as the
// original state did, so every output law is preserved.
std::pair<YTransitionModel, Vector> duplicate_state(
    const YTransitionModel& model, const Vector& p, int x_star, double split,
    const Settings& settings = Settings::defaults());

}  // namespace ytm

#endif
