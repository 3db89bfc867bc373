#ifndef YTM_TANGENT_HPP
#define YTM_TANGENT_HPP

#include <optional>

#include "ytm/expfam.hpp"
#include "ytm/observables.hpp"

namespace ytm {

// All tangent objects live in R^(dY*d*d) under the (y, x, x') flattening of
// expfam.hpp.  Images of the commutator map are intersected with the
// support-coordinate subspace before any quotient arithmetic so that models
// with structural zeros are handled consistently.

// m-representations with vanishing summed column totals, restricted to the
// support pattern.
Subspace l1_space(const YTransitionModel& model,
                  const Settings& settings = Settings::defaults());

// Image of A -> ([W_y, A])_y over { A : A^T 1 = 0 }.
Subspace l2_space(const YTransitionModel& model,
                  const Settings& settings = Settings::defaults());

// Same image over the relaxed domain { A : A^T 1 = c 1 }; equals l2_space.
Subspace l2_space_relaxed(const YTransitionModel& model,
                          const Settings& settings = Settings::defaults());

// Members of l1 mapping the reachable-plus-kernel space into the kernel.
Subspace lP_space(const YTransitionModel& model, const Vector& p,
                  const Settings& settings = Settings::defaults());

// Image of the commutator map over { A : A^T 1 = 0, A p = 0 }.
Subspace l2P_space(const YTransitionModel& model, const Vector& p,
                   const Settings& settings = Settings::defaults());

struct TangentReport {
  int d = 0, dY = 0;
  int dim_l1 = 0;
  int dim_l2 = 0;
  int dim_lP = 0;
  int dim_l2P = 0;
  // dim(L_2 + L_P(stationary)) and dim(L_P + L_2P) at the report's P.
  int dim_sum_asymptotic = 0;
  int dim_sum_fixed = 0;
  int local_dim_fixed = 0;
  int local_dim_asymptotic = 0;
  int generic_dim = 0;       // d^2 (dY - 1)
  int observable_count = 0;  // dY - 1
  bool singular = false;
  bool stationary_initial = false;
  // Singular values bracketing the rank cutoff of the asymptotic-sum
  // decision; useful for logging near-coincidences.
  double sv_above_cut = 0.0;
  double sv_below_cut = 0.0;
};

// When p is absent the stationary distribution is used for both quotients.
TangentReport tangent_report(const YTransitionModel& model,
                             const std::optional<Vector>& p = std::nullopt,
                             const Settings& settings = Settings::defaults());

// Membership of the direction sum_j a_j g_j in the indistinguishable sum,
// cross-checked against the vanishing of the analytic law derivative at
// the window k_W + k_PW + 1.  Throws IndeterminateError inside the declared
// band and InternalCheckError on disagreement.
bool local_equiv_fixed(const YTransitionModel& model, const Vector& p,
                       const GeneratorSet& gens, const Vector& a,
                       const Settings& settings = Settings::defaults());
bool local_equiv_asymptotic(const YTransitionModel& model,
                            const GeneratorSet& gens, const Vector& a,
                            const Settings& settings = Settings::defaults());

// Injectivity conditions on the commutator maps for a chosen output pair.
bool check_E3(const YTransitionModel& model, int y0, int y1,
              const Settings& settings = Settings::defaults());
// Spectral sufficient conditions: simple spectra of W_y0^T and W_y1^T, full
// support of 1 in the first eigenbasis, and no shared invariant subspace
// between the two eigenvector systems.
bool check_E3_sufficient(const YTransitionModel& model, int y0, int y1,
                         const Settings& settings = Settings::defaults());

// Canonical generator construction at a generic point (requires E1, E2 and
// an output pair passing check_E3).  Returns d^2 (dY - 1) generators with
// zero span-intersection against the identified-to-zero directions; with
// observable_first the leading dY - 1 generators are functions of y alone.
GeneratorSet build_generators(const YTransitionModel& model, const Vector& p,
                              bool observable_first = true,
                              const Settings& settings = Settings::defaults());

// Generators for the two-state all-output singular stratum (equal column
// sums in every W_y): dY - 1 in-stratum directions and dY - 1 transversal
// ones, spanning the 2 dY - 2 dimensional quotient.
GeneratorSet two_state_singular_generators(
    const YTransitionModel& model,
    const Settings& settings = Settings::defaults());

}  // namespace ytm

#endif
