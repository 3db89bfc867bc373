#ifndef YTM_SETTINGS_HPP
#define YTM_SETTINGS_HPP

#include <cstdint>

namespace ytm {

// One shared record of numeric tolerances.  Every public operation accepts
// a Settings argument defaulting to this; the CLI can override all of them
// from a single file.
struct Settings {
  // Stochasticity validation: |column sum - 1| <= stochastic_tol.
  double stochastic_tol = 1e-12;
  // Entries below support_tol are treated as structural zeros.
  double support_tol = 1e-12;
  // Relative rank tolerance: singular values <= rank_rel_tol * sigma_max
  // count as zero.
  double rank_rel_tol = 1e-9;
  // Residual tolerance for eigenvector / fixed-point / subspace checks.
  double residual_tol = 1e-10;
  // Perron solver acceptance residual and iteration cap.
  double perron_tol = 1e-12;
  std::int64_t perron_max_iter = 100000;
  // Total-variation tolerance for the equivalence verdict.
  double equiv_tol = 1e-9;
  // Derivative-based classification bands: <= deriv_zero_tol is vanishing,
  // > deriv_nonzero_tol is non-vanishing, between the two is indeterminate.
  double deriv_zero_tol = 1e-8;
  double deriv_nonzero_tol = 1e-6;
  // Eigenvalue separation thresholds for the independent-type decomposition.
  // Gaps above eig_gap_tol are clean, below eig_gap_hard are multiple roots,
  // in between is indeterminate.
  double eig_gap_tol = 1e-7;
  double eig_gap_hard = 1e-9;
  // |imaginary part| allowed when an eigenvalue must be real.
  double imag_tol = 1e-9;
  // Off-diagonal leakage allowed in the common-eigenvector test.
  double codiag_tol = 1e-8;
  // Row cap for materialized P^k maps and output laws.
  std::int64_t enumeration_cap = 1000000;
  // Exponent guard before calling exp().
  double exp_guard = 700.0;

  static const Settings& defaults() {
    static const Settings s{};
    return s;
  }
};

}  // namespace ytm

#endif
