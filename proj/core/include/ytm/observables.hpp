#ifndef YTM_OBSERVABLES_HPP
#define YTM_OBSERVABLES_HPP

#include <vector>

#include "ytm/model.hpp"

namespace ytm {

// Observed-law map over windows of length k.  Row r of pk_map corresponds
// to the output word (y_k, ..., y_1) with r = sum_j y_j * dY^(j-1): the
// first emitted symbol y_1 is the least significant digit, the last one
// the most significant, which is plain lexicographic order in
// (y_k, ..., y_1).
Matrix pk_map(const YTransitionModel& model, int k,
              const Settings& settings = Settings::defaults());

// pk_map(model, k) * p: the distribution of k consecutive outputs.
Vector exact_output_law(const YTransitionModel& model, const Vector& p, int k,
                        const Settings& settings = Settings::defaults());

// Kernel chain Ker P^1 >= Ker P^2 >= ... until stabilization.
struct ObservabilityProfile {
  int k_W = 0;        // first k with Ker P^k = Ker P^(k+1)
  int d_W = 0;        // dim of the visible quotient
  std::vector<Subspace> kernels;  // Ker P^1 .. Ker P^(k_W)
  const Subspace& terminal_kernel() const { return kernels.back(); }
};

ObservabilityProfile observability_profile(
    const YTransitionModel& model,
    const Settings& settings = Settings::defaults());

// Reachable chain V^1(P) <= V^2(P) <= ... inside the quotient by the
// terminal kernel, starting from the class of P itself.
struct ReachabilityProfile {
  int k_PW = 0;
  int d_PW = 0;
  Matrix quotient_basis;          // d x q, orthonormal columns spanning Ker^perp
  std::vector<Subspace> spaces;   // V^1(P) .. V^(k_PW), ambient dim q
  const Subspace& terminal_space() const { return spaces.back(); }
};

ReachabilityProfile reachability_profile(
    const YTransitionModel& model, const Vector& p,
    const Settings& settings = Settings::defaults());

// The action [W_y] on the quotient by the terminal kernel, in the
// orthonormal complement basis (identity basis when the kernel is zero).
// Asserts that W_y maps the kernel into itself.
Matrix quotient_action(const YTransitionModel& model, int y,
                       const Settings& settings = Settings::defaults());

struct GenericityFlags {
  bool E1 = false;  // zero terminal kernel and full reachable quotient
  bool E2 = false;  // every entry of every W_y strictly positive
};

GenericityFlags check_genericity(const YTransitionModel& model,
                                 const Vector& p,
                                 const Settings& settings = Settings::defaults());

}  // namespace ytm

#endif
