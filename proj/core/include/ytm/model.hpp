#ifndef YTM_MODEL_HPP
#define YTM_MODEL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ytm/linalg.hpp"
#include "ytm/settings.hpp"

namespace ytm {

// Family (W_y)_{y in Y} of nonnegative d x d matrices whose sum is
// column-stochastic.  Entry W[y](x, xp) is the joint probability of moving
// xp -> x while emitting y.  Matrices act on column vectors.
struct YTransitionModel {
  int d = 0;
  int dY = 0;
  std::vector<Matrix> W;

  // Sum over outputs; the transition matrix of the hidden chain.
  Matrix bar() const;
};

// Classical factorized model: column-stochastic W on the hidden states and
// emission matrix V with V(y, xp) = probability of output y from state xp.
struct IndepModel {
  Matrix W;  // d x d
  Matrix V;  // dY x d
};

struct ValidationIssue {
  std::string what;
  int y = -1, x = -1, xp = -1;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

ValidationReport validate(const YTransitionModel& model,
                          const Settings& settings = Settings::defaults());
ValidationReport validate(const IndepModel& model,
                          const Settings& settings = Settings::defaults());
ValidationReport validate_distribution(
    const Vector& p, const Settings& settings = Settings::defaults());

// Throwing forms used as preconditions by the other modules.
void require_valid(const YTransitionModel& model,
                   const Settings& settings = Settings::defaults());
void require_valid(const IndepModel& model,
                   const Settings& settings = Settings::defaults());
void require_distribution(const Vector& p,
                          const Settings& settings = Settings::defaults());

// W_y := W D(V_y).
YTransitionModel from_independent(const IndepModel& m,
                                  const Settings& settings = Settings::defaults());

// Deterministic emission f: X -> Y; W_y keeps the rows x with f(x) = y.
YTransitionModel from_function(const Matrix& w, const std::vector<int>& f,
                               int dY,
                               const Settings& settings = Settings::defaults());

// Transition matrix of the joint chain on X x Y, indexed x + d * y, with
// entry (x, y | xp, yp) = W_y(x | xp) independent of yp.
Matrix lift_joint(const YTransitionModel& model,
                  const Settings& settings = Settings::defaults());

// Stationary distribution of the hidden chain (requires irreducibility).
Vector stationary(const YTransitionModel& model,
                  const Settings& settings = Settings::defaults());

// Stationary law on X x Y: P(x, y) = sum_xp W_y(x|xp) P(xp), a fixed point
// of lift_joint.
Vector lifted_stationary(const YTransitionModel& model,
                         const Settings& settings = Settings::defaults());

// Trajectory of n joint steps; element i holds (x_i, y_i).  x_0 is drawn
// from p0 and not part of the output.  Fully deterministic given the seed.
std::vector<std::pair<int, int>> sample(
    const YTransitionModel& model, const Vector& p0, std::int64_t n,
    std::uint64_t seed, const Settings& settings = Settings::defaults());

// Support predicate shared by the tangent-space code.
bool full_support(const YTransitionModel& model,
                  const Settings& settings = Settings::defaults());

}  // namespace ytm

#endif
