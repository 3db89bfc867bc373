#ifndef YTM_EXPFAM_HPP
#define YTM_EXPFAM_HPP

#include <vector>

#include "ytm/model.hpp"

namespace ytm {

// A tangent function g(y, x, x') stored like a model: dY matrices of size
// d x d, supported on the support of the anchor model.
using Generator = std::vector<Matrix>;

struct GeneratorSet {
  std::vector<Generator> gens;
  int size() const { return static_cast<int>(gens.size()); }
};

// Fixed flattening of (y, x, x') tensors into R^(dY*d*d), row-major with y
// slowest: index = (y * d + x) * d + xp.  This order is part of the public
// contract shared with the tangent module.
Vector flatten(const Generator& g);
Generator unflatten(const Vector& v, int d, int dY);
int flat_index(int y, int x, int xp, int d);

// Entrywise product (W_* g)_y = g(y,.,.) .* W_y; the m-representation.
Generator m_rep(const YTransitionModel& base, const Generator& g);

// Validates support and linear independence modulo the null functions
// f(x) - f(x') + c; throws ValidationError otherwise.
GeneratorSet make_generator_set(const YTransitionModel& base,
                                std::vector<Generator> gens,
                                const Settings& settings = Settings::defaults());

// Tilted matrix sum_y exp(sum_j theta_j g_j(y, x, x')) W_y(x, x').
Matrix tilt(const YTransitionModel& base, const GeneratorSet& gens,
            const Vector& theta,
            const Settings& settings = Settings::defaults());

// One point of the exponential family: the Perron data of the tilt, the
// potential phi = log lambda, and the normalized model.
struct ExpFamilyPoint {
  Vector theta;
  double lambda = 1.0;
  Vector pbar;  // Perron vector of the transposed tilt
  double phi = 0.0;
  YTransitionModel model;
};

ExpFamilyPoint at(const YTransitionModel& base, const GeneratorSet& gens,
                  const Vector& theta,
                  const Settings& settings = Settings::defaults());

double potential(const YTransitionModel& base, const GeneratorSet& gens,
                 const Vector& theta,
                 const Settings& settings = Settings::defaults());

// First-order Perron perturbation: d_j phi = <l, (d_j tilt) r> / (lambda <l, r>).
Vector potential_gradient(const YTransitionModel& base,
                          const GeneratorSet& gens, const Vector& theta,
                          const Settings& settings = Settings::defaults());

// Bregman divergence of the potential between two parameter points.
double divergence(const YTransitionModel& base, const GeneratorSet& gens,
                  const Vector& theta, const Vector& theta_prime,
                  const Settings& settings = Settings::defaults());

// Unique representative of [g] whose m-representation has vanishing summed
// column totals: sum_y (W_* g~)_y^T 1 = 0, with g~ - g of null form.
Generator g1_project(const YTransitionModel& base, const Generator& g,
                     const Settings& settings = Settings::defaults());

enum class DerivativeMode { kFixedP, kStationary };

// Exact first derivative of the window-k output law at theta = 0 along the
// direction a, by inserting the projected m-representation at each position;
// the stationary mode adds the tail term driven by the derivative of the
// stationary distribution.
Vector law_derivative(const YTransitionModel& base, const GeneratorSet& gens,
                      const Vector& a, const Vector& p, int k,
                      DerivativeMode mode,
                      const Settings& settings = Settings::defaults());

}  // namespace ytm

#endif
