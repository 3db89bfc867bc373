#ifndef YTM_TESTS_HELPERS_HPP
#define YTM_TESTS_HELPERS_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "ytm/equivalence.hpp"
#include "ytm/expfam.hpp"
#include "ytm/indep.hpp"
#include "ytm/model.hpp"

namespace ytm::testing {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// The worked two-state example used throughout: W = [[.7,.4],[.3,.6]],
// V = [[.9,.2],[.1,.8]].
inline IndepModel m2_factors() {
  IndepModel m;
  m.W = (Matrix(2, 2) << 0.7, 0.4, 0.3, 0.6).finished();
  m.V = (Matrix(2, 2) << 0.9, 0.2, 0.1, 0.8).finished();
  return m;
}

inline YTransitionModel m2() { return from_independent(m2_factors()); }

// The iid (memoryless) singular example: W_y = q_y M.
inline YTransitionModel s2() {
  YTransitionModel m;
  m.d = 2;
  m.dY = 2;
  Matrix base = (Matrix(2, 2) << 0.7, 0.4, 0.3, 0.6).finished();
  m.W = {0.6 * base, 0.4 * base};
  return m;
}

inline Vector random_distribution(int d, std::mt19937_64& rng) {
  Vector p(d);
  for (int i = 0; i < d; ++i) p(i) = 0.05 + uniform01(rng);
  return p / p.sum();
}

// Entrywise-positive model: entries drawn away from zero, one global
// normalization per column.
inline YTransitionModel random_full_support_model(int d, int dY,
                                                  std::mt19937_64& rng) {
  YTransitionModel m;
  m.d = d;
  m.dY = dY;
  m.W.assign(static_cast<std::size_t>(dY), Matrix::Zero(d, d));
  for (int xp = 0; xp < d; ++xp) {
    double colsum = 0.0;
    for (int y = 0; y < dY; ++y)
      for (int x = 0; x < d; ++x) {
        double v = 0.05 + uniform01(rng);
        m.W[static_cast<std::size_t>(y)](x, xp) = v;
        colsum += v;
      }
    for (int y = 0; y < dY; ++y) m.W[static_cast<std::size_t>(y)].col(xp) /= colsum;
  }
  return m;
}

inline Matrix random_column_stochastic(int d, std::mt19937_64& rng) {
  Matrix w(d, d);
  for (int xp = 0; xp < d; ++xp) {
    double s = 0.0;
    for (int x = 0; x < d; ++x) {
      w(x, xp) = 0.05 + uniform01(rng);
      s += w(x, xp);
    }
    w.col(xp) /= s;
  }
  return w;
}

inline IndepModel random_indep_model(int d, int dY, std::mt19937_64& rng) {
  IndepModel m;
  m.W = random_column_stochastic(d, rng);
  m.V = Matrix(dY, d);
  for (int xp = 0; xp < d; ++xp) {
    double s = 0.0;
    for (int y = 0; y < dY; ++y) {
      m.V(y, xp) = 0.05 + uniform01(rng);
      s += m.V(y, xp);
    }
    m.V.col(xp) /= s;
  }
  return m;
}

// Two-state model inside the all-output singular stratum: every W_y has
// equal column sums (s_y per output), entries otherwise free and positive.
inline YTransitionModel random_two_state_singular(int dY,
                                                  std::mt19937_64& rng) {
  YTransitionModel m;
  m.d = 2;
  m.dY = dY;
  Vector s(dY);
  for (int y = 0; y < dY; ++y) s(y) = 0.1 + uniform01(rng);
  s /= s.sum();
  m.W.assign(static_cast<std::size_t>(dY), Matrix::Zero(2, 2));
  for (int y = 0; y < dY; ++y)
    for (int xp = 0; xp < 2; ++xp) {
      double a = (0.1 + 0.8 * uniform01(rng)) * s(y);
      m.W[static_cast<std::size_t>(y)](0, xp) = a;
      m.W[static_cast<std::size_t>(y)](1, xp) = s(y) - a;
    }
  return m;
}

// Random tangent function supported on the model.
inline Generator random_generator(const YTransitionModel& m,
                                  std::mt19937_64& rng) {
  Generator g(static_cast<std::size_t>(m.dY), Matrix::Zero(m.d, m.d));
  for (int y = 0; y < m.dY; ++y)
    for (int x = 0; x < m.d; ++x)
      for (int xp = 0; xp < m.d; ++xp)
        if (m.W[static_cast<std::size_t>(y)](x, xp) > 1e-12)
          g[static_cast<std::size_t>(y)](x, xp) = 2.0 * uniform01(rng) - 1.0;
  return g;
}

// Brute-force output law: sums the joint weight over every hidden path.
// Deliberately index-by-index, with no matrix products, so it is an
// independent check of the algebraic path.
inline double brute_word_probability(const YTransitionModel& m,
                                     const Vector& p0,
                                     const std::vector<int>& word) {
  const int k = static_cast<int>(word.size());
  std::vector<int> path(static_cast<std::size_t>(k) + 1, 0);
  double total = 0.0;
  while (true) {
    double w = p0(path[0]);
    for (int i = 0; i < k && w != 0.0; ++i)
      w *= m.W[static_cast<std::size_t>(word[static_cast<std::size_t>(i)])](
          path[static_cast<std::size_t>(i) + 1], path[static_cast<std::size_t>(i)]);
    total += w;
    int pos = 0;
    while (pos <= k) {
      if (++path[static_cast<std::size_t>(pos)] < m.d) break;
      path[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos > k) break;
  }
  return total;
}

// Full law over words of length k in the library's index order (first
// emitted symbol least significant).
inline Vector brute_output_law(const YTransitionModel& m, const Vector& p0,
                               int k) {
  std::int64_t rows = 1;
  for (int i = 0; i < k; ++i) rows *= m.dY;
  Vector law(rows);
  for (std::int64_t r = 0; r < rows; ++r) {
    std::vector<int> word(static_cast<std::size_t>(k));
    std::int64_t rem = r;
    for (int i = 0; i < k; ++i) {  // y_1 first
      word[static_cast<std::size_t>(i)] = static_cast<int>(rem % m.dY);
      rem /= m.dY;
    }
    law(r) = brute_word_probability(m, p0, word);
  }
  return law;
}

inline double tv_distance(const Vector& a, const Vector& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

}  // namespace ytm::testing

#endif
