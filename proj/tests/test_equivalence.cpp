#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ytm/equivalence.hpp"

using namespace ytm;
namespace tt = ytm::testing;

TEST_CASE("equivalence is reflexive with a zero gap") {
  auto m = tt::m2();
  Vector p = stationary(m);
  auto cert = are_equivalent(m, p, m, p);
  CHECK(cert.equivalent);
  CHECK(cert.tv_distance == 0.0);
  CHECK(cert.k_used == 3);
  REQUIRE(cert.intertwiner.has_value());
}

TEST_CASE("state relabeling preserves the observed law") {
  auto m = tt::m2();
  Vector p = stationary(m);
  auto swapped = permuted(m, {1, 0});
  Vector ps = permute_distribution(p, {1, 0});
  Vector law = exact_output_law(m, p, 3);
  Vector law_s = exact_output_law(swapped, ps, 3);
  CHECK((law - law_s).cwiseAbs().maxCoeff() < 1e-12);

  auto cert = are_equivalent(m, p, swapped, ps);
  CHECK(cert.equivalent);

  // Composing with the inverse restores the model.
  auto twice = permuted(swapped, {1, 0});
  for (int y = 0; y < 2; ++y)
    CHECK((twice.W[y] - m.W[y]).cwiseAbs().maxCoeff() == 0.0);

  auto same = permuted(m, {0, 1});
  for (int y = 0; y < 2; ++y)
    CHECK((same.W[y] - m.W[y]).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(permuted(m, {0, 0}), ValidationError);
}

TEST_CASE("perturbed models are distinguishable") {
  auto m = tt::m2();
  Vector p = stationary(m);
  auto shifted = m;
  shifted.W[0](0, 0) += 0.05;
  shifted.W[1](0, 0) -= 0.05;
  auto cert = are_equivalent(m, p, shifted, p, 1e-9);
  CHECK(!cert.equivalent);
  CHECK(cert.tv_distance > 1e-3);
}

TEST_CASE("intertwiner certificates") {
  auto m = tt::m2();
  Vector p = stationary(m);

  // Identity pair: T is the identity in matching bases.
  Matrix ba, bb;
  Matrix t = intertwiner(m, p, m, p, &ba, &bb);
  CHECK((ba - bb).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((t - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);

  // Permuted pair: the composite map through the quotient bases is the
  // permutation.
  auto swapped = permuted(m, {1, 0});
  Vector ps = permute_distribution(p, {1, 0});
  Matrix t2 = intertwiner(m, p, swapped, ps, &ba, &bb);
  Matrix full = bb * t2 * ba.transpose();  // map in the original coordinates
  Matrix perm = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  CHECK((full - perm).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("duplicated states remain equivalent") {
  auto m = tt::m2();
  Vector p = stationary(m);
  auto [big, pbig] = duplicate_state(m, p, 0, 0.5);
  REQUIRE(big.d == 3);
  CHECK(validate(big).ok());

  // The output law is untouched, checked against the path oracle.
  Vector law = tt::brute_output_law(m, p, 3);
  Vector law_big = tt::brute_output_law(big, pbig, 3);
  CHECK((law - law_big).cwiseAbs().maxCoeff() < 1e-12);

  auto cert = are_equivalent(m, p, big, pbig);
  CHECK(cert.equivalent);
  REQUIRE(cert.intertwiner.has_value());

  // Duplicating twice still compares equal.
  auto [bigger, pbigger] = duplicate_state(big, pbig, 1, 0.3);
  auto cert2 = are_equivalent(m, p, bigger, pbigger);
  CHECK(cert2.equivalent);

  CHECK_THROWS_AS(duplicate_state(m, p, 0, 1.5), ValidationError);

  YTransitionModel tiny;
  tiny.d = 1;
  tiny.dY = 2;
  tiny.W = {0.4 * Matrix::Ones(1, 1), 0.6 * Matrix::Ones(1, 1)};
  auto [two, ptwo] = duplicate_state(tiny, Vector::Ones(1), 0, 0.5);
  auto cert3 = are_equivalent(tiny, Vector::Ones(1), two, ptwo);
  CHECK(cert3.equivalent);
}

TEST_CASE("window of condition four suffices") {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = tt::random_full_support_model(2 + static_cast<int>(rng() % 2), 2,
                                           rng);
    Vector p = stationary(m);
    std::vector<int> perm(static_cast<std::size_t>(m.d));
    for (int i = 0; i < m.d; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    auto other = permuted(m, perm);
    Vector po = permute_distribution(p, perm);
    auto cert = are_equivalent(m, p, other, po);
    REQUIRE(cert.equivalent);
    // Agreement persists beyond the decision window.
    for (int extra = 1; extra <= 2; ++extra) {
      Vector a = exact_output_law(m, p, cert.k_used + extra);
      Vector b = exact_output_law(other, po, cert.k_used + extra);
      CHECK(tt::tv_distance(a, b) <= 1e-9);
    }
  }
}

TEST_CASE("distinguishability is monotone in the window length") {
  auto m = tt::m2();
  Vector p = stationary(m);
  auto shifted = m;
  shifted.W[0](0, 0) += 0.03;
  shifted.W[1](0, 0) -= 0.03;
  double prev = 0.0;
  bool seen = false;
  for (int k = 1; k <= 5; ++k) {
    double tv = tt::tv_distance(exact_output_law(m, p, k),
                                exact_output_law(shifted, p, k));
    if (seen) CHECK(tv >= prev - 1e-12);
    if (tv > 1e-9) seen = true;
    prev = tv;
  }
  CHECK(seen);
}

TEST_CASE("mismatched output alphabets are rejected") {
  auto m = tt::m2();
  YTransitionModel other;
  other.d = 2;
  other.dY = 3;
  other.W = {m.W[0], 0.5 * m.W[1], 0.5 * m.W[1]};
  CHECK_THROWS_AS(
      are_equivalent(m, stationary(m), other, stationary(other)),
      ValidationError);
}
