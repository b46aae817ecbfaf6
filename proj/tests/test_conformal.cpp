#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "itecp/conformal.hpp"
#include "itecp/error.hpp"
#include "itecp/rng.hpp"
#include "oracles.hpp"

using namespace itecp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<CalScore> scores_at_points(const std::vector<double>& values, int t0 = 1) {
  std::vector<CalScore> scores;
  for (size_t k = 0; k < values.size(); ++k) {
    scores.push_back({static_cast<int>(k / 3), t0 + static_cast<int>(k % 7), values[k]});
  }
  return scores;
}
}  // namespace

TEST_CASE("conformity score measures signed distance to the band") {
  CHECK(conformity_score(0.0, 1.0, 0.5) == doctest::Approx(-0.5));
  CHECK(conformity_score(0.0, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(conformity_score(0.0, 1.0, -1.0) == doctest::Approx(1.0));
}

TEST_CASE("raw weights follow the scheme formulas") {
  WeightScheme decay{WeightKind::Decay, 0.7, 1.0};
  CHECK(decay.raw_weight(5, 5) == doctest::Approx(1.0));
  CHECK(decay.raw_weight(5, 4) == doctest::Approx(0.7));
  CHECK(decay.raw_weight(5, 3) == doctest::Approx(0.49));

  WeightScheme dsq{WeightKind::DecaySquared, 0.7, 1.0};
  CHECK(dsq.raw_weight(5, 3) == doctest::Approx(0.2401));

  WeightScheme drt{WeightKind::DecayRoot, 0.7, 1.0};
  CHECK(drt.raw_weight(10, 6) == doctest::Approx(std::pow(0.7, 2.0)));

  WeightScheme equal{WeightKind::Equal, 0.7, 1.0};
  CHECK(equal.raw_weight(1, 100) == 1.0);
}

TEST_CASE("equal weights normalize to 1/(n+1) with unit infinity mass") {
  const auto scores = scores_at_points({1, 2, 3, 4, 5, 6, 7, 8, 9});
  WeightScheme equal{WeightKind::Equal, 0.7, 1.0};
  const NormalizedWeights nw = weights_for_target(equal, 3, scores);
  for (double w : nw.weights) CHECK(w == doctest::Approx(0.1));
  CHECK(nw.w_inf == doctest::Approx(0.1));
}

TEST_CASE("weights ignore score values entirely") {
  std::vector<double> values = {5, -1, 2, 7, 0, 3, 1};
  auto scores = scores_at_points(values);
  WeightScheme decay{WeightKind::Decay, 0.7, 1.0};
  const NormalizedWeights before = weights_for_target(decay, 4, scores);
  // Permute the values while keeping the decision points in place.
  std::reverse(values.begin(), values.end());
  for (size_t k = 0; k < scores.size(); ++k) scores[k].value = values[k];
  const NormalizedWeights after = weights_for_target(decay, 4, scores);
  CHECK(before.weights == after.weights);
  CHECK(before.w_inf == after.w_inf);
}

TEST_CASE("total weight underflow raises the degenerate-weights error") {
  std::vector<CalScore> scores = {{0, 1, 0.5}, {0, 2, 0.7}};
  WeightScheme dsq{WeightKind::DecaySquared, 0.7, 1.0};
  CHECK_THROWS_AS(weights_for_target(dsq, 10000, scores), DegenerateWeightsError);
}

TEST_CASE("weighted quantile worked examples") {
  WeightScheme equal{WeightKind::Equal, 0.7, 1.0};
  {
    const auto scores = scores_at_points({1, 2, 3});
    const NormalizedWeights nw = weights_for_target(equal, 1, scores);
    std::vector<double> values = {1, 2, 3};
    CHECK(weighted_quantile(values, nw.weights, nw.w_inf, 0.95) == kInf);
  }
  {
    std::vector<double> values;
    for (int k = 1; k <= 19; ++k) values.push_back(k);
    const auto scores = scores_at_points(values);
    const NormalizedWeights nw = weights_for_target(equal, 1, scores);
    CHECK(weighted_quantile(values, nw.weights, nw.w_inf, 0.95) == doctest::Approx(19.0));
  }
  {
    Rng rng(3);
    std::vector<double> values;
    for (int k = 0; k < 99; ++k) values.push_back(rng.normal());
    const auto scores = scores_at_points(values);
    const NormalizedWeights nw = weights_for_target(equal, 1, scores);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    CHECK(weighted_quantile(values, nw.weights, nw.w_inf, 0.95) ==
          sorted[94]);  // ceil(0.95 * 100) = 95th order statistic
  }
}

TEST_CASE("weighted quantile agrees with the classical split-conformal rule") {
  Rng rng(5);
  WeightScheme equal{WeightKind::Equal, 0.7, 1.0};
  for (int n : {1, 2, 5, 19, 20, 40, 99, 100, 157, 200}) {
    std::vector<double> values;
    for (int k = 0; k < n; ++k) values.push_back(rng.normal());
    const auto scores = scores_at_points(values);
    const NormalizedWeights nw = weights_for_target(equal, 1, scores);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (double alpha : {0.01, 0.05, 0.1, 0.25, 0.5}) {
      const double got = weighted_quantile(values, nw.weights, nw.w_inf, 1.0 - alpha);
      const int idx = oracles::classical_order_index(n, alpha);
      if (idx == 0) {
        CHECK(got == kInf);
      } else {
        CHECK(got == sorted[idx - 1]);
      }
    }
  }
}

TEST_CASE("weighted quantile matches the brute-force scan on random instances") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(60));
    std::vector<double> values(n), weights(n);
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      values[k] = std::round(rng.normal() * 4.0) / 4.0;  // force ties
      weights[k] = rng.uniform();
      total += weights[k];
    }
    const double w_inf_raw = rng.uniform();
    total += w_inf_raw;
    for (double& w : weights) w /= total;
    const double w_inf = w_inf_raw / total;
    const double level = 0.05 + 0.9 * rng.uniform();

    const double got = weighted_quantile(values, weights, w_inf, level);
    const double expect = oracles::weighted_quantile_scan(values, weights, w_inf, level);
    CHECK(got == expect);
  }
}

TEST_CASE("weighted quantile is monotone in level and in the scores") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.bounded(30));
    std::vector<double> values(n), weights(n);
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      values[k] = rng.normal();
      weights[k] = rng.uniform();
      total += weights[k];
    }
    const double w_inf_raw = 0.2 * rng.uniform();
    total += w_inf_raw;
    for (double& w : weights) w /= total;
    const double w_inf = w_inf_raw / total;

    const double lo_level = 0.1 + 0.4 * rng.uniform();
    const double hi_level = lo_level + (0.99 - lo_level) * rng.uniform();
    const double q_lo = weighted_quantile(values, weights, w_inf, lo_level);
    const double q_hi = weighted_quantile(values, weights, w_inf, hi_level);
    CHECK(q_lo <= q_hi);

    // Raising one score never lowers the quantile.
    std::vector<double> bumped = values;
    const int pick = static_cast<int>(rng.bounded(n));
    bumped[pick] += 1.0 + rng.uniform();
    const double q_bumped = weighted_quantile(bumped, weights, w_inf, lo_level);
    CHECK(q_bumped >= q_lo);
  }
}

TEST_CASE("quantile and interval endpoints scale with the data") {
  Rng rng(11);
  const int n = 25;
  std::vector<double> values(n), weights(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    values[k] = rng.normal();
    weights[k] = rng.uniform();
    total += weights[k];
  }
  total += 1.0;
  for (double& w : weights) w /= total;
  const double w_inf = 1.0 / total;

  const double q = weighted_quantile(values, weights, w_inf, 0.9);
  const double c = 3.5;
  std::vector<double> scaled = values;
  for (double& v : scaled) v *= c;
  CHECK(weighted_quantile(scaled, weights, w_inf, 0.9) == c * q);
}

TEST_CASE("interval assembly covers the worked examples") {
  {
    const PredictionInterval iv = build_interval(0.0, 1.0, 0.2);
    CHECK(iv.lower == doctest::Approx(-0.2));
    CHECK(iv.upper == doctest::Approx(1.2));
    CHECK(iv.length() == doctest::Approx(1.4));
    CHECK_FALSE(iv.unbounded);
  }
  {
    const PredictionInterval iv = build_interval(0.0, 1.0, -0.1);
    CHECK(iv.lower == doctest::Approx(0.1));
    CHECK(iv.upper == doctest::Approx(0.9));
  }
  {
    const PredictionInterval iv = build_interval(0.0, 1.0, kInf);
    CHECK(iv.unbounded);
    CHECK(iv.lower == -kInf);
    CHECK(iv.upper == kInf);
    CHECK(iv.covers(1e300));
  }
  {
    // Margin negative enough to cross: both endpoints collapse to the midpoint.
    const PredictionInterval iv = build_interval(0.0, 1.0, -0.8);
    CHECK(iv.collapsed);
    CHECK(iv.lower == iv.upper);
    CHECK(iv.lower == doctest::Approx(0.5));
    CHECK(iv.length() == 0.0);
  }
}
