#include "itecp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "itecp/error.hpp"

namespace itecp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Absolute slack when comparing cumulative mass against the level; keeps exact
// rational ties (k/(n+1) == 1-alpha) from flipping on rounding noise.
constexpr double kTieTol = 1e-9;
}  // namespace

double conformity_score(double q_lo_pred, double q_hi_pred, double y_tilde) {
  return std::max(q_lo_pred - y_tilde, y_tilde - q_hi_pred);
}

const char* weight_kind_name(WeightKind kind) {
  switch (kind) {
    case WeightKind::Equal: return "equal";
    case WeightKind::Decay: return "decay";
    case WeightKind::DecaySquared: return "decay_sq";
    case WeightKind::DecayRoot: return "decay_root";
  }
  return "?";
}

WeightKind parse_weight_kind(const std::string& name) {
  if (name == "equal" || name == "E") return WeightKind::Equal;
  if (name == "decay" || name == "D") return WeightKind::Decay;
  if (name == "decay_sq" || name == "DSQ") return WeightKind::DecaySquared;
  if (name == "decay_root" || name == "DRT") return WeightKind::DecayRoot;
  throw ConfigError("unknown weight scheme '" + name + "'");
}

double WeightScheme::raw_weight(int target_t, int j) const {
  const double d = std::abs(target_t - j);
  switch (kind) {
    case WeightKind::Equal: return 1.0;
    case WeightKind::Decay: return std::pow(psi, d);
    case WeightKind::DecaySquared: return std::pow(psi, d * d);
    case WeightKind::DecayRoot: return std::pow(psi, std::sqrt(d));
  }
  return 1.0;
}

NormalizedWeights weights_for_target(const WeightScheme& scheme, int target_t,
                                     std::span<const CalScore> scores) {
  if (target_t < 1) throw ConfigError("target decision point must be >= 1");
  if (!(scheme.psi > 0.0) || !(scheme.psi < 1.0)) {
    if (scheme.kind != WeightKind::Equal) throw ConfigError("psi must be in (0,1)");
  }
  if (!(scheme.w_inf >= 0.0)) throw ConfigError("w_inf must be non-negative");

  NormalizedWeights out;
  out.weights.resize(scores.size());
  double total = 0.0;
  for (size_t k = 0; k < scores.size(); ++k) {
    const double w = scheme.raw_weight(target_t, scores[k].decision_point);
    out.weights[k] = w;
    total += w;
  }
  if (!scores.empty() && total <= 0.0) {
    throw DegenerateWeightsError("all raw calibration weights underflowed to 0 at t=" +
                                 std::to_string(target_t));
  }
  const double denom = total + scheme.w_inf;
  if (!(denom > 0.0)) {
    throw DegenerateWeightsError("weight normalizer is zero at t=" +
                                 std::to_string(target_t));
  }
  for (double& w : out.weights) w /= denom;
  out.w_inf = scheme.w_inf / denom;
  return out;
}

double weighted_quantile(std::span<const double> scores, std::span<const double> weights,
                         double w_inf, double level) {
  if (scores.size() != weights.size()) {
    throw Error("weighted_quantile: score/weight size mismatch");
  }
  if (!(level > 0.0) || !(level <= 1.0)) {
    throw Error("weighted_quantile: level must be in (0,1]");
  }
  double mass = std::accumulate(weights.begin(), weights.end(), 0.0) + w_inf;
  if (std::fabs(mass - 1.0) > 1e-6) {
    throw Error("weighted_quantile: weights must be normalized to sum 1");
  }

  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });

  double cum = 0.0;
  for (int idx : order) {
    cum += weights[idx];
    if (cum >= level - kTieTol) return scores[idx];
  }
  return kInf;
}

double PredictionInterval::length() const {
  if (unbounded) return kInf;
  return upper - lower;
}

PredictionInterval build_interval(double q_lo_pred, double q_hi_pred, double q_hat) {
  PredictionInterval out;
  out.q_hat = q_hat;
  if (std::isinf(q_hat) && q_hat > 0.0) {
    out.lower = -kInf;
    out.upper = kInf;
    out.unbounded = true;
    return out;
  }
  out.lower = q_lo_pred - q_hat;
  out.upper = q_hi_pred + q_hat;
  if (out.lower > out.upper) {
    const double mid = 0.5 * (out.lower + out.upper);
    out.lower = out.upper = mid;
    out.collapsed = true;
  }
  return out;
}

}  // namespace itecp
