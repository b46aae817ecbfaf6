#pragma once

#include <span>
#include <string>
#include <vector>

namespace itecp {

// V = max(q_lo - y, y - q_hi): negative iff y lies strictly inside the band,
// so one score captures both under- and overcoverage.
double conformity_score(double q_lo_pred, double q_hi_pred, double y_tilde);

enum class WeightKind { Equal, Decay, DecaySquared, DecayRoot };

const char* weight_kind_name(WeightKind kind);
WeightKind parse_weight_kind(const std::string& name);

// Calibration weights are fixed a priori: they depend only on the distance
// |t - j| between the target decision point and the score's decision point,
// never on individuals or observed values. w_inf is the mass reserved for the
// point mass at +infinity.
struct WeightScheme {
  WeightKind kind = WeightKind::Decay;
  double psi = 0.7;
  double w_inf = 1.0;

  double raw_weight(int target_t, int j) const;
};

struct CalScore {
  int individual;
  int decision_point;
  double value;
};

struct CalibrationSet {
  std::vector<CalScore> scores;
  double alpha = 0.05;
};

struct NormalizedWeights {
  std::vector<double> weights;  // aligned with the calibration scores
  double w_inf;                 // normalized mass at +infinity
};

// Normalizes raw weights by (sum + w_inf). Throws DegenerateWeightsError when
// every raw weight underflows to zero.
NormalizedWeights weights_for_target(const WeightScheme& scheme, int target_t,
                                     std::span<const CalScore> scores);

// Smallest score whose cumulative normalized weight reaches `level`; ties keep
// all their mass. Returns +infinity when the finite mass cannot reach the
// level. Weights together with w_inf must sum to one.
double weighted_quantile(std::span<const double> scores, std::span<const double> weights,
                         double w_inf, double level);

struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double q_hat = 0.0;       // calibrated margin, +infinity permitted
  bool unbounded = false;   // q_hat == +infinity
  bool collapsed = false;   // margin so negative the endpoints crossed

  bool covers(double v) const { return unbounded || (lower <= v && v <= upper); }
  double length() const;
};

// [q_lo - q_hat, q_hi + q_hat]. A negative margin shrinks the band; if it
// crosses, both endpoints collapse to the midpoint.
PredictionInterval build_interval(double q_lo_pred, double q_hi_pred, double q_hat);

}  // namespace itecp
