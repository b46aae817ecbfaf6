#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itecp/conformal.hpp"
#include "itecp/nuisance.hpp"
#include "itecp/panel.hpp"
#include "itecp/pseudo.hpp"
#include "itecp/quantile_pair.hpp"
#include "itecp/simulate.hpp"

namespace itecp {

// Downward: intervals for held-out individuals at observed decision points.
// Outward: intervals for calibration individuals at decision points beyond the
// training horizon.
enum class Mode { Downward, Outward };

const char* mode_name(Mode mode);

struct ExperimentConfig {
  std::optional<SimConfig> sim;        // exactly one source must be set
  std::optional<std::string> csv_path;
  ColumnSchema schema;

  double alpha = 0.05;
  Learner learner = Learner::DR;
  WeightScheme weights;
  Mode mode = Mode::Downward;
  double train_frac = 0.75;
  std::uint64_t seed = 1;              // drives the split and both CV fold draws
  std::optional<int> train_horizon;    // outward only, must be < T
  LambdaSpec nuisance_lambda;
  LambdaSpec quantile_lambda{.grid_size = 8};
  bool augment_cal_with_test_history = false;  // outward only
  int n_threads = 1;

  void validate() const;
};

// Per-cell quantile predictions plus evaluation-only targets; everything the
// calibration step needs except the weights.
struct TestCellPrediction {
  int individual;
  int decision_point;
  double q_lo, q_hi;  // post-repair
  double pseudo;      // from the observed outcome, evaluation only
  double true_ite;
  bool has_true;
};

struct PipelineCore {
  PanelDataset data;
  TrainingSplit split;
  NuisanceEstimates estimates;
  QuantileModelPair pair;
  CalibrationSet calibration;
  std::vector<double> calibration_oracle;  // V* aligned with calibration.scores
  std::vector<TestCellPrediction> cells;
  double alpha;
  Mode mode;
};

struct IntervalRecord {
  int individual;
  int decision_point;
  PredictionInterval interval;
  double pseudo;
  double true_ite;
  bool has_true;
  bool covered_pseudo;
  bool covered_true;
  double length;
};

struct IntervalBatch {
  double alpha = 0.05;
  std::vector<IntervalRecord> records;
  // Pooled conformity scores (calibration then test, in construction order)
  // for stochastic-dominance diagnostics.
  std::vector<double> scores_phi;
  std::vector<double> scores_oracle;  // empty without potential outcomes
};

// Stages 1-5: split, nuisance fit, pseudo-outcomes, quantile pair, calibration
// scores, per-cell predictions. Weight-scheme independent.
PipelineCore run_core(const ExperimentConfig& config);
PipelineCore run_core_on(PanelDataset data, const ExperimentConfig& config);

// Stage 6: weighted calibration and interval construction. The calibrated
// margin for a target decision point is shared by every cell at that point.
IntervalBatch apply_weights(const PipelineCore& core, const WeightScheme& scheme,
                            double alpha);

IntervalBatch run(const ExperimentConfig& config);
IntervalBatch run_on(PanelDataset data, const ExperimentConfig& config);

}  // namespace itecp
