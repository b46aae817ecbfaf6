#include "itecp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "itecp/error.hpp"
#include "itecp/rng.hpp"

namespace itecp {

const char* mode_name(Mode mode) { return mode == Mode::Downward ? "downward" : "outward"; }

void ExperimentConfig::validate() const {
  if (sim.has_value() == csv_path.has_value()) {
    throw ConfigError("exactly one data source (synthetic or csv) must be set");
  }
  if (sim) sim->validate();
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
  if (!(train_frac > 0.0) || !(train_frac < 1.0)) {
    throw ConfigError("train_frac must be in (0,1)");
  }
  if (mode == Mode::Outward) {
    if (!train_horizon) throw ConfigError("outward mode requires train_horizon");
  } else {
    if (train_horizon) throw ConfigError("train_horizon requires outward mode");
    if (augment_cal_with_test_history) {
      throw ConfigError("augment_cal_with_test_history requires outward mode");
    }
  }
  if (nuisance_lambda.grid_size < 1 || quantile_lambda.grid_size < 1) {
    throw ConfigError("lambda grid_size must be positive");
  }
  if (n_threads < 1) throw ConfigError("n_threads must be positive");
}

PipelineCore run_core(const ExperimentConfig& config) {
  config.validate();
  PanelDataset data = config.sim ? generate(*config.sim, config.n_threads)
                                 : load_csv(*config.csv_path, config.schema);
  return run_core_on(std::move(data), config);
}

PipelineCore run_core_on(PanelDataset data, const ExperimentConfig& config) {
  config.validate();
  const int t_count = data.n_points();
  if (config.mode == Mode::Outward && *config.train_horizon >= t_count) {
    throw ConfigError("train_horizon must be < T in outward mode");
  }

  TrainingSplit split_ids = split(data, {config.train_frac},
                                  derive_seed(config.seed, 0x51), config.train_horizon);
  const int horizon = split_ids.train_horizon;

  NuisanceEstimates estimates = estimate_nuisance(
      data, split_ids, config.nuisance_lambda, derive_seed(config.seed, 0x52),
      config.n_threads);

  const SetKind model_only[] = {SetKind::Model};
  PseudoOutcomeTable model_table =
      transform_dataset(data, split_ids, model_only, estimates, config.learner);
  QuantileModelPair pair =
      fit_quantile_pair(model_table, config.alpha, config.quantile_lambda,
                        derive_seed(config.seed, 0x53), config.n_threads);

  PipelineCore core{std::move(data),  std::move(split_ids), std::move(estimates),
                    std::move(pair),  {},                   {},
                    {},               config.alpha,         config.mode};
  core.calibration.alpha = config.alpha;

  auto score_into = [&](const PseudoOutcomeTable& table) {
    const long n = static_cast<long>(table.entries.size());
    Eigen::RowVectorXd feat;
    for (long r = 0; r < n; ++r) {
      const auto& e = table.entries[r];
      feat = table.features.row(r);
      const auto [lo, hi] =
          core.pair.predict({feat.data(), static_cast<size_t>(feat.size())});
      core.calibration.scores.push_back(
          {e.individual, e.decision_point, conformity_score(lo, hi, e.value)});
      if (core.data.has_true_ite()) {
        core.calibration_oracle.push_back(conformity_score(
            lo, hi, core.data.true_ite(e.individual, e.decision_point)));
      }
    }
  };

  PseudoOutcomeTable cal_table = transform_cells(
      core.data, core.estimates, core.split.calibration_ids, 1, horizon, config.learner);
  score_into(cal_table);
  if (config.mode == Mode::Outward && config.augment_cal_with_test_history) {
    PseudoOutcomeTable extra = transform_cells(
        core.data, core.estimates, core.split.test_ids, 1, horizon, config.learner);
    score_into(extra);
  }

  // Test cells: held-out individuals over all points (downward) or calibration
  // individuals beyond the horizon (outward).
  const std::vector<int>& test_ids = config.mode == Mode::Downward
                                         ? core.split.test_ids
                                         : core.split.calibration_ids;
  const int j_lo = config.mode == Mode::Downward ? 1 : horizon + 1;
  PseudoOutcomeTable test_table = transform_cells(core.data, core.estimates, test_ids,
                                                  j_lo, t_count, config.learner);
  core.cells.reserve(test_table.entries.size());
  Eigen::RowVectorXd feat;
  for (long r = 0; r < static_cast<long>(test_table.entries.size()); ++r) {
    const auto& e = test_table.entries[r];
    feat = test_table.features.row(r);
    const auto [lo, hi] = core.pair.predict({feat.data(), static_cast<size_t>(feat.size())});
    TestCellPrediction cell;
    cell.individual = e.individual;
    cell.decision_point = e.decision_point;
    cell.q_lo = lo;
    cell.q_hi = hi;
    cell.pseudo = e.value;
    cell.has_true = core.data.has_true_ite();
    cell.true_ite = cell.has_true ? core.data.true_ite(e.individual, e.decision_point) : 0.0;
    core.cells.push_back(cell);
  }
  return core;
}

IntervalBatch apply_weights(const PipelineCore& core, const WeightScheme& scheme,
                            double alpha) {
  IntervalBatch batch;
  batch.alpha = alpha;
  const double level = 1.0 - alpha;

  std::vector<double> values(core.calibration.scores.size());
  for (size_t k = 0; k < values.size(); ++k) values[k] = core.calibration.scores[k].value;

  // The calibrated margin depends only on the target decision point; compute
  // each distinct target once, in ascending order.
  std::map<int, double> q_by_target;
  for (const auto& cell : core.cells) q_by_target.emplace(cell.decision_point, 0.0);
  for (auto& [t, q] : q_by_target) {
    const NormalizedWeights nw = weights_for_target(scheme, t, core.calibration.scores);
    q = weighted_quantile(values, nw.weights, nw.w_inf, level);
  }

  batch.records.reserve(core.cells.size());
  for (const auto& cell : core.cells) {
    IntervalRecord rec;
    rec.individual = cell.individual;
    rec.decision_point = cell.decision_point;
    rec.interval = build_interval(cell.q_lo, cell.q_hi, q_by_target.at(cell.decision_point));
    rec.pseudo = cell.pseudo;
    rec.true_ite = cell.true_ite;
    rec.has_true = cell.has_true;
    rec.covered_pseudo = rec.interval.covers(cell.pseudo);
    rec.covered_true = cell.has_true && rec.interval.covers(cell.true_ite);
    rec.length = rec.interval.length();
    batch.records.push_back(rec);
  }

  batch.scores_phi = values;
  batch.scores_oracle = core.calibration_oracle;
  for (const auto& cell : core.cells) {
    batch.scores_phi.push_back(conformity_score(cell.q_lo, cell.q_hi, cell.pseudo));
    if (cell.has_true) {
      batch.scores_oracle.push_back(conformity_score(cell.q_lo, cell.q_hi, cell.true_ite));
    }
  }
  return batch;
}

IntervalBatch run(const ExperimentConfig& config) {
  const PipelineCore core = run_core(config);
  return apply_weights(core, config.weights, config.alpha);
}

IntervalBatch run_on(PanelDataset data, const ExperimentConfig& config) {
  const PipelineCore core = run_core_on(std::move(data), config);
  return apply_weights(core, config.weights, config.alpha);
}

}  // namespace itecp
