#include "itecp/pseudo.hpp"

#include <cmath>

#include "itecp/csv.hpp"
#include "itecp/error.hpp"

namespace itecp {

const char* learner_name(Learner learner) {
  return learner == Learner::IPW ? "ipw" : "dr";
}

double ipw_transform(double y, int a, double pi) {
  if (!(pi > 0.0) || !(pi < 1.0)) {
    throw PositivityError("propensity " + format_double(pi) + " outside (0,1)");
  }
  return (a - pi) / (pi * (1.0 - pi)) * y;
}

double dr_transform(double y, int a, double pi, double mu0_hat, double mu1_hat) {
  if (!(pi > 0.0) || !(pi < 1.0)) {
    throw PositivityError("propensity " + format_double(pi) + " outside (0,1)");
  }
  const double mu_a = a ? mu1_hat : mu0_hat;
  return (a - pi) / (pi * (1.0 - pi)) * (y - mu_a) + mu1_hat - mu0_hat;
}

PseudoOutcomeTable transform_cells(const PanelDataset& data,
                                   const NuisanceEstimates& estimates,
                                   std::span<const int> ids, int j_lo, int j_hi,
                                   Learner learner) {
  PseudoOutcomeTable table;
  table.learner = learner;
  const int per_id = j_hi >= j_lo ? j_hi - j_lo + 1 : 0;
  const size_t rows = ids.size() * static_cast<size_t>(per_id);
  const int width = qr_feature_count(data.n_covariates());
  table.entries.reserve(rows);
  table.features.resize(rows, width);

  std::vector<double> buf(width);
  size_t r = 0;
  for (int i : ids) {
    for (int j = j_lo; j <= j_hi; ++j, ++r) {
      const int a = data.action(i, j);
      const double pi = data.propensity(i, j);
      const double y = data.outcome(i, j);
      double value;
      if (learner == Learner::IPW) {
        value = ipw_transform(y, a, pi);
      } else {
        value = dr_transform(y, a, pi, estimates.mu_hat(data, i, j, 0),
                             estimates.mu_hat(data, i, j, 1));
      }
      if (!std::isfinite(value)) {
        throw Error("non-finite pseudo-outcome at (" + data.label(i) + "," +
                    std::to_string(j) + ")");
      }
      table.entries.push_back({i, j, value});
      qr_features(data, estimates, i, j, buf);
      for (int q = 0; q < width; ++q) table.features(r, q) = buf[q];
    }
  }
  return table;
}

PseudoOutcomeTable transform_dataset(const PanelDataset& data, const TrainingSplit& split,
                                     std::span<const SetKind> which_sets,
                                     const NuisanceEstimates& estimates, Learner learner) {
  PseudoOutcomeTable table;
  table.learner = learner;
  const int width = qr_feature_count(data.n_covariates());
  table.features.resize(0, width);
  for (SetKind kind : which_sets) {
    const std::vector<int>* ids = nullptr;
    int j_hi = split.train_horizon;
    switch (kind) {
      case SetKind::Model: ids = &split.model_ids; break;
      case SetKind::Calibration: ids = &split.calibration_ids; break;
      case SetKind::Test:
        ids = &split.test_ids;
        j_hi = data.n_points();
        break;
    }
    PseudoOutcomeTable part = transform_cells(data, estimates, *ids, 1, j_hi, learner);
    const auto old_rows = table.features.rows();
    table.features.conservativeResize(old_rows + part.features.rows(), width);
    table.features.bottomRows(part.features.rows()) = part.features;
    table.entries.insert(table.entries.end(), part.entries.begin(), part.entries.end());
  }
  return table;
}

void write_pseudo_csv(const PseudoOutcomeTable& table, const PanelDataset& data,
                      const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(table.entries.size());
  for (const auto& e : table.entries) {
    rows.push_back({data.label(e.individual), std::to_string(e.decision_point),
                    format_double(e.value)});
  }
  write_csv_file(path, {"individual_id", "decision_point", "pseudo_outcome"}, rows);
}

}  // namespace itecp
