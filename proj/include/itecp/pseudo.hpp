#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "itecp/features.hpp"
#include "itecp/nuisance.hpp"
#include "itecp/panel.hpp"

namespace itecp {

enum class Learner { IPW, DR };

const char* learner_name(Learner learner);

// (A - pi) / (pi (1 - pi)) * y
double ipw_transform(double y, int a, double pi);

// (A - pi) / (pi (1 - pi)) * (y - mu_hat_A) + mu_hat_1 - mu_hat_0
double dr_transform(double y, int a, double pi, double mu0_hat, double mu1_hat);

struct PseudoEntry {
  int individual;
  int decision_point;
  double value;
};

// Pseudo-outcome/covariate pairs for quantile regression. Feature rows follow
// the quantile-regression recipe and stay aligned with entries.
struct PseudoOutcomeTable {
  Learner learner = Learner::DR;
  std::vector<PseudoEntry> entries;
  Eigen::MatrixXd features;

  Eigen::VectorXd values() const {
    Eigen::VectorXd v(entries.size());
    for (size_t k = 0; k < entries.size(); ++k) v[k] = entries[k].value;
    return v;
  }
};

enum class SetKind { Model, Calibration, Test };

// Applies the learner to every (i, j in [j_lo, j_hi]) cell of the given
// individuals, in id order then decision-point order.
PseudoOutcomeTable transform_cells(const PanelDataset& data,
                                   const NuisanceEstimates& estimates,
                                   std::span<const int> ids, int j_lo, int j_hi,
                                   Learner learner);

// Model / Calibration sets use decision points up to split.train_horizon; the
// Test set uses the full horizon (evaluation only, never interval construction).
PseudoOutcomeTable transform_dataset(const PanelDataset& data, const TrainingSplit& split,
                                     std::span<const SetKind> which_sets,
                                     const NuisanceEstimates& estimates, Learner learner);

void write_pseudo_csv(const PseudoOutcomeTable& table, const PanelDataset& data,
                      const std::string& path);

}  // namespace itecp
