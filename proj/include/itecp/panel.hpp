#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace itecp {

// Column names for the rectangular panel format: one row per
// (individual, decision point), covariates x1..xP in numeric order.
struct ColumnSchema {
  std::string individual_id = "individual_id";
  std::string decision_point = "decision_point";
  std::string action = "action";
  std::string outcome = "outcome";
  std::string propensity = "propensity";
  std::string covariate_prefix = "x";
};

struct PotentialOutcomes {
  std::vector<double> y0;  // N*T, potential outcome under action 0
  std::vector<double> y1;  // N*T, potential outcome under action 1
};

// Immutable rectangular longitudinal dataset. Individuals are dense indices
// 0..N-1 (original ids kept as labels), decision points are 1..T. Propensities
// are required and strictly inside (0,1); potential outcomes and the true ITE
// exist only for synthetic data.
class PanelDataset {
 public:
  PanelDataset(int n, int t, int p, std::vector<double> covariates,
               std::vector<std::int8_t> actions, std::vector<double> outcomes,
               std::vector<double> propensities,
               std::optional<PotentialOutcomes> potential_outcomes,
               std::vector<std::string> labels);

  int n_individuals() const { return n_; }
  int n_points() const { return t_; }
  int n_covariates() const { return p_; }

  // j is a decision point in 1..T everywhere below.
  double covariate(int i, int j, int p) const { return covariates_[cov_offset(i, j) + p]; }
  std::span<const double> covariate_row(int i, int j) const {
    return {covariates_.data() + cov_offset(i, j), static_cast<size_t>(p_)};
  }
  int action(int i, int j) const { return actions_[cell(i, j)]; }
  // A_{i,j-1} with the A_0 = 0 convention.
  int action_before(int i, int j) const { return j > 1 ? action(i, j - 1) : 0; }
  double outcome(int i, int j) const { return outcomes_[cell(i, j)]; }
  double propensity(int i, int j) const { return propensities_[cell(i, j)]; }

  bool has_potential_outcomes() const { return potential_.has_value(); }
  double potential_outcome(int i, int j, int arm) const {
    return arm ? potential_->y1[cell(i, j)] : potential_->y0[cell(i, j)];
  }
  bool has_true_ite() const { return !true_ite_.empty(); }
  double true_ite(int i, int j) const { return true_ite_[cell(i, j)]; }

  const std::string& label(int i) const { return labels_[i]; }

  // Copy with every outcome of `individual` replaced by `value`; potential
  // outcomes and true ITE are dropped. Used by leakage audits.
  PanelDataset with_scrambled_outcomes(std::span<const int> individuals, int from_point,
                                       double value) const;

 private:
  size_t cell(int i, int j) const {
    return static_cast<size_t>(i) * t_ + static_cast<size_t>(j - 1);
  }
  size_t cov_offset(int i, int j) const { return cell(i, j) * p_; }

  int n_, t_, p_;
  std::vector<double> covariates_;
  std::vector<std::int8_t> actions_;
  std::vector<double> outcomes_;
  std::vector<double> propensities_;
  std::optional<PotentialOutcomes> potential_;
  std::vector<double> true_ite_;  // y1 - y0, cell-exact; empty when unavailable
  std::vector<std::string> labels_;
};

PanelDataset load_csv(const std::string& path, const ColumnSchema& schema = {});
void write_csv(const PanelDataset& data, const std::string& path,
               const ColumnSchema& schema = {});

// Sidecar with columns individual_id, decision_point, y0, y1.
void write_potential_outcomes_csv(const PanelDataset& data, const std::string& path);
PanelDataset attach_potential_outcomes(const PanelDataset& data, const std::string& path);

// Disjoint individual-index sets for Algorithm steps: nuisance fitting, quantile
// model fitting, calibration, and held-out test. Splitting is by individual,
// never by decision point.
struct TrainingSplit {
  std::vector<int> nuisance_ids;
  std::vector<int> model_ids;
  std::vector<int> calibration_ids;
  std::vector<int> test_ids;
  int train_horizon;  // fitting and calibration use decision points <= this
};

struct SplitFractions {
  double train_frac = 0.75;  // remainder is test; train splits into near-equal thirds
};

TrainingSplit split(const PanelDataset& data, const SplitFractions& fractions,
                    std::uint64_t seed, std::optional<int> horizon = std::nullopt);

}  // namespace itecp
