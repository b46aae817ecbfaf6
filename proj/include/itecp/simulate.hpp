#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "itecp/panel.hpp"

namespace itecp {

enum class OutcomeKind { Linear, NonLinear };

// Generative process for a synthetic micro-randomized trial. Coefficient
// vectors shorter than P are zero-padded. Second arguments of the covariate
// noise laws are variances; sigma_y is the innovation standard deviation of
// the AR(1) outcome noises unless noise_as_variance is set.
struct SimConfig {
  int n_individuals = 2000;
  int n_points = 50;
  int n_covariates = 50;
  double rho = 0.2;          // equicorrelation of the initial latent covariates
  double gamma = 0.7;        // diagonal AR coefficient of the covariate recursion
  double gamma0 = 0.5;       // carry-over of the previous action
  double cov_noise_var1 = 0.5;
  double cov_noise_var2 = 0.25;
  std::vector<double> beta = {0.5, 0.3};
  double beta0 = 0.25;
  double theta1 = 0.5;
  std::vector<double> theta2 = {2.0, 1.0};
  double theta3 = 0.7;
  std::vector<double> theta4 = {1.0, 2.0};
  double sigma_y = 0.05;
  bool noise_as_variance = false;
  double ar_coeff = 0.5;     // autocorrelation of the AR(1) outcome noises
  OutcomeKind outcome_kind = OutcomeKind::Linear;
  std::optional<int> changepoint;  // treatment effect flips sign for t > changepoint
  std::vector<double> theta2_post = {0.0, -2.0, -1.0};
  std::vector<double> theta4_post = {-1.0, -3.0, -2.0};
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError naming the offending field
};

// Individuals are generated independently on RNG streams derived from
// (seed, i); output is identical for any thread count.
PanelDataset generate(const SimConfig& config, int n_threads = 1);

}  // namespace itecp
