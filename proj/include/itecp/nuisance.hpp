#pragma once

#include <cstdint>

#include "itecp/lasso.hpp"
#include "itecp/panel.hpp"

namespace itecp {

// Conditional-mean models for both arms, backed by one joint L1-penalized
// linear fit over covariates, current action, previous action, and all
// covariate-by-action interactions. Evaluating the joint model with the action
// forced to 0 or 1 gives mu0 / mu1. The propensity score is never estimated;
// it is read from the dataset.
struct NuisanceEstimates {
  LinearModel joint;
  double lambda = 0.0;  // penalty the joint model was fit with

  double mu_hat(const PanelDataset& data, int i, int j, int arm) const;
  double mu_hat_observed(const PanelDataset& data, int i, int j) const {
    return mu_hat(data, i, j, data.action(i, j));
  }
};

// Fits the joint model on all (i, j <= train_horizon) cells of the nuisance
// set. Lambda comes from lambda_spec: fixed, or chosen on the grid
// {lambda_max * ratio^k} by K-fold CV with folds blocked by individual.
NuisanceEstimates estimate_nuisance(const PanelDataset& data, const TrainingSplit& split,
                                    const LambdaSpec& lambda_spec, std::uint64_t seed,
                                    int n_threads = 1);

}  // namespace itecp
