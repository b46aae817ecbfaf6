#pragma once

#include <optional>
#include <span>

#include "itecp/nuisance.hpp"
#include "itecp/panel.hpp"

namespace itecp {

// Design row for the nuisance regression:
//   [ X_ij (P), A_t, A_{t-1}, X_ij * A_t (P) ]
// The intercept is handled by the fitter. action_override substitutes A_t
// before the interactions are formed; A_0 is 0.
inline int nuisance_feature_count(int p) { return 2 * p + 2; }

void nuisance_features(const PanelDataset& data, int i, int j,
                       std::optional<int> action_override, std::span<double> out);

// e_hat_{i,j-lag} = Y - mu_hat_{A}(X) at the lagged cell; 0 when j - lag < 1.
double signed_error(const PanelDataset& data, const NuisanceEstimates& estimates, int i,
                    int j, int lag);

// Design row for quantile regression:
//   [ X_ij (P), j, e_hat_{i,j-1}, e_hat_{i,j-2}, e_hat_{i,j-3} ]
inline int qr_feature_count(int p) { return p + 4; }

void qr_features(const PanelDataset& data, const NuisanceEstimates& estimates, int i,
                 int j, std::span<double> out);

}  // namespace itecp
