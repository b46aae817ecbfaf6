#include "itecp/features.hpp"

#include "itecp/error.hpp"

namespace itecp {

void nuisance_features(const PanelDataset& data, int i, int j,
                       std::optional<int> action_override, std::span<double> out) {
  const int p = data.n_covariates();
  if (static_cast<int>(out.size()) != nuisance_feature_count(p)) {
    throw Error("nuisance feature buffer has wrong size");
  }
  const auto x = data.covariate_row(i, j);
  const double a = action_override ? *action_override : data.action(i, j);
  const double a_prev = data.action_before(i, j);
  for (int q = 0; q < p; ++q) out[q] = x[q];
  out[p] = a;
  out[p + 1] = a_prev;
  for (int q = 0; q < p; ++q) out[p + 2 + q] = x[q] * a;
}

double signed_error(const PanelDataset& data, const NuisanceEstimates& estimates, int i,
                    int j, int lag) {
  const int jl = j - lag;
  if (jl < 1) return 0.0;
  return data.outcome(i, jl) - estimates.mu_hat_observed(data, i, jl);
}

void qr_features(const PanelDataset& data, const NuisanceEstimates& estimates, int i,
                 int j, std::span<double> out) {
  const int p = data.n_covariates();
  if (static_cast<int>(out.size()) != qr_feature_count(p)) {
    throw Error("qr feature buffer has wrong size");
  }
  const auto x = data.covariate_row(i, j);
  for (int q = 0; q < p; ++q) out[q] = x[q];
  out[p] = static_cast<double>(j);
  for (int lag = 1; lag <= 3; ++lag) {
    out[p + lag] = signed_error(data, estimates, i, j, lag);
  }
}

}  // namespace itecp
