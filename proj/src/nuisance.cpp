#include "itecp/nuisance.hpp"

#include <limits>

#include "itecp/error.hpp"
#include "itecp/features.hpp"
#include "itecp/parallel.hpp"
#include "itecp/rng.hpp"

namespace itecp {

double NuisanceEstimates::mu_hat(const PanelDataset& data, int i, int j, int arm) const {
  // Coefficient layout mirrors nuisance_features: the arm enters through the
  // A_t slot and the interaction block, so both arms come from one pass.
  const int p = data.n_covariates();
  const auto x = data.covariate_row(i, j);
  const Eigen::VectorXd& c = joint.coef;
  double main = joint.intercept + c[p + 1] * data.action_before(i, j);
  double arm_part = c[p];
  for (int q = 0; q < p; ++q) {
    main += c[q] * x[q];
    arm_part += c[p + 2 + q] * x[q];
  }
  return main + arm * arm_part;
}

NuisanceEstimates estimate_nuisance(const PanelDataset& data, const TrainingSplit& split,
                                    const LambdaSpec& lambda_spec, std::uint64_t seed,
                                    int n_threads) {
  const auto& ids = split.nuisance_ids;
  if (ids.empty()) throw ConfigError("nuisance set is empty");
  const int horizon = split.train_horizon;
  const int width = nuisance_feature_count(data.n_covariates());

  const int n_ids = static_cast<int>(ids.size());
  const int folds = lambda_spec.fixed ? 1 : std::min(lambda_spec.folds, n_ids);
  const std::vector<int> fold_of =
      folds > 1 ? fold_assignment(n_ids, folds, derive_seed(seed, 0xCF01))
                : std::vector<int>(n_ids, 0);

  // One pass over the rows; per-fold sufficient statistics so every CV
  // training set is total minus fold.
  std::vector<GramStats> fold_stats(folds, GramStats(width));
  {
    Eigen::MatrixXd rows(horizon, width);
    Eigen::VectorXd y(horizon);
    std::vector<double> buf(width);
    for (int k = 0; k < n_ids; ++k) {
      const int i = ids[k];
      for (int j = 1; j <= horizon; ++j) {
        nuisance_features(data, i, j, std::nullopt, buf);
        for (int q = 0; q < width; ++q) rows(j - 1, q) = buf[q];
        y[j - 1] = data.outcome(i, j);
      }
      fold_stats[fold_of[k]].add_rows(rows, y);
    }
  }
  GramStats total(width);
  for (const auto& fs : fold_stats) total += fs;

  double lambda;
  if (lambda_spec.fixed) {
    lambda = *lambda_spec.fixed;
  } else {
    const std::vector<double> grid =
        lambda_grid(total.lambda_max(), lambda_spec.grid_size, lambda_spec.grid_ratio);
    std::vector<std::vector<double>> fold_sse(folds,
                                              std::vector<double>(grid.size(), 0.0));
    parallel_for(folds, n_threads, [&](int f) {
      GramStats train = total;
      train -= fold_stats[f];
      LinearModel warm;
      for (size_t k = 0; k < grid.size(); ++k) {
        warm = fit_lasso_gram(train, grid[k], {}, k == 0 ? nullptr : &warm);
        fold_sse[f][k] =
            fold_stats[f].mse(warm) * static_cast<double>(fold_stats[f].n());
      }
    });
    size_t best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < grid.size(); ++k) {
      double loss = 0.0;
      for (int f = 0; f < folds; ++f) loss += fold_sse[f][k];
      if (loss < best_loss) {
        best_loss = loss;
        best = k;
      }
    }
    lambda = grid[best];
  }

  NuisanceEstimates out;
  out.lambda = lambda;
  out.joint = fit_lasso_gram(total, lambda);
  return out;
}

}  // namespace itecp
