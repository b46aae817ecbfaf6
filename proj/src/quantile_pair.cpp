#include "itecp/quantile_pair.hpp"

#include <algorithm>
#include <limits>

#include "itecp/error.hpp"
#include "itecp/parallel.hpp"
#include "itecp/rng.hpp"

namespace itecp {

QuantileModelPair fit_quantile_pair(const PseudoOutcomeTable& table, double alpha,
                                    const LambdaSpec& lambda_spec, std::uint64_t seed,
                                    int n_threads, const PinballOptions& final_opts) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
  const long n = static_cast<long>(table.entries.size());
  if (n < 2) throw ConfigError("quantile regression needs at least 2 rows");

  QuantileModelPair pair;
  pair.tau_lo = alpha / 2.0;
  pair.tau_hi = 1.0 - alpha / 2.0;
  const double taus[2] = {pair.tau_lo, pair.tau_hi};

  const Eigen::VectorXd y = table.values();
  const Eigen::MatrixXd& x = table.features;

  double chosen[2];
  if (lambda_spec.fixed) {
    chosen[0] = chosen[1] = *lambda_spec.fixed;
  } else {
    // Distinct individuals, in order of first appearance (entries are grouped).
    std::vector<int> ids;
    std::vector<int> id_pos(n);  // index into ids per row
    for (long r = 0; r < n; ++r) {
      const int individual = table.entries[r].individual;
      if (ids.empty() || ids.back() != individual) ids.push_back(individual);
      id_pos[r] = static_cast<int>(ids.size()) - 1;
    }
    const int n_ids = static_cast<int>(ids.size());
    const int folds = std::min(lambda_spec.folds, n_ids);

    std::vector<std::vector<double>> grids(2);
    for (int level = 0; level < 2; ++level) {
      grids[level] = lambda_grid(pinball_lambda_top(x, y, taus[level]),
                                 lambda_spec.grid_size, lambda_spec.grid_ratio);
    }

    if (folds < 2) {
      chosen[0] = grids[0].front();
      chosen[1] = grids[1].front();
    } else {
      const std::vector<int> fold_of =
          fold_assignment(n_ids, folds, derive_seed(seed, 0xCF02));
      std::vector<std::vector<double>> loss(
          2, std::vector<double>(lambda_spec.grid_size, 0.0));

      for (int f = 0; f < folds; ++f) {
        std::vector<long> train_rows, held_rows;
        for (long r = 0; r < n; ++r) {
          (fold_of[id_pos[r]] == f ? held_rows : train_rows).push_back(r);
        }
        Eigen::MatrixXd xt(train_rows.size(), x.cols());
        Eigen::VectorXd yt(train_rows.size());
        for (size_t r = 0; r < train_rows.size(); ++r) {
          xt.row(r) = x.row(train_rows[r]);
          yt[r] = y[train_rows[r]];
        }
        Eigen::MatrixXd xh(held_rows.size(), x.cols());
        Eigen::VectorXd yh(held_rows.size());
        for (size_t r = 0; r < held_rows.size(); ++r) {
          xh.row(r) = x.row(held_rows[r]);
          yh[r] = y[held_rows[r]];
        }

        parallel_for(2, n_threads, [&](int level) {
          LinearModel warm;
          const PinballOptions cv_opts = PinballOptions::cv();
          for (size_t k = 0; k < grids[level].size(); ++k) {
            warm = fit_pinball(xt, yt, taus[level], grids[level][k], cv_opts,
                               k == 0 ? nullptr : &warm);
            const Eigen::VectorXd pred = warm.predict_all(xh);
            double held_loss = 0.0;
            for (long r = 0; r < yh.size(); ++r) {
              held_loss += pinball_loss(yh[r] - pred[r], taus[level]);
            }
            loss[level][k] += held_loss;
          }
        });
      }
      for (int level = 0; level < 2; ++level) {
        size_t best = 0;
        double best_loss = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < grids[level].size(); ++k) {
          if (loss[level][k] < best_loss) {
            best_loss = loss[level][k];
            best = k;
          }
        }
        chosen[level] = grids[level][best];
      }
    }
  }

  LinearModel fitted[2];
  parallel_for(2, n_threads, [&](int level) {
    fitted[level] = fit_pinball(x, y, taus[level], chosen[level], final_opts);
  });
  pair.lo = fitted[0];
  pair.hi = fitted[1];
  pair.lambda_lo = chosen[0];
  pair.lambda_hi = chosen[1];
  return pair;
}

}  // namespace itecp
