#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace itecp {

// Fitted linear regressor on the original feature scale. Immutable once fit;
// prediction is a plain dot product.
struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coef;

  double predict(std::span<const double> row) const {
    double s = intercept;
    for (int p = 0; p < coef.size(); ++p) s += coef[p] * row[static_cast<size_t>(p)];
    return s;
  }
  Eigen::VectorXd predict_all(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
    return (rows * coef).array() + intercept;
  }
};

struct LassoOptions {
  double tol = 1e-7;     // max original-scale coefficient change per sweep
  int max_sweeps = 10000;
};

// Sufficient statistics of (X, y) for squared loss. Supports subtraction so a
// cross-validation fold's training statistics are total minus fold.
class GramStats {
 public:
  explicit GramStats(int p)
      : xtx_(Eigen::MatrixXd::Zero(p, p)), xty_(Eigen::VectorXd::Zero(p)),
        xsum_(Eigen::VectorXd::Zero(p)) {}

  void add_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                const Eigen::Ref<const Eigen::VectorXd>& y);
  GramStats& operator+=(const GramStats& o);
  GramStats& operator-=(const GramStats& o);

  int p() const { return static_cast<int>(xty_.size()); }
  long n() const { return n_; }

  // max_p |<x_p, y - mean(y)>| / n: smallest penalty with an all-zero slope fit.
  double lambda_max() const;

  // Mean squared error of a fitted model over the rows behind these stats.
  double mse(const LinearModel& model) const;

  const Eigen::MatrixXd& xtx() const { return xtx_; }
  const Eigen::VectorXd& xty() const { return xty_; }
  const Eigen::VectorXd& xsum() const { return xsum_; }
  double ysum() const { return ysum_; }
  double yss() const { return yss_; }

 private:
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  Eigen::VectorXd xsum_;
  double ysum_ = 0.0;
  double yss_ = 0.0;
  long n_ = 0;
};

// L1-penalized least squares
//   min (1/2n) sum_i (y_i - b0 - x_i'b)^2 + lambda * ||b||_1
// by cyclic coordinate descent with soft thresholding. Columns are
// standardized internally; coefficients come back on the original scale and
// the intercept is unpenalized. Constant columns get coefficient zero.
LinearModel fit_lasso_gram(const GramStats& stats, double lambda,
                           const LassoOptions& opts = {},
                           const LinearModel* warm = nullptr);

LinearModel fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                      const Eigen::Ref<const Eigen::VectorXd>& targets, double lambda,
                      const LassoOptions& opts = {});

double lasso_lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                        const Eigen::Ref<const Eigen::VectorXd>& targets);

// Descending grid {top * ratio^k, k = 0..size-1}.
std::vector<double> lambda_grid(double top, int size, double ratio = 0.5);

// Penalty selection by K-fold cross validation (folds supplied by the caller).
struct LambdaSpec {
  std::optional<double> fixed;  // skip CV when set
  int grid_size = 11;
  double grid_ratio = 0.5;
  int folds = 5;
};

// Balanced fold labels for n items; items sharing a fold stay together when the
// caller indexes by individual, which keeps folds from splitting individuals.
std::vector<int> fold_assignment(int n_items, int folds, std::uint64_t seed);

}  // namespace itecp
