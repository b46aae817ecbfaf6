#include "itecp/lasso.hpp"

#include <cmath>

#include "itecp/error.hpp"
#include "itecp/rng.hpp"

namespace itecp {

namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

}  // namespace

void GramStats::add_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                         const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (rows.rows() != y.size()) throw Error("gram stats: rows/targets size mismatch");
  if (!rows.allFinite() || !y.allFinite()) throw Error("non-finite input to regression");
  xtx_.noalias() += rows.transpose() * rows;
  xty_.noalias() += rows.transpose() * y;
  xsum_ += rows.colwise().sum();
  ysum_ += y.sum();
  yss_ += y.squaredNorm();
  n_ += rows.rows();
}

GramStats& GramStats::operator+=(const GramStats& o) {
  xtx_ += o.xtx_;
  xty_ += o.xty_;
  xsum_ += o.xsum_;
  ysum_ += o.ysum_;
  yss_ += o.yss_;
  n_ += o.n_;
  return *this;
}

GramStats& GramStats::operator-=(const GramStats& o) {
  xtx_ -= o.xtx_;
  xty_ -= o.xty_;
  xsum_ -= o.xsum_;
  ysum_ -= o.ysum_;
  yss_ -= o.yss_;
  n_ -= o.n_;
  return *this;
}

double GramStats::lambda_max() const {
  if (n_ == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n_);
  const double ym = ysum_ * inv_n;
  double top = 0.0;
  for (int p = 0; p < xty_.size(); ++p) {
    top = std::max(top, std::fabs(xty_[p] * inv_n - xsum_[p] * inv_n * ym));
  }
  return top;
}

double GramStats::mse(const LinearModel& model) const {
  const double b0 = model.intercept;
  const Eigen::VectorXd& b = model.coef;
  double sse = yss_ - 2.0 * b0 * ysum_ - 2.0 * b.dot(xty_) + 2.0 * b0 * b.dot(xsum_) +
               b0 * b0 * static_cast<double>(n_) + b.dot(xtx_ * b);
  return std::max(sse, 0.0) / static_cast<double>(n_);
}

LinearModel fit_lasso_gram(const GramStats& stats, double lambda, const LassoOptions& opts,
                           const LinearModel* warm) {
  if (stats.n() < 2) throw Error("fit_lasso needs at least 2 rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be >= 0");
  const int p = stats.p();
  const double inv_n = 1.0 / static_cast<double>(stats.n());
  const double ym = stats.ysum() * inv_n;

  // Standardize through the statistics: correlations R, gradient g, per-column
  // penalty lambda / sd so the objective stays on the original scale.
  Eigen::VectorXd mean = stats.xsum() * inv_n;
  Eigen::VectorXd sd(p);
  std::vector<bool> active(p);
  for (int q = 0; q < p; ++q) {
    const double msq = stats.xtx()(q, q) * inv_n;
    const double var = msq - mean[q] * mean[q];
    active[q] = var > 1e-13 * std::max(msq, 1e-300);
    sd[q] = active[q] ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd corr(p, p);
  for (int q = 0; q < p; ++q) {
    for (int r = 0; r <= q; ++r) {
      const double cov = stats.xtx()(q, r) * inv_n - mean[q] * mean[r];
      corr(q, r) = corr(r, q) = cov / (sd[q] * sd[r]);
    }
    corr(q, q) = 1.0;
  }
  Eigen::VectorXd g(p);
  for (int q = 0; q < p; ++q) g[q] = (stats.xty()[q] * inv_n - mean[q] * ym) / sd[q];
  const double var_y = std::max(stats.yss() * inv_n - ym * ym, 0.0);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);  // standardized-scale coefficients
  if (warm && warm->coef.size() == p) {
    for (int q = 0; q < p; ++q) b[q] = active[q] ? warm->coef[q] * sd[q] : 0.0;
  }
  Eigen::VectorXd h = corr * b;  // running R*b

  auto objective = [&] {
    double quad = 0.5 * (var_y - 2.0 * b.dot(g) + b.dot(h));
    double pen = 0.0;
    for (int q = 0; q < p; ++q) pen += lambda / sd[q] * std::fabs(b[q]);
    return quad + pen;
  };

  double prev_obj = objective();
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int q = 0; q < p; ++q) {
      if (!active[q]) continue;
      const double z = g[q] - h[q] + b[q];
      const double updated = soft_threshold(z, lambda / sd[q]);
      const double delta = updated - b[q];
      if (delta != 0.0) {
        b[q] = updated;
        h.noalias() += delta * corr.col(q);
        max_change = std::max(max_change, std::fabs(delta) / sd[q]);
      }
    }
    const double obj = objective();
    if (obj > prev_obj + 1e-10 * (1.0 + std::fabs(prev_obj))) {
      throw std::logic_error("coordinate descent objective increased");
    }
    prev_obj = obj;
    if (max_change < opts.tol) break;
  }

  LinearModel model;
  model.coef.resize(p);
  for (int q = 0; q < p; ++q) model.coef[q] = active[q] ? b[q] / sd[q] : 0.0;
  model.intercept = ym - model.coef.dot(mean);
  return model;
}

LinearModel fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                      const Eigen::Ref<const Eigen::VectorXd>& targets, double lambda,
                      const LassoOptions& opts) {
  GramStats stats(static_cast<int>(rows.cols()));
  stats.add_rows(rows, targets);
  return fit_lasso_gram(stats, lambda, opts);
}

double lasso_lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                        const Eigen::Ref<const Eigen::VectorXd>& targets) {
  GramStats stats(static_cast<int>(rows.cols()));
  stats.add_rows(rows, targets);
  return stats.lambda_max();
}

std::vector<double> lambda_grid(double top, int size, double ratio) {
  std::vector<double> grid;
  grid.reserve(size);
  double v = top;
  for (int k = 0; k < size; ++k, v *= ratio) grid.push_back(v);
  return grid;
}

std::vector<int> fold_assignment(int n_items, int folds, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<int> order = shuffled_indices(n_items, rng);
  std::vector<int> fold(n_items);
  for (int pos = 0; pos < n_items; ++pos) {
    fold[order[pos]] = static_cast<int>(static_cast<long>(pos) * folds / n_items);
  }
  return fold;
}

}  // namespace itecp
