#include "itecp/pinball.hpp"

#include <algorithm>
#include <cmath>

#include "itecp/error.hpp"

namespace itecp {

namespace {

double sample_quantile(Eigen::VectorXd values, double tau) {
  const long n = values.size();
  long k = static_cast<long>(std::ceil(tau * static_cast<double>(n))) - 1;
  k = std::clamp<long>(k, 0, n - 1);
  std::nth_element(values.data(), values.data() + k, values.data() + n);
  return values[k];
}

// Nesterov-smoothed pinball: quadratic of width kappa around the kink.
inline double smoothed_value(double u, double tau, double kappa) {
  if (u >= kappa * tau) return tau * u - 0.5 * kappa * tau * tau;
  if (u <= kappa * (tau - 1.0)) return (tau - 1.0) * u - 0.5 * kappa * (tau - 1.0) * (tau - 1.0);
  return u * u / (2.0 * kappa);
}

inline double smoothed_grad(double u, double tau, double kappa) {
  if (u >= kappa * tau) return tau;
  if (u <= kappa * (tau - 1.0)) return tau - 1.0;
  return u / kappa;
}

}  // namespace

double pinball_objective(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                         const Eigen::Ref<const Eigen::VectorXd>& targets, double tau,
                         double lambda, const LinearModel& model) {
  const Eigen::VectorXd pred = model.predict_all(rows);
  double loss = 0.0;
  for (long i = 0; i < targets.size(); ++i) loss += pinball_loss(targets[i] - pred[i], tau);
  return loss / static_cast<double>(targets.size()) + lambda * model.coef.lpNorm<1>();
}

double pinball_lambda_top(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                          const Eigen::Ref<const Eigen::VectorXd>& targets, double tau) {
  const double q = sample_quantile(targets, tau);
  const long n = targets.size();
  Eigen::VectorXd psi(n);
  for (long i = 0; i < n; ++i) psi[i] = tau - (targets[i] - q < 0.0 ? 1.0 : 0.0);
  const Eigen::VectorXd mean = rows.colwise().mean();
  const Eigen::VectorXd grad =
      (rows.transpose() * psi - mean * psi.sum()) / static_cast<double>(n);
  return grad.cwiseAbs().maxCoeff();
}

LinearModel fit_pinball(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                        const Eigen::Ref<const Eigen::VectorXd>& targets, double tau,
                        double lambda, const PinballOptions& opts, const LinearModel* warm) {
  const long n = rows.rows();
  const int p = static_cast<int>(rows.cols());
  if (n < 2) throw Error("fit_pinball needs at least 2 rows");
  if (!(tau > 0.0) || !(tau < 1.0)) throw Error("tau must be in (0,1)");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be >= 0");
  if (!rows.allFinite() || !targets.allFinite()) throw Error("non-finite input to regression");
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::VectorXd mean = rows.colwise().mean();
  Eigen::VectorXd sd(p);
  std::vector<bool> active(p);
  for (int q = 0; q < p; ++q) {
    const double msq = rows.col(q).squaredNorm() * inv_n;
    const double var = msq - mean[q] * mean[q];
    active[q] = var > 1e-13 * std::max(msq, 1e-300);
    sd[q] = active[q] ? std::sqrt(var) : 1.0;
  }

  // Work in centered standardized coordinates without materializing the
  // standardized matrix: X_std * b = X * (b / sd) - <mean, b / sd>.
  auto linear_part = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
    Eigen::VectorXd v = b.cwiseQuotient(sd);
    for (int q = 0; q < p; ++q) {
      if (!active[q]) v[q] = 0.0;
    }
    Eigen::VectorXd out = rows * v;
    out.array() -= mean.dot(v);
    return out;
  };

  // Spectral bound of [1, X_std] by power iteration; fixed step 1 / L per stage.
  double sigma_sq = 1.0;
  {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(p + 1, 1.0 / std::sqrt(p + 1.0));
    Eigen::VectorXd xb(n), back(p + 1);
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXd slopes = v.tail(p);
      xb = linear_part(slopes);  // X_std * slopes
      xb.array() += v[0];
      back[0] = xb.sum();
      Eigen::VectorXd xtb = rows.transpose() * xb;
      const double bsum = xb.sum();
      for (int q = 0; q < p; ++q) {
        back[q + 1] = active[q] ? (xtb[q] - mean[q] * bsum) / sd[q] : 0.0;
      }
      const double norm = back.norm();
      if (norm == 0.0) break;
      v = back / norm;
      sigma_sq = norm;
    }
  }

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);  // standardized coefficients
  double b0 = sample_quantile(targets, tau);     // centered-intercept start
  if (warm && warm->coef.size() == p) {
    for (int q = 0; q < p; ++q) b[q] = active[q] ? warm->coef[q] * sd[q] : 0.0;
    b0 = warm->intercept + warm->coef.dot(mean);
  }
  Eigen::VectorXd xb = linear_part(b);  // X_std * b

  auto true_objective = [&](double intercept, const Eigen::VectorXd& coef,
                            const Eigen::VectorXd& fitted) {
    double loss = 0.0;
    for (long i = 0; i < n; ++i) loss += pinball_loss(targets[i] - intercept - fitted[i], tau);
    double pen = 0.0;
    for (int q = 0; q < p; ++q) pen += lambda / sd[q] * std::fabs(coef[q]);
    return loss * inv_n + pen;
  };

  double best_obj = true_objective(b0, b, xb);
  Eigen::VectorXd best_b = b;
  double best_b0 = b0;

  long iters_used = 0;
  Eigen::VectorXd b_prev = b, xb_prev = xb;
  double b0_prev = b0;

  for (double kappa = opts.kappa_init; kappa >= opts.kappa_final * (1.0 - 1e-12);
       kappa *= opts.kappa_step) {
    const double step = static_cast<double>(n) * kappa / std::max(sigma_sq, 1e-12);
    double t_momentum = 1.0;
    b_prev = b;
    xb_prev = xb;
    b0_prev = b0;
    double last_obj = true_objective(b0, b, xb);
    int stall = 0;

    while (iters_used < opts.max_iters) {
      ++iters_used;
      // Momentum point (linear combinations keep the fitted values cheap).
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
      const double omega = (t_momentum - 1.0) / t_next;
      Eigen::VectorXd by = b + omega * (b - b_prev);
      double by0 = b0 + omega * (b0 - b0_prev);
      Eigen::VectorXd xby = xb + omega * (xb - xb_prev);

      Eigen::VectorXd g(n);
      for (long i = 0; i < n; ++i) {
        g[i] = smoothed_grad(targets[i] - by0 - xby[i], tau, kappa);
      }
      const double gsum = g.sum();
      Eigen::VectorXd xtg = rows.transpose() * g;

      b_prev = b;
      b0_prev = b0;
      xb_prev = xb;
      t_momentum = t_next;

      b0 = by0 + step * inv_n * gsum;
      for (int q = 0; q < p; ++q) {
        if (!active[q]) {
          b[q] = 0.0;
          continue;
        }
        const double grad_q = -(xtg[q] - mean[q] * gsum) / sd[q] * inv_n;
        const double z = by[q] - step * grad_q;
        const double thr = step * lambda / sd[q];
        b[q] = z > thr ? z - thr : (z < -thr ? z + thr : 0.0);
      }
      xb = linear_part(b);

      const double obj = true_objective(b0, b, xb);
      if (obj < best_obj) {
        best_obj = obj;
        best_b = b;
        best_b0 = b0;
      }
      if (obj > last_obj) {  // function restart
        t_momentum = 1.0;
        b_prev = b;
        b0_prev = b0;
        xb_prev = xb;
      }
      if (std::fabs(obj - last_obj) <= opts.rel_tol * std::max(1.0, std::fabs(obj))) {
        if (++stall >= 2) {
          last_obj = obj;
          break;
        }
      } else {
        stall = 0;
      }
      last_obj = obj;
    }
    if (iters_used >= opts.max_iters) break;
  }

  LinearModel model;
  model.coef.resize(p);
  for (int q = 0; q < p; ++q) model.coef[q] = active[q] ? best_b[q] / sd[q] : 0.0;
  model.intercept = best_b0 - model.coef.dot(mean);
  return model;
}

}  // namespace itecp
