#pragma once

#include <Eigen/Dense>

#include "itecp/lasso.hpp"

namespace itecp {

// rho_tau(u) = u * (tau - 1{u < 0})
inline double pinball_loss(double u, double tau) {
  return u >= 0.0 ? tau * u : (tau - 1.0) * u;
}

// (1/n) sum rho_tau(y - b0 - x'b) + lambda ||b||_1 on the original scale.
double pinball_objective(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                         const Eigen::Ref<const Eigen::VectorXd>& targets, double tau,
                         double lambda, const LinearModel& model);

struct PinballOptions {
  double rel_tol = 1e-8;    // stage stops when the objective stalls at this rate
  long max_iters = 50000;   // total across annealing stages
  double kappa_init = 1e-2; // quadratic smoothing width, annealed downward
  double kappa_final = 1e-6;
  double kappa_step = 0.1;

  // Lighter preset for cross-validation fits; penalty selection does not need
  // the final stages of the anneal.
  static PinballOptions cv() {
    PinballOptions o;
    o.rel_tol = 1e-6;
    o.max_iters = 4000;
    o.kappa_final = 1e-4;
    return o;
  }
};

// L1-penalized pinball regression via proximal gradient (FISTA) on a smoothed
// loss, annealing the smoothing width. Columns are standardized internally;
// the intercept is unpenalized and the returned coefficients are on the
// original scale. The iterate with the best true (unsmoothed) objective wins,
// so the result is never worse than the tau-quantile intercept-only fit it
// starts from.
LinearModel fit_pinball(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                        const Eigen::Ref<const Eigen::VectorXd>& targets, double tau,
                        double lambda, const PinballOptions& opts = {},
                        const LinearModel* warm = nullptr);

// Grid top for the penalty: slope subgradient magnitude at the intercept-only fit.
double pinball_lambda_top(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                          const Eigen::Ref<const Eigen::VectorXd>& targets, double tau);

}  // namespace itecp
