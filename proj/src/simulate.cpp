#include "itecp/simulate.hpp"

#include <cmath>
#include <numbers>

#include "itecp/csv.hpp"
#include "itecp/error.hpp"
#include "itecp/parallel.hpp"
#include "itecp/rng.hpp"

namespace itecp {

namespace {

double dot_padded(const std::vector<double>& coef, const double* x, int p) {
  double s = 0.0;
  const int k = std::min<int>(static_cast<int>(coef.size()), p);
  for (int q = 0; q < k; ++q) s += coef[q] * x[q];
  return s;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void SimConfig::validate() const {
  if (n_individuals < 1) throw ConfigError("n_individuals must be positive");
  if (n_points < 1) throw ConfigError("n_points must be positive");
  if (n_covariates < 1) throw ConfigError("n_covariates must be positive");
  if (!(rho >= 0.0) || !(rho < 1.0)) throw ConfigError("rho must be in [0,1)");
  if (!(std::fabs(ar_coeff) < 1.0)) throw ConfigError("ar_coeff must satisfy |ar_coeff| < 1");
  if (!(sigma_y > 0.0)) throw ConfigError("sigma_y must be positive");
  if (!(cov_noise_var1 >= 0.0)) throw ConfigError("cov_noise_var1 must be non-negative");
  if (!(cov_noise_var2 >= 0.0)) throw ConfigError("cov_noise_var2 must be non-negative");
  if (changepoint && (*changepoint <= 1 || *changepoint > n_points)) {
    throw ConfigError("changepoint must be in (1, n_points]");
  }
  if (outcome_kind == OutcomeKind::NonLinear && n_covariates < 2) {
    throw ConfigError("outcome_kind nonlinear needs n_covariates >= 2");
  }
  for (const auto& [name, coef] :
       {std::pair{"beta", &beta}, {"theta2", &theta2}, {"theta4", &theta4},
        {"theta2_post", &theta2_post}, {"theta4_post", &theta4_post}}) {
    if (static_cast<int>(coef->size()) > n_covariates) {
      throw ConfigError(std::string(name) + " has more entries than n_covariates");
    }
  }
}

PanelDataset generate(const SimConfig& config, int n_threads) {
  config.validate();

  const int n = config.n_individuals;
  const int t_count = config.n_points;
  const int p = config.n_covariates;
  const size_t cells = static_cast<size_t>(n) * t_count;

  std::vector<double> covariates(cells * p);
  std::vector<std::int8_t> actions(cells);
  std::vector<double> outcomes(cells);
  std::vector<double> propensities(cells);
  PotentialOutcomes po;
  po.y0.resize(cells);
  po.y1.resize(cells);

  const double innovation_sd =
      config.noise_as_variance ? std::sqrt(config.sigma_y) : config.sigma_y;
  const double stationary_sd =
      innovation_sd / std::sqrt(1.0 - config.ar_coeff * config.ar_coeff);
  const double sd1 = std::sqrt(config.cov_noise_var1);
  const double sd2 = std::sqrt(config.cov_noise_var2);
  const double sqrt_rho = std::sqrt(config.rho);
  const double sqrt_1mrho = std::sqrt(1.0 - config.rho);
  const int t_change = config.changepoint.value_or(t_count + 1);

  parallel_for(n, n_threads, [&](int i) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
    std::vector<double> x(p);        // transformed covariates at the current point
    std::vector<double> x_prev(p);
    std::vector<double> e1(p), e2(p);

    // Initial decision point: equicorrelated latent Gaussians pushed through Phi.
    const double z_common = rng.normal();
    for (int q = 0; q < p; ++q) {
      x[q] = norm_cdf(sqrt_rho * z_common + sqrt_1mrho * rng.normal());
    }
    double eps_trt = stationary_sd * rng.normal();
    double eps_y = stationary_sd * rng.normal();

    int prev_a = 0;       // A_0 = 0
    double prev_pi = 0.0; // makes the theta1 and epsilon2 terms vanish at t = 1

    for (int t = 1; t <= t_count; ++t) {
      if (t > 1) {
        std::swap(x, x_prev);
        for (int q = 0; q < p; ++q) e1[q] = sd1 * rng.normal();
        for (int q = 0; q < p; ++q) e2[q] = sd2 * rng.normal();
        const double drift = config.gamma0 * prev_a;
        const double shock = prev_a - prev_pi;
        for (int q = 0; q < p; ++q) {
          x[q] = norm_cdf(config.gamma * x_prev[q] + drift + e1[q] + shock * e2[q]);
        }
        eps_trt = config.ar_coeff * eps_trt + innovation_sd * rng.normal();
        eps_y = config.ar_coeff * eps_y + innovation_sd * rng.normal();
      }

      const double pi =
          logistic(dot_padded(config.beta, x.data(), p) + config.beta0 * prev_a);
      const int a = rng.bernoulli(pi) ? 1 : 0;

      const bool post = t > t_change;
      const auto& th2 = post ? config.theta2_post : config.theta2;
      const auto& th4 = post ? config.theta4_post : config.theta4;
      const double base = config.theta1 * (prev_a - prev_pi) +
                          dot_padded(th2, x.data(), p) + eps_y;
      const double effect = config.theta3 + dot_padded(th4, x.data(), p) + eps_trt;
      double y0 = base + (0.0 - pi) * effect;
      double y1 = base + (1.0 - pi) * effect;
      if (config.outcome_kind == OutcomeKind::NonLinear) {
        const double bump = (x[0] > 0.5 || x[1] > 0.5) ? 1.0 : 0.0;
        const double wave = std::fabs(std::sin(t * std::numbers::pi / 7.0));
        y0 += bump + wave;
        y1 += bump + wave;
      }

      const size_t k = static_cast<size_t>(i) * t_count + (t - 1);
      for (int q = 0; q < p; ++q) covariates[k * p + q] = x[q];
      actions[k] = static_cast<std::int8_t>(a);
      propensities[k] = pi;
      po.y0[k] = y0;
      po.y1[k] = y1;
      outcomes[k] = a ? y1 : y0;

      prev_a = a;
      prev_pi = pi;
    }
  });

  return PanelDataset(n, t_count, p, std::move(covariates), std::move(actions),
                      std::move(outcomes), std::move(propensities), std::move(po), {});
}

}  // namespace itecp
