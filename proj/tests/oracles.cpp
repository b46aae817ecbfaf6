#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "itecp/pinball.hpp"

namespace oracles {

double weighted_quantile_scan(std::span<const double> scores,
                              std::span<const double> weights, double w_inf,
                              double level) {
  (void)w_inf;
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(scores.size());
  for (size_t k = 0; k < scores.size(); ++k) pairs.emplace_back(scores[k], weights[k]);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  long double cum = 0.0L;
  for (const auto& [value, weight] : pairs) {
    cum += weight;
    if (static_cast<double>(cum) >= level - 1e-9) return value;
  }
  return std::numeric_limits<double>::infinity();
}

int classical_order_index(int n, double alpha) {
  const int k = static_cast<int>(std::ceil((1.0 - alpha) * (n + 1) - 1e-12));
  return k > n ? 0 : k;
}

double intercept_pinball_min(std::span<const double> y, double tau) {
  double best = std::numeric_limits<double>::infinity();
  for (double c : y) {
    double loss = 0.0;
    for (double v : y) loss += itecp::pinball_loss(v - c, tau);
    best = std::min(best, loss / static_cast<double>(y.size()));
  }
  return best;
}

namespace {

double pinball_l1_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            double tau, double lambda, const Eigen::VectorXd& z) {
  // z = (b0, b)
  double loss = 0.0;
  for (long i = 0; i < y.size(); ++i) {
    double pred = z[0];
    for (long q = 0; q < x.cols(); ++q) pred += x(i, q) * z[q + 1];
    loss += itecp::pinball_loss(y[i] - pred, tau);
  }
  double pen = 0.0;
  for (long q = 1; q < z.size(); ++q) pen += std::fabs(z[q]);
  return loss / static_cast<double>(y.size()) + lambda * pen;
}

}  // namespace

double pinball_l1_vertex_min(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             double tau, double lambda) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const int d = p + 1;
  const int planes = n + p;

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(d);
  // All subsets of size d from the hyperplane set, in lexicographic order.
  std::iota(pick.begin(), pick.end(), 0);
  for (;;) {
    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd c(d);
    for (int r = 0; r < d; ++r) {
      const int plane = pick[r];
      if (plane < n) {  // residual_plane = 0
        a(r, 0) = 1.0;
        for (int q = 0; q < p; ++q) a(r, q + 1) = x(plane, q);
        c[r] = y[plane];
      } else {  // b_{plane - n} = 0
        a.row(r).setZero();
        a(r, plane - n + 1) = 1.0;
        c[r] = 0.0;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) {
      const Eigen::VectorXd z = lu.solve(c);
      best = std::min(best, pinball_l1_objective(x, y, tau, lambda, z));
    }

    int r = d - 1;
    while (r >= 0 && pick[r] == planes - d + r) --r;
    if (r < 0) break;
    ++pick[r];
    for (int s = r + 1; s < d; ++s) pick[s] = pick[s - 1] + 1;
  }
  return best;
}

double lasso_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           double lambda, const itecp::LinearModel& model) {
  const long n = y.size();
  const Eigen::VectorXd residual =
      y - (x * model.coef).eval() - Eigen::VectorXd::Constant(n, model.intercept);
  double worst = std::fabs(residual.mean());
  for (long q = 0; q < x.cols(); ++q) {
    const double grad = -x.col(q).dot(residual) / static_cast<double>(n);
    if (model.coef[q] == 0.0) {
      worst = std::max(worst, std::fabs(grad) - lambda);
    } else {
      worst = std::max(worst, std::fabs(grad + lambda * (model.coef[q] > 0 ? 1.0 : -1.0)));
    }
  }
  return worst;
}

bool mcx_bruteforce(std::span<const double> phi, std::span<const double> star,
                    double tol) {
  auto mean = [](std::span<const double> v) {
    double s = 0.0;
    for (double u : v) s += u;
    return s / static_cast<double>(v.size());
  };
  if (mean(phi) < mean(star) - tol) return false;

  auto hinge = [](std::span<const double> v, double c) {
    double s = 0.0;
    for (double u : v) s += std::max(u - c, 0.0);
    return s / static_cast<double>(v.size());
  };
  std::vector<double> grid(phi.begin(), phi.end());
  grid.insert(grid.end(), star.begin(), star.end());
  for (double c : grid) {
    if (hinge(phi, c) < hinge(star, c) - tol) return false;
  }
  return true;
}

}  // namespace oracles
