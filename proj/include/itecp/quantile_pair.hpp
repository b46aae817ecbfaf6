#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "itecp/pinball.hpp"
#include "itecp/pseudo.hpp"

namespace itecp {

// Lower/upper conditional-quantile models at levels alpha/2 and 1 - alpha/2,
// sharing one feature recipe. Wherever the raw predictions cross, both are
// replaced by their midpoint, so predict() always returns lo <= hi.
struct QuantileModelPair {
  LinearModel lo, hi;
  double tau_lo = 0.025, tau_hi = 0.975;
  double lambda_lo = 0.0, lambda_hi = 0.0;

  std::pair<double, double> predict(std::span<const double> row) const {
    double a = lo.predict(row);
    double b = hi.predict(row);
    if (a > b) a = b = 0.5 * (a + b);
    return {a, b};
  }
};

// Fits both levels on the table's rows. The penalty is chosen per level by
// K-fold CV blocked by individual, minimizing held-out pinball loss; ties go
// to the larger penalty. With fewer than 2 individuals the grid top is used.
QuantileModelPair fit_quantile_pair(const PseudoOutcomeTable& table, double alpha,
                                    const LambdaSpec& lambda_spec, std::uint64_t seed,
                                    int n_threads = 1,
                                    const PinballOptions& final_opts = {});

}  // namespace itecp
