#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "itecp/error.hpp"
#include "itecp/lasso.hpp"
#include "itecp/rng.hpp"
#include "oracles.hpp"

using namespace itecp;

namespace {

Eigen::MatrixXd random_matrix(int n, int p, Rng& rng) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int q = 0; q < p; ++q) x(i, q) = rng.normal();
  }
  return x;
}

}  // namespace

TEST_CASE("unpenalized fit recovers an exact linear relationship") {
  Rng rng(1);
  const int n = 50;
  Eigen::MatrixXd x = random_matrix(n, 3, rng);
  Eigen::VectorXd y = 2.0 * x.col(0);
  const LinearModel model = fit_lasso(x, y, 0.0);
  CHECK(model.coef[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::fabs(model.coef[1]) < 1e-6);
  CHECK(std::fabs(model.coef[2]) < 1e-6);
}

TEST_CASE("penalties at or above lambda_max zero every slope exactly") {
  Rng rng(2);
  const int n = 80;
  Eigen::MatrixXd x = random_matrix(n, 6, rng);
  Eigen::VectorXd y = x.col(0) - 0.5 * x.col(3);
  for (int q = 0; q < 6; ++q) y += 0.05 * random_matrix(n, 1, rng).col(0);

  const double top = lasso_lambda_max(x, y);
  const LinearModel at = fit_lasso(x, y, top);
  const LinearModel above = fit_lasso(x, y, 1.5 * top);
  for (int q = 0; q < 6; ++q) {
    CHECK(at.coef[q] == 0.0);
    CHECK(above.coef[q] == 0.0);
  }
  CHECK(at.intercept == doctest::Approx(y.mean()).epsilon(1e-12));
  // Brute-force subgradient check: the zero solution satisfies KKT at the top.
  CHECK(oracles::lasso_kkt_violation(x, y, top, at) < 1e-10);
  // Just below the threshold some slope activates.
  const LinearModel below = fit_lasso(x, y, 0.99 * top);
  CHECK(below.coef.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("orthonormal designs reduce to soft thresholding") {
  Rng rng(3);
  const int n = 64, p = 5;
  Eigen::MatrixXd g = random_matrix(n, p, rng);
  g.rowwise() -= g.colwise().mean();
  // Orthonormalize the centered columns, then scale so <x_q, x_q>/n = 1.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  q.rowwise() -= q.colwise().mean();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr2(q);
  Eigen::MatrixXd x = qr2.householderQ() * Eigen::MatrixXd::Identity(n, p) *
                      std::sqrt(static_cast<double>(n));

  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal() + 0.8 * x(i, 1) - 0.3 * x(i, 4);

  const double lambda = 0.2;
  const LinearModel model = fit_lasso(x, y, lambda);
  for (int qi = 0; qi < p; ++qi) {
    const double ols = x.col(qi).dot(y - Eigen::VectorXd::Constant(n, y.mean())) / n;
    const double expected =
        ols > lambda ? ols - lambda : (ols < -lambda ? ols + lambda : 0.0);
    CHECK(model.coef[qi] == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("random instances satisfy the KKT conditions") {
  Rng rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 30 + static_cast<int>(rng.bounded(90));
    const int p = 2 + static_cast<int>(rng.bounded(12));
    Eigen::MatrixXd x = random_matrix(n, p, rng);
    // Correlate the columns to sharpen the test.
    for (int q = 1; q < p; ++q) x.col(q) = 0.6 * x.col(q - 1) + 0.8 * x.col(q);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = x(i, 0) - x(i, p - 1) + 0.3 * rng.normal();
    const double lambda = lasso_lambda_max(x, y) * std::pow(0.5, 1 + rng.bounded(8));
    const LinearModel model = fit_lasso(x, y, lambda);
    CHECK(oracles::lasso_kkt_violation(x, y, lambda, model) < 1e-5);
  }
}

TEST_CASE("fitting is deterministic") {
  Rng rng(5);
  Eigen::MatrixXd x = random_matrix(60, 8, rng);
  Eigen::VectorXd y = x.col(2) + x.col(5);
  const LinearModel a = fit_lasso(x, y, 0.01);
  const LinearModel b = fit_lasso(x, y, 0.01);
  CHECK(a.intercept == b.intercept);
  for (int q = 0; q < 8; ++q) CHECK(a.coef[q] == b.coef[q]);
}

TEST_CASE("constant columns get a zero coefficient") {
  Rng rng(6);
  Eigen::MatrixXd x = random_matrix(40, 3, rng);
  x.col(1).setConstant(2.5);
  Eigen::VectorXd y = x.col(0);
  const LinearModel model = fit_lasso(x, y, 0.01);
  CHECK(model.coef[1] == 0.0);
  CHECK(std::isfinite(model.intercept));
}

TEST_CASE("non-finite inputs are rejected") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  CHECK_THROWS_AS(fit_lasso(x, y, 0.1), Error);
}

TEST_CASE("gram statistics subtract cleanly for fold unions") {
  Rng rng(7);
  Eigen::MatrixXd x = random_matrix(30, 4, rng);
  Eigen::VectorXd y = x.col(0) - x.col(2);

  GramStats total(4), part(4), rest(4);
  total.add_rows(x, y);
  part.add_rows(x.topRows(10), y.head(10));
  rest.add_rows(x.bottomRows(20), y.tail(20));
  GramStats derived = total;
  derived -= part;

  const LinearModel a = fit_lasso_gram(derived, 0.05);
  const LinearModel b = fit_lasso_gram(rest, 0.05);
  CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-9));
  for (int q = 0; q < 4; ++q) {
    CHECK(a.coef[q] == doctest::Approx(b.coef[q]).epsilon(1e-9));
  }
}

TEST_CASE("fold assignment is balanced and keeps determinism") {
  const auto folds = fold_assignment(23, 5, 11);
  std::vector<int> counts(5, 0);
  for (int f : folds) {
    REQUIRE(f >= 0);
    REQUIRE(f < 5);
    ++counts[f];
  }
  for (int c : counts) CHECK(std::abs(c - 23 / 5) <= 1);
  CHECK(folds == fold_assignment(23, 5, 11));
  CHECK(folds != fold_assignment(23, 5, 12));
}
