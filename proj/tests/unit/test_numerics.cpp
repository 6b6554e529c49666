#include <doctest.h>

#include <cmath>

#include "../helpers/test_scenarios.hpp"
#include "organic/numerics.hpp"
#include "organic/rng.hpp"
#include "organic/stats.hpp"

using namespace organic;

namespace {

// 2x2 normal-equation solver; oracle for the hand-checked OLS case.
std::pair<double, double> solve_normal_equations(const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y) {
  const Eigen::Matrix2d xtx = (X.transpose() * X).topLeftCorner(2, 2);
  const Eigen::Vector2d xty = (X.transpose() * y).head(2);
  const Eigen::Vector2d beta = xtx.inverse() * xty;
  return {beta(0), beta(1)};
}

Eigen::MatrixXd design_with_intercept(const Eigen::VectorXd& x) {
  Eigen::MatrixXd design(x.size(), 2);
  design.col(0).setOnes();
  design.col(1) = x;
  return design;
}

}  // namespace

TEST_CASE("ols recovers an exact line") {
  Eigen::VectorXd x(3), y(3);
  x << 0, 1, 2;
  y << 1, 3, 5;
  const RegressionFit fit = fit_ols(design_with_intercept(x), y);
  CHECK(fit.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.dispersion == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("intercept-only ols is the mean") {
  Eigen::MatrixXd X(3, 1);
  X.setOnes();
  Eigen::VectorXd y(3);
  y << 2, 4, 6;
  const RegressionFit fit = fit_ols(X, y);
  CHECK(fit.coefficients(0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("three-point fit matches the hand-solved normal equations") {
  Eigen::VectorXd x(3), y(3);
  x << 0, 1, 3;
  y << 0, 1, 2;
  const Eigen::MatrixXd X = design_with_intercept(x);
  const auto [b0, b1] = solve_normal_equations(X, y);
  // hand solution: X'X = [[3,4],[4,10]], X'y = [3,7] -> beta = (1/7, 9/14)
  CHECK(b0 == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(b1 == doctest::Approx(9.0 / 14.0).epsilon(1e-12));
  const RegressionFit fit = fit_ols(X, y);
  CHECK(fit.coefficients(0) == doctest::Approx(b0).epsilon(1e-12));
  CHECK(fit.coefficients(1) == doctest::Approx(b1).epsilon(1e-12));
}

TEST_CASE("rank-deficient designs are rejected") {
  Eigen::MatrixXd X(3, 2);
  X << 1, 2, 1, 2, 1, 2;  // second column is twice the first
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  CHECK_THROWS_WITH_AS(fit_ols(X, y), doctest::Contains("RankDeficient"), Error);
  CHECK_THROWS_WITH_AS(fit_logistic(X, (y.array() > 1.5).cast<double>()),
                       doctest::Contains("RankDeficient"), Error);
}

TEST_CASE("ols residual orthogonality holds on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CounterStream stream(seed, 99);
    const int n = 40;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    std::uint64_t slot = 0;
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = stats::normal_quantile(stream.uniform(slot++));
      X(i, 2) = stats::normal_quantile(stream.uniform(slot++));
      y(i) = 1.0 + 0.5 * X(i, 1) - 0.25 * X(i, 2) + stats::normal_quantile(stream.uniform(slot++));
    }
    const RegressionFit fit = fit_ols(X, y);
    const Eigen::VectorXd residual = y - X * fit.coefficients;
    const double bound = 1e-8 * X.norm() * y.norm();
    CHECK((X.transpose() * residual).lpNorm<Eigen::Infinity>() <= bound);
  }
}

TEST_CASE("balanced intercept-only logistic gives zero") {
  Eigen::MatrixXd X(10, 1);
  X.setOnes();
  Eigen::VectorXd y(10);
  y << 0, 0, 0, 0, 0, 1, 1, 1, 1, 1;
  const RegressionFit fit = fit_logistic(X, y);
  CHECK(fit.converged);
  CHECK(fit.coefficients(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("intercept-only logistic equals the sample logit") {
  Eigen::MatrixXd X(10, 1);
  X.setOnes();
  Eigen::VectorXd y(10);
  y << 1, 1, 0, 0, 0, 0, 0, 0, 0, 0;
  const RegressionFit fit = fit_logistic(X, y);
  CHECK(fit.coefficients(0) == doctest::Approx(std::log(0.25)).epsilon(1e-8));
}

TEST_CASE("logistic recovers the generating coefficients at n = 50000") {
  const int n = 50000;
  const CounterStream stream(2024, 0);
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const auto slot = static_cast<std::uint64_t>(2 * i);
    const double x = stats::normal_quantile(stream.uniform(slot));
    X(i, 0) = 1.0;
    X(i, 1) = x;
    const double p = stats::sigmoid(-1.0 + 2.0 * x);
    y(i) = stream.uniform(slot + 1) < p ? 1.0 : 0.0;
  }
  const RegressionFit fit = fit_logistic(X, y);
  CHECK(fit.converged);
  CHECK(fit.coefficients(0) == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(0.025));
  // score at the solution is tiny
  CHECK(logistic_score(X, y, fit.coefficients).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("perfect separation is reported") {
  Eigen::MatrixXd X(8, 2);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = i < 4 ? 0.0 : 1.0;
    y(i) = X(i, 1);
  }
  CHECK_THROWS_WITH_AS(fit_logistic(X, y), doctest::Contains("Separation"), Error);
}

TEST_CASE("finite-difference gradient matches the analytic score") {
  const CounterStream stream(7, 1);
  const int n = 200;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  std::uint64_t slot = 0;
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = stats::normal_quantile(stream.uniform(slot++));
    X(i, 2) = stream.uniform(slot++) < 0.4 ? 1.0 : 0.0;
    y(i) = stream.uniform(slot++) < stats::sigmoid(0.3 + 0.8 * X(i, 1) - 0.5 * X(i, 2)) ? 1.0 : 0.0;
  }
  const RegressionFit fit = fit_logistic(X, y);
  const Eigen::VectorXd score = logistic_score(X, y, fit.coefficients);

  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd up = fit.coefficients, down = fit.coefficients;
    up(j) += h;
    down(j) -= h;
    const double numeric =
        (logistic_log_likelihood(X, y, up) - logistic_log_likelihood(X, y, down)) / (2 * h);
    const double scale = std::max(1.0, std::fabs(numeric));
    CHECK(std::fabs(numeric - score(j)) / scale < 1e-4);
  }
}

TEST_CASE("fitters are invariant to row permutations") {
  const Scenario scenario = testhelp::shift_scenario();
  const Dataset d = simulate_two_arm(scenario, 400, 0.5, 5);
  Eigen::MatrixXd X(d.n(), 3);
  Eigen::VectorXd y_cont = d.outcome();
  Eigen::VectorXd y_bin(d.n());
  for (int i = 0; i < d.n(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = d.mediator()(i);
    X(i, 2) = d.covariates()(i, 0);
    y_bin(i) = d.outcome()(i) > 0.5 ? 1.0 : 0.0;
  }
  const Dataset shuffled = testhelp::shuffled(d, 17);
  Eigen::MatrixXd Xs(d.n(), 3);
  Eigen::VectorXd ys_cont = shuffled.outcome();
  Eigen::VectorXd ys_bin(d.n());
  for (int i = 0; i < d.n(); ++i) {
    Xs(i, 0) = 1.0;
    Xs(i, 1) = shuffled.mediator()(i);
    Xs(i, 2) = shuffled.covariates()(i, 0);
    ys_bin(i) = shuffled.outcome()(i) > 0.5 ? 1.0 : 0.0;
  }

  const RegressionFit a = fit_ols(X, y_cont);
  const RegressionFit b = fit_ols(Xs, ys_cont);
  CHECK((a.coefficients - b.coefficients).lpNorm<Eigen::Infinity>() < 1e-10);

  const RegressionFit la = fit_logistic(X, y_bin);
  const RegressionFit lb = fit_logistic(Xs, ys_bin);
  CHECK((la.coefficients - lb.coefficients).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("covariance matrices are symmetric positive semi-definite") {
  Eigen::VectorXd x(5), y(5);
  x << 0, 1, 2, 3, 4;
  y << 0.1, 1.2, 1.9, 3.3, 3.8;
  const RegressionFit fit = fit_ols(design_with_intercept(x), y);
  CHECK((fit.covariance - fit.covariance.transpose()).norm() < 1e-12);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(fit.covariance);
  CHECK(eigen.eigenvalues().minCoeff() >= -1e-12);
}
