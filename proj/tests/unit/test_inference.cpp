#include <doctest.h>

#include <cmath>

#include "../helpers/test_scenarios.hpp"
#include "organic/inference.hpp"
#include "organic/simulate.hpp"

using namespace organic;

TEST_CASE("type-7 quantiles interpolate linearly") {
  const std::vector<double> sorted{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_type7(sorted, 0.0) == 1.0);
  CHECK(quantile_type7(sorted, 1.0) == 4.0);
  CHECK(quantile_type7(sorted, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(quantile_type7(sorted, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(quantile_type7(sorted, 1.0 / 3.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("B below two is rejected") {
  const Dataset d = simulate_two_arm(testhelp::fourcell_scenario(), 200, 0.5, 1);
  CHECK_THROWS_WITH_AS(bootstrap(d, EstimatorConfig{}, 1, 0.95, 3),
                       doctest::Contains("InvalidB"), Error);
  CHECK_THROWS_AS(bootstrap(d, EstimatorConfig{}, 50, 1.5, 3), Error);
}

TEST_CASE("constant outcomes give zero standard errors and degenerate intervals") {
  const int n = 120;
  Eigen::VectorXd m(n), y = Eigen::VectorXd::Constant(n, 0.75);
  std::vector<int> arm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    arm[static_cast<std::size_t>(i)] = i % 2;
    m(i) = static_cast<double>(i % 2);
  }
  const Dataset d(Eigen::MatrixXd(n, 0), Eigen::MatrixXd(n, 0), arm, m, y, ArmKind::TwoArm);
  const BootstrapResult result = bootstrap(d, EstimatorConfig{}, 40, 0.95, 5);
  CHECK(result.se.direct == 0.0);
  CHECK(result.ci_lower.direct == result.ci_upper.direct);
  CHECK(result.n_failed == 0);
}

TEST_CASE("the point estimate is the estimator on the original data") {
  const Dataset d = simulate_two_arm(testhelp::fourcell_scenario(), 800, 0.5, 77);
  const EffectEstimate direct_run = run_estimator(d, EstimatorConfig{});
  const BootstrapResult result = bootstrap(d, EstimatorConfig{}, 25, 0.9, 8);
  CHECK(result.point.e_y1_i1 == direct_run.e_y1_i1);
  CHECK(result.point.direct == direct_run.direct);
}

TEST_CASE("bootstrap runs are deterministic in (seed, B)") {
  const Dataset d = simulate_two_arm(testhelp::fourcell_scenario(), 500, 0.5, 99);
  const BootstrapResult a = bootstrap(d, EstimatorConfig{}, 60, 0.95, 4242);
  const BootstrapResult b = bootstrap(d, EstimatorConfig{}, 60, 0.95, 4242);
  CHECK(a.se.direct == b.se.direct);
  CHECK(a.ci_lower.indirect == b.ci_lower.indirect);
  CHECK(a.ci_upper.total == b.ci_upper.total);
  const BootstrapResult c = bootstrap(d, EstimatorConfig{}, 60, 0.95, 4243);
  CHECK(a.se.direct != c.se.direct);
}

TEST_CASE("interval endpoints are ordered and bracket the point estimate typically") {
  const Dataset d = simulate_two_arm(testhelp::fourcell_scenario(), 1500, 0.5, 123);
  const BootstrapResult result = bootstrap(d, EstimatorConfig{}, 200, 0.95, 9);
  CHECK(result.ci_lower.direct <= result.ci_upper.direct);
  CHECK(result.ci_lower.indirect <= result.ci_upper.indirect);
  CHECK(result.se.direct > 0.0);
  CHECK(result.ci_lower.direct <= result.point.direct);
  CHECK(result.point.direct <= result.ci_upper.direct);
}

namespace {

// One (c, m) cell is held by very few treated units, so a known fraction of
// resamples drop it and fail with EmptyStratum.
Dataset fragile_dataset(int copies) {
  std::vector<double> c_col, m_col, y_col;
  std::vector<int> a_col;
  auto push = [&](double c, int a, double m, double y) {
    c_col.push_back(c);
    a_col.push_back(a);
    m_col.push_back(m);
    y_col.push_back(y);
  };
  for (int i = 0; i < 60; ++i) push(0.0, i % 2, 0.0, 0.1 * (i % 3));
  // arm-0 mass at mediator 1 needs treated outcomes there; provide few
  for (int i = 0; i < 6; ++i) push(0.0, 0, 1.0, 0.5);
  for (int i = 0; i < copies; ++i) push(0.0, 1, 1.0, 0.4);
  const auto n = static_cast<Eigen::Index>(c_col.size());
  Eigen::MatrixXd cov(n, 1);
  Eigen::VectorXd m(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, 0) = c_col[static_cast<std::size_t>(i)];
    m(i) = m_col[static_cast<std::size_t>(i)];
    y(i) = y_col[static_cast<std::size_t>(i)];
  }
  return Dataset(std::move(cov), Eigen::MatrixXd(n, 0), a_col, std::move(m), std::move(y),
                 ArmKind::TwoArm);
}

}  // namespace

TEST_CASE("failed replicates are counted and excluded") {
  const Dataset d = fragile_dataset(3);  // ~5% of resamples drop all three rows
  const BootstrapResult result = bootstrap(d, EstimatorConfig{}, 200, 0.95, 31);
  CHECK(result.n_failed > 0);
  CHECK(5 * result.n_failed <= result.B);
  CHECK(result.se.direct > 0.0);
}

TEST_CASE("excess failures raise TooManyFailures") {
  const Dataset d = fragile_dataset(1);  // ~37% of resamples drop the single row
  CHECK_THROWS_WITH_AS(bootstrap(d, EstimatorConfig{}, 100, 0.95, 17),
                       doctest::Contains("TooManyFailures"), Error);
}

TEST_CASE("bootstrap respects the recode flag end to end") {
  const Dataset d = simulate_two_arm(testhelp::fourcell_scenario(), 900, 0.5, 55);
  EstimatorConfig config;
  config.recode = true;
  const BootstrapResult result = bootstrap(d, config, 30, 0.9, 2);
  const EffectEstimate recoded = run_estimator(d, config);
  CHECK(result.point.e_y1_i1 == recoded.e_y1_i1);
}
