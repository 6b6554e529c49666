#include "organic/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "organic/stats.hpp"

namespace organic {

namespace {

constexpr int kMinStratumArm = 5;          // smaller strata are flagged, not tested
constexpr long long kExactCutoff = 10000;  // exact KS p when n1*n2 <= this

// Largest |i*n2 - j*n1| over the merged sample walk; D = value / (n1*n2).
long long ks_statistic_scaled(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n1 = static_cast<long long>(a.size());
  const auto n2 = static_cast<long long>(b.size());
  long long best = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    const double v = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::llabs(static_cast<long long>(i) * n2 - static_cast<long long>(j) * n1));
  }
  return best;
}

// P(D >= d) by counting monotone lattice paths that stay strictly inside the
// band |i*n2 - j*n1| < d_scaled, relative to all C(n1+n2, n1) paths.
double ks_exact_p(long long d_scaled, int n1, int n2) {
  if (d_scaled <= 0) return 1.0;
  const long long limit = d_scaled;
  std::vector<double> row(static_cast<std::size_t>(n2) + 1, 0.0);
  double log_scale = 0.0;

  row[0] = 1.0;
  for (int j = 1; j <= n2; ++j) {
    const bool ok = std::llabs(-static_cast<long long>(j) * n1) < limit;
    row[static_cast<std::size_t>(j)] = ok ? row[static_cast<std::size_t>(j - 1)] : 0.0;
  }
  for (int i = 1; i <= n1; ++i) {
    std::vector<double> next(static_cast<std::size_t>(n2) + 1, 0.0);
    next[0] = std::llabs(static_cast<long long>(i) * n2) < limit ? row[0] : 0.0;
    for (int j = 1; j <= n2; ++j) {
      const bool ok = std::llabs(static_cast<long long>(i) * n2 - static_cast<long long>(j) * n1) < limit;
      next[static_cast<std::size_t>(j)] =
          ok ? next[static_cast<std::size_t>(j - 1)] + row[static_cast<std::size_t>(j)] : 0.0;
    }
    const double peak = *std::max_element(next.begin(), next.end());
    if (peak > 1e280) {
      for (double& x : next) x /= 1e280;
      log_scale += std::log(1e280);
    }
    row = std::move(next);
  }

  const double inside = row[static_cast<std::size_t>(n2)];
  if (inside <= 0.0) return 1.0;
  const double log_inside = std::log(inside) + log_scale;
  const double log_total = std::lgamma(static_cast<double>(n1 + n2 + 1)) -
                           std::lgamma(static_cast<double>(n1 + 1)) -
                           std::lgamma(static_cast<double>(n2 + 1));
  return std::clamp(1.0 - std::exp(log_inside - log_total), 0.0, 1.0);
}

// Kolmogorov tail Q(lambda) = 2 sum_j (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double a2 = -2.0 * lambda * lambda;
  double sum = 0.0, sign = 2.0, previous = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(a2 * static_cast<double>(j) * static_cast<double>(j));
    sum += term;
    if (std::fabs(term) <= 1e-3 * std::fabs(previous) || std::fabs(term) <= 1e-12 * std::fabs(sum)) {
      return std::clamp(sum, 0.0, 1.0);
    }
    previous = term;
    sign = -sign;
  }
  return 1.0;  // series failed to settle; conservative
}

std::string format_key(const std::vector<double>& key) {
  std::string out = "(";
  for (std::size_t j = 0; j < key.size(); ++j) {
    if (j > 0) out += ", ";
    out += format_double(key[j]);
  }
  return out + ")";
}

CheckReport pooled_ks_report(CheckCondition condition,
                             std::map<std::vector<double>, std::array<std::vector<double>, 2>>&& strata,
                             double alpha) {
  CheckReport report;
  report.condition = condition;
  report.mode = CheckMode::Distribution;
  report.alpha = alpha;

  std::vector<double> pooled;
  for (auto& [key, samples] : strata) {
    StratumTest test;
    test.id = format_key(key);
    test.n = {static_cast<int>(samples[0].size()), static_cast<int>(samples[1].size())};
    if (test.n[0] < kMinStratumArm || test.n[1] < kMinStratumArm) {
      test.excluded = true;
      test.statistic = std::numeric_limits<double>::quiet_NaN();
      test.p_value = std::numeric_limits<double>::quiet_NaN();
    } else {
      const KsResult ks = ks_two_sample(std::move(samples[0]), std::move(samples[1]));
      test.statistic = ks.statistic;
      test.p_value = ks.p_value;
      pooled.push_back(ks.p_value);
    }
    report.strata.push_back(std::move(test));
  }
  if (pooled.empty()) {
    throw Error("EmptyStratum", "no stratum has at least " + std::to_string(kMinStratumArm) +
                                    " units in both compared arms");
  }
  report.pooled_p = fisher_pooled_p(pooled);
  report.pass = report.pooled_p >= alpha;
  return report;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("InvalidArgument", "alpha must lie in (0,1)");
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("InvalidArgument", "KS test needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto n1 = static_cast<int>(a.size());
  const auto n2 = static_cast<int>(b.size());
  const long long scaled = ks_statistic_scaled(a, b);

  KsResult result;
  result.statistic = static_cast<double>(scaled) /
                     (static_cast<double>(n1) * static_cast<double>(n2));
  if (static_cast<long long>(n1) * n2 <= kExactCutoff) {
    result.p_value = ks_exact_p(scaled, n1, n2);
  } else {
    const double ne = static_cast<double>(n1) * n2 / (n1 + n2);
    const double sqne = std::sqrt(ne);
    result.p_value = kolmogorov_q((sqne + 0.12 + 0.11 / sqne) * result.statistic);
  }
  return result;
}

double fisher_pooled_p(const std::vector<double>& p_values) {
  if (p_values.empty()) throw Error("InvalidArgument", "nothing to pool");
  double statistic = 0.0;
  for (double p : p_values) {
    statistic += -2.0 * std::log(std::fmax(p, 1e-300));
  }
  return stats::chi_squared_survival(statistic, 2.0 * static_cast<double>(p_values.size()));
}

CheckReport check_mediator_law(const Dataset& data, double alpha) {
  check_alpha(alpha);
  if (data.kind() != ArmKind::ThreeArm) {
    throw Error("MissingArm", "mediator-law check requires three-arm data");
  }
  const auto counts = data.arm_counts();
  if (counts[0] == 0 || counts[2] == 0) {
    throw Error("MissingArm", "mediator-law check needs units in arms 0 and 2");
  }

  std::map<std::vector<double>, std::array<std::vector<double>, 2>> strata;
  for (int i = 0; i < data.n(); ++i) {
    const int r = data.arm()[static_cast<std::size_t>(i)];
    if (r == 1) continue;
    std::vector<double> key(data.n_covariates());
    for (int j = 0; j < data.n_covariates(); ++j) key[static_cast<std::size_t>(j)] = data.covariates()(i, j);
    // index 0: reference arm 0, index 1: intervention arm 2
    strata[key][r == 2 ? 1 : 0].push_back(data.mediator()(i));
  }
  return pooled_ks_report(CheckCondition::MediatorLaw, std::move(strata), alpha);
}

CheckReport check_no_direct_effect(const Dataset& data, double alpha, CheckMode mode, Link link) {
  check_alpha(alpha);
  if (data.kind() != ArmKind::ThreeArm) {
    throw Error("MissingArm", "no-direct-effect check requires three-arm data");
  }
  const auto counts = data.arm_counts();
  if (counts[1] == 0 || counts[2] == 0) {
    throw Error("MissingArm", "no-direct-effect check needs units in arms 1 and 2");
  }

  if (mode == CheckMode::Distribution) {
    std::map<std::vector<double>, std::array<std::vector<double>, 2>> strata;
    for (int i = 0; i < data.n(); ++i) {
      const int r = data.arm()[static_cast<std::size_t>(i)];
      if (r == 0) continue;
      std::vector<double> key(static_cast<std::size_t>(data.n_covariates()) + 1);
      for (int j = 0; j < data.n_covariates(); ++j) key[static_cast<std::size_t>(j)] = data.covariates()(i, j);
      key.back() = data.mediator()(i);
      // index 0: treated arm 1, index 1: intervention arm 2
      strata[key][r == 2 ? 1 : 0].push_back(data.outcome()(i));
    }
    return pooled_ks_report(CheckCondition::NoDirectEffect, std::move(strata), alpha);
  }

  // MeanOnly: outcome ~ intercept + mediator + covariates + arm-2 indicator
  // over arms 1 and 2; Wald test of the indicator.
  std::vector<int> rows;
  for (int i = 0; i < data.n(); ++i) {
    if (data.arm()[static_cast<std::size_t>(i)] != 0) rows.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const int k = data.n_covariates();
  Eigen::MatrixXd x(n, 2 + k + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const int i = rows[static_cast<std::size_t>(t)];
    x(t, 0) = 1.0;
    x(t, 1) = data.mediator()(i);
    x.row(t).segment(2, k) = data.covariates().row(i);
    x(t, 2 + k) = data.arm()[static_cast<std::size_t>(i)] == 2 ? 1.0 : 0.0;
    y(t) = data.outcome()(i);
  }
  const RegressionFit fit = link == Link::Identity ? fit_ols(x, y) : fit_logistic(x, y);
  const double coefficient = fit.coefficients(2 + k);
  const double se = std::sqrt(fit.covariance(2 + k, 2 + k));
  const double z = se > 0.0 ? coefficient / se : 0.0;
  const double p = 2.0 * stats::normal_cdf(-std::fabs(z));

  CheckReport report;
  report.condition = CheckCondition::NoDirectEffect;
  report.mode = CheckMode::MeanOnly;
  report.alpha = alpha;
  StratumTest test;
  test.id = "pooled";
  test.n = {counts[1], counts[2]};
  test.statistic = z;
  test.p_value = p;
  report.strata.push_back(test);
  report.pooled_p = p;
  report.pass = p >= alpha;
  return report;
}

}  // namespace organic
