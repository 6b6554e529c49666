#include "organic/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "organic/stats.hpp"

namespace organic {

namespace {

std::string format_values(const std::vector<double>& values) {
  std::string out = "(";
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j > 0) out += ", ";
    out += format_double(values[j]);
  }
  return out + ")";
}

double invlink(Link link, double eta) {
  return link == Link::Identity ? eta : stats::sigmoid(eta);
}

void require_two_arm(const Dataset& data, const std::string& op) {
  if (data.kind() != ArmKind::TwoArm) {
    throw Error("ThreeArmUnsupported", op + " requires a two-arm dataset");
  }
}

void check_discrete_column(const Eigen::VectorXd& column, const std::string& name, int max_levels) {
  std::set<double> levels;
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    levels.insert(column(i));
    if (static_cast<int>(levels.size()) > max_levels) {
      throw Error("NonDiscreteData", "column '" + name + "' has more than " +
                                         std::to_string(max_levels) + " distinct values");
    }
  }
}

void check_discreteness(const Dataset& data, bool use_z, int max_levels) {
  check_discrete_column(data.mediator(), data.schema().mediator_name, max_levels);
  for (int j = 0; j < data.n_covariates(); ++j) {
    check_discrete_column(data.covariates().col(j), data.schema().covariate_names[static_cast<std::size_t>(j)],
                          max_levels);
  }
  if (use_z) {
    for (int j = 0; j < data.n_confounders(); ++j) {
      check_discrete_column(data.confounders().col(j),
                            data.schema().confounder_names[static_cast<std::size_t>(j)], max_levels);
    }
  }
}

std::vector<double> stratum_key(const Dataset& data, int row, bool use_z) {
  std::vector<double> key;
  key.reserve(static_cast<std::size_t>(data.n_covariates() + (use_z ? data.n_confounders() : 0)));
  for (int j = 0; j < data.n_covariates(); ++j) key.push_back(data.covariates()(row, j));
  if (use_z) {
    for (int j = 0; j < data.n_confounders(); ++j) key.push_back(data.confounders()(row, j));
  }
  return key;
}

struct Stratum {
  int n = 0;
  std::array<int, 2> arm_n{0, 0};
  std::array<double, 2> y_sum{0.0, 0.0};
  std::map<double, int> mediator_arm0;                       // counts
  std::map<double, std::pair<double, int>> outcome_arm1;     // m -> (sum y, count)
};

EffectEstimate finish(double e_y0, double e_y1, double e_y1_i1, std::vector<int> n_by_arm,
                      EstimateDiagnostics diagnostics) {
  EffectEstimate estimate;
  estimate.e_y0 = e_y0;
  estimate.e_y1 = e_y1;
  estimate.e_y1_i1 = e_y1_i1;
  estimate.direct = e_y1_i1 - e_y0;
  estimate.indirect = e_y1 - e_y1_i1;
  estimate.total = estimate.direct + estimate.indirect;
  estimate.n_by_arm = std::move(n_by_arm);
  estimate.diagnostics = std::move(diagnostics);
  return estimate;
}

// Shared plug-in core for the randomized and the observational formula.
// standardize_arm_means: false -> raw arm means (randomized two-arm);
// true -> G-computation over the pooled stratum frequencies.
EffectEstimate nonparametric_core(const Dataset& data, const EstimatorConfig& config, bool use_z,
                                  bool standardize_arm_means) {
  check_discreteness(data, use_z, config.max_discrete_levels);

  std::map<std::vector<double>, Stratum> strata;
  double y0_total = 0.0, y1_total = 0.0;
  int n0 = 0, n1 = 0;
  for (int i = 0; i < data.n(); ++i) {
    const int a = data.arm()[static_cast<std::size_t>(i)];
    const double m = data.mediator()(i);
    const double y = data.outcome()(i);
    Stratum& stratum = strata[stratum_key(data, i, use_z)];
    stratum.n += 1;
    stratum.arm_n[static_cast<std::size_t>(a)] += 1;
    stratum.y_sum[static_cast<std::size_t>(a)] += y;
    if (a == 0) {
      stratum.mediator_arm0[m] += 1;
      y0_total += y;
      ++n0;
    } else {
      auto& cell = stratum.outcome_arm1[m];
      cell.first += y;
      cell.second += 1;
      y1_total += y;
      ++n1;
    }
  }
  if (n0 == 0 || n1 == 0) throw Error("EmptyStratum", "an arm has no units");

  const double n = static_cast<double>(data.n());
  double e_y1_i1 = 0.0;
  double e_y0 = 0.0, e_y1 = 0.0;
  int n_cells = 0;
  for (const auto& [key, stratum] : strata) {
    const double p_c = stratum.n / n;
    if (stratum.arm_n[0] == 0) {
      throw Error("EmptyStratum", "stratum " + format_values(key) + " has no arm-0 units");
    }
    if (standardize_arm_means && stratum.arm_n[1] == 0) {
      throw Error("EmptyStratum", "stratum " + format_values(key) + " has no arm-1 units");
    }

    double inner = 0.0;
    for (const auto& [m, count] : stratum.mediator_arm0) {
      const auto it = stratum.outcome_arm1.find(m);
      if (it == stratum.outcome_arm1.end() || it->second.second == 0) {
        throw Error("EmptyStratum", "no treated outcomes at mediator " + format_double(m) +
                                        " in stratum " + format_values(key));
      }
      const double p_m = static_cast<double>(count) / stratum.arm_n[0];
      const double y_bar = it->second.first / it->second.second;
      inner += p_m * y_bar;
      ++n_cells;
    }
    e_y1_i1 += p_c * inner;

    if (standardize_arm_means) {
      e_y0 += p_c * (stratum.y_sum[0] / stratum.arm_n[0]);
      e_y1 += p_c * (stratum.y_sum[1] / stratum.arm_n[1]);
    }
  }
  if (!standardize_arm_means) {
    e_y0 = y0_total / n0;
    e_y1 = y1_total / n1;
  }

  EstimateDiagnostics diagnostics;
  diagnostics.n_strata = static_cast<int>(strata.size());
  diagnostics.n_cells = n_cells;
  return finish(e_y0, e_y1, e_y1_i1, {n0, n1}, std::move(diagnostics));
}

Eigen::MatrixXd mediator_design(const Dataset& data, const Eigen::MatrixXd& w) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto p = w.cols();
  Eigen::MatrixXd design(n, 2 + 2 * p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = static_cast<double>(data.arm()[static_cast<std::size_t>(i)]);
    design(i, 0) = 1.0;
    design(i, 1) = a;
    for (Eigen::Index j = 0; j < p; ++j) {
      design(i, 2 + j) = w(i, j);
      design(i, 2 + p + j) = a * w(i, j);
    }
  }
  return design;
}

RegressionFit fit_outcome(Link link, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const LogisticOptions& options) {
  return link == Link::Identity ? fit_ols(X, y) : fit_logistic(X, y, options);
}

Eigen::MatrixXd joint_regressors(const Dataset& data, bool use_z) {
  if (!use_z || data.n_confounders() == 0) return data.covariates();
  Eigen::MatrixXd w(data.n(), data.n_covariates() + data.n_confounders());
  w << data.covariates(), data.confounders();
  return w;
}

// Appendix-style shift estimator over regressor set w (C, or (C,Z)).
EffectEstimate semiparametric_core(const Dataset& data, const EstimatorConfig& config, bool use_z) {
  const Eigen::MatrixXd w = joint_regressors(data, use_z);
  const auto p = w.cols();

  std::vector<int> treated_rows, control_rows;
  for (int i = 0; i < data.n(); ++i) {
    (data.arm()[static_cast<std::size_t>(i)] == 1 ? treated_rows : control_rows).push_back(i);
  }
  const int min_units = static_cast<int>(2 + 2 * p) + 2;
  if (static_cast<int>(treated_rows.size()) < min_units ||
      static_cast<int>(control_rows.size()) < min_units) {
    throw Error("TooFewUnits", "need at least " + std::to_string(min_units) + " units per arm");
  }

  const RegressionFit mediator_fit = fit_ols(mediator_design(data, w), data.mediator());
  const double beta1 = mediator_fit.coefficients(1);
  const Eigen::VectorXd beta3 = mediator_fit.coefficients.segment(2 + p, p);

  const auto n1 = static_cast<Eigen::Index>(treated_rows.size());
  Eigen::MatrixXd x1(n1, 2 + p);
  Eigen::VectorXd y1(n1);
  for (Eigen::Index t = 0; t < n1; ++t) {
    const int i = treated_rows[static_cast<std::size_t>(t)];
    x1(t, 0) = 1.0;
    x1(t, 1) = data.mediator()(i);
    x1.row(t).segment(2, p) = w.row(i);
    y1(t) = data.outcome()(i);
  }
  const RegressionFit outcome_fit = fit_outcome(config.outcome_link, x1, y1, config.logistic);
  const double theta0 = outcome_fit.coefficients(0);
  const double theta1 = outcome_fit.coefficients(1);
  const Eigen::VectorXd theta2 = outcome_fit.coefficients.segment(2, p);

  // E[f_theta(M - beta1 - beta3'W, W) | A = 1]
  double sum = 0.0;
  for (const int i : treated_rows) {
    const double shifted = data.mediator()(i) - beta1 - beta3.dot(w.row(i));
    sum += invlink(config.outcome_link, theta0 + theta1 * shifted + theta2.dot(w.row(i)));
  }
  const double e_y1_i1 = sum / static_cast<double>(n1);

  double y0_sum = 0.0, y1_sum = 0.0;
  for (const int i : control_rows) y0_sum += data.outcome()(i);
  for (const int i : treated_rows) y1_sum += data.outcome()(i);

  EstimateDiagnostics diagnostics;
  diagnostics.mediator_fit = mediator_fit;
  diagnostics.outcome_fit = outcome_fit;
  return finish(y0_sum / static_cast<double>(control_rows.size()),
                y1_sum / static_cast<double>(n1), e_y1_i1,
                {static_cast<int>(control_rows.size()), static_cast<int>(n1)},
                std::move(diagnostics));
}

// Observational shift estimator: outcome regressions per arm standardized
// over the pooled (C,Z) sample, and the mediation term standardized over all
// units with the arm-0 mediator mean plus the empirical residual law.
EffectEstimate semiparametric_observational(const Dataset& data, const EstimatorConfig& config) {
  const Eigen::MatrixXd w = joint_regressors(data, true);
  const auto p = w.cols();
  const auto n = static_cast<Eigen::Index>(data.n());

  std::vector<int> treated_rows, control_rows;
  for (int i = 0; i < data.n(); ++i) {
    (data.arm()[static_cast<std::size_t>(i)] == 1 ? treated_rows : control_rows).push_back(i);
  }
  const int min_units = static_cast<int>(2 + 2 * p) + 2;
  if (static_cast<int>(treated_rows.size()) < min_units ||
      static_cast<int>(control_rows.size()) < min_units) {
    throw Error("TooFewUnits", "need at least " + std::to_string(min_units) + " units per arm");
  }

  const Eigen::MatrixXd m_design = mediator_design(data, w);
  const RegressionFit mediator_fit = fit_ols(m_design, data.mediator());
  const Eigen::VectorXd residuals = data.mediator() - m_design * mediator_fit.coefficients;
  const double beta0 = mediator_fit.coefficients(0);
  const Eigen::VectorXd beta2 = mediator_fit.coefficients.segment(2, p);

  // Outcome model on treated units, per the mediation formula.
  const auto n1 = static_cast<Eigen::Index>(treated_rows.size());
  Eigen::MatrixXd x1(n1, 2 + p);
  Eigen::VectorXd y1(n1);
  for (Eigen::Index t = 0; t < n1; ++t) {
    const int i = treated_rows[static_cast<std::size_t>(t)];
    x1(t, 0) = 1.0;
    x1(t, 1) = data.mediator()(i);
    x1.row(t).segment(2, p) = w.row(i);
    y1(t) = data.outcome()(i);
  }
  const RegressionFit outcome_fit = fit_outcome(config.outcome_link, x1, y1, config.logistic);
  const double theta0 = outcome_fit.coefficients(0);
  const double theta1 = outcome_fit.coefficients(1);
  const Eigen::VectorXd theta2 = outcome_fit.coefficients.segment(2, p);

  // Residual grid: all residuals up to 512, evenly spaced quantiles beyond.
  std::vector<double> grid(residuals.data(), residuals.data() + residuals.size());
  std::sort(grid.begin(), grid.end());
  constexpr std::size_t kMaxGrid = 512;
  if (grid.size() > kMaxGrid) {
    std::vector<double> reduced(kMaxGrid);
    for (std::size_t t = 0; t < kMaxGrid; ++t) {
      const double h = (static_cast<double>(t) + 0.5) / kMaxGrid * (grid.size() - 1);
      const auto lo = static_cast<std::size_t>(h);
      const double frac = h - static_cast<double>(lo);
      reduced[t] = grid[lo] + frac * (grid[std::min(lo + 1, grid.size() - 1)] - grid[lo]);
    }
    grid = std::move(reduced);
  }

  double sum_i1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu0 = beta0 + beta2.dot(w.row(i));
    const double base = theta0 + theta2.dot(w.row(i));
    double inner = 0.0;
    for (const double e : grid) inner += invlink(config.outcome_link, base + theta1 * (mu0 + e));
    sum_i1 += inner / static_cast<double>(grid.size());
  }
  const double e_y1_i1 = sum_i1 / static_cast<double>(n);

  // G-computation: per-arm outcome regression on [1, W], standardized over
  // the pooled sample.
  auto standardized_mean = [&](const std::vector<int>& rows) {
    const auto na = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd xa(na, 1 + p);
    Eigen::VectorXd ya(na);
    for (Eigen::Index t = 0; t < na; ++t) {
      const int i = rows[static_cast<std::size_t>(t)];
      xa(t, 0) = 1.0;
      xa.row(t).segment(1, p) = w.row(i);
      ya(t) = data.outcome()(i);
    }
    const RegressionFit fit = fit_outcome(config.outcome_link, xa, ya, config.logistic);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      total += invlink(config.outcome_link,
                       fit.coefficients(0) + fit.coefficients.segment(1, p).dot(w.row(i)));
    }
    return total / static_cast<double>(n);
  };

  EstimateDiagnostics diagnostics;
  diagnostics.mediator_fit = mediator_fit;
  diagnostics.outcome_fit = outcome_fit;
  return finish(standardized_mean(control_rows), standardized_mean(treated_rows), e_y1_i1,
                {static_cast<int>(control_rows.size()), static_cast<int>(treated_rows.size())},
                std::move(diagnostics));
}

}  // namespace

void EstimatorConfig::validate() const {
  if (method == EstimationMethod::Semiparametric && mediator_model != MediatorModelKind::Shift) {
    throw Error("InvalidConfig", "semiparametric estimation requires the shift mediator model");
  }
  if (method == EstimationMethod::Nonparametric && mediator_model != MediatorModelKind::None) {
    throw Error("InvalidConfig", "nonparametric estimation takes no mediator model");
  }
  if (max_discrete_levels < 1) throw Error("InvalidConfig", "max_discrete_levels must be positive");
}

EffectEstimate estimate_nonparametric(const Dataset& data, const EstimatorConfig& config) {
  config.validate();
  require_two_arm(data, "estimate_nonparametric");
  return nonparametric_core(data, config, /*use_z=*/false, /*standardize_arm_means=*/false);
}

EffectEstimate estimate_semiparametric(const Dataset& data, const EstimatorConfig& config) {
  config.validate();
  require_two_arm(data, "estimate_semiparametric");
  return semiparametric_core(data, config, /*use_z=*/false);
}

EffectEstimate estimate_observational(const Dataset& data, const EstimatorConfig& config) {
  config.validate();
  require_two_arm(data, "estimate_observational");
  if (data.n_confounders() == 0) {
    // q = 0 reduces exactly to the randomized estimator.
    return config.method == EstimationMethod::Nonparametric
               ? nonparametric_core(data, config, false, false)
               : semiparametric_core(data, config, false);
  }
  if (config.method == EstimationMethod::Nonparametric) {
    return nonparametric_core(data, config, /*use_z=*/true, /*standardize_arm_means=*/true);
  }
  return semiparametric_observational(data, config);
}

Dataset recode_treatment(const Dataset& data) {
  require_two_arm(data, "recode_treatment");
  std::vector<int> arm = data.arm();
  for (int& a : arm) a = 1 - a;
  return Dataset(data.covariates(), data.confounders(), std::move(arm), data.mediator(),
                 data.outcome(), data.kind(), data.schema());
}

double estimate_future_treatment(const Dataset& data, const FutureMediatorLaw& law,
                                 const EstimatorConfig& config) {
  config.validate();
  if (data.kind() == ArmKind::ThreeArm) {
    throw Error("ThreeArmUnsupported", "estimate_future_treatment requires two-arm or single-arm data");
  }

  std::vector<int> reference_rows;
  for (int i = 0; i < data.n(); ++i) {
    if (data.arm()[static_cast<std::size_t>(i)] == 0) reference_rows.push_back(i);
  }
  if (reference_rows.empty()) throw Error("MissingArm", "no reference-arm (arm 0) units");

  const int k = data.n_covariates();
  if (law.kind == FutureMediatorLaw::Kind::Discrete) {
    for (const auto& cell : law.cells) {
      if (static_cast<int>(cell.size()) != k) {
        throw Error("LawCovariateMismatch", "law cell dimension != covariate dimension");
      }
    }
    std::map<std::vector<double>, std::size_t> cell_index;
    for (std::size_t idx = 0; idx < law.cells.size(); ++idx) cell_index[law.cells[idx]] = idx;

    if (config.method == EstimationMethod::Nonparametric) {
      check_discreteness(data, false, config.max_discrete_levels);
      // Stratum means over the reference arm only.
      std::map<std::vector<double>, std::map<double, std::pair<double, int>>> strata;
      std::map<std::vector<double>, int> stratum_n;
      for (const int i : reference_rows) {
        const auto key = stratum_key(data, i, false);
        auto& cell = strata[key][data.mediator()(i)];
        cell.first += data.outcome()(i);
        cell.second += 1;
        stratum_n[key] += 1;
      }
      double total = 0.0;
      const double n_ref = static_cast<double>(reference_rows.size());
      for (const auto& [key, n_c] : stratum_n) {
        const auto it = cell_index.find(key);
        if (it == cell_index.end()) {
          throw Error("LawCovariateMismatch", "no law entry for covariate cell " + format_values(key));
        }
        const auto& cell_probs = law.probs[it->second];
        double inner = 0.0;
        for (std::size_t v = 0; v < law.values.size(); ++v) {
          if (cell_probs[v] == 0.0) continue;
          const auto& by_m = strata[key];
          const auto y_it = by_m.find(law.values[v]);
          if (y_it == by_m.end()) {
            throw Error("EmptyStratum", "no outcomes at mediator " + format_double(law.values[v]) +
                                            " in stratum " + format_values(key));
          }
          inner += cell_probs[v] * (y_it->second.first / y_it->second.second);
        }
        total += (n_c / n_ref) * inner;
      }
      return total;
    }

    // Semiparametric: outcome regression on reference rows, standardized over
    // the law per unit.
    const auto n_ref = static_cast<Eigen::Index>(reference_rows.size());
    Eigen::MatrixXd x(n_ref, 2 + k);
    Eigen::VectorXd y(n_ref);
    for (Eigen::Index t = 0; t < n_ref; ++t) {
      const int i = reference_rows[static_cast<std::size_t>(t)];
      x(t, 0) = 1.0;
      x(t, 1) = data.mediator()(i);
      x.row(t).segment(2, k) = data.covariates().row(i);
      y(t) = data.outcome()(i);
    }
    const RegressionFit fit = fit_outcome(config.outcome_link, x, y, config.logistic);
    double total = 0.0;
    for (const int i : reference_rows) {
      const auto key = stratum_key(data, i, false);
      const auto it = cell_index.find(key);
      if (it == cell_index.end()) {
        throw Error("LawCovariateMismatch", "no law entry for covariate cell " + format_values(key));
      }
      const auto& cell_probs = law.probs[it->second];
      double inner = 0.0;
      for (std::size_t v = 0; v < law.values.size(); ++v) {
        if (cell_probs[v] == 0.0) continue;
        const double eta = fit.coefficients(0) + fit.coefficients(1) * law.values[v] +
                           fit.coefficients.segment(2, k).dot(data.covariates().row(i));
        inner += cell_probs[v] * invlink(config.outcome_link, eta);
      }
      total += inner;
    }
    return total / static_cast<double>(n_ref);
  }

  // Shift law: requires the regression path.
  if (config.method == EstimationMethod::Nonparametric) {
    throw Error("InvalidConfig", "a shift mediator law requires the semiparametric method");
  }
  if (law.c_coef.size() != 0 && law.c_coef.size() != k) {
    throw Error("LawCovariateMismatch", "shift law c_coef dimension != covariate dimension");
  }
  const auto n_ref = static_cast<Eigen::Index>(reference_rows.size());
  Eigen::MatrixXd x(n_ref, 2 + k);
  Eigen::VectorXd y(n_ref);
  for (Eigen::Index t = 0; t < n_ref; ++t) {
    const int i = reference_rows[static_cast<std::size_t>(t)];
    x(t, 0) = 1.0;
    x(t, 1) = data.mediator()(i);
    x.row(t).segment(2, k) = data.covariates().row(i);
    y(t) = data.outcome()(i);
  }
  const RegressionFit fit = fit_outcome(config.outcome_link, x, y, config.logistic);
  double total = 0.0;
  for (const int i : reference_rows) {
    double shifted = data.mediator()(i) + law.offset;
    if (law.c_coef.size() == k && k > 0) shifted += law.c_coef.dot(data.covariates().row(i));
    const double eta = fit.coefficients(0) + fit.coefficients(1) * shifted +
                       fit.coefficients.segment(2, k).dot(data.covariates().row(i));
    total += invlink(config.outcome_link, eta);
  }
  return total / static_cast<double>(n_ref);
}

EffectEstimate run_estimator(const Dataset& data, const EstimatorConfig& config) {
  config.validate();
  if (config.recode) {
    EstimatorConfig inner = config;
    inner.recode = false;
    return run_estimator(recode_treatment(data), inner);
  }
  if (config.use_confounders) return estimate_observational(data, config);
  return config.method == EstimationMethod::Nonparametric ? estimate_nonparametric(data, config)
                                                          : estimate_semiparametric(data, config);
}

}  // namespace organic
