#include "organic/report.hpp"

#include <cmath>

namespace organic {

using nlohmann::json;

namespace {

json fit_json(const RegressionFit& fit) {
  return json{{"coefficients", std::vector<double>(fit.coefficients.data(),
                                                   fit.coefficients.data() + fit.coefficients.size())},
              {"dispersion", fit.dispersion},
              {"converged", fit.converged},
              {"iterations", fit.iterations}};
}

json quantities_json(const EffectQuantities& q) {
  return json{{"e_y0", q.e_y0},     {"e_y1", q.e_y1},         {"e_y1_i1", q.e_y1_i1},
              {"direct", q.direct}, {"indirect", q.indirect}, {"total", q.total}};
}

double json_safe(double x) { return std::isfinite(x) ? x : 0.0; }

}  // namespace

std::string method_name(EstimationMethod method) {
  return method == EstimationMethod::Nonparametric ? "nonparametric" : "semiparametric";
}

EstimationMethod method_from_name(const std::string& name) {
  if (name == "nonparametric") return EstimationMethod::Nonparametric;
  if (name == "semiparametric") return EstimationMethod::Semiparametric;
  throw Error("InvalidArgument", "unknown method '" + name + "'");
}

json estimate_report(const EffectEstimate& estimate, const EstimatorConfig& config) {
  json j{{"method", method_name(config.method)},
         {"link", link_name(config.outcome_link)},
         {"recode", config.recode},
         {"use_confounders", config.use_confounders},
         {"e_y0", estimate.e_y0},
         {"e_y1", estimate.e_y1},
         {"e_y1_i1", estimate.e_y1_i1},
         {"direct", estimate.direct},
         {"indirect", estimate.indirect},
         {"total", estimate.total},
         {"n_by_arm", estimate.n_by_arm}};
  json diag{{"n_strata", estimate.diagnostics.n_strata}, {"n_cells", estimate.diagnostics.n_cells}};
  if (estimate.diagnostics.mediator_fit) diag["mediator_fit"] = fit_json(*estimate.diagnostics.mediator_fit);
  if (estimate.diagnostics.outcome_fit) diag["outcome_fit"] = fit_json(*estimate.diagnostics.outcome_fit);
  j["diagnostics"] = std::move(diag);
  return j;
}

json estimate_report(const BootstrapResult& result, const EstimatorConfig& config) {
  json j = estimate_report(result.point, config);
  j["bootstrap"] = json{{"B", result.B},
                        {"gamma", result.gamma},
                        {"seed", result.seed},
                        {"n_failed", result.n_failed}};
  const json se = quantities_json(result.se);
  const json lo = quantities_json(result.ci_lower);
  const json hi = quantities_json(result.ci_upper);
  for (const auto& name : {"e_y0", "e_y1", "e_y1_i1", "direct", "indirect", "total"}) {
    j[std::string("se_") + name] = se.at(name);
    j[std::string("ci_") + name + "_lower"] = lo.at(name);
    j[std::string("ci_") + name + "_upper"] = hi.at(name);
  }
  return j;
}

json check_report_json(const CheckReport& report) {
  json strata = json::array();
  for (const auto& s : report.strata) {
    strata.push_back(json{{"id", s.id},
                          {"n", s.n},
                          {"statistic", json_safe(s.statistic)},
                          {"p_value", s.excluded ? json() : json(s.p_value)},
                          {"excluded", s.excluded}});
  }
  return json{{"condition", report.condition == CheckCondition::MediatorLaw ? "mediator_law"
                                                                            : "no_direct_effect"},
              {"mode", report.mode == CheckMode::Distribution ? "distribution" : "mean"},
              {"alpha", report.alpha},
              {"strata", std::move(strata)},
              {"pooled_p", report.pooled_p},
              {"pass", report.pass}};
}

json ground_truth_json(const GroundTruth& truth) {
  json j{{"e_y0", truth.e_y0},     {"e_y1", truth.e_y1},         {"e_y1_i1", truth.e_y1_i1},
         {"direct", truth.direct}, {"indirect", truth.indirect}, {"total", truth.total},
         {"exact", truth.exact}};
  if (truth.monte_carlo) {
    j["monte_carlo"] = json{{"reps", truth.monte_carlo->reps},
                            {"seed", truth.monte_carlo->seed},
                            {"standard_error", truth.monte_carlo->standard_error}};
  }
  return j;
}

}  // namespace organic
