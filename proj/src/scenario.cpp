#include "organic/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace organic {

namespace {

using nlohmann::json;

constexpr double kProbTolerance = 1e-12;
constexpr int kMaxCovariateDim = 16;  // fixed per-unit draw-slot layout

void check_probs(const std::vector<double>& probs, const std::string& what) {
  if (probs.empty()) throw Error("InvalidScenario", what + ": empty probability vector");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0) throw Error("InvalidScenario", what + ": probability out of [0,1]");
    total += p;
  }
  if (std::fabs(total - 1.0) > kProbTolerance) {
    throw Error("InvalidScenario", what + ": probabilities sum to " + std::to_string(total));
  }
}

void check_scalar_law(const ScalarLaw& law, const std::string& what) {
  if (law.kind == ScalarLaw::Kind::Normal) {
    if (!(law.sd > 0.0) || !std::isfinite(law.sd))
      throw Error("InvalidScenario", what + ": normal sd must be positive");
  } else {
    if (law.values.size() != law.probs.size())
      throw Error("InvalidScenario", what + ": values/probs size mismatch");
    check_probs(law.probs, what);
  }
}

ScalarLaw scalar_law_from_json(const json& j, const std::string& what) {
  ScalarLaw law;
  const std::string kind = j.value("kind", std::string("normal"));
  if (kind == "normal") {
    law.kind = ScalarLaw::Kind::Normal;
    law.sd = j.value("sd", 1.0);
  } else if (kind == "discrete") {
    law.kind = ScalarLaw::Kind::Discrete;
    law.values = j.at("values").get<std::vector<double>>();
    law.probs = j.at("probs").get<std::vector<double>>();
  } else {
    throw Error("InvalidScenario", what + ": unknown law kind '" + kind + "'");
  }
  return law;
}

json scalar_law_to_json(const ScalarLaw& law) {
  if (law.kind == ScalarLaw::Kind::Normal) return json{{"kind", "normal"}, {"sd", law.sd}};
  return json{{"kind", "discrete"}, {"values", law.values}, {"probs", law.probs}};
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<double> vector_to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

OutcomeArm outcome_arm_from_json(const json& j) {
  OutcomeArm arm;
  arm.intercept = j.at("intercept").get<double>();
  arm.m_coef = j.at("m_coef").get<double>();
  arm.c_coefs = j.contains("c_coefs") ? vector_from_json(j.at("c_coefs")) : Eigen::VectorXd(0);
  arm.ctilde_coef = j.value("ctilde_coef", 0.0);
  return arm;
}

json outcome_arm_to_json(const OutcomeArm& arm) {
  return json{{"intercept", arm.intercept},
              {"m_coef", arm.m_coef},
              {"c_coefs", vector_to_std(arm.c_coefs)},
              {"ctilde_coef", arm.ctilde_coef}};
}

std::string mechanism_name(InterventionMechanism mechanism) {
  switch (mechanism) {
    case InterventionMechanism::IndependentRedraw: return "independent-redraw";
    case InterventionMechanism::CoupledNoise: return "coupled-noise";
    case InterventionMechanism::SetToM0: return "set-to-m0";
  }
  return "independent-redraw";
}

InterventionMechanism mechanism_from_name(const std::string& name) {
  if (name == "independent-redraw") return InterventionMechanism::IndependentRedraw;
  if (name == "coupled-noise") return InterventionMechanism::CoupledNoise;
  if (name == "set-to-m0") return InterventionMechanism::SetToM0;
  throw Error("InvalidScenario", "unknown mechanism '" + name + "'");
}

}  // namespace

std::string link_name(Link link) { return link == Link::Identity ? "identity" : "logit"; }

Link link_from_name(const std::string& name) {
  if (name == "identity") return Link::Identity;
  if (name == "logit") return Link::Logit;
  throw Error("InvalidArgument", "unknown link '" + name + "'");
}

int Scenario::n_ct_cells() const {
  if (!unobserved) return 1;
  return unobserved->discrete() ? static_cast<int>(unobserved->values.size()) : 1;
}

void Scenario::validate() const {
  const int k = covariates.dim();
  if (k > kMaxCovariateDim) throw Error("InvalidScenario", "covariate dimension exceeds 16");
  if (covariates.kind == CovariateLaw::Kind::Discrete) {
    if (covariates.cells.size() != covariates.probs.size())
      throw Error("InvalidScenario", "covariate cells/probs size mismatch");
    check_probs(covariates.probs, "covariate law");
    for (const auto& cell : covariates.cells) {
      if (static_cast<int>(cell.size()) != k)
        throw Error("InvalidScenario", "covariate cells have mixed dimensions");
    }
  } else if (covariates.normal_dim < 0) {
    throw Error("InvalidScenario", "negative covariate dimension");
  }

  if (unobserved) check_scalar_law(*unobserved, "unobserved law");

  if (const auto* shift = std::get_if<ShiftMediator>(&mediator)) {
    if (static_cast<int>(shift->c_coef.size()) != k)
      throw Error("InvalidScenario", "mediator c_coef dimension != covariate dimension");
    check_scalar_law(shift->noise, "mediator noise");
    if (!std::isfinite(shift->shift[0]) || !std::isfinite(shift->shift[1]))
      throw Error("InvalidScenario", "non-finite mediator shift");
  } else {
    const auto& table = std::get<TableMediator>(mediator);
    if (!covariates.discrete())
      throw Error("InvalidScenario", "table mediator requires a discrete covariate law");
    if (unobserved && !unobserved->discrete())
      throw Error("InvalidScenario", "table mediator requires a discrete unobserved law");
    if (table.values.empty()) throw Error("InvalidScenario", "mediator table has no values");
    const std::size_t n_rows =
        2 * std::max<std::size_t>(covariates.cells.size(), 1) * static_cast<std::size_t>(n_ct_cells());
    if (table.rows.size() != n_rows)
      throw Error("InvalidScenario", "mediator table has " + std::to_string(table.rows.size()) +
                                         " rows, expected " + std::to_string(n_rows));
    for (const auto& row : table.rows) {
      if (row.size() != table.values.size())
        throw Error("InvalidScenario", "mediator table row length != number of values");
      check_probs(row, "mediator table row");
    }
  }

  for (const auto& arm : outcome.arms) {
    if (static_cast<int>(arm.c_coefs.size()) != k)
      throw Error("InvalidScenario", "outcome c_coefs dimension != covariate dimension");
  }
  if (outcome.link == Link::Identity && (!(outcome.noise_sd >= 0.0) || !std::isfinite(outcome.noise_sd)))
    throw Error("InvalidScenario", "outcome noise sd must be non-negative");
}

Scenario Scenario::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("InvalidScenario", std::string("JSON parse failure: ") + e.what());
  }

  Scenario scenario;
  try {
    const json& cov = j.at("covariates");
    const std::string cov_kind = cov.at("kind").get<std::string>();
    if (cov_kind == "discrete") {
      scenario.covariates.kind = CovariateLaw::Kind::Discrete;
      scenario.covariates.cells = cov.at("cells").get<std::vector<std::vector<double>>>();
      scenario.covariates.probs = cov.at("probs").get<std::vector<double>>();
    } else if (cov_kind == "normal") {
      scenario.covariates.kind = CovariateLaw::Kind::Normal;
      scenario.covariates.normal_dim = cov.at("dim").get<int>();
    } else {
      throw Error("InvalidScenario", "unknown covariate law kind '" + cov_kind + "'");
    }

    if (j.contains("unobserved") && !j.at("unobserved").is_null()) {
      scenario.unobserved = scalar_law_from_json(j.at("unobserved"), "unobserved");
    }

    const json& med = j.at("mediator");
    const std::string med_kind = med.at("kind").get<std::string>();
    if (med_kind == "shift") {
      ShiftMediator shift;
      shift.c_coef = med.contains("c_coef") ? vector_from_json(med.at("c_coef")) : Eigen::VectorXd(0);
      shift.ctilde_coef = med.value("ctilde_coef", 0.0);
      const auto shifts = med.at("shift").get<std::vector<double>>();
      if (shifts.size() != 2) throw Error("InvalidScenario", "mediator shift needs two arms");
      shift.shift = {shifts[0], shifts[1]};
      shift.noise = scalar_law_from_json(med.at("noise"), "mediator noise");
      scenario.mediator = std::move(shift);
    } else if (med_kind == "table") {
      TableMediator table;
      table.values = med.at("values").get<std::vector<double>>();
      table.rows = med.at("rows").get<std::vector<std::vector<double>>>();
      scenario.mediator = std::move(table);
    } else {
      throw Error("InvalidScenario", "unknown mediator kind '" + med_kind + "'");
    }

    const json& out = j.at("outcome");
    scenario.outcome.link = link_from_name(out.at("link").get<std::string>());
    scenario.outcome.noise_sd = out.value("noise_sd", 1.0);
    const json& arms = out.at("arms");
    if (!arms.is_array() || arms.size() != 2)
      throw Error("InvalidScenario", "outcome needs exactly two arms");
    scenario.outcome.arms = {outcome_arm_from_json(arms.at(0)), outcome_arm_from_json(arms.at(1))};

    scenario.mechanism = mechanism_from_name(j.value("mechanism", std::string("independent-redraw")));
  } catch (const json::exception& e) {
    throw Error("InvalidScenario", std::string("missing or mistyped field: ") + e.what());
  }

  scenario.validate();
  return scenario;
}

std::string Scenario::to_json_text() const {
  json j;
  if (covariates.kind == CovariateLaw::Kind::Discrete) {
    j["covariates"] = json{{"kind", "discrete"}, {"cells", covariates.cells}, {"probs", covariates.probs}};
  } else {
    j["covariates"] = json{{"kind", "normal"}, {"dim", covariates.normal_dim}};
  }
  if (unobserved) j["unobserved"] = scalar_law_to_json(*unobserved);

  if (const auto* shift = std::get_if<ShiftMediator>(&mediator)) {
    j["mediator"] = json{{"kind", "shift"},
                         {"c_coef", vector_to_std(shift->c_coef)},
                         {"ctilde_coef", shift->ctilde_coef},
                         {"shift", std::vector<double>{shift->shift[0], shift->shift[1]}},
                         {"noise", scalar_law_to_json(shift->noise)}};
  } else {
    const auto& table = std::get<TableMediator>(mediator);
    j["mediator"] = json{{"kind", "table"}, {"values", table.values}, {"rows", table.rows}};
  }

  j["outcome"] = json{{"link", link_name(outcome.link)},
                      {"noise_sd", outcome.noise_sd},
                      {"arms", json::array({outcome_arm_to_json(outcome.arms[0]),
                                            outcome_arm_to_json(outcome.arms[1])})}};
  j["mechanism"] = mechanism_name(mechanism);
  return j.dump(2) + "\n";
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open scenario file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

void Scenario::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot open '" + path.string() + "' for writing");
  out << to_json_text();
}

}  // namespace organic
