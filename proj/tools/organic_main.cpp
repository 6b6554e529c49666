// organic: simulate, estimate, and check organic direct and indirect effects.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "organic/dataset.hpp"
#include "organic/diagnostics.hpp"
#include "organic/estimate.hpp"
#include "organic/inference.hpp"
#include "organic/report.hpp"
#include "organic/simulate.hpp"
#include "organic/version.hpp"

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const json& flags, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double duration_seconds) {
  json manifest{{"tool", "organic"},
                {"version", organic::kVersion},
                {"subcommand", subcommand},
                {"flags", flags},
                {"inputs", inputs},
                {"outputs", outputs},
                {"duration_seconds", duration_seconds}};
  std::ofstream file(out_path + ".manifest.json", std::ios::binary);
  file << manifest.dump(2) << "\n";
}

void write_json_file(const std::string& path, const json& payload) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw organic::Error("IoError", "cannot open '" + path + "' for writing");
  file << payload.dump(2) << "\n";
}

std::vector<double> parse_probs(const std::string& csv) {
  std::vector<double> probs;
  std::stringstream ss(csv);
  std::string field;
  while (std::getline(ss, field, ',')) probs.push_back(std::stod(field));
  return probs;
}

organic::Dataset select_confounders(const organic::Dataset& data,
                                    const std::vector<std::string>& names) {
  const auto& schema = data.schema();
  Eigen::MatrixXd z(data.n(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto it = std::find(schema.confounder_names.begin(), schema.confounder_names.end(), names[j]);
    if (it == schema.confounder_names.end()) {
      throw organic::Error("MissingColumn", "confounder column '" + names[j] + "' not in data");
    }
    const auto col = std::distance(schema.confounder_names.begin(), it);
    z.col(static_cast<Eigen::Index>(j)) = data.confounders().col(col);
  }
  organic::ColumnSchema trimmed = schema;
  trimmed.confounder_names = names;
  return organic::Dataset(data.covariates(), std::move(z), data.arm(), data.mediator(),
                          data.outcome(), data.kind(), std::move(trimmed));
}

void print_estimate_table(const json& report) {
  std::printf("%-12s %12s\n", "quantity", "estimate");
  for (const auto& name : {"e_y0", "e_y1", "e_y1_i1", "direct", "indirect", "total"}) {
    std::printf("%-12s %12.6f", name, report.at(name).get<double>());
    const std::string se_key = std::string("se_") + name;
    if (report.contains(se_key)) {
      std::printf("   se %9.6f   ci [%9.6f, %9.6f]", report.at(se_key).get<double>(),
                  report.at("ci_" + std::string(name) + "_lower").get<double>(),
                  report.at("ci_" + std::string(name) + "_upper").get<double>());
    }
    std::printf("\n");
  }
}

void print_check_table(const organic::CheckReport& report, const char* title) {
  std::printf("%s: pooled p = %.6g -> %s\n", title, report.pooled_p,
              report.pass ? "pass" : "FAIL");
  for (const auto& s : report.strata) {
    if (s.excluded) {
      std::printf("  stratum %-18s n=(%d,%d)  excluded (too few units)\n", s.id.c_str(), s.n[0], s.n[1]);
    } else {
      std::printf("  stratum %-18s n=(%d,%d)  stat %8.5f  p %.6g\n", s.id.c_str(), s.n[0], s.n[1],
                  s.statistic, s.p_value);
    }
  }
}

int cmd_simulate(const std::string& scenario_path, int n, std::uint64_t seed,
                 const std::string& arms, const std::string& arm_probs_csv,
                 const std::string& out_path) {
  const auto start = Clock::now();
  const organic::Scenario scenario = organic::Scenario::load(scenario_path);

  organic::Dataset data = [&] {
    if (arms == "two") {
      double p_treat = 0.5;
      if (!arm_probs_csv.empty()) {
        const auto probs = parse_probs(arm_probs_csv);
        if (probs.size() != 2) {
          throw organic::Error("InvalidArgument", "--arm-probs needs 2 values for --arms two");
        }
        p_treat = probs[1];
      }
      return organic::simulate_two_arm(scenario, n, p_treat, seed);
    }
    std::array<double, 3> probs{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    if (!arm_probs_csv.empty()) {
      const auto parsed = parse_probs(arm_probs_csv);
      if (parsed.size() != 3) {
        throw organic::Error("InvalidArgument", "--arm-probs needs 3 values for --arms three");
      }
      probs = {parsed[0], parsed[1], parsed[2]};
    }
    return organic::simulate_three_arm(scenario, n, probs, seed);
  }();

  organic::write_csv(data, out_path);
  const double duration = std::chrono::duration<double>(Clock::now() - start).count();
  write_manifest(out_path, "simulate",
                 json{{"scenario", scenario_path},
                      {"n", n},
                      {"seed", seed},
                      {"arms", arms},
                      {"arm_probs", arm_probs_csv},
                      {"out", out_path}},
                 {scenario_path}, {out_path}, duration);
  std::printf("wrote %d rows to %s\n", data.n(), out_path.c_str());
  return kExitOk;
}

int cmd_estimate(const std::string& data_path, const std::string& method_name,
                 const std::string& link, const std::vector<std::string>& confounders,
                 bool recode, int bootstrap_B, double ci_gamma, std::uint64_t seed,
                 const std::string& out_path) {
  const auto start = Clock::now();
  organic::Dataset data = organic::read_csv(data_path);
  if (!confounders.empty()) data = select_confounders(data, confounders);

  organic::EstimatorConfig config;
  config.method = organic::method_from_name(method_name);
  config.outcome_link = organic::link_from_name(link);
  config.mediator_model = config.method == organic::EstimationMethod::Semiparametric
                              ? organic::MediatorModelKind::Shift
                              : organic::MediatorModelKind::None;
  config.use_confounders = !confounders.empty();
  config.recode = recode;

  json report;
  if (bootstrap_B > 0) {
    report = organic::estimate_report(organic::bootstrap(data, config, bootstrap_B, ci_gamma, seed),
                                      config);
  } else {
    report = organic::estimate_report(organic::run_estimator(data, config), config);
  }

  if (!out_path.empty()) {
    write_json_file(out_path, report);
    const double duration = std::chrono::duration<double>(Clock::now() - start).count();
    write_manifest(out_path, "estimate",
                   json{{"data", data_path},
                        {"method", method_name},
                        {"link", link},
                        {"confounders", confounders},
                        {"recode", recode},
                        {"bootstrap", bootstrap_B},
                        {"ci", ci_gamma},
                        {"seed", seed},
                        {"out", out_path}},
                   {data_path}, {out_path}, duration);
  }
  print_estimate_table(report);
  return kExitOk;
}

int cmd_check(const std::string& data_path, double alpha, const std::string& mode_name,
              const std::string& link, const std::string& out_path) {
  const auto start = Clock::now();
  const organic::Dataset data = organic::read_csv(data_path);
  const organic::CheckMode mode =
      mode_name == "mean" ? organic::CheckMode::MeanOnly : organic::CheckMode::Distribution;

  const organic::CheckReport mediator_law = organic::check_mediator_law(data, alpha);
  const organic::CheckReport no_direct =
      organic::check_no_direct_effect(data, alpha, mode, organic::link_from_name(link));
  const bool pass = mediator_law.pass && no_direct.pass;

  if (!out_path.empty()) {
    write_json_file(out_path, json{{"alpha", alpha},
                                   {"mediator_law", organic::check_report_json(mediator_law)},
                                   {"no_direct_effect", organic::check_report_json(no_direct)},
                                   {"pass", pass}});
    const double duration = std::chrono::duration<double>(Clock::now() - start).count();
    write_manifest(out_path, "check",
                   json{{"data", data_path},
                        {"alpha", alpha},
                        {"mode", mode_name},
                        {"link", link},
                        {"out", out_path}},
                   {data_path}, {out_path}, duration);
  }
  print_check_table(mediator_law, "mediator law (arm 2 vs arm 0)");
  print_check_table(no_direct, "no direct effect (arm 2 vs arm 1)");
  std::printf("overall: %s\n", pass ? "pass" : "FAIL");
  return pass ? kExitOk : kExitDomain;
}

int cmd_demo(const std::string& name, int n, std::uint64_t seed, const std::string& out_path) {
  if (name != "birthweight-paradox") {
    std::fprintf(stderr, "unknown demo '%s'; available: birthweight-paradox\n", name.c_str());
    return kExitUsage;
  }
  const auto start = Clock::now();
  const organic::Scenario scenario = organic::birthweight_scenario();
  const organic::GroundTruth truth = organic::ground_truth(scenario);

  // The analyst sees only (a, m, y); the common cause stays hidden.
  const organic::Dataset data = organic::simulate_two_arm(scenario, n, 0.5, seed);
  organic::EstimatorConfig config;
  const organic::EffectEstimate estimate = organic::run_estimator(data, config);

  const bool indirect_overestimated = estimate.indirect > truth.indirect;
  const bool direct_underestimated = estimate.direct < truth.direct;

  std::printf("birth-weight paradox demo (n = %d, seed = %llu)\n", n,
              static_cast<unsigned long long>(seed));
  std::printf("%-10s %12s %12s\n", "quantity", "truth", "estimated");
  std::printf("%-10s %12.6f %12.6f\n", "e_y0", truth.e_y0, estimate.e_y0);
  std::printf("%-10s %12.6f %12.6f\n", "e_y1", truth.e_y1, estimate.e_y1);
  std::printf("%-10s %12.6f %12.6f\n", "e_y1_i1", truth.e_y1_i1, estimate.e_y1_i1);
  std::printf("%-10s %12.6f %12.6f\n", "direct", truth.direct, estimate.direct);
  std::printf("%-10s %12.6f %12.6f\n", "indirect", truth.indirect, estimate.indirect);
  std::printf("indirect overestimated (common cause hidden): %s\n",
              indirect_overestimated ? "yes" : "no");
  std::printf("direct underestimated (common cause hidden):  %s\n",
              direct_underestimated ? "yes" : "no");
  if (n < 1000) std::printf("note: small n, estimates carry wide uncertainty\n");

  if (!out_path.empty()) {
    json payload{{"n", n},
                 {"seed", seed},
                 {"truth", organic::ground_truth_json(truth)},
                 {"estimate", organic::estimate_report(estimate, config)},
                 {"indirect_overestimated", indirect_overestimated},
                 {"direct_underestimated", direct_underestimated}};
    write_json_file(out_path, payload);
    const double duration = std::chrono::duration<double>(Clock::now() - start).count();
    write_manifest(out_path, "demo",
                   json{{"name", name}, {"n", n}, {"seed", seed}, {"out", out_path}}, {},
                   {out_path}, duration);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"organic effects toolkit: simulation, estimation, and three-arm checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", organic::kVersion);

  auto* sim = app.add_subcommand("simulate", "draw a dataset from a scenario file");
  std::string sim_scenario, sim_arms, sim_probs, sim_out;
  int sim_n = 0;
  std::uint64_t sim_seed = 0;
  sim->add_option("--scenario", sim_scenario, "scenario JSON file")->required();
  sim->add_option("--n", sim_n, "number of units")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "random seed")->required();
  sim->add_option("--arms", sim_arms, "two | three")->required()
      ->check(CLI::IsMember({"two", "three"}));
  sim->add_option("--arm-probs", sim_probs, "comma-separated arm probabilities");
  sim->add_option("--out", sim_out, "output CSV path")->required();

  auto* est = app.add_subcommand("estimate", "estimate organic direct and indirect effects");
  std::string est_data, est_method, est_link = "identity", est_out;
  std::vector<std::string> est_confounders;
  bool est_recode = false;
  int est_bootstrap = 0;
  double est_ci = 0.95;
  std::uint64_t est_seed = 0;
  est->add_option("--data", est_data, "input CSV")->required();
  est->add_option("--method", est_method, "nonparametric | semiparametric")->required()
      ->check(CLI::IsMember({"nonparametric", "semiparametric"}));
  est->add_option("--link", est_link, "identity | logit")
      ->check(CLI::IsMember({"identity", "logit"}));
  est->add_option("--confounders", est_confounders, "confounder columns to adjust for")
      ->delimiter(',');
  est->add_flag("--recode", est_recode, "swap arm labels before estimating");
  est->add_option("--bootstrap", est_bootstrap, "bootstrap replicates (0 = off)");
  est->add_option("--ci", est_ci, "confidence level for bootstrap intervals");
  est->add_option("--seed", est_seed, "bootstrap seed");
  est->add_option("--out", est_out, "output JSON report path");

  auto* chk = app.add_subcommand("check", "test the two intervention conditions on three-arm data");
  std::string chk_data, chk_mode = "distribution", chk_link = "identity", chk_out;
  double chk_alpha = 0.05;
  chk->add_option("--data", chk_data, "input CSV (three-arm)")->required();
  chk->add_option("--alpha", chk_alpha, "test level");
  chk->add_option("--mode", chk_mode, "distribution | mean (no-direct-effect check)")
      ->check(CLI::IsMember({"distribution", "mean"}));
  chk->add_option("--link", chk_link, "identity | logit (mean mode regression)")
      ->check(CLI::IsMember({"identity", "logit"}));
  chk->add_option("--out", chk_out, "output JSON report path");

  auto* demo = app.add_subcommand("demo", "built-in demonstration runs");
  std::string demo_name;
  int demo_n = 50000;
  std::uint64_t demo_seed = 1;
  std::string demo_out;
  demo->add_option("name", demo_name, "demo name (birthweight-paradox)")->required();
  demo->add_option("--n", demo_n, "number of simulated units")->check(CLI::PositiveNumber);
  demo->add_option("--seed", demo_seed, "random seed");
  demo->add_option("--out", demo_out, "output JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_scenario, sim_n, sim_seed, sim_arms, sim_probs, sim_out);
    if (est->parsed()) {
      return cmd_estimate(est_data, est_method, est_link, est_confounders, est_recode,
                          est_bootstrap, est_ci, est_seed, est_out);
    }
    if (chk->parsed()) return cmd_check(chk_data, chk_alpha, chk_mode, chk_link, chk_out);
    if (demo->parsed()) return cmd_demo(demo_name, demo_n, demo_seed, demo_out);
  } catch (const organic::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    // Handing a dataset of the wrong shape to a check is a usage problem,
    // not a failed check.
    return e.kind() == "MissingArm" && chk->parsed() ? kExitUsage : kExitDomain;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDomain;
  }
  return kExitOk;
}
