#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "organic/dataset.hpp"
#include "organic/scenario.hpp"

namespace organic {

struct MonteCarloInfo {
  long long reps = 0;
  std::uint64_t seed = 0;
  double standard_error = 0.0;  // largest SE among the three means
};

/// Scenario-level target quantities. Exact (enumeration over discrete cells)
/// whenever the scenario is fully discrete, Monte Carlo otherwise.
struct GroundTruth {
  double e_y0 = 0.0;
  double e_y1 = 0.0;
  double e_y1_i1 = 0.0;
  double direct = 0.0;    // e_y1_i1 - e_y0
  double indirect = 0.0;  // e_y1 - e_y1_i1
  double total = 0.0;     // e_y1 - e_y0
  bool exact = false;
  std::optional<MonteCarloInfo> monte_carlo;
};

/// Randomized two-arm trial: arm ~ Bernoulli(p_treat), mediator and outcome
/// from the arm-specific laws given (C, Ct). Ct never appears in the output.
Dataset simulate_two_arm(const Scenario& scenario, int n, double p_treat, std::uint64_t seed);

/// Three-arm trial with R in {0,1,2}. Arm 2 realizes the intervention by
/// construction: its mediator comes from the arm-0 law given (C, Ct) - a
/// fresh draw (IndependentRedraw) or the unit's own noise / shared uniform
/// (CoupledNoise, SetToM0) - and its outcome from the arm-1 law at the
/// realized mediator.
Dataset simulate_three_arm(const Scenario& scenario, int n,
                           const std::array<double, 3>& arm_probs, std::uint64_t seed);

GroundTruth ground_truth(const Scenario& scenario, long long reps = 10'000'000,
                         std::uint64_t seed = 0);

/// Smoking / low-birth-weight demo: binary unobserved cause (birth defect)
/// drives both the mediator (low birth weight) and the outcome (mortality),
/// so an analysis blind to it overstates the indirect effect and understates
/// the direct effect.
Scenario birthweight_scenario();

}  // namespace organic
