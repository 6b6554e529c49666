#pragma once

#include <string>
#include <vector>

#include "organic/dataset.hpp"
#include "organic/numerics.hpp"
#include "organic/scenario.hpp"

namespace organic {

enum class CheckCondition { MediatorLaw, NoDirectEffect };
enum class CheckMode { Distribution, MeanOnly };

struct StratumTest {
  std::string id;
  std::array<int, 2> n{0, 0};  // units per compared arm
  double statistic = 0.0;      // KS D, or Wald z for MeanOnly
  double p_value = 1.0;
  bool excluded = false;       // fewer than 5 units in an arm; flagged, not pooled
};

struct CheckReport {
  CheckCondition condition;
  CheckMode mode;
  double alpha = 0.05;
  std::vector<StratumTest> strata;
  double pooled_p = 1.0;
  bool pass = false;  // pooled_p >= alpha
};

/// Mediator-law condition: within each covariate stratum, two-sample KS test
/// of the mediator between arms 2 and 0, pooled by Fisher's combination.
CheckReport check_mediator_law(const Dataset& data, double alpha);

/// No-direct-effect condition. Distribution mode: per (covariate, mediator)
/// stratum KS test of the outcome between arms 2 and 1 with Fisher pooling
/// (needs a discrete mediator). MeanOnly mode: Wald test of the arm-2
/// indicator in a pooled regression of the outcome on mediator and
/// covariates over arms 1 and 2 - the relaxed, mean-level version.
CheckReport check_no_direct_effect(const Dataset& data, double alpha, CheckMode mode,
                                   Link link = Link::Identity);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test. Exact (continuity-assuming)
/// path-count p-value when n1*n2 <= 10000, asymptotic otherwise.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Fisher's combination: -2 sum log p against chi-squared with 2S dof.
double fisher_pooled_p(const std::vector<double>& p_values);

}  // namespace organic
