#pragma once

#include <cstdint>
#include <vector>

#include "organic/estimate.hpp"

namespace organic {

struct EffectQuantities {
  double e_y0 = 0.0;
  double e_y1 = 0.0;
  double e_y1_i1 = 0.0;
  double direct = 0.0;
  double indirect = 0.0;
  double total = 0.0;
};

struct BootstrapResult {
  EffectEstimate point;  // estimator on the original data, never a replicate mean
  int B = 0;
  double gamma = 0.95;
  std::uint64_t seed = 0;
  int n_failed = 0;  // replicates whose fit errored; dropped from SE/CI
  EffectQuantities se;
  EffectQuantities ci_lower;
  EffectQuantities ci_upper;
};

/// Nonparametric bootstrap: B row resamples with replacement, replicate b
/// drawn from the counter stream (seed, b) so results are identical however
/// replicates are scheduled. SEs are replicate standard deviations, CIs are
/// type-7 percentile intervals at level gamma. Throws InvalidB for B < 2 and
/// TooManyFailures when more than 20% of replicates error.
BootstrapResult bootstrap(const Dataset& data, const EstimatorConfig& config, int B,
                          double gamma, std::uint64_t seed);

/// Type-7 (linear interpolation) quantile of a sorted vector.
double quantile_type7(const std::vector<double>& sorted, double p);

}  // namespace organic
