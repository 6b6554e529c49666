#include "organic/inference.hpp"

#include <algorithm>
#include <cmath>

#include "organic/rng.hpp"

namespace organic {

double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error("InvalidArgument", "quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

double sample_sd(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

BootstrapResult bootstrap(const Dataset& data, const EstimatorConfig& config, int B,
                          double gamma, std::uint64_t seed) {
  if (B < 2) throw Error("InvalidB", "bootstrap needs B >= 2, got " + std::to_string(B));
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("InvalidArgument", "gamma must lie in (0,1)");

  BootstrapResult result;
  result.point = run_estimator(data, config);
  result.B = B;
  result.gamma = gamma;
  result.seed = seed;

  const int n = data.n();
  std::array<std::vector<double>, 6> replicates;
  for (auto& v : replicates) v.reserve(static_cast<std::size_t>(B));

  std::vector<int> rows(static_cast<std::size_t>(n));
  for (int b = 0; b < B; ++b) {
    const CounterStream stream(seed, static_cast<std::uint64_t>(b));
    for (int i = 0; i < n; ++i) {
      const auto draw = static_cast<int>(stream.uniform(static_cast<std::uint64_t>(i)) * n);
      rows[static_cast<std::size_t>(i)] = std::min(draw, n - 1);
    }
    try {
      const EffectEstimate est = run_estimator(data.select_rows(rows), config);
      replicates[0].push_back(est.e_y0);
      replicates[1].push_back(est.e_y1);
      replicates[2].push_back(est.e_y1_i1);
      replicates[3].push_back(est.direct);
      replicates[4].push_back(est.indirect);
      replicates[5].push_back(est.total);
    } catch (const Error&) {
      ++result.n_failed;
    }
  }

  if (5 * result.n_failed > B) {
    throw Error("TooManyFailures", std::to_string(result.n_failed) + " of " + std::to_string(B) +
                                       " replicates failed");
  }

  const double lo_p = (1.0 - gamma) / 2.0;
  const double hi_p = (1.0 + gamma) / 2.0;
  auto fill = [&](int idx, double EffectQuantities::* field) {
    std::vector<double>& values = replicates[static_cast<std::size_t>(idx)];
    result.se.*field = sample_sd(values);
    std::sort(values.begin(), values.end());
    result.ci_lower.*field = quantile_type7(values, lo_p);
    result.ci_upper.*field = quantile_type7(values, hi_p);
  };
  fill(0, &EffectQuantities::e_y0);
  fill(1, &EffectQuantities::e_y1);
  fill(2, &EffectQuantities::e_y1_i1);
  fill(3, &EffectQuantities::direct);
  fill(4, &EffectQuantities::indirect);
  fill(5, &EffectQuantities::total);
  return result;
}

}  // namespace organic
