#pragma once

#include <cmath>

namespace organic::stats {

double normal_cdf(double x);
double normal_quantile(double p);

/// Upper tail P(X > x) for a chi-squared variable with df degrees of freedom.
double chi_squared_survival(double x, double df);

inline double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

/// log(1 + exp(eta)) without overflow.
inline double softplus(double eta) {
  return std::fmax(eta, 0.0) + std::log1p(std::exp(-std::fabs(eta)));
}

}  // namespace organic::stats
