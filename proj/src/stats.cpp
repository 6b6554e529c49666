#include "organic/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace organic::stats {

double normal_cdf(double x) {
  static const boost::math::normal_distribution<> dist(0.0, 1.0);
  return boost::math::cdf(dist, x);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<> dist(0.0, 1.0);
  return boost::math::quantile(dist, p);
}

double chi_squared_survival(double x, double df) {
  const boost::math::chi_squared_distribution<> dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

}  // namespace organic::stats
