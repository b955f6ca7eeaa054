#include "adlist/bench/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace adlist::bench {

double student_t_quantile(double p, std::size_t dof) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, p);
}

BenchResult summarize(std::vector<double> seconds) {
  BenchResult r;
  r.seconds = std::move(seconds);
  const std::size_t n = r.seconds.size();
  if (n == 0) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    r.ci99_halfwidth = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.mean = std::accumulate(r.seconds.begin(), r.seconds.end(), 0.0) / static_cast<double>(n);
  if (n < 2) {
    r.ci99_halfwidth = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double ss = 0.0;
  for (double s : r.seconds) {
    ss += (s - r.mean) * (s - r.mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  r.ci99_halfwidth = student_t_quantile(0.995, n - 1) * sd / std::sqrt(static_cast<double>(n));
  return r;
}

double fit_inverse_log2(const std::vector<double>& n, const std::vector<double>& y) {
  if (n.size() != y.size() || n.empty()) {
    throw std::invalid_argument("fit_inverse_log2: mismatched or empty samples");
  }
  double xy = 0.0;
  double xx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 2.0) {
      throw std::invalid_argument("fit_inverse_log2: model undefined below n = 2");
    }
    const double x = 1.0 / std::log2(n[i]);
    xy += x * y[i];
    xx += x * x;
  }
  return xy / xx;
}

}  // namespace adlist::bench
