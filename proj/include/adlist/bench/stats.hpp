#pragma once

#include <cstddef>
#include <vector>

namespace adlist::bench {

struct BenchResult {
  std::vector<double> seconds;  // one entry per repeat
  double mean = 0.0;
  // Student-t 99% half-width; NaN with fewer than two repeats.
  double ci99_halfwidth = 0.0;
};

BenchResult summarize(std::vector<double> seconds);

// Two-sided quantile of Student's t with `dof` degrees of freedom.
double student_t_quantile(double p, std::size_t dof);

// Least-squares scale c for the model y = c / log2(n), n >= 2.
double fit_inverse_log2(const std::vector<double>& n, const std::vector<double>& y);

}  // namespace adlist::bench
