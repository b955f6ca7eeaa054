#include <cmath>
#include <limits>

#include "adlist/bench/workloads.hpp"

namespace adlist::bench {

std::vector<SweepPoint> run_dummy_sweep(const WorkloadConfig& cfg,
                                        const std::vector<std::size_t>& counts) {
  validate(cfg);
  std::vector<SweepPoint> points;
  for (std::size_t n : counts) {
    WorkloadConfig c = cfg;
    c.workload = Workload::kDummySweep;
    c.impl = Impl::kAdlistDummy;
    c.dummy_count = n;
    c.seed = mix_seed(cfg.seed, 0x5377, n);
    SweepPoint p;
    p.dummy_count = n;
    p.result = run_lru(c);
    points.push_back(std::move(p));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double t = nan;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const SweepPoint& p : points) {
    if (p.dummy_count == 1) t = p.result.mean;
    if (p.dummy_count >= 2) {
      xs.push_back(static_cast<double>(p.dummy_count));
      ys.push_back(p.result.mean);
    }
  }
  const double c = xs.empty() ? nan : fit_inverse_log2(xs, ys);
  for (SweepPoint& p : points) {
    if (p.dummy_count == 1) {
      p.theory = t;
      p.fitted = nan;
    } else {
      const double l = std::log2(static_cast<double>(p.dummy_count));
      p.theory = t / l;
      p.fitted = c / l;
    }
  }
  return points;
}

}  // namespace adlist::bench
