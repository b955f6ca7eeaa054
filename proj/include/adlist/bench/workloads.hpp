#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "adlist/bench/config.hpp"
#include "adlist/bench/stats.hpp"

namespace adlist::bench {

// Outcome of one timed run plus the end-of-run consistency checks.
struct RunReport {
  double seconds = 0.0;

  // uniform
  std::size_t inserted = 0;
  std::size_t removed = 0;
  std::size_t poison_violations = 0;  // bytes of a removed node changed after removal
  bool list_empty = false;
  std::size_t outstanding_pins = 0;

  // LRU
  std::size_t inserts_done = 0;
  std::size_t inserts_skipped = 0;  // no element available even after evicting
  std::size_t picks_moved = 0;
  std::size_t picks_missed = 0;     // element not in the cache
  std::size_t picks_gave_up = 0;    // pin or mask race lost to a concurrent op
  std::size_t evicted = 0;
  std::size_t evictor_overlaps = 0; // more than one thread inside the evict region
  std::size_t rebalances = 0;
  bool conserved = false;           // list + stacks == pool at the end

  bool links_consistent = false;
};

RunReport run_uniform_once(const WorkloadConfig& cfg, std::uint64_t seed);
RunReport run_lru_once(const WorkloadConfig& cfg, std::uint64_t seed);

// `repeats` timed runs, seeds derived from cfg.seed. Throws std::runtime_error
// if any run fails its end-of-run checks.
BenchResult run_uniform(const WorkloadConfig& cfg);
BenchResult run_lru(const WorkloadConfig& cfg);

struct SweepPoint {
  std::size_t dummy_count = 0;
  BenchResult result;
  double theory = 0.0;  // t / log2(n) with t the n = 1 mean (t itself at n = 1)
  double fitted = 0.0;  // c / log2(n), c least-squares over n >= 2 (NaN at n = 1)
};

inline const std::vector<std::size_t> kSweepDummyCounts{1, 2, 4, 8, 16, 32, 64};

std::vector<SweepPoint> run_dummy_sweep(const WorkloadConfig& cfg,
                                        const std::vector<std::size_t>& counts = kSweepDummyCounts);

// Per-thread LRU operation sequence; identical for identical (seed, thread).
class OpStream {
 public:
  struct Op {
    bool insert = false;
    std::uint32_t element = 0;  // pick target, meaningful when !insert
  };

  OpStream(const WorkloadConfig& cfg, std::size_t thread, std::uint64_t seed, std::size_t pool);

  bool done() const noexcept { return issued_ == total_; }
  Op next();

 private:
  std::size_t total_;
  std::size_t inserts_;
  std::size_t issued_ = 0;
  std::size_t inserts_issued_ = 0;
  std::size_t pool_;
  std::mt19937_64 rng_;
};

// Seed for worker `thread` in repeat `repeat`.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Spins for roughly `us` microseconds of CPU work.
void busy_wait_us(double us);

}  // namespace adlist::bench
