#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace adlist::bench {

enum class Workload { kUniform, kLruWarmup, kLruReclaim, kLruReprioritize, kDummySweep };
enum class Impl { kDlist, kAdlist, kAdlistDummy };

std::string_view to_string(Workload w) noexcept;
std::string_view to_string(Impl i) noexcept;
std::optional<Workload> parse_workload(std::string_view s) noexcept;
std::optional<Impl> parse_impl(std::string_view s) noexcept;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorkloadConfig {
  Workload workload = Workload::kUniform;
  Impl impl = Impl::kAdlist;
  std::size_t threads = 1;

  // uniform
  std::size_t batch_size = 128;
  std::size_t batches = 1000;

  // LRU
  std::size_t picks_per_thread = 0;
  std::size_t inserts_per_thread = 0;
  std::size_t available_per_thread = 0;
  std::size_t evict_batch_k = 100;
  double evict_cost_us = 50.0;
  std::size_t dummy_count = 64;
  std::size_t rebalance_every = 1024;  // evictions between dummy rebalances

  std::size_t repeats = 1;
  std::uint64_t seed = 1;

  std::size_t elements_per_thread() const noexcept { return batch_size * batches; }
};

// Defaults for a workload: the uniform shape (128 x 1000), or the three LRU
// mixes. dummy-sweep uses the reprioritize mix on 10 threads.
WorkloadConfig preset(Workload w);

// Throws ConfigError naming the first bad field.
void validate(const WorkloadConfig& cfg);

}  // namespace adlist::bench
