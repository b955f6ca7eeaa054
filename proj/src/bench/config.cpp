#include "adlist/bench/config.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace adlist::bench {

namespace {

constexpr std::array<std::pair<Workload, std::string_view>, 5> kWorkloadNames{{
    {Workload::kUniform, "uniform"},
    {Workload::kLruWarmup, "lru-warmup"},
    {Workload::kLruReclaim, "lru-reclaim"},
    {Workload::kLruReprioritize, "lru-reprioritize"},
    {Workload::kDummySweep, "dummy-sweep"},
}};

constexpr std::array<std::pair<Impl, std::string_view>, 3> kImplNames{{
    {Impl::kDlist, "dlist"},
    {Impl::kAdlist, "adlist"},
    {Impl::kAdlistDummy, "adlist-dummy"},
}};

}  // namespace

std::string_view to_string(Workload w) noexcept {
  for (auto& [k, v] : kWorkloadNames) {
    if (k == w) return v;
  }
  return "?";
}

std::string_view to_string(Impl i) noexcept {
  for (auto& [k, v] : kImplNames) {
    if (k == i) return v;
  }
  return "?";
}

std::optional<Workload> parse_workload(std::string_view s) noexcept {
  for (auto& [k, v] : kWorkloadNames) {
    if (v == s) return k;
  }
  return std::nullopt;
}

std::optional<Impl> parse_impl(std::string_view s) noexcept {
  for (auto& [k, v] : kImplNames) {
    if (v == s) return k;
  }
  return std::nullopt;
}

WorkloadConfig preset(Workload w) {
  WorkloadConfig cfg;
  cfg.workload = w;
  switch (w) {
    case Workload::kUniform:
      cfg.impl = Impl::kAdlist;
      break;
    case Workload::kLruWarmup:
      cfg.picks_per_thread = 100'000;
      cfg.inserts_per_thread = 100'000;
      cfg.available_per_thread = 100'000;
      break;
    case Workload::kLruReclaim:
      cfg.picks_per_thread = 200'000;
      cfg.inserts_per_thread = 20'000;
      cfg.available_per_thread = 10'000;
      break;
    case Workload::kLruReprioritize:
      cfg.picks_per_thread = 2'000'000;
      cfg.inserts_per_thread = 20'000;
      cfg.available_per_thread = 10'000;
      break;
    case Workload::kDummySweep:
      cfg = preset(Workload::kLruReprioritize);
      cfg.workload = Workload::kDummySweep;
      cfg.impl = Impl::kAdlistDummy;
      cfg.threads = 10;
      break;
  }
  return cfg;
}

void validate(const WorkloadConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(cfg.threads >= 1, "threads must be positive");
  require(cfg.threads < 4096, "threads must stay below the waiter capacity (4096)");
  require(cfg.repeats >= 1, "repeats must be at least 1");
  if (cfg.workload == Workload::kUniform) {
    require(cfg.impl != Impl::kAdlistDummy, "uniform workload runs on dlist or adlist only");
    require(cfg.batch_size >= 1, "batch-size must be positive");
    require(cfg.batches >= 1, "batches must be positive");
    return;
  }
  if (cfg.workload == Workload::kDummySweep) {
    require(cfg.impl == Impl::kAdlistDummy, "dummy-sweep runs on adlist-dummy only");
  }
  require(cfg.picks_per_thread + cfg.inserts_per_thread >= 1, "picks + inserts must be positive");
  require(cfg.available_per_thread >= 1, "available must be positive");
  require(cfg.threads * cfg.available_per_thread < (std::size_t{1} << 32),
          "element pool exceeds 2^32 elements");
  require(cfg.evict_batch_k >= 1, "evict-k must be positive");
  require(std::isfinite(cfg.evict_cost_us) && cfg.evict_cost_us >= 0.0,
          "evict-cost-us must be a non-negative number");
  require(cfg.dummy_count >= 1, "dummy-nodes must be positive");
  require(cfg.rebalance_every >= 1, "rebalance interval must be positive");
}

}  // namespace adlist::bench
