// bench: runs one workload configuration and writes per-repeat timings plus
// a summary row to CSV.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "adlist/bench/config.hpp"
#include "adlist/bench/csv.hpp"
#include "adlist/bench/workloads.hpp"
#include "adlist/fault.hpp"

using namespace adlist::bench;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitRun = 3;

void print_summary(const ResultRow& r) {
  std::printf("%-17s %-13s threads=%-3zu dummies=%-3zu mean=%.6fs ci99=%s\n", r.workload.c_str(),
              r.impl.c_str(), r.threads, r.dummy_count, r.result.mean,
              r.result.seconds.size() < 2 ? "n/a"
                                          : std::to_string(r.result.ci99_halfwidth).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrent list benchmark harness"};
  std::string workload_name;
  std::string impl_name;
  std::string out_path;
  std::size_t threads = 1;
  std::size_t repeats = 1;
  std::uint64_t seed = 1;
  std::size_t batch_size = 0, batches = 0, picks = 0, inserts = 0, available = 0, evict_k = 0,
              dummies = 0;
  double evict_cost = 0.0;

  app.add_option("--workload", workload_name,
                 "uniform | lru-warmup | lru-reclaim | lru-reprioritize | dummy-sweep")
      ->required();
  app.add_option("--impl", impl_name, "dlist | adlist | adlist-dummy")->required();
  app.add_option("--threads", threads, "worker threads")->required();
  app.add_option("--repeats", repeats, "timed repeats per configuration")->required();
  app.add_option("--seed", seed, "64-bit workload seed")->required();
  app.add_option("--out", out_path, "CSV output path")->required();
  auto* o_batch_size = app.add_option("--batch-size", batch_size, "uniform: elements per batch (128)");
  auto* o_batches = app.add_option("--batches", batches, "uniform: batches per thread (1000)");
  auto* o_picks = app.add_option("--picks", picks, "LRU: re-prioritize ops per thread");
  auto* o_inserts = app.add_option("--inserts", inserts, "LRU: insert ops per thread");
  auto* o_available = app.add_option("--available", available, "LRU: initial free elements per thread");
  auto* o_evict_k = app.add_option("--evict-k", evict_k, "LRU: elements per eviction (100)");
  auto* o_evict_cost = app.add_option("--evict-cost-us", evict_cost, "LRU: busy-wait per evicted element (50)");
  auto* o_dummies = app.add_option("--dummy-nodes", dummies, "adlist-dummy: dummy node count (64)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  WorkloadConfig cfg;
  try {
    auto w = parse_workload(workload_name);
    if (!w) throw ConfigError("unknown workload '" + workload_name + "'");
    auto impl = parse_impl(impl_name);
    if (!impl) throw ConfigError("unknown impl '" + impl_name + "'");
    cfg = preset(*w);
    cfg.impl = *impl;
    cfg.threads = threads;
    cfg.repeats = repeats;
    cfg.seed = seed;
    if (*o_batch_size) cfg.batch_size = batch_size;
    if (*o_batches) cfg.batches = batches;
    if (*o_picks) cfg.picks_per_thread = picks;
    if (*o_inserts) cfg.inserts_per_thread = inserts;
    if (*o_available) cfg.available_per_thread = available;
    if (*o_evict_k) cfg.evict_batch_k = evict_k;
    if (*o_evict_cost) cfg.evict_cost_us = evict_cost;
    if (*o_dummies) cfg.dummy_count = dummies;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "bench: config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::vector<ResultRow> rows;
  try {
    if (cfg.workload == Workload::kDummySweep) {
      std::vector<SweepPoint> sweep = run_dummy_sweep(cfg);
      std::printf("%8s %14s %14s %14s\n", "dummies", "mean_s", "t/log2(n)", "fit c/log2(n)");
      for (const SweepPoint& p : sweep) {
        std::printf("%8zu %14.6f %14.6f %14.6f\n", p.dummy_count, p.result.mean, p.theory, p.fitted);
        rows.push_back(ResultRow{std::string(to_string(cfg.workload)), std::string(to_string(cfg.impl)),
                                 cfg.threads, p.dummy_count, p.result});
      }
    } else {
      BenchResult res = cfg.workload == Workload::kUniform ? run_uniform(cfg) : run_lru(cfg);
      std::size_t d = cfg.impl == Impl::kAdlistDummy ? cfg.dummy_count : 0;
      rows.push_back(ResultRow{std::string(to_string(cfg.workload)), std::string(to_string(cfg.impl)),
                               cfg.threads, d, std::move(res)});
      print_summary(rows.back());
    }
  } catch (const std::exception& e) {
    std::cerr << "bench: run failed: " << e.what() << '\n';
    return kExitRun;
  }

  try {
    emit_csv(rows, out_path);
  } catch (const IoError& e) {
    std::cerr << "bench: I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
