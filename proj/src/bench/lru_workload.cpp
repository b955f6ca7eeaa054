// LRU cache workloads: re-prioritize (move a cached element to the head),
// insert (take an element from the thread's private stack and put it at the
// head) and evict (one thread at a time takes k elements off the tail and
// hands them back round-robin to the threads' stacks).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <latch>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adlist/bench/workloads.hpp"
#include "adlist/list.hpp"
#include "adlist/lru.hpp"

namespace adlist::bench {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(seed) ^ a) ^ b);
}

namespace {

std::uint64_t spin_body(std::uint64_t iters) {
  volatile std::uint64_t sink = 0;
  for (std::uint64_t i = 0; i < iters; ++i) {
    sink = sink + i;
  }
  return sink;
}

double iterations_per_us() {
  static const double rate = [] {
    using clock = std::chrono::steady_clock;
    std::uint64_t iters = 1 << 16;
    for (;;) {
      auto t0 = clock::now();
      spin_body(iters);
      double us = std::chrono::duration<double, std::micro>(clock::now() - t0).count();
      if (us >= 20'000.0) return static_cast<double>(iters) / us;
      iters *= 2;
    }
  }();
  return rate;
}

}  // namespace

void busy_wait_us(double us) {
  if (us <= 0.0) return;
  spin_body(static_cast<std::uint64_t>(us * iterations_per_us()));
}

OpStream::OpStream(const WorkloadConfig& cfg, std::size_t thread, std::uint64_t seed,
                   std::size_t pool)
    : total_(cfg.picks_per_thread + cfg.inserts_per_thread),
      inserts_(cfg.inserts_per_thread),
      pool_(pool),
      rng_(mix_seed(seed, thread)) {}

OpStream::Op OpStream::next() {
  ADLIST_CHECK(!done(), "operation stream exhausted");
  // Inserts are spread evenly: op i is an insert when the running quota
  // floor((i + 1) * inserts / total) steps up.
  const std::size_t i = issued_++;
  const bool insert = (i + 1) * inserts_ / total_ > inserts_issued_;
  if (insert) {
    ++inserts_issued_;
    return Op{true, 0};
  }
  std::uniform_int_distribution<std::size_t> dist(0, pool_ - 1);
  return Op{false, static_cast<std::uint32_t>(dist(rng_))};
}

namespace {

constexpr std::uint32_t kEmpty = 0xFFFFFFFFu;

struct CacheElement : Node {
  std::atomic<bool> present{false};
  std::atomic<std::uint32_t> stack_next{kEmpty};
};

// Free-element stack. Any thread may push (the evictor); only the owner pops,
// which rules out ABA on the head.
class ElementStack {
 public:
  void push(CacheElement* elems, std::uint32_t idx) {
    std::uint32_t h = head_.load(std::memory_order_relaxed);
    do {
      elems[idx].stack_next.store(h, std::memory_order_relaxed);
    } while (!head_.compare_exchange_weak(h, idx, std::memory_order_release,
                                          std::memory_order_relaxed));
  }

  std::uint32_t pop(CacheElement* elems) {
    std::uint32_t h = head_.load(std::memory_order_acquire);
    while (h != kEmpty &&
           !head_.compare_exchange_weak(h, elems[h].stack_next.load(std::memory_order_relaxed),
                                        std::memory_order_acquire, std::memory_order_acquire)) {
    }
    return h;
  }

  std::size_t unsafe_size(const CacheElement* elems) const {
    std::size_t n = 0;
    for (std::uint32_t i = head_.load(); i != kEmpty; i = elems[i].stack_next.load()) ++n;
    return n;
  }

  void unsafe_collect(const CacheElement* elems, std::vector<std::uint32_t>& out) const {
    for (std::uint32_t i = head_.load(); i != kEmpty; i = elems[i].stack_next.load()) {
      out.push_back(i);
    }
  }

 private:
  alignas(64) std::atomic<std::uint32_t> head_{kEmpty};
};

struct alignas(64) ThreadCounters {
  std::size_t inserts_done = 0;
  std::size_t inserts_skipped = 0;
  std::size_t picks_moved = 0;
  std::size_t picks_missed = 0;
  std::size_t picks_gave_up = 0;
  std::size_t evicted = 0;
  std::size_t rebalances = 0;
};

class LruRun {
 public:
  LruRun(const WorkloadConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        seed_(seed),
        pool_(cfg.threads * cfg.available_per_thread),
        elems_(std::make_unique<CacheElement[]>(pool_)),
        stacks_(std::make_unique<ElementStack[]>(cfg.threads)),
        counters_(cfg.threads),
        ready_(static_cast<std::ptrdiff_t>(cfg.threads)),
        go_(1) {
    if (cfg.impl == Impl::kAdlistDummy) {
      ext_ = std::make_unique<ExtendedList>(cfg.dummy_count, mix_seed(seed, 0xd0d0));
    } else if (cfg.impl == Impl::kAdlist) {
      plain_ = std::make_unique<List>();
    } else {
      base_ = std::make_unique<BaselineList>();
    }
    // Thread t starts with [t*A, (t+1)*A), pushed so that it pops them in
    // ascending order.
    for (std::size_t t = 0; t < cfg.threads; ++t) {
      for (std::size_t i = cfg.available_per_thread; i-- > 0;) {
        stacks_[t].push(elems_.get(), static_cast<std::uint32_t>(t * cfg.available_per_thread + i));
      }
    }
  }

  RunReport run() {
    std::vector<std::thread> pool;
    pool.reserve(cfg_.threads);
    for (std::size_t t = 0; t < cfg_.threads; ++t) {
      pool.emplace_back([this, t] { worker(t); });
    }
    ready_.wait();
    auto t0 = std::chrono::steady_clock::now();
    go_.count_down();
    for (auto& th : pool) th.join();
    RunReport rep;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(rep);
    return rep;
  }

 private:
  List* adlist() { return ext_ ? &ext_->list() : plain_.get(); }

  void worker(std::size_t me) {
    OpStream ops(cfg_, me, seed_, pool_);
    if (ext_) ext_->seed_thread(mix_seed(seed_, 0xa11c, me));
    ThreadCounters& c = counters_[me];
    ready_.count_down();
    go_.wait();
    while (!ops.done()) {
      OpStream::Op op = ops.next();
      if (op.insert) {
        insert(me, c);
      } else {
        reprioritize(&elems_[op.element], c);
      }
    }
  }

  void reprioritize(CacheElement* e, ThreadCounters& c) {
    if (!e->present.load(std::memory_order_acquire)) {
      ++c.picks_missed;
      return;
    }
    if (base_) {
      if (base_->move_to_head(e)) {
        ++c.picks_moved;
      } else {
        ++c.picks_missed;
      }
      return;
    }
    List* l = adlist();
    // A failed pin or lost delete race means the element is being evicted
    // or moved by someone else; either way this pick is done.
    if (!List::pin(e)) {
      ++c.picks_gave_up;
      return;
    }
    if (!l->node_delete(e)) {
      List::unpin(e);
      ++c.picks_gave_up;
      return;
    }
    put_at_head(e);
    ++c.picks_moved;
  }

  void put_at_head(CacheElement* e) {
    if (base_) {
      base_->insert_head(e);
    } else if (ext_) {
      ext_->insert_at_head(e);
      List::unpin(e);
    } else {
      plain_->insert_at_front(e);
      List::unpin(e);
    }
  }

  void insert(std::size_t me, ThreadCounters& c) {
    std::uint32_t idx = stacks_[me].pop(elems_.get());
    if (idx == kEmpty) {
      evict(me, c);
      idx = stacks_[me].pop(elems_.get());
    }
    if (idx == kEmpty) {
      ++c.inserts_skipped;
      return;
    }
    CacheElement* e = &elems_[idx];
    // Set before linking: once on the list the evictor may clear it again.
    e->present.store(true, std::memory_order_release);
    put_at_head(e);
    ++c.inserts_done;
  }

  void evict(std::size_t me, ThreadCounters& c) {
    std::lock_guard<std::mutex> gate(evict_mu_);
    // Someone else may have refilled us while we waited for the gate.
    if (stacks_[me].unsafe_size(elems_.get()) > 0) return;
    if (inside_.fetch_add(1, std::memory_order_acq_rel) != 0) {
      overlaps_.fetch_add(1, std::memory_order_relaxed);
    }
    std::size_t got = 0;
    if (base_) {
      while (got < cfg_.evict_batch_k) {
        Node* n = base_->pop_back();
        if (n == nullptr) break;
        busy_wait_us(cfg_.evict_cost_us);
        release(static_cast<CacheElement*>(n));
        ++got;
      }
    } else {
      Iterator it(*adlist(), Direction::kBackward);
      for (Node* n = it.next(); n != nullptr && got < cfg_.evict_batch_k; n = it.next()) {
        busy_wait_us(cfg_.evict_cost_us);
        if (Node* popped = it.pop()) {
          release(static_cast<CacheElement*>(popped));
          ++got;
        }
      }
      it.destroy();
    }
    c.evicted += got;
    if (ext_) {
      since_rebalance_ += got;
      if (since_rebalance_ >= cfg_.rebalance_every) {
        since_rebalance_ = 0;
        ext_->rebalance_dummies();
        ++c.rebalances;
      }
    }
    inside_.fetch_sub(1, std::memory_order_acq_rel);
  }

  void release(CacheElement* e) {
    e->present.store(false, std::memory_order_release);
    const std::uint32_t idx = static_cast<std::uint32_t>(e - elems_.get());
    stacks_[next_stack_].push(elems_.get(), idx);
    next_stack_ = (next_stack_ + 1) % cfg_.threads;
  }

  void finish(RunReport& rep) {
    for (const ThreadCounters& c : counters_) {
      rep.inserts_done += c.inserts_done;
      rep.inserts_skipped += c.inserts_skipped;
      rep.picks_moved += c.picks_moved;
      rep.picks_missed += c.picks_missed;
      rep.picks_gave_up += c.picks_gave_up;
      rep.evicted += c.evicted;
      rep.rebalances += c.rebalances;
    }
    rep.evictor_overlaps = overlaps_.load();

    std::vector<std::uint32_t> seen;
    seen.reserve(pool_);
    for (std::size_t t = 0; t < cfg_.threads; ++t) stacks_[t].unsafe_collect(elems_.get(), seen);
    const std::size_t in_stacks = seen.size();
    bool flags_ok = true;
    for (std::uint32_t i : seen) flags_ok &= !elems_[i].present.load();

    std::vector<Node*> on_list;
    if (base_) {
      on_list = base_->to_vector();
      rep.links_consistent = on_list.size() == base_->size();
    } else {
      rep.links_consistent = adlist()->unsafe_links_consistent();
      for (Node* n : adlist()->unsafe_walk(Direction::kForward)) {
        if (ext_ && ext_->is_dummy(n)) continue;
        on_list.push_back(n);
        RefcountWord rc = n->refcnt.load();
        rep.links_consistent &= !rc.mask && rc.pincount == 0 && rc.waitq == kNullId;
      }
    }
    for (Node* n : on_list) {
      auto* e = static_cast<CacheElement*>(n);
      flags_ok &= e->present.load();
      seen.push_back(static_cast<std::uint32_t>(e - elems_.get()));
    }
    std::sort(seen.begin(), seen.end());
    const bool unique = std::adjacent_find(seen.begin(), seen.end()) == seen.end();
    rep.conserved = flags_ok && unique && in_stacks + on_list.size() == pool_;
  }

  const WorkloadConfig& cfg_;
  std::uint64_t seed_;
  std::size_t pool_;
  std::unique_ptr<CacheElement[]> elems_;
  std::unique_ptr<ElementStack[]> stacks_;
  std::vector<ThreadCounters> counters_;
  std::unique_ptr<List> plain_;
  std::unique_ptr<ExtendedList> ext_;
  std::unique_ptr<BaselineList> base_;
  std::latch ready_;
  std::latch go_;

  std::mutex evict_mu_;
  std::atomic<int> inside_{0};
  std::atomic<std::size_t> overlaps_{0};
  // Guarded by evict_mu_.
  std::size_t next_stack_ = 0;
  std::size_t since_rebalance_ = 0;
};

}  // namespace

RunReport run_lru_once(const WorkloadConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  LruRun run(cfg, seed);
  return run.run();
}

BenchResult run_lru(const WorkloadConfig& cfg) {
  std::vector<double> seconds;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    RunReport rep = run_lru_once(cfg, mix_seed(cfg.seed, 0x6c7275, r));
    if (!rep.conserved || !rep.links_consistent || rep.evictor_overlaps != 0) {
      throw std::runtime_error("LRU run " + std::to_string(r) + " failed its end-state checks");
    }
    seconds.push_back(rep.seconds);
  }
  return summarize(std::move(seconds));
}

}  // namespace adlist::bench
