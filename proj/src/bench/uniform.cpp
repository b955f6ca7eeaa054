// Uniform-access workload: every thread repeatedly inserts a batch of its own
// elements at a random point of a shared list and then walks forward from
// the first of them, removing its own and stepping over whatever other
// threads interleaved meanwhile.

#include <chrono>
#include <cstddef>
#include <cstring>
#include <latch>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adlist/bench/workloads.hpp"
#include "adlist/list.hpp"
#include "adlist/lru.hpp"

namespace adlist::bench {

namespace {

constexpr unsigned char kPoisonByte = 0xA5;
constexpr std::uint32_t kPoisonRefcount = 0xA5A5A5A5u;
constexpr int kAnchorTries = 4;

struct UniformElement : Node {
  std::uint32_t owner = 0;
};

// Freed nodes get their links and lock word overwritten and their refcount
// set to a masked garbage value; any later library write shows up as a
// changed byte when the owner reclaims the node.
void poison(Node* n) {
  std::memset(static_cast<void*>(n), kPoisonByte, offsetof(Node, refcnt));
  n->refcnt.store(RefcountWord::unpack(kPoisonRefcount));
}

bool poison_intact(const Node* n) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(n);
  for (std::size_t i = 0; i < offsetof(Node, refcnt); ++i) {
    if (bytes[i] != kPoisonByte) return false;
  }
  return n->refcnt.load().pack() == kPoisonRefcount;
}

struct Shared {
  std::size_t threads;
  std::size_t batch;
  std::size_t batches;
  std::unique_ptr<UniformElement[]> elements;
  std::latch ready;
  std::latch go;
  std::vector<RunReport> per_thread;

  Shared(std::size_t t, std::size_t b, std::size_t n)
      : threads(t), batch(b), batches(n), elements(std::make_unique<UniformElement[]>(t * b)),
        ready(static_cast<std::ptrdiff_t>(t)), go(1), per_thread(t) {
    for (std::size_t i = 0; i < t * b; ++i) {
      elements[i].owner = static_cast<std::uint32_t>(i / b);
    }
  }

  UniformElement* own(std::size_t thread, std::size_t i) { return &elements[thread * batch + i]; }
};

void adlist_worker(Shared& s, List& list, std::size_t me, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, s.threads * s.batch - 1);
  RunReport& rep = s.per_thread[me];
  s.ready.count_down();
  s.go.wait();

  for (std::size_t b = 0; b < s.batches; ++b) {
    Node* last = nullptr;
    for (std::size_t i = 0; i < s.batch; ++i) {
      UniformElement* e = s.own(me, i);
      if (b > 0 && !poison_intact(e)) {
        ++rep.poison_violations;
      }
      if (last != nullptr) {
        list.insert_after(last, e);
        List::unpin(last);
      } else {
        Node* anchor = nullptr;
        for (int t = 0; t < kAnchorTries && anchor == nullptr; ++t) {
          UniformElement* cand = &s.elements[pick(rng)];
          // Safe on any element: off-list ones stay masked and refuse pins.
          if (cand->owner != me && List::pin(cand)) {
            anchor = cand;
          }
        }
        bool after = (rng() & 1) != 0;
        if (anchor != nullptr) {
          after ? list.insert_after(anchor, e) : list.insert_before(anchor, e);
          List::unpin(anchor);
        } else {
          after ? list.append_at_end(e) : list.insert_at_front(e);
        }
      }
      last = e;
      ++rep.inserted;
    }
    List::unpin(last);

    // Own elements only ever move through us, so the first one inserted
    // still precedes all the others.
    Node* first = s.own(me, 0);
    ADLIST_CHECK(List::pin(first), "own element vanished from the list");
    Iterator it(list, Direction::kForward, first);
    std::size_t removed = 0;
    for (Node* n = first; removed < s.batch; n = it.next()) {
      ADLIST_CHECK(n != nullptr, "walk ended before all own elements were removed");
      if (static_cast<UniformElement*>(n)->owner != me) continue;
      Node* popped = it.pop();
      ADLIST_CHECK(popped == n, "another thread removed an element it does not own");
      poison(popped);
      ++removed;
    }
    it.destroy();
    rep.removed += removed;
  }
}

void dlist_worker(Shared& s, BaselineList& list, std::size_t me, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, s.threads * s.batch - 1);
  RunReport& rep = s.per_thread[me];
  s.ready.count_down();
  s.go.wait();

  for (std::size_t b = 0; b < s.batches; ++b) {
    Node* last = nullptr;
    for (std::size_t i = 0; i < s.batch; ++i) {
      UniformElement* e = s.own(me, i);
      bool after = (rng() & 1) != 0;
      UniformElement* cands[kAnchorTries];
      for (auto& c : cands) c = &s.elements[pick(rng)];
      auto a = list.access();
      if (last != nullptr) {
        a.insert_after(last, e);
      } else {
        Node* anchor = nullptr;
        for (UniformElement* c : cands) {
          if (c->owner != me && a.contains(c)) {
            anchor = c;
            break;
          }
        }
        if (anchor != nullptr) {
          after ? a.insert_after(anchor, e) : a.insert_before(anchor, e);
        } else {
          after ? a.append_tail(e) : a.insert_head(e);
        }
      }
      last = e;
      ++rep.inserted;
    }

    auto a = list.access();
    std::size_t removed = 0;
    for (Node* n = s.own(me, 0); removed < s.batch;) {
      ADLIST_CHECK(n != nullptr, "walk ended before all own elements were removed");
      Node* nx = a.next(n);
      if (static_cast<UniformElement*>(n)->owner == me) {
        a.remove(n);
        ++removed;
      }
      n = nx;
    }
    rep.removed += removed;
  }
}

template <class Worker, class ListT>
double run_threads(Shared& s, ListT& list, std::uint64_t seed, Worker worker) {
  std::vector<std::thread> pool;
  pool.reserve(s.threads);
  for (std::size_t t = 0; t < s.threads; ++t) {
    pool.emplace_back([&, t] { worker(s, list, t, mix_seed(seed, t)); });
  }
  s.ready.wait();
  auto t0 = std::chrono::steady_clock::now();
  s.go.count_down();
  for (auto& th : pool) th.join();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunReport run_uniform_once(const WorkloadConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Shared s(cfg.threads, cfg.batch_size, cfg.batches);
  RunReport out;

  if (cfg.impl == Impl::kDlist) {
    BaselineList list;
    out.seconds = run_threads(s, list, seed, dlist_worker);
    out.list_empty = list.size() == 0;
    out.links_consistent = true;
  } else {
    List list;
    out.seconds = run_threads(s, list, seed, adlist_worker);
    out.list_empty = list.first() == nullptr && list.unsafe_walk(Direction::kForward).empty();
    out.links_consistent = list.unsafe_links_consistent();
    for (Node* sentinel : {list.head_sentinel(), list.tail_sentinel()}) {
      RefcountWord rc = sentinel->refcnt.load();
      out.outstanding_pins += rc.pincount - 1u;
      if (sentinel->lock.state().held()) ++out.outstanding_pins;
    }
    for (std::size_t i = 0; i < cfg.threads * cfg.batch_size; ++i) {
      if (!poison_intact(&s.elements[i])) ++out.poison_violations;
    }
  }

  for (const RunReport& r : s.per_thread) {
    out.inserted += r.inserted;
    out.removed += r.removed;
    out.poison_violations += r.poison_violations;
  }
  return out;
}

BenchResult run_uniform(const WorkloadConfig& cfg) {
  std::vector<double> seconds;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    RunReport rep = run_uniform_once(cfg, mix_seed(cfg.seed, 0x756e69, r));
    if (!rep.list_empty || !rep.links_consistent || rep.outstanding_pins != 0 ||
        rep.poison_violations != 0 || rep.inserted != rep.removed) {
      throw std::runtime_error("uniform run " + std::to_string(r) + " failed its end-state checks");
    }
    seconds.push_back(rep.seconds);
  }
  return summarize(std::move(seconds));
}

}  // namespace adlist::bench
