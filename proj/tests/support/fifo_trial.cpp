#include "fifo_trial.hpp"

#include <atomic>
#include <chrono>
#include <iterator>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "adlist/lwlock.hpp"
#include "queue_sim.hpp"

namespace support {

namespace {

using adlist::LockWord;
using adlist::LwLock;

struct Requester {
  int id = 0;
  bool exclusive = false;
  std::atomic<bool> acquired{false};
  std::atomic<bool> release{false};
  std::atomic<bool> done{false};
  std::thread thread;
};

template <class Pred>
bool wait_for(Pred pred, std::chrono::seconds limit = std::chrono::seconds(10)) {
  auto deadline = std::chrono::steady_clock::now() + limit;
  while (!pred()) {
    if (std::chrono::steady_clock::now() > deadline) return false;
    std::this_thread::yield();
  }
  return true;
}

}  // namespace

FifoTrialOutcome run_fifo_trial(std::mt19937_64& rng, int max_requests) {
  FifoTrialOutcome out;
  // Leaked on failure, with the requesters: stuck threads may still use them.
  auto lock = std::make_unique<LwLock>();
  std::vector<std::unique_ptr<Requester>> reqs;
  oracle::QueueSim sim;

  auto fail = [&](std::string why) {
    out.ok = false;
    out.failure = std::move(why);
    for (auto& r : reqs) {
      r->release.store(true);
      if (r->thread.joinable()) r->thread.detach();
      (void)r.release();
    }
    (void)lock.release();
    return out;
  };

  auto check_state = [&](const char* step) -> std::string {
    LockWord w = lock->state();
    std::string where = std::string(" after ") + step;
    if (w.wlocked != sim.writer_held()) return "write bit differs" + where;
    if (w.readers != sim.readers()) return "reader count differs" + where;
    if (adlist::waitq_size(w.waitq) != sim.queued()) return "queue length differs" + where;
    for (auto& r : reqs) {
      if (r->done.load()) continue;
      bool holds = sim.holders().count(r->id) != 0;
      if (r->acquired.load() != holds) return "holder set differs" + where;
    }
    return {};
  };

  std::uniform_int_distribution<int> coin(0, 9);
  while (out.requests < max_requests || !sim.holders().empty()) {
    bool do_request =
        out.requests < max_requests && (sim.holders().empty() || coin(rng) < 6);
    if (do_request) {
      auto r = std::make_unique<Requester>();
      r->id = out.requests++;
      r->exclusive = coin(rng) < 4;
      const std::size_t queued_before = adlist::waitq_size(lock->state().waitq);
      const bool immediate = sim.request(r->id, r->exclusive);
      Requester* rp = r.get();
      LwLock* lp = lock.get();
      r->thread = std::thread([rp, lp] {
        lp->lock(rp->exclusive);
        rp->acquired.store(true);
        while (!rp->release.load()) std::this_thread::yield();
        lp->unlock();
        rp->done.store(true);
      });
      reqs.push_back(std::move(r));
      bool reached = immediate
                         ? wait_for([&] { return rp->acquired.load(); })
                         : wait_for([&] {
                             return adlist::waitq_size(lock->state().waitq) == queued_before + 1;
                           });
      if (!reached) return fail("request " + std::to_string(rp->id) + " never reached its state");
      if (auto err = check_state("request"); !err.empty()) return fail(err);
    } else {
      const auto& holders = sim.holders();
      std::uniform_int_distribution<std::size_t> pick(0, holders.size() - 1);
      int h = *std::next(holders.begin(), static_cast<std::ptrdiff_t>(pick(rng)));
      std::vector<int> granted = sim.release(h);
      Requester* hr = reqs[static_cast<std::size_t>(h)].get();
      hr->release.store(true);
      if (!wait_for([&] { return hr->done.load(); })) return fail("holder never released");
      hr->thread.join();
      for (int g : granted) {
        Requester* gr = reqs[static_cast<std::size_t>(g)].get();
        if (!wait_for([&] { return gr->acquired.load(); })) {
          return fail("expected grant to " + std::to_string(g) + " never arrived");
        }
      }
      if (granted.size() > 1) ++out.batch_grants;
      if (auto err = check_state("release"); !err.empty()) return fail(err);
    }
  }
  if (lock->state() != LockWord{}) return fail("lock word not clean at the end");
  return out;
}

}  // namespace support
