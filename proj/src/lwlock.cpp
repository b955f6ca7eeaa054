#include "adlist/lwlock.hpp"

namespace adlist {

namespace {

// What an unlock that frees the lock hands over, chosen by one walk of the
// reversed queue (newest -> oldest).
struct Grant {
  WaiterId first = kNullId;   // newest waiter of the granted set
  WaiterId before = kNullId;  // waiter just newer than the set, if any
  std::uint16_t count = 0;
  bool exclusive = false;
};

Grant find_oldest_set_of_waiters(WaiterDomain& domain, WaiterId head) {
  Grant g;
  WaiterId prev = kNullId;
  // Start of the trailing run of readers seen so far, and its predecessor.
  WaiterId run_first = kNullId;
  WaiterId run_before = kNullId;
  std::uint16_t run_len = 0;
  WaiterId last = kNullId;
  WaiterId last_before = kNullId;
  bool last_exclusive = false;

  for (WaiterId id = head; id != kNullId;) {
    Waiter& w = domain.id2waiter(id);
    bool exclusive = w.app_data.load(std::memory_order_relaxed) != 0;
    if (exclusive) {
      run_first = kNullId;
      run_len = 0;
    } else if (run_first == kNullId) {
      run_first = id;
      run_before = prev;
      run_len = 1;
    } else {
      ++run_len;
    }
    last = id;
    last_before = prev;
    last_exclusive = exclusive;
    prev = id;
    id = w.next.load(std::memory_order_relaxed);
  }

  if (last_exclusive) {
    g.first = last;
    g.before = last_before;
    g.count = 1;
    g.exclusive = true;
  } else {
    g.first = run_first;
    g.before = run_before;
    g.count = run_len;
  }
  return g;
}

}  // namespace

bool LwLock::async_lock(bool exclusive) {
  Waiter& w = current_waiter();
  ADLIST_CHECK(!w.parked, "async_lock while the caller's waiter is still queued");
  std::uint32_t o = word_.load(std::memory_order_relaxed);
  for (;;) {
    LockWord n = LockWord::unpack(o);
    bool queued = false;
    if (!exclusive && !n.wlocked && (n.waitq == kNullId || n.rd_bias)) {
      ADLIST_CHECK(n.readers < LockWord::kMaxReaders, "lwlock reader count overflow");
      ++n.readers;
    } else if (exclusive && !n.held()) {
      n.wlocked = true;
    } else {
      w.app_data.store(exclusive ? 1 : 0, std::memory_order_relaxed);
      w.next.store(n.waitq, std::memory_order_relaxed);
      n.waitq = w.id;
      queued = true;
    }
    if (word_.compare_exchange_weak(o, n.pack(), std::memory_order_acq_rel,
                                    std::memory_order_relaxed)) {
      if (queued) {
        w.parked = true;
      }
      return !queued;
    }
  }
}

bool LwLock::try_lock(bool exclusive) noexcept {
  std::uint32_t o = word_.load(std::memory_order_relaxed);
  for (;;) {
    LockWord n = LockWord::unpack(o);
    if (!exclusive && !n.wlocked && (n.waitq == kNullId || n.rd_bias) &&
        n.readers < LockWord::kMaxReaders) {
      ++n.readers;
    } else if (exclusive && !n.held()) {
      n.wlocked = true;
    } else {
      return false;
    }
    if (word_.compare_exchange_weak(o, n.pack(), std::memory_order_acq_rel,
                                    std::memory_order_relaxed)) {
      return true;
    }
  }
}

void LwLock::unlock() {
  WaiterDomain& domain = WaiterDomain::global();
  std::uint32_t o = word_.load(std::memory_order_acquire);
  Grant g;
  for (;;) {
    LockWord n = LockWord::unpack(o);
    if (n.wlocked) {
      n.wlocked = false;
    } else {
      ADLIST_CHECK(n.readers > 0, "unlock of an lwlock that is not held");
      --n.readers;
    }
    g = Grant{};
    if (!n.held() && n.waitq != kNullId) {
      g = find_oldest_set_of_waiters(domain, n.waitq);
      if (g.before == kNullId) {
        n.waitq = kNullId;
      }
      if (g.exclusive) {
        n.wlocked = true;
      } else {
        n.readers = g.count;
      }
    }
    if (word_.compare_exchange_weak(o, n.pack(), std::memory_order_acq_rel,
                                    std::memory_order_acquire)) {
      break;
    }
  }
  if (g.first == kNullId) {
    return;
  }
  // Only the transferring thread touches interior links, so detaching and
  // waking after the CAS cannot race with anyone.
  if (g.before != kNullId) {
    domain.id2waiter(g.before).next.store(kNullId, std::memory_order_relaxed);
  }
  for (WaiterId id = g.first; id != kNullId;) {
    Waiter& w = domain.id2waiter(id);
    id = w.next.load(std::memory_order_relaxed);
    w.next.store(kNullId, std::memory_order_relaxed);
    w.event.signal();
  }
}

std::uint16_t waitq_size(WaiterId head) {
  WaiterDomain& domain = WaiterDomain::global();
  std::uint16_t count = 0;
  while (head != kNullId) {
    head = domain.id2waiter(head).next.load(std::memory_order_relaxed);
    ++count;
  }
  return count;
}

}  // namespace adlist
