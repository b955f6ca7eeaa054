#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "adlist/fault.hpp"

namespace adlist {

using WaiterId = std::uint16_t;

// Reserved id meaning "no waiter"; terminates every waiter chain.
inline constexpr WaiterId kNullId = 0xFFFF;
inline constexpr std::size_t kMaxWaiterCapacity = kNullId;
inline constexpr std::size_t kDefaultWaiterCapacity = 4096;

// Latched one-shot signal. A signal() that arrives before the matching
// wait() is remembered, so the wait() returns immediately. Calls come in
// signal/wait pairs; a second signal before the wait is a fault.
class Event {
 public:
  void signal();
  void wait();
  // Non-consuming: reports whether a signal is latched.
  bool poll() const;
  void reset();

 private:
  static constexpr int kSpinYields = 64;

  std::mutex mu_;
  std::condition_variable cv_;
  std::atomic<bool> pending_{false};
  bool waiter_waiting_ = false;
};

// Per-thread blocking cell. `next`/`prev` thread waiters into 16-bit-id
// chains (lock wait queues, node wait queues); a waiter sits in at most one
// chain at a time. `app_data` belongs to whatever primitive queued the waiter.
struct Waiter {
  Event event;
  std::atomic<std::uint64_t> app_data{0};
  std::atomic<WaiterId> next{kNullId};
  std::atomic<WaiterId> prev{kNullId};
  WaiterId id = kNullId;

  // Owner-thread bookkeeping: set while the waiter is queued on a primitive
  // and the resulting grant has not yet been consumed by await_grant().
  bool parked = false;

  void mark_parked() {
    ADLIST_CHECK(!parked, "waiter reused while a grant is still outstanding");
    parked = true;
  }

  void await_grant() {
    event.wait();
    parked = false;
  }
};

class DomainExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed table of waiters addressable by 16-bit id.
class WaiterDomain {
 public:
  explicit WaiterDomain(std::size_t capacity = kDefaultWaiterCapacity);
  WaiterDomain(const WaiterDomain&) = delete;
  WaiterDomain& operator=(const WaiterDomain&) = delete;

  // Throws DomainExhausted once `capacity()` waiters are live.
  Waiter& alloc_waiter();
  void free_waiter(Waiter& w);

  Waiter& id2waiter(WaiterId id) const {
    ADLIST_CHECK(id < capacity_ && allocated_[id].load(std::memory_order_relaxed),
                 "id2waiter: id does not name a live waiter");
    return slots_[id];
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t in_use() const;

  // Process-wide domain backing current_waiter(). Never destroyed, so
  // thread-exit hooks can return waiters at any point of shutdown.
  static WaiterDomain& global();
  // Must run before the first call to global(); faults afterwards.
  static void set_global_capacity(std::size_t capacity);

 private:
  std::size_t capacity_;
  std::unique_ptr<Waiter[]> slots_;
  std::unique_ptr<std::atomic<bool>[]> allocated_;
  mutable std::mutex mu_;
  std::vector<WaiterId> free_;
};

// The calling thread's waiter in the global domain, allocated on first use
// and recycled when the thread exits.
Waiter& current_waiter();

inline Waiter& id2waiter(WaiterId id) { return WaiterDomain::global().id2waiter(id); }

}  // namespace adlist
