#pragma once

#include <atomic>
#include <cstdint>

#include "adlist/waiter.hpp"

namespace adlist {

// Unpacked view of the 32-bit lock word:
//   bit 0      read-bias flag
//   bit 1      write-locked flag
//   bits 2-15  reader count
//   bits 16-31 waitq head (newest waiter; chain runs newest -> oldest)
struct LockWord {
  static constexpr std::uint16_t kMaxReaders = (1u << 14) - 1;

  bool rd_bias = false;
  bool wlocked = false;
  std::uint16_t readers = 0;
  WaiterId waitq = kNullId;

  static constexpr LockWord unpack(std::uint32_t raw) noexcept {
    return LockWord{(raw & 1u) != 0, (raw & 2u) != 0,
                    static_cast<std::uint16_t>((raw >> 2) & kMaxReaders),
                    static_cast<WaiterId>(raw >> 16)};
  }

  constexpr std::uint32_t pack() const noexcept {
    return (rd_bias ? 1u : 0u) | (wlocked ? 2u : 0u) |
           (static_cast<std::uint32_t>(readers & kMaxReaders) << 2) |
           (static_cast<std::uint32_t>(waitq) << 16);
  }

  constexpr bool held() const noexcept { return wlocked || readers > 0; }

  friend constexpr bool operator==(const LockWord&, const LockWord&) = default;
};

// Four-byte fair reader-writer lock. Ownership is handed over in FIFO order
// by the unlocking thread: either the single oldest writer, or the run of
// readers at the oldest end of the queue. Non-biased locks also make new
// readers queue behind any waiter.
class LwLock {
 public:
  LwLock() noexcept : word_(LockWord{}.pack()) {}
  explicit LwLock(LockWord initial) noexcept : word_(initial.pack()) {}
  LwLock(const LwLock&) = delete;
  LwLock& operator=(const LwLock&) = delete;

  // Acquires immediately and returns true, or enqueues the calling thread's
  // waiter and returns false. After false the lock WILL be transferred to
  // the caller; it must eventually call current_waiter().await_grant() and
  // must not use its waiter for anything else until then.
  bool async_lock(bool exclusive);

  void lock(bool exclusive) {
    if (!async_lock(exclusive)) {
      current_waiter().await_grant();
    }
  }

  // Acquires only if async_lock would succeed without queueing.
  bool try_lock(bool exclusive) noexcept;

  // Releases one hold (the write hold, or one reader) and hands the lock to
  // the oldest waiter set once it becomes free.
  void unlock();

  LockWord state() const noexcept {
    return LockWord::unpack(word_.load(std::memory_order_acquire));
  }

  // Reinitializes the word. Only valid while no thread can reach the lock.
  void reset() noexcept { word_.store(LockWord{}.pack(), std::memory_order_relaxed); }

 private:
  std::atomic<std::uint32_t> word_;
};

static_assert(sizeof(LwLock) == 4);

// Number of waiters on the chain starting at `head`.
std::uint16_t waitq_size(WaiterId head);

}  // namespace adlist
