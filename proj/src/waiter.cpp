#include "adlist/waiter.hpp"

#include <atomic>
#include <string>
#include <thread>

namespace adlist {

void fault(const char* what) { throw Fault(what); }

void Event::signal() {
  std::lock_guard<std::mutex> lk(mu_);
  ADLIST_CHECK(!pending_.load(std::memory_order_relaxed),
               "event signaled twice without an intervening wait");
  pending_.store(true, std::memory_order_release);
  if (waiter_waiting_) {
    cv_.notify_one();
  }
}

void Event::wait() {
  // Grants usually follow quickly; yielding first lets the granting thread
  // run instead of paying for a sleep and a wakeup.
  for (int i = 0; i < kSpinYields; ++i) {
    if (pending_.load(std::memory_order_acquire)) {
      std::lock_guard<std::mutex> lk(mu_);
      pending_.store(false, std::memory_order_relaxed);
      return;
    }
    std::this_thread::yield();
  }
  std::unique_lock<std::mutex> lk(mu_);
  waiter_waiting_ = true;
  // The condition variable may wake spuriously; only the latch counts.
  cv_.wait(lk, [this] { return pending_.load(std::memory_order_relaxed); });
  pending_.store(false, std::memory_order_relaxed);
  waiter_waiting_ = false;
}

bool Event::poll() const { return pending_.load(std::memory_order_acquire); }

void Event::reset() {
  std::lock_guard<std::mutex> lk(mu_);
  pending_.store(false, std::memory_order_relaxed);
  waiter_waiting_ = false;
}

WaiterDomain::WaiterDomain(std::size_t capacity)
    : capacity_(capacity),
      slots_(std::make_unique<Waiter[]>(capacity)),
      allocated_(std::make_unique<std::atomic<bool>[]>(capacity)) {
  ADLIST_CHECK(capacity > 0 && capacity <= kMaxWaiterCapacity,
               "waiter domain capacity must be in [1, 65535]");
  free_.reserve(capacity);
  // Pop from the back, so hand out the lowest ids first.
  for (std::size_t i = capacity; i-- > 0;) {
    slots_[i].id = static_cast<WaiterId>(i);
    allocated_[i].store(false, std::memory_order_relaxed);
    free_.push_back(static_cast<WaiterId>(i));
  }
}

Waiter& WaiterDomain::alloc_waiter() {
  std::lock_guard<std::mutex> lk(mu_);
  if (free_.empty()) {
    throw DomainExhausted("waiter domain exhausted: all " + std::to_string(capacity_) +
                          " waiters are in use");
  }
  WaiterId id = free_.back();
  free_.pop_back();
  Waiter& w = slots_[id];
  w.event.reset();
  w.app_data.store(0, std::memory_order_relaxed);
  w.next.store(kNullId, std::memory_order_relaxed);
  w.prev.store(kNullId, std::memory_order_relaxed);
  w.parked = false;
  allocated_[id].store(true, std::memory_order_release);
  return w;
}

void WaiterDomain::free_waiter(Waiter& w) {
  ADLIST_CHECK(w.id < capacity_ && &slots_[w.id] == &w, "free_waiter: foreign waiter");
  ADLIST_CHECK(!w.parked, "free_waiter: waiter is still queued");
  std::lock_guard<std::mutex> lk(mu_);
  ADLIST_CHECK(allocated_[w.id].load(std::memory_order_relaxed), "free_waiter: double free");
  allocated_[w.id].store(false, std::memory_order_release);
  free_.push_back(w.id);
}

std::size_t WaiterDomain::in_use() const {
  std::lock_guard<std::mutex> lk(mu_);
  return capacity_ - free_.size();
}

namespace {

std::atomic<std::size_t> g_global_capacity{kDefaultWaiterCapacity};
std::atomic<bool> g_global_created{false};

struct ThreadWaiter {
  Waiter* waiter = nullptr;
  ~ThreadWaiter() {
    if (waiter != nullptr) {
      WaiterDomain::global().free_waiter(*waiter);
    }
  }
};

thread_local ThreadWaiter t_waiter;

}  // namespace

WaiterDomain& WaiterDomain::global() {
  static WaiterDomain* domain = [] {
    g_global_created.store(true);
    return new WaiterDomain(g_global_capacity.load());
  }();
  return *domain;
}

void WaiterDomain::set_global_capacity(std::size_t capacity) {
  ADLIST_CHECK(!g_global_created.load(), "global waiter domain already created");
  ADLIST_CHECK(capacity > 0 && capacity <= kMaxWaiterCapacity,
               "waiter domain capacity must be in [1, 65535]");
  g_global_capacity.store(capacity);
}

Waiter& current_waiter() {
  if (t_waiter.waiter == nullptr) {
    t_waiter.waiter = &WaiterDomain::global().alloc_waiter();
  }
  return *t_waiter.waiter;
}

}  // namespace adlist
