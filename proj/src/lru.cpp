#include "adlist/lru.hpp"

#include <atomic>
#include <random>
#include <thread>

namespace adlist {

namespace {

constexpr RefcountWord kDummyLinking{true, 0, kNullId};
// Masked with a standing pin: never visible, never deletable, always hoppable.
constexpr RefcountWord kDummyLinked{true, 1, kNullId};

std::atomic<std::uint64_t> g_thread_ordinal{0};

struct AnchorRng {
  const void* owner = nullptr;
  std::mt19937_64 engine;
};

thread_local AnchorRng t_anchor_rng;

}  // namespace

ExtendedList::ExtendedList(std::size_t dummy_count, std::uint64_t seed)
    : dummy_count_(dummy_count), dummies_(std::make_unique<Node[]>(dummy_count)), seed_(seed) {
  ADLIST_CHECK(dummy_count > 0, "an extended list needs at least one dummy node");
  for (std::size_t i = dummy_count_; i-- > 0;) {
    list_.link_after(list_.head_sentinel(), &dummies_[i], kDummyLinking, kDummyLinked);
  }
}

void ExtendedList::seed_thread(std::uint64_t seed) {
  t_anchor_rng.owner = this;
  t_anchor_rng.engine.seed(seed);
}

std::size_t ExtendedList::pick_dummy() {
  if (t_anchor_rng.owner != this) {
    seed_thread(seed_ ^ (g_thread_ordinal.fetch_add(1) * 0xbf58476d1ce4e5b9ULL));
  }
  std::uniform_int_distribution<std::size_t> dist(0, dummy_count_ - 1);
  return dist(t_anchor_rng.engine);
}

void ExtendedList::insert_after_dummy(Node* fresh, std::size_t index) {
  ADLIST_CHECK(index < dummy_count_, "dummy index out of range");
  for (std::size_t attempt = 0;; ++attempt) {
    Node* d = &dummies_[(index + attempt) % dummy_count_];
    // Fails only while the rebalancer is relinking d.
    if (List::force_pin(d)) {
      list_.insert_after(d, fresh);
      List::unpin(d);
      return;
    }
    if ((attempt + 1) % dummy_count_ == 0) {
      std::this_thread::yield();
    }
  }
}

void ExtendedList::rebalance_dummies() {
  std::lock_guard<std::mutex> guard(rebalance_mu_);
  Waiter& me = current_waiter();
  for (std::size_t i = dummy_count_; i-- > 0;) {
    Node* d = &dummies_[i];
    // Drop the standing pin and let transient ones drain, exactly like a
    // delete waiting on its pin count.
    if (d->refcnt.drop_pin_and_enqueue(me)) {
      me.await_grant();
    }
    list_.remove_do(d);
    list_.link_after(list_.head_sentinel(), d, kDummyLinking, kDummyLinked);
  }
}

// ---------------------------------------------------------------------------
// BaselineList

BaselineList::BaselineList() noexcept {
  head_.next = &tail_;
  tail_.prev = &head_;
}

void BaselineList::Access::insert_after(Node* anchor, Node* fresh) {
  ADLIST_CHECK(fresh->next == nullptr, "node is already on a list");
  ADLIST_CHECK(anchor != &owner_->tail_, "insert after the tail sentinel");
  Node* after = anchor->next;
  fresh->prev = anchor;
  fresh->next = after;
  anchor->next = fresh;
  after->prev = fresh;
  ++owner_->size_;
}

void BaselineList::Access::insert_before(Node* anchor, Node* fresh) {
  ADLIST_CHECK(anchor != &owner_->head_, "insert before the head sentinel");
  insert_after(anchor->prev, fresh);
}

bool BaselineList::Access::remove(Node* n) {
  if (n->next == nullptr) {
    return false;
  }
  n->prev->next = n->next;
  n->next->prev = n->prev;
  n->next = nullptr;
  n->prev = nullptr;
  --owner_->size_;
  return true;
}

bool BaselineList::Access::move_to_head(Node* n) {
  if (!remove(n)) {
    return false;
  }
  insert_head(n);
  return true;
}

Node* BaselineList::Access::pop_front() {
  Node* n = first();
  if (n != nullptr) {
    remove(n);
  }
  return n;
}

Node* BaselineList::Access::pop_back() {
  Node* n = last();
  if (n != nullptr) {
    remove(n);
  }
  return n;
}

std::vector<Node*> BaselineList::evict_tail(std::size_t k) {
  std::vector<Node*> out;
  Access a = access();
  while (out.size() < k) {
    Node* n = a.pop_back();
    if (n == nullptr) {
      break;
    }
    out.push_back(n);
  }
  return out;
}

std::vector<Node*> BaselineList::to_vector() {
  std::vector<Node*> out;
  Access a = access();
  for (Node* n = a.first(); n != nullptr; n = a.next(n)) {
    out.push_back(n);
  }
  return out;
}

}  // namespace adlist
