#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "adlist/list.hpp"

namespace adlist {

// List whose head area is seeded with permanently masked dummy nodes.
// insert_at_head() lands after a randomly chosen dummy, spreading what
// would be a single hot spot over `dummy_count` neighborhoods.
//
// Dummies hold a standing pin, so iterators hop over them with a forced
// pin and clients can never delete them. rebalance_dummies() moves them back
// to the head after evictions from the tail have let them drift.
class ExtendedList {
 public:
  static constexpr std::size_t kDefaultDummies = 64;
  static constexpr std::uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ULL;

  explicit ExtendedList(std::size_t dummy_count = kDefaultDummies,
                        std::uint64_t seed = kDefaultSeed);
  ExtendedList(const ExtendedList&) = delete;
  ExtendedList& operator=(const ExtendedList&) = delete;

  List& list() noexcept { return list_; }

  void insert_at_head(Node* fresh) { insert_after_dummy(fresh, pick_dummy()); }
  // Deterministic variant: anchor on dummy `index` (or the next one that is
  // not being moved).
  void insert_after_dummy(Node* fresh, std::size_t index);

  void rebalance_dummies();

  bool is_dummy(const Node* n) const noexcept {
    return n >= dummies_.get() && n < dummies_.get() + dummy_count_;
  }
  std::size_t dummy_count() const noexcept { return dummy_count_; }

  // Restarts the calling thread's anchor generator for this list.
  void seed_thread(std::uint64_t seed);

 private:
  std::size_t pick_dummy();

  List list_;
  std::size_t dummy_count_;
  std::unique_ptr<Node[]> dummies_;
  std::uint64_t seed_;
  std::mutex rebalance_mu_;
};

// Plain doubly-linked list behind one mutex ("dlist"). It reuses Node's
// links (the lock and refcount words stay untouched) so the same client
// records can live in either list. A node is a member iff `next != nullptr`.
class BaselineList {
 public:
  // Unlocked operations, valid while the Access object holds the mutex.
  class Access {
   public:
    Node* first() const { return owner_->head_.next == &owner_->tail_ ? nullptr : owner_->head_.next; }
    Node* last() const { return owner_->tail_.prev == &owner_->head_ ? nullptr : owner_->tail_.prev; }
    Node* next(const Node* n) const { return n->next == &owner_->tail_ ? nullptr : n->next; }
    Node* prev(const Node* n) const { return n->prev == &owner_->head_ ? nullptr : n->prev; }
    bool contains(const Node* n) const { return n->next != nullptr; }
    std::size_t size() const { return owner_->size_; }

    void insert_after(Node* anchor, Node* fresh);
    void insert_before(Node* anchor, Node* fresh);
    void insert_head(Node* fresh) { insert_after(&owner_->head_, fresh); }
    void append_tail(Node* fresh) { insert_before(&owner_->tail_, fresh); }
    bool remove(Node* n);
    bool move_to_head(Node* n);
    Node* pop_front();
    Node* pop_back();

   private:
    friend class BaselineList;
    Access(BaselineList* owner) : owner_(owner), lock_(owner->mu_) {}
    BaselineList* owner_;
    std::unique_lock<std::mutex> lock_;
  };

  BaselineList() noexcept;
  BaselineList(const BaselineList&) = delete;
  BaselineList& operator=(const BaselineList&) = delete;

  Access access() { return Access(this); }

  void insert_head(Node* fresh) { access().insert_head(fresh); }
  void append_tail(Node* fresh) { access().append_tail(fresh); }
  bool remove(Node* n) { return access().remove(n); }
  bool move_to_head(Node* n) { return access().move_to_head(n); }
  Node* pop_front() { return access().pop_front(); }
  Node* pop_back() { return access().pop_back(); }
  // Removes up to k nodes from the tail, oldest first.
  std::vector<Node*> evict_tail(std::size_t k);
  std::vector<Node*> to_vector();
  std::size_t size() { return access().size(); }

 private:
  std::mutex mu_;
  Node head_;
  Node tail_;
  std::size_t size_ = 0;
};

}  // namespace adlist
