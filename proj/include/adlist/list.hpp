#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "adlist/lwlock.hpp"
#include "adlist/waiter.hpp"

namespace adlist {

// Unpacked view of a node's 32-bit refcount word:
//   bit 0      mask (node invisible: being inserted, being deleted, or off-list)
//   bits 1-15  pin count
//   bits 16-31 waitq head: the delete waiter while pins drain, afterwards
//              backward iterators waiting for the delete to finish
struct RefcountWord {
  static constexpr std::uint16_t kMaxPins = (1u << 15) - 1;

  bool mask = false;
  std::uint16_t pincount = 0;
  WaiterId waitq = kNullId;

  static constexpr RefcountWord unpack(std::uint32_t raw) noexcept {
    return RefcountWord{(raw & 1u) != 0, static_cast<std::uint16_t>((raw >> 1) & kMaxPins),
                        static_cast<WaiterId>(raw >> 16)};
  }

  constexpr std::uint32_t pack() const noexcept {
    return (mask ? 1u : 0u) | (static_cast<std::uint32_t>(pincount & kMaxPins) << 1) |
           (static_cast<std::uint32_t>(waitq) << 16);
  }

  friend constexpr bool operator==(const RefcountWord&, const RefcountWord&) = default;
};

enum class RemoveStart { kNotRemovable, kReady, kMustWait };

class Refcount {
 public:
  // A node that is not on any list is masked with no pins. Keeping that
  // state whenever a node is off-list makes pin() safe on any node whose
  // memory stays valid: it simply fails.
  static constexpr RefcountWord kOffList{true, 0, kNullId};

  Refcount() noexcept : word_(kOffList.pack()) {}
  Refcount(const Refcount&) = delete;
  Refcount& operator=(const Refcount&) = delete;

  RefcountWord load() const noexcept {
    return RefcountWord::unpack(word_.load(std::memory_order_acquire));
  }
  void store(RefcountWord w) noexcept { word_.store(w.pack(), std::memory_order_release); }

  bool pin();
  bool force_pin();
  void unpin();
  RemoveStart begin_remove();
  // Drops one pin; if pins remain, queues `me` as the delete waiter in the
  // same CAS. Returns true when the caller must await_grant().
  bool drop_pin_and_enqueue(Waiter& me);
  // Queues `me` behind an in-flight delete (masked, no pins). Returns false
  // if the node is not in that state.
  bool enqueue_behind_delete(Waiter& me);
  // Detaches the whole waitq, leaving mask and pins alone.
  WaiterId take_waitq();

 private:
  std::atomic<std::uint32_t> word_;
};

static_assert(sizeof(Refcount) == 4);

// List hook. Client records embed it by deriving from Node; the list never
// allocates or frees nodes.
struct Node {
  Node* next = nullptr;
  Node* prev = nullptr;
  LwLock lock;       // shared to read next/prev, exclusive to change them
  Refcount refcnt;

  Node() noexcept = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;
};

static_assert(sizeof(Node) == 24, "list hook must be two links plus 8 bytes of sync state");

enum class Direction { kForward, kBackward };

// Concurrent doubly-linked list between two fixed sentinels.
//
// Every node argument must be kept on the list by the caller, with a pin or
// by having masked it for delete. Every node returned is pinned for the
// caller, who releases it with unpin(). Locks are taken in canonical order
// along `next`; the reverse direction goes through async_lock.
//
// A thread that deletes a node must not hold pins on other nodes while the
// delete waits for the node's pin count to drain: two such threads can
// wait on each other forever.
class List {
 public:
  List() noexcept;
  List(const List&) = delete;
  List& operator=(const List&) = delete;

  Node* first() { return next(&head_); }
  Node* last() { return prev(&tail_); }
  Node* next(Node* n);
  Node* prev(Node* n);
  Node* neighbor(Node* n, Direction dir) {
    return dir == Direction::kForward ? next(n) : prev(n);
  }

  // `fresh` must not be on any list. It is left pinned.
  void insert_after(Node* anchor, Node* fresh);
  void insert_before(Node* anchor, Node* fresh);
  void insert_at_front(Node* fresh) { insert_after(&head_, fresh); }
  void append_at_end(Node* fresh) { insert_before(&tail_, fresh); }

  // Succeeds only on an unmasked node.
  static bool pin(Node* n) { return n->refcnt.pin(); }
  static void unpin(Node* n) { n->refcnt.unpin(); }

  // Three-phase delete. The caller holds a pin on `n`.
  //   kNotRemovable: someone else masked it first; the caller keeps its pin.
  //   kReady:        masked and the caller's pin was the last; go to remove_do.
  //   kMustWait:     masked, other pins remain; the caller's pin is still held.
  RemoveStart remove_start(Node* n);
  void remove_waitonpincount(Node* n);
  // Unlinks a masked, unpinned node. On return no thread references it.
  void remove_do(Node* n);
  // Consumes the caller's pin on success; false leaves it in place.
  bool node_delete(Node* n);

  // Remove and return the first/last node, or nullptr when empty. The
  // returned node is off the list and owned by the caller.
  Node* pop() { return end_remove(Direction::kForward); }
  Node* dequeue() { return end_remove(Direction::kBackward); }

  bool is_sentinel(const Node* n) const noexcept { return n == &head_ || n == &tail_; }
  Node* head_sentinel() noexcept { return &head_; }
  Node* tail_sentinel() noexcept { return &tail_; }

  // Quiescent-only helpers: walk raw links without locking. The walk
  // includes masked nodes and excludes the sentinels.
  std::vector<Node*> unsafe_walk(Direction dir) const;
  // Checks n.next.prev == n and n.prev.next == n for every node and that
  // both directions visit the same sequence.
  bool unsafe_links_consistent() const;

 private:
  friend class ExtendedList;

  static bool force_pin(Node* n) { return n->refcnt.force_pin(); }

  Node* end_remove(Direction from);
  // `b` is locked exclusively; returns its predecessor locked exclusively
  // with `b` relocked and still linked behind it.
  Node* lock_prev_exclusive(Node* b);
  void link_after(Node* anchor, Node* fresh, RefcountWord while_linking, RefcountWord linked);
  void clear_node(Node* n);

  Node head_;
  Node tail_;
};

// Directional cursor. Holds a pin on the node last returned by next().
// Single-owner: may move between threads, never be used concurrently.
class Iterator {
 public:
  Iterator(List& list, Direction dir) noexcept : list_(&list), dir_(dir) {}
  // Starts positioned on `pinned`, adopting the caller's pin.
  Iterator(List& list, Direction dir, Node* pinned) noexcept
      : list_(&list), dir_(dir), current_(pinned) {}
  Iterator(const Iterator&) = delete;
  Iterator& operator=(const Iterator&) = delete;
  Iterator(Iterator&& other) noexcept;
  Iterator& operator=(Iterator&& other) noexcept;
  ~Iterator() { destroy(); }

  // Next unmasked node, pinned; releases the pin on the previous one.
  Node* next();
  // Deletes the current node and returns it (off-list, owned by the
  // caller), or returns nullptr if another thread is already deleting it.
  // The following next() continues past the removed node.
  Node* pop();
  Node* current() const noexcept { return current_; }
  // Releases any held pin; the iterator is then exhausted.
  void destroy();

 private:
  List* list_;
  Direction dir_;
  Node* current_ = nullptr;
  Node* pending_ = nullptr;
  bool finished_ = false;
};

}  // namespace adlist
