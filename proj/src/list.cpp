#include "adlist/list.hpp"

#include <utility>

#include "adlist/testing_hooks.hpp"

namespace adlist {

namespace detail {
std::atomic<testing::HookFn> g_hook{nullptr};
}  // namespace detail

void testing::set_hook(HookFn fn) noexcept { detail::g_hook.store(fn); }

using testing::HookPoint;

namespace {

constexpr RefcountWord kSentinel{true, 1, kNullId};
constexpr RefcountWord kInserting{true, 1, kNullId};
constexpr RefcountWord kInserted{false, 1, kNullId};

constexpr auto kAcqRel = std::memory_order_acq_rel;
constexpr auto kRelaxed = std::memory_order_relaxed;

void signal_chain(WaiterId head) {
  WaiterDomain& domain = WaiterDomain::global();
  while (head != kNullId) {
    Waiter& w = domain.id2waiter(head);
    head = w.next.load(kRelaxed);
    w.next.store(kNullId, kRelaxed);
    w.event.signal();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Refcount

bool Refcount::pin() {
  std::uint32_t o = word_.load(kRelaxed);
  for (;;) {
    RefcountWord w = RefcountWord::unpack(o);
    if (w.mask) {
      return false;
    }
    ADLIST_CHECK(w.pincount < RefcountWord::kMaxPins, "pin count overflow");
    ++w.pincount;
    if (word_.compare_exchange_weak(o, w.pack(), kAcqRel, kRelaxed)) {
      return true;
    }
  }
}

bool Refcount::force_pin() {
  std::uint32_t o = word_.load(kRelaxed);
  for (;;) {
    RefcountWord w = RefcountWord::unpack(o);
    if (w.pincount == 0) {
      return false;
    }
    ADLIST_CHECK(w.pincount < RefcountWord::kMaxPins, "pin count overflow");
    ++w.pincount;
    if (word_.compare_exchange_weak(o, w.pack(), kAcqRel, kRelaxed)) {
      return true;
    }
  }
}

void Refcount::unpin() {
  std::uint32_t o = word_.load(kRelaxed);
  for (;;) {
    RefcountWord w = RefcountWord::unpack(o);
    ADLIST_CHECK(w.pincount > 0, "unpin of a node with pin count zero");
    --w.pincount;
    // While pins remain, the only possible waiter is the deleter.
    WaiterId wake = kNullId;
    if (w.pincount == 0 && w.waitq != kNullId) {
      wake = w.waitq;
      w.waitq = kNullId;
    }
    if (word_.compare_exchange_weak(o, w.pack(), kAcqRel, kRelaxed)) {
      if (wake != kNullId) {
        signal_chain(wake);
      }
      return;
    }
  }
}

RemoveStart Refcount::begin_remove() {
  std::uint32_t o = word_.load(kRelaxed);
  for (;;) {
    RefcountWord w = RefcountWord::unpack(o);
    if (w.mask) {
      return RemoveStart::kNotRemovable;
    }
    ADLIST_CHECK(w.pincount > 0, "remove_start requires the caller's pin");
    w.mask = true;
    RemoveStart result = RemoveStart::kMustWait;
    if (w.pincount == 1) {
      w.pincount = 0;
      result = RemoveStart::kReady;
    }
    if (word_.compare_exchange_weak(o, w.pack(), kAcqRel, kRelaxed)) {
      return result;
    }
  }
}

bool Refcount::drop_pin_and_enqueue(Waiter& me) {
  ADLIST_CHECK(!me.parked, "delete wait while the caller's waiter is still queued");
  std::uint32_t o = word_.load(kRelaxed);
  for (;;) {
    RefcountWord w = RefcountWord::unpack(o);
    ADLIST_CHECK(w.mask && w.pincount > 0, "pin-count wait needs a masked node and the caller's pin");
    ADLIST_CHECK(w.waitq == kNullId, "a second delete waiter on the same node");
    --w.pincount;
    bool queue = w.pincount > 0;
    if (queue) {
      me.next.store(kNullId, kRelaxed);
      w.waitq = me.id;
    }
    if (word_.compare_exchange_weak(o, w.pack(), kAcqRel, kRelaxed)) {
      if (queue) {
        me.parked = true;
      }
      return queue;
    }
  }
}

bool Refcount::enqueue_behind_delete(Waiter& me) {
  ADLIST_CHECK(!me.parked, "waitq enqueue while the caller's waiter is still queued");
  std::uint32_t o = word_.load(kRelaxed);
  for (;;) {
    RefcountWord w = RefcountWord::unpack(o);
    if (!w.mask || w.pincount != 0) {
      return false;
    }
    me.next.store(w.waitq, kRelaxed);
    w.waitq = me.id;
    if (word_.compare_exchange_weak(o, w.pack(), kAcqRel, kRelaxed)) {
      me.parked = true;
      return true;
    }
  }
}

WaiterId Refcount::take_waitq() {
  std::uint32_t o = word_.load(kRelaxed);
  for (;;) {
    RefcountWord w = RefcountWord::unpack(o);
    WaiterId head = w.waitq;
    if (head == kNullId) {
      return kNullId;
    }
    w.waitq = kNullId;
    if (word_.compare_exchange_weak(o, w.pack(), kAcqRel, kRelaxed)) {
      return head;
    }
  }
}

// ---------------------------------------------------------------------------
// List

List::List() noexcept {
  head_.next = &tail_;
  tail_.prev = &head_;
  head_.refcnt.store(kSentinel);
  tail_.refcnt.store(kSentinel);
}

Node* List::next(Node* n) {
  ADLIST_CHECK(n != &tail_, "next() past the tail sentinel");
  Node* cur = n;
  cur->lock.lock(false);
  for (;;) {
    Node* nx = cur->next;
    if (nx == &tail_) {
      cur->lock.unlock();
      return nullptr;
    }
    if (pin(nx)) {
      cur->lock.unlock();
      return nx;
    }
    // Masked: it cannot be unlinked while we hold cur, so lock it in
    // canonical order and step over it.
    nx->lock.lock(false);
    cur->lock.unlock();
    cur = nx;
  }
}

Node* List::prev(Node* n) {
  ADLIST_CHECK(n != &head_, "prev() before the head sentinel");
  Node* cur = n;
  bool hop_pin = false;  // we hold a forced pin on cur (not the caller's)
  for (;;) {
    cur->lock.lock(false);
    Node* pv = cur->prev;
    Node* found = nullptr;
    bool done = pv == &head_;
    if (!done && pin(pv)) {
      found = pv;
      done = true;
    }
    if (done) {
      cur->lock.unlock();
      if (hop_pin) {
        unpin(cur);
      }
      return found;
    }
    if (force_pin(pv)) {
      // Pins still block pv's delete; continue as if we started on pv.
      cur->lock.unlock();
      if (hop_pin) {
        unpin(cur);
      }
      cur = pv;
      hop_pin = true;
      continue;
    }
    // pv's delete is past its pin drain. Holding cur keeps it from
    // unlinking pv, so queueing is safe; then step out of its way.
    Waiter& me = current_waiter();
    bool queued = pv->refcnt.enqueue_behind_delete(me);
    cur->lock.unlock();
    if (queued) {
      detail::hook(HookPoint::kBackwardWaitqQueued, pv);
      me.await_grant();
    }
  }
}

void List::link_after(Node* anchor, Node* fresh, RefcountWord while_linking,
                      RefcountWord linked) {
  ADLIST_CHECK(anchor != &tail_, "insert after the tail sentinel");
  ADLIST_CHECK(!is_sentinel(fresh), "a sentinel cannot be inserted");
  fresh->lock.reset();
  fresh->refcnt.store(while_linking);
  anchor->lock.lock(true);
  Node* after = anchor->next;
  after->lock.lock(true);
  fresh->prev = anchor;
  fresh->next = after;
  anchor->next = fresh;
  after->prev = fresh;
  fresh->refcnt.store(linked);
  after->lock.unlock();
  anchor->lock.unlock();
}

void List::insert_after(Node* anchor, Node* fresh) {
  link_after(anchor, fresh, kInserting, kInserted);
}

void List::insert_before(Node* anchor, Node* fresh) {
  ADLIST_CHECK(anchor != &head_, "insert before the head sentinel");
  ADLIST_CHECK(!is_sentinel(fresh), "a sentinel cannot be inserted");
  fresh->lock.reset();
  fresh->refcnt.store(kInserting);
  anchor->lock.lock(true);
  Node* before = lock_prev_exclusive(anchor);
  fresh->prev = before;
  fresh->next = anchor;
  before->next = fresh;
  anchor->prev = fresh;
  // Unmasking is the instant the insert happens. The node stays pinned.
  fresh->refcnt.store(kInserted);
  before->lock.unlock();
  anchor->lock.unlock();
}

Node* List::lock_prev_exclusive(Node* b) {
  for (;;) {
    Node* a = b->prev;
    if (a->lock.async_lock(true)) {
      return a;
    }
    // Queued on a: we are guaranteed to get it. Release b so whoever holds
    // a can make progress, then come back in canonical order.
    b->lock.unlock();
    detail::hook(HookPoint::kPrevLockQueued, b);
    current_waiter().await_grant();
    b->lock.lock(true);
    if (b->prev == a) {
      return a;
    }
    // a was deleted (it is off-list, its deleter waits for us in its clear
    // stage) or nodes were inserted between a and b.
    detail::hook(HookPoint::kPrevRevalidateFailed, b);
    a->lock.unlock();
  }
}

RemoveStart List::remove_start(Node* n) {
  ADLIST_CHECK(!is_sentinel(n), "sentinels cannot be removed");
  return n->refcnt.begin_remove();
}

void List::remove_waitonpincount(Node* n) {
  Waiter& me = current_waiter();
  if (n->refcnt.drop_pin_and_enqueue(me)) {
    me.await_grant();
  }
}

void List::remove_do(Node* n) {
  ADLIST_CHECK(!is_sentinel(n), "sentinels cannot be removed");
  RefcountWord rc = n->refcnt.load();
  ADLIST_CHECK(rc.mask && rc.pincount == 0, "remove_do needs a masked node with no pins");
  n->lock.lock(true);
  detail::hook(HookPoint::kRemoveDoSelfLocked, n);
  Node* before = lock_prev_exclusive(n);
  Node* after = n->next;
  after->lock.lock(true);
  before->next = after;
  after->prev = before;
  n->next = n;
  n->prev = n;
  after->lock.unlock();
  before->lock.unlock();
  clear_node(n);
}

void List::clear_node(Node* n) {
  // Backward iterators parked behind this delete restart from their own
  // (still pinned) node, which now links past n.
  signal_chain(n->refcnt.take_waitq());

  // Threads queued on n's lock expect ownership. Queue ourselves last and
  // release: the lock passes through every one of them (each finds n gone
  // and lets go) before it comes back to us.
  Waiter& me = current_waiter();
  bool acquired = n->lock.async_lock(true);
  ADLIST_CHECK(!acquired, "clear stage: self-enqueue on a held lock cannot succeed");
  n->lock.unlock();
  me.await_grant();
  n->lock.unlock();
}

bool List::node_delete(Node* n) {
  switch (remove_start(n)) {
    case RemoveStart::kNotRemovable:
      return false;
    case RemoveStart::kMustWait:
      remove_waitonpincount(n);
      break;
    case RemoveStart::kReady:
      break;
  }
  remove_do(n);
  return true;
}

Node* List::end_remove(Direction from) {
  for (;;) {
    Node* n = from == Direction::kForward ? first() : last();
    if (n == nullptr) {
      return nullptr;
    }
    if (node_delete(n)) {
      return n;
    }
    unpin(n);
  }
}

std::vector<Node*> List::unsafe_walk(Direction dir) const {
  std::vector<Node*> out;
  if (dir == Direction::kForward) {
    for (Node* n = head_.next; n != &tail_; n = n->next) {
      out.push_back(n);
    }
  } else {
    for (Node* n = tail_.prev; n != &head_; n = n->prev) {
      out.push_back(n);
    }
  }
  return out;
}

bool List::unsafe_links_consistent() const {
  std::size_t forward = 0;
  for (const Node* n = &head_; n != &tail_; n = n->next) {
    if (n->next == nullptr || n->next->prev != n) {
      return false;
    }
    ++forward;
  }
  std::size_t backward = 0;
  for (const Node* n = &tail_; n != &head_; n = n->prev) {
    if (n->prev == nullptr || n->prev->next != n) {
      return false;
    }
    ++backward;
  }
  return forward == backward;
}

// ---------------------------------------------------------------------------
// Iterator

Iterator::Iterator(Iterator&& other) noexcept
    : list_(other.list_),
      dir_(other.dir_),
      current_(std::exchange(other.current_, nullptr)),
      pending_(std::exchange(other.pending_, nullptr)),
      finished_(std::exchange(other.finished_, true)) {}

Iterator& Iterator::operator=(Iterator&& other) noexcept {
  if (this != &other) {
    destroy();
    list_ = other.list_;
    dir_ = other.dir_;
    current_ = std::exchange(other.current_, nullptr);
    pending_ = std::exchange(other.pending_, nullptr);
    finished_ = std::exchange(other.finished_, true);
  }
  return *this;
}

Node* Iterator::next() {
  if (pending_ != nullptr) {
    current_ = std::exchange(pending_, nullptr);
    return current_;
  }
  if (finished_) {
    return nullptr;
  }
  Node* nx = nullptr;
  if (current_ != nullptr) {
    nx = list_->neighbor(current_, dir_);
    List::unpin(current_);
  } else {
    nx = dir_ == Direction::kForward ? list_->first() : list_->last();
  }
  current_ = nx;
  finished_ = nx == nullptr;
  return nx;
}

Node* Iterator::pop() {
  ADLIST_CHECK(current_ != nullptr, "iterator pop without a current node");
  Node* n = current_;
  switch (list_->remove_start(n)) {
    case RemoveStart::kNotRemovable:
      return nullptr;
    case RemoveStart::kMustWait:
      // Wait with no other pin held; only then pin the neighbor.
      list_->remove_waitonpincount(n);
      break;
    case RemoveStart::kReady:
      break;
  }
  // n is masked by us, which keeps it on the list long enough to step off.
  pending_ = list_->neighbor(n, dir_);
  finished_ = pending_ == nullptr;
  current_ = nullptr;
  list_->remove_do(n);
  return n;
}

void Iterator::destroy() {
  if (current_ != nullptr) {
    List::unpin(std::exchange(current_, nullptr));
  }
  if (pending_ != nullptr) {
    List::unpin(std::exchange(pending_, nullptr));
  }
  finished_ = true;
}

}  // namespace adlist
