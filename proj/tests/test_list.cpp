#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <memory>
#include <random>
#include <thread>
#include <vector>

#include "adlist/list.hpp"
#include "differential.hpp"
#include "races.hpp"
#include "ref_list.hpp"

using namespace adlist;

namespace {

struct Item : Node {
  int id = -1;
  std::atomic<bool> deleted{false};
};

std::unique_ptr<Item[]> make_items(int n) {
  auto p = std::make_unique<Item[]>(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[i].id = i;
  return p;
}

int id_of(const Node* n) { return n == nullptr ? -1 : static_cast<const Item*>(n)->id; }

std::vector<int> walk(const List& l, Direction d = Direction::kForward) {
  std::vector<int> out;
  for (Node* n : l.unsafe_walk(d)) out.push_back(id_of(n));
  return out;
}

void append(List& l, Item& n) {
  l.append_at_end(&n);
  List::unpin(&n);
}

constexpr RefcountWord kLive{false, 0, kNullId};

template <class Pred>
bool eventually(Pred pred) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (!pred()) {
    if (std::chrono::steady_clock::now() > deadline) return false;
    std::this_thread::yield();
  }
  return true;
}

}  // namespace

TEST_CASE("node header layout") {
  static_assert(sizeof(Refcount) == 4);
  static_assert(sizeof(Node) == 24);
  for (std::uint32_t raw : {0u, 1u, 0xFFFEu, 0xABCD0003u, 0xFFFFFFFFu}) {
    CHECK(RefcountWord::unpack(raw).pack() == raw);
  }
  CHECK(RefcountWord{true, 3, 7}.pack() == (1u | (3u << 1) | (7u << 16)));
}

TEST_CASE("create: empty list") {
  List l;
  CHECK(l.first() == nullptr);
  CHECK(l.last() == nullptr);
  CHECK(l.head_sentinel()->next == l.tail_sentinel());
  CHECK(l.tail_sentinel()->prev == l.head_sentinel());
  CHECK(l.unsafe_links_consistent());
  CHECK(l.pop() == nullptr);
  CHECK(l.dequeue() == nullptr);
  CHECK_FALSE(List::pin(l.head_sentinel()));
  CHECK_THROWS_AS(l.remove_start(l.head_sentinel()), Fault);
}

TEST_CASE("create then append one node") {
  List l;
  auto it = make_items(1);
  l.append_at_end(&it[0]);
  CHECK(it[0].refcnt.load() == RefcountWord{false, 1, kNullId});
  List::unpin(&it[0]);
  Node* f = l.first();
  Node* b = l.last();
  CHECK(f == &it[0]);
  CHECK(b == &it[0]);
  CHECK(it[0].refcnt.load().pincount == 2);
  List::unpin(f);
  List::unpin(b);
}

TEST_CASE("1000 appends walk in insertion order") {
  List l;
  auto it = make_items(1000);
  oracle::RefList ref;
  for (int i = 0; i < 1000; ++i) {
    append(l, it[i]);
    ref.push_back(i);
  }
  std::vector<int> seen;
  Iterator iter(l, Direction::kForward);
  for (Node* n = iter.next(); n != nullptr; n = iter.next()) seen.push_back(id_of(n));
  CHECK(seen == ref.items());
  CHECK(walk(l, Direction::kBackward) == ref.reversed());
}

TEST_CASE("pin / unpin / force_pin state transitions") {
  Item n;
  n.refcnt.store(kLive);
  CHECK(List::pin(&n));
  CHECK(n.refcnt.load().pincount == 1);
  n.refcnt.store(RefcountWord{true, 0, kNullId});
  CHECK_FALSE(List::pin(&n));
  CHECK(n.refcnt.load().pincount == 0);

  n.refcnt.store(RefcountWord{false, 2, kNullId});
  List::unpin(&n);
  CHECK(n.refcnt.load() == RefcountWord{false, 1, kNullId});

  n.refcnt.store(kLive);
  CHECK_THROWS_AS(List::unpin(&n), Fault);

  n.refcnt.store(RefcountWord{true, 3, kNullId});
  CHECK(n.refcnt.force_pin());
  CHECK(n.refcnt.load().pincount == 4);
  n.refcnt.store(RefcountWord{true, 0, kNullId});
  CHECK_FALSE(n.refcnt.force_pin());
  n.refcnt.store(RefcountWord{false, 1, kNullId});
  CHECK(n.refcnt.force_pin());
  CHECK(n.refcnt.load() == RefcountWord{false, 2, kNullId});

  n.refcnt.store(RefcountWord{false, RefcountWord::kMaxPins, kNullId});
  CHECK_THROWS_AS(List::pin(&n), Fault);
}

TEST_CASE("off-list nodes refuse pins") {
  Item n;
  CHECK(n.refcnt.load() == Refcount::kOffList);
  CHECK_FALSE(List::pin(&n));
}

TEST_CASE("100 threads pin and unpin 1000 times each") {
  Item n;
  n.refcnt.store(kLive);
  std::vector<std::thread> ts;
  for (int t = 0; t < 100; ++t) {
    ts.emplace_back([&] {
      for (int i = 0; i < 1000; ++i) {
        REQUIRE(List::pin(&n));
        List::unpin(&n);
      }
    });
  }
  for (auto& t : ts) t.join();
  CHECK(n.refcnt.load() == kLive);
}

TEST_CASE("neighbor: plain step and step over a masked node") {
  List l;
  auto it = make_items(3);
  for (int i = 0; i < 3; ++i) append(l, it[i]);
  REQUIRE(List::pin(&it[0]));
  Node* b = l.next(&it[0]);
  CHECK(b == &it[1]);
  List::unpin(b);
  List::unpin(&it[0]);

  // B masked with a pin outstanding, like a delete still draining pins.
  it[1].refcnt.store(RefcountWord{true, 1, kNullId});
  REQUIRE(List::pin(&it[2]));
  Node* a = l.prev(&it[2]);
  CHECK(a == &it[0]);
  CHECK(it[1].refcnt.load() == RefcountWord{true, 1, kNullId});
  List::unpin(a);
  REQUIRE(List::pin(&it[0]));
  Node* c = l.next(&it[0]);
  CHECK(c == &it[2]);
  List::unpin(c);
  List::unpin(&it[0]);
  List::unpin(&it[2]);
  it[1].refcnt.store(kLive);
  CHECK(walk(l) == std::vector<int>{0, 1, 2});
}

TEST_CASE("neighbor past the ends returns none") {
  List l;
  auto it = make_items(1);
  append(l, it[0]);
  REQUIRE(List::pin(&it[0]));
  CHECK(l.next(&it[0]) == nullptr);
  CHECK(l.prev(&it[0]) == nullptr);
  List::unpin(&it[0]);
  CHECK(it[0].refcnt.load() == kLive);
}

TEST_CASE("insert: append to empty, insert before, insert after") {
  List l;
  auto it = make_items(4);
  l.append_at_end(&it[0]);
  CHECK(it[0].refcnt.load() == RefcountWord{false, 1, kNullId});
  List::unpin(&it[0]);
  append(l, it[2]);
  REQUIRE(List::pin(&it[2]));
  l.insert_before(&it[2], &it[1]);
  List::unpin(&it[1]);
  l.insert_after(&it[2], &it[3]);
  List::unpin(&it[3]);
  List::unpin(&it[2]);
  CHECK(walk(l) == std::vector<int>{0, 1, 2, 3});
  CHECK(l.unsafe_links_consistent());
  CHECK_THROWS_AS(l.insert_after(l.tail_sentinel(), &it[0]), Fault);
}

TEST_CASE("8 threads insert at the front 1000 times each") {
  List l;
  constexpr int kThreads = 8;
  constexpr int kEach = 1000;
  auto it = make_items(kThreads * kEach);
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t) {
    ts.emplace_back([&, t] {
      for (int i = 0; i < kEach; ++i) {
        Item* n = &it[t * kEach + i];
        l.insert_at_front(n);
        List::unpin(n);
      }
    });
  }
  for (auto& t : ts) t.join();
  std::vector<int> fwd = walk(l);
  CHECK(fwd.size() == static_cast<std::size_t>(kThreads * kEach));
  CHECK(l.unsafe_links_consistent());
  std::vector<int> sorted = fwd;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  // Each thread's own inserts appear newest first.
  std::vector<int> last_seen(kThreads, kEach);
  bool ordered = true;
  for (int id : fwd) {
    int t = id / kEach;
    ordered &= id % kEach < last_seen[static_cast<std::size_t>(t)];
    last_seen[static_cast<std::size_t>(t)] = id % kEach;
  }
  CHECK(ordered);
  for (int i = 0; i < kThreads * kEach; ++i) REQUIRE(it[i].refcnt.load() == kLive);
}

TEST_CASE("remove_start partitions by prior state") {
  List l;
  auto it = make_items(3);
  for (int i = 0; i < 3; ++i) append(l, it[i]);

  REQUIRE(List::pin(&it[0]));
  CHECK(l.remove_start(&it[0]) == RemoveStart::kReady);
  CHECK(it[0].refcnt.load() == RefcountWord{true, 0, kNullId});
  l.remove_do(&it[0]);

  for (int i = 0; i < 3; ++i) REQUIRE(List::pin(&it[1]));
  CHECK(l.remove_start(&it[1]) == RemoveStart::kMustWait);
  CHECK(it[1].refcnt.load() == RefcountWord{true, 3, kNullId});
  CHECK(l.remove_start(&it[1]) == RemoveStart::kNotRemovable);
  CHECK(it[1].refcnt.load() == RefcountWord{true, 3, kNullId});
  List::unpin(&it[1]);
  List::unpin(&it[1]);
  l.remove_waitonpincount(&it[1]);  // last pin is ours: no blocking
  CHECK(it[1].refcnt.load() == RefcountWord{true, 0, kNullId});
  l.remove_do(&it[1]);
  CHECK(walk(l) == std::vector<int>{2});
}

TEST_CASE("remove_waitonpincount blocks until the other pin goes") {
  List l;
  auto it = make_items(1);
  append(l, it[0]);
  REQUIRE(List::pin(&it[0]));  // the other pin
  std::atomic<bool> done{false};
  std::thread del([&] {
    REQUIRE(List::pin(&it[0]));
    REQUIRE(l.remove_start(&it[0]) == RemoveStart::kMustWait);
    l.remove_waitonpincount(&it[0]);
    done.store(true);
    l.remove_do(&it[0]);
  });
  REQUIRE(eventually([&] { return it[0].refcnt.load().waitq != kNullId; }));
  CHECK(it[0].refcnt.load().pincount == 1);
  CHECK_FALSE(done.load());
  List::unpin(&it[0]);
  del.join();
  CHECK(done.load());
  CHECK(walk(l).empty());
}

TEST_CASE("delete wakes exactly after the fifth of five unpins") {
  List l;
  auto it = make_items(1);
  append(l, it[0]);
  constexpr int kPinners = 5;
  std::vector<std::unique_ptr<std::atomic<bool>>> go;
  std::vector<std::thread> pinners;
  std::atomic<int> pinned{0};
  for (int i = 0; i < kPinners; ++i) {
    go.push_back(std::make_unique<std::atomic<bool>>(false));
    pinners.emplace_back([&, i] {
      REQUIRE(List::pin(&it[0]));
      pinned.fetch_add(1);
      while (!go[static_cast<std::size_t>(i)]->load()) std::this_thread::yield();
      List::unpin(&it[0]);
    });
  }
  REQUIRE(eventually([&] { return pinned.load() == kPinners; }));
  std::atomic<bool> woke{false};
  std::thread del([&] {
    REQUIRE(List::pin(&it[0]));
    REQUIRE(l.remove_start(&it[0]) == RemoveStart::kMustWait);
    l.remove_waitonpincount(&it[0]);
    woke.store(true);
    l.remove_do(&it[0]);
  });
  REQUIRE(eventually([&] { return it[0].refcnt.load().waitq != kNullId; }));
  std::vector<int> order{0, 1, 2, 3, 4};
  std::shuffle(order.begin(), order.end(), std::mt19937(7));
  for (int k = 0; k < kPinners; ++k) {
    go[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]->store(true);
    if (k + 1 < kPinners) {
      REQUIRE(eventually([&] { return it[0].refcnt.load().pincount == kPinners - 1 - k; }));
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      CHECK_FALSE(woke.load());
    }
  }
  del.join();
  for (auto& t : pinners) t.join();
  CHECK(woke.load());
  CHECK(walk(l).empty());
}

TEST_CASE("remove_do unlinks, leaves the node off-list") {
  List l;
  auto it = make_items(3);
  for (int i = 0; i < 3; ++i) append(l, it[i]);
  REQUIRE(List::pin(&it[1]));
  CHECK(l.node_delete(&it[1]));
  CHECK(walk(l) == std::vector<int>{0, 2});
  CHECK(it[0].next == &it[2]);
  CHECK(it[2].prev == &it[0]);
  CHECK(it[1].refcnt.load() == Refcount::kOffList);
  CHECK(it[1].lock.state() == LockWord{});
  CHECK_FALSE(List::pin(&it[1]));
  // Reusable right away.
  l.append_at_end(&it[1]);
  List::unpin(&it[1]);
  CHECK(walk(l) == std::vector<int>{0, 2, 1});
}

TEST_CASE("two threads delete the same node: exactly one wins") {
  for (int round = 0; round < 200; ++round) {
    List l;
    auto it = make_items(1);
    append(l, it[0]);
    std::atomic<int> wins{0};
    std::atomic<int> ready{0};
    auto body = [&] {
      REQUIRE(List::pin(&it[0]));
      ready.fetch_add(1);
      while (ready.load() < 2) std::this_thread::yield();
      if (l.node_delete(&it[0])) {
        wins.fetch_add(1);
      } else {
        List::unpin(&it[0]);
      }
    };
    std::thread a(body), b(body);
    a.join();
    b.join();
    REQUIRE(wins.load() == 1);
    REQUIRE(walk(l).empty());
  }
}

TEST_CASE("8 threads delete their own nodes from a 1000-node list") {
  List l;
  auto it = make_items(1000);
  for (int i = 0; i < 1000; ++i) append(l, it[i]);
  std::atomic<int> failures{0};
  std::vector<std::thread> ts;
  for (int t = 0; t < 8; ++t) {
    ts.emplace_back([&, t] {
      for (int i = t; i < 1000; i += 8) {
        if (!List::pin(&it[i]) || !l.node_delete(&it[i])) failures.fetch_add(1);
      }
    });
  }
  for (auto& t : ts) t.join();
  CHECK(failures.load() == 0);
  CHECK(walk(l).empty());
  CHECK(l.unsafe_links_consistent());
}

TEST_CASE("pop and dequeue") {
  List l;
  auto it = make_items(2);
  append(l, it[0]);
  append(l, it[1]);
  CHECK(l.pop() == &it[0]);
  CHECK(walk(l) == std::vector<int>{1});
  CHECK(l.dequeue() == &it[1]);
  CHECK(l.pop() == nullptr);
}

TEST_CASE("4 producers and 4 consumers move 40000 nodes") {
  List l;
  constexpr int kEach = 10'000;
  auto it = make_items(4 * kEach);
  std::atomic<int> received{0};
  std::vector<std::vector<int>> got(4);
  std::vector<std::thread> ts;
  for (int p = 0; p < 4; ++p) {
    ts.emplace_back([&, p] {
      for (int i = 0; i < kEach; ++i) append(l, it[p * kEach + i]);
    });
  }
  for (int c = 0; c < 4; ++c) {
    ts.emplace_back([&, c] {
      while (received.load() < 4 * kEach) {
        Node* n = (c % 2 == 0) ? l.pop() : l.dequeue();
        if (n == nullptr) {
          std::this_thread::yield();
          continue;
        }
        got[static_cast<std::size_t>(c)].push_back(id_of(n));
        received.fetch_add(1);
      }
    });
  }
  for (auto& t : ts) t.join();
  std::vector<int> all;
  for (auto& g : got) all.insert(all.end(), g.begin(), g.end());
  std::sort(all.begin(), all.end());
  std::vector<int> want(4 * kEach);
  for (int i = 0; i < 4 * kEach; ++i) want[static_cast<std::size_t>(i)] = i;
  CHECK(all == want);
  CHECK(walk(l).empty());
}

TEST_CASE("iterator: forward over [A, B, C]") {
  List l;
  auto it = make_items(3);
  for (int i = 0; i < 3; ++i) append(l, it[i]);
  Iterator iter(l, Direction::kForward);
  CHECK(iter.next() == &it[0]);
  CHECK(it[0].refcnt.load().pincount == 1);
  CHECK(iter.next() == &it[1]);
  CHECK(it[0].refcnt.load().pincount == 0);
  CHECK(iter.next() == &it[2]);
  CHECK(iter.next() == nullptr);
  CHECK(iter.next() == nullptr);
  for (int i = 0; i < 3; ++i) CHECK(it[i].refcnt.load() == kLive);
  CHECK_THROWS_AS(iter.pop(), Fault);
}

TEST_CASE("iterator: destroy releases the pin, pop advances past the removed node") {
  List l;
  auto it = make_items(3);
  for (int i = 0; i < 3; ++i) append(l, it[i]);
  {
    Iterator iter(l, Direction::kBackward);
    CHECK(iter.next() == &it[2]);
    CHECK(iter.next() == &it[1]);
    CHECK(iter.pop() == &it[1]);
    CHECK(iter.current() == nullptr);
    CHECK(iter.next() == &it[0]);
    iter.destroy();
    CHECK(it[0].refcnt.load() == kLive);
  }
  CHECK(walk(l) == std::vector<int>{0, 2});
}

TEST_CASE("iterator: a node moved ahead of the cursor may be seen twice") {
  List l;
  auto it = make_items(3);
  for (int i = 0; i < 3; ++i) append(l, it[i]);
  Iterator iter(l, Direction::kForward);
  std::vector<int> seen;
  seen.push_back(id_of(iter.next()));
  seen.push_back(id_of(iter.next()));
  REQUIRE(List::pin(&it[0]));
  REQUIRE(l.node_delete(&it[0]));
  l.append_at_end(&it[0]);
  List::unpin(&it[0]);
  for (Node* n = iter.next(); n != nullptr; n = iter.next()) seen.push_back(id_of(n));
  CHECK(seen == std::vector<int>{0, 1, 2, 0});
}

TEST_CASE("iterator pop waits for pins with no neighbor pinned") {
  List l;
  auto it = make_items(3);
  for (int i = 0; i < 3; ++i) append(l, it[i]);
  REQUIRE(List::pin(&it[1]));  // someone else's pin on B
  std::atomic<bool> popped{false};
  std::thread t([&] {
    Iterator iter(l, Direction::kForward);
    REQUIRE(iter.next() == &it[0]);
    REQUIRE(iter.next() == &it[1]);
    REQUIRE(iter.pop() == &it[1]);
    popped.store(true);
    REQUIRE(iter.next() == &it[2]);
  });
  REQUIRE(eventually([&] { return it[1].refcnt.load().waitq != kNullId; }));
  CHECK(it[0].refcnt.load().pincount == 0);
  CHECK(it[2].refcnt.load().pincount == 0);
  CHECK_FALSE(popped.load());
  List::unpin(&it[1]);
  t.join();
  CHECK(walk(l) == std::vector<int>{0, 2});
}

TEST_CASE("backward iteration concurrent with interior deletes returns only live nodes") {
  constexpr int kNodes = 2000;
  List l;
  auto it = make_items(kNodes);
  for (int i = 0; i < kNodes; ++i) append(l, it[i]);
  std::atomic<int> stale{0};
  std::atomic<int> out_of_order{0};
  std::atomic<bool> stop{false};
  std::vector<std::thread> ts;
  for (int d = 0; d < 2; ++d) {
    ts.emplace_back([&, d] {
      std::mt19937 rng(static_cast<unsigned>(d + 11));
      for (int k = 0; k < kNodes / 3; ++k) {
        Item* n = &it[1 + rng() % (kNodes - 2)];
        if (!List::pin(n)) continue;
        if (l.node_delete(n)) {
          n->deleted.store(true);
        } else {
          List::unpin(n);
        }
      }
    });
  }
  for (int r = 0; r < 2; ++r) {
    ts.emplace_back([&] {
      while (!stop.load()) {
        Iterator iter(l, Direction::kBackward);
        int last = kNodes;
        for (Node* n = iter.next(); n != nullptr; n = iter.next()) {
          auto* item = static_cast<Item*>(n);
          if (item->deleted.load()) stale.fetch_add(1);
          if (item->id >= last) out_of_order.fetch_add(1);
          last = item->id;
        }
      }
    });
  }
  ts[0].join();
  ts[1].join();
  stop.store(true);
  ts[2].join();
  ts[3].join();
  CHECK(stale.load() == 0);
  CHECK(out_of_order.load() == 0);
  CHECK(l.unsafe_links_consistent());
  for (Node* n : l.unsafe_walk(Direction::kForward)) REQUIRE(n->refcnt.load() == kLive);
}

TEST_CASE("sequential behavior matches the baseline list and the sequence model") {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    support::DifferentialOutcome r = support::run_sequential_differential(seed, 60);
    INFO("seed " << seed << ": " << r.failure);
    REQUIRE(r.ok);
  }
}

TEST_CASE("controlled races: predecessor deleted, nodes inserted between, backward behind delete") {
  for (int i = 0; i < 50; ++i) {
    support::RaceOutcome a = support::race_predecessor_deleted();
    INFO("predecessor deleted: " << a.failure);
    REQUIRE(a.ok);
    support::RaceOutcome b = support::race_inserted_between();
    INFO("inserted between: " << b.failure);
    REQUIRE(b.ok);
    support::RaceOutcome c = support::race_backward_behind_delete();
    INFO("backward behind delete: " << c.failure);
    REQUIRE(c.ok);
  }
}
