#pragma once

#include <atomic>

namespace adlist {

struct Node;

namespace testing {

// Points inside list operations where a test can park a thread to force a
// specific interleaving.
enum class HookPoint {
  kRemoveDoSelfLocked,      // remove_do holds the victim's lock, prev not yet taken
  kPrevLockQueued,          // async_lock on the predecessor queued, own lock dropped
  kPrevRevalidateFailed,    // predecessor changed while we waited for it
  kBackwardWaitqQueued,     // backward step queued behind an in-flight delete
};

using HookFn = void (*)(HookPoint, const Node*);

void set_hook(HookFn fn) noexcept;

}  // namespace testing

namespace detail {

extern std::atomic<testing::HookFn> g_hook;

inline void hook(testing::HookPoint point, const Node* node) {
  if (auto fn = g_hook.load(std::memory_order_relaxed)) {
    fn(point, node);
  }
}

}  // namespace detail
}  // namespace adlist
