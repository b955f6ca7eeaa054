#pragma once

#include <stdexcept>

namespace adlist {

// Contract violation by the caller: unlocking a free lock, unpinning an
// unpinned node, looking up NULLID, reusing a parked waiter. These are
// programming errors, never recoverable conditions.
class Fault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

[[noreturn]] void fault(const char* what);

}  // namespace adlist

#define ADLIST_CHECK(cond, msg)  \
  do {                           \
    if (!(cond)) {               \
      ::adlist::fault(msg);      \
    }                            \
  } while (0)
