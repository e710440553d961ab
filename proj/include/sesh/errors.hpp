#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sesh/priority.hpp"

namespace sesh {

struct Unit {
  friend constexpr bool operator==(Unit, Unit) { return true; }
};

// Misuse of the API: double consumption of an endpoint, fork outside a
// runtime, and the like. Distinct from CancellationError, which is an
// expected, recoverable outcome.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CancellationError : public std::runtime_error {
 public:
  CancellationError() : std::runtime_error("peer endpoint was cancelled") {}
  explicit CancellationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when two computations cannot be sequenced because the first one's
// upper bound does not precede the second one's lower bound.
class SequenceError : public std::runtime_error {
 public:
  SequenceError(Bounds first, Bounds second)
      : std::runtime_error("cannot sequence " + to_string(first) + " before " +
                           to_string(second)),
        first(first),
        second(second) {}

  Bounds first;
  Bounds second;
};

// A continuation materialized with bounds different from the ones declared
// at the bind that sequenced it.
class BoundsMismatchError : public std::runtime_error {
 public:
  BoundsMismatchError(Bounds declared, Bounds actual)
      : std::runtime_error("continuation declared " + to_string(declared) +
                           " but materialized " + to_string(actual)),
        declared(declared),
        actual(actual) {}

  Bounds declared;
  Bounds actual;
};

class WeakenError : public std::runtime_error {
 public:
  WeakenError(Bounds from, Bounds to)
      : std::runtime_error("cannot weaken " + to_string(from) + " to " + to_string(to) +
                           ": not a superset window"),
        from(from),
        to(to) {}

  Bounds from;
  Bounds to;
};

// An endpoint created under a run escaped it unconsumed.
class EscapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct BlockedOp {
  int thread_id = 0;
  std::string op;
  std::optional<Priority> priority;
};

struct DeadlockReport {
  std::vector<BlockedOp> blocked;

  std::string to_string() const {
    std::string out;
    for (const auto& b : blocked) {
      out += "thread " + std::to_string(b.thread_id) + " blocked on " + b.op;
      if (b.priority) out += " at priority " + sesh::to_string(*b.priority);
      out += "\n";
    }
    return out;
  }
};

class DeadlockError : public std::runtime_error {
 public:
  explicit DeadlockError(DeadlockReport r)
      : std::runtime_error("all threads blocked\n" + r.to_string()), report(std::move(r)) {}

  DeadlockReport report;
};

}  // namespace sesh
