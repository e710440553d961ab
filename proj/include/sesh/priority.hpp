#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace sesh {

// Priority lattice: bot < 0 < 1 < 2 < ... < top.
// top is the identity of meet, bot the identity of join.
class Priority {
 public:
  static constexpr Priority bot() { return Priority(Kind::Bot, 0); }
  static constexpr Priority top() { return Priority(Kind::Top, 0); }
  static constexpr Priority at(std::uint64_t n) { return Priority(Kind::At, n); }

  constexpr bool is_bot() const { return kind_ == Kind::Bot; }
  constexpr bool is_top() const { return kind_ == Kind::Top; }
  constexpr bool is_at() const { return kind_ == Kind::At; }

  // Only meaningful when is_at().
  constexpr std::uint64_t value() const { return n_; }

  friend constexpr auto operator<=>(Priority, Priority) = default;

 private:
  enum class Kind : std::uint8_t { Bot = 0, At = 1, Top = 2 };

  constexpr Priority(Kind kind, std::uint64_t n) : kind_(kind), n_(n) {}

  Kind kind_;
  std::uint64_t n_;
};

constexpr bool lt(Priority a, Priority b) { return a < b; }
constexpr Priority meet(Priority a, Priority b) { return b < a ? b : a; }
constexpr Priority join(Priority a, Priority b) { return a < b ? b : a; }

inline std::string to_string(Priority p) {
  if (p.is_bot()) return "bot";
  if (p.is_top()) return "top";
  return std::to_string(p.value());
}

// The window between the first and last communication of a computation.
// A computation that never communicates has the pure bounds [top,bot].
struct Bounds {
  Priority lower = Priority::top();
  Priority upper = Priority::bot();

  static constexpr Bounds pure() { return {Priority::top(), Priority::bot()}; }
  static constexpr Bounds exact(Priority o) { return {o, o}; }
  static constexpr Bounds at(std::uint64_t n) { return exact(Priority::at(n)); }

  friend constexpr bool operator==(const Bounds&, const Bounds&) = default;
};

// Sequential composition. Defined only when the first computation has
// finished before the second starts, i.e. first.upper < second.lower.
constexpr std::optional<Bounds> seq_bounds(Bounds first, Bounds second) {
  if (!lt(first.upper, second.lower)) return std::nullopt;
  return Bounds{meet(first.lower, second.lower), join(first.upper, second.upper)};
}

inline std::string to_string(const Bounds& b) {
  return "[" + to_string(b.lower) + "," + to_string(b.upper) + "]";
}

}  // namespace sesh
