#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "sesh/priority.hpp"

using namespace sesh;

namespace {

std::vector<Priority> universe() {
  std::vector<Priority> u{Priority::bot()};
  for (std::uint64_t n = 0; n <= 5; ++n) u.push_back(Priority::at(n));
  u.push_back(Priority::top());
  return u;
}

std::vector<Bounds> bounds_universe() {
  std::vector<Bounds> out;
  for (const Priority p : universe()) {
    for (const Priority q : universe()) out.push_back({p, q});
  }
  return out;
}

}  // namespace

TEST_CASE("strict order basics") {
  CHECK(lt(Priority::bot(), Priority::at(0)));
  CHECK_FALSE(lt(Priority::top(), Priority::top()));
  CHECK_FALSE(lt(Priority::at(3), Priority::at(3)));
  CHECK(lt(Priority::at(2), Priority::top()));
  CHECK(lt(Priority::at(2), Priority::at(7)));
  CHECK_FALSE(lt(Priority::bot(), Priority::bot()));
}

TEST_CASE("lt is irreflexive, transitive, and total on the sample universe") {
  const auto u = universe();
  for (const Priority a : u) {
    CHECK_FALSE(lt(a, a));
    for (const Priority b : u) {
      if (!(a == b)) CHECK((lt(a, b) || lt(b, a)));
      CHECK_FALSE((lt(a, b) && lt(b, a)));
      for (const Priority c : u) {
        if (lt(a, b) && lt(b, c)) CHECK(lt(a, c));
      }
    }
  }
}

TEST_CASE("meet and join examples") {
  CHECK(meet(Priority::top(), Priority::at(3)) == Priority::at(3));
  CHECK(meet(Priority::at(1), Priority::at(4)) == Priority::at(1));
  CHECK(meet(Priority::bot(), Priority::top()) == Priority::bot());
  CHECK(join(Priority::bot(), Priority::at(5)) == Priority::at(5));
  CHECK(join(Priority::at(1), Priority::at(4)) == Priority::at(4));
  CHECK(join(Priority::top(), Priority::at(9)) == Priority::top());
}

TEST_CASE("lattice laws hold exhaustively over {bot, 0..5, top}") {
  const auto u = universe();
  for (const Priority a : u) {
    CHECK(meet(a, a) == a);
    CHECK(join(a, a) == a);
    CHECK(meet(Priority::top(), a) == a);
    CHECK(join(Priority::bot(), a) == a);
    for (const Priority b : u) {
      CHECK(meet(a, b) == meet(b, a));
      CHECK(join(a, b) == join(b, a));
      CHECK(meet(a, join(a, b)) == a);  // absorption
      CHECK(join(a, meet(a, b)) == a);
      for (const Priority c : u) {
        CHECK(meet(meet(a, b), c) == meet(a, meet(b, c)));
        CHECK(join(join(a, b), c) == join(a, join(b, c)));
      }
    }
  }
}

TEST_CASE("seq_bounds composes windows in order") {
  CHECK(seq_bounds(Bounds::pure(), Bounds::at(0)) == Bounds::at(0));
  CHECK(seq_bounds(Bounds::at(0), Bounds::at(1)) ==
        Bounds{Priority::at(0), Priority::at(1)});
  CHECK_FALSE(seq_bounds(Bounds{Priority::at(0), Priority::at(1)},
                         Bounds{Priority::at(1), Priority::at(2)})
                  .has_value());
}

TEST_CASE("pure bounds are the identity away from the strictness edges") {
  for (const Bounds x : bounds_universe()) {
    if (!x.lower.is_bot()) {
      auto left = seq_bounds(Bounds::pure(), x);
      REQUIRE(left.has_value());
      CHECK(*left == x);
    } else {
      CHECK_FALSE(seq_bounds(Bounds::pure(), x).has_value());
    }
    if (!x.upper.is_top()) {
      auto right = seq_bounds(x, Bounds::pure());
      REQUIRE(right.has_value());
      CHECK(*right == x);
    } else {
      CHECK_FALSE(seq_bounds(x, Bounds::pure()).has_value());
    }
  }
}

TEST_CASE("seq_bounds is associative whenever both sides are defined") {
  const auto bs = bounds_universe();
  for (const Bounds a : bs) {
    for (const Bounds b : bs) {
      const auto ab = seq_bounds(a, b);
      for (const Bounds c : bs) {
        const auto bc = seq_bounds(b, c);
        const auto left = ab ? seq_bounds(*ab, c) : std::nullopt;
        const auto right = bc ? seq_bounds(a, *bc) : std::nullopt;
        if (left && right) CHECK(*left == *right);
        // The definedness conditions coincide as well.
        CHECK(left.has_value() == right.has_value());
      }
    }
  }
}

TEST_CASE("rendering") {
  CHECK(to_string(Priority::bot()) == "bot");
  CHECK(to_string(Priority::top()) == "top");
  CHECK(to_string(Priority::at(17)) == "17");
  CHECK(to_string(Bounds::pure()) == "[top,bot]");
  CHECK(to_string(Bounds{Priority::at(0), Priority::at(7)}) == "[0,7]");
}
