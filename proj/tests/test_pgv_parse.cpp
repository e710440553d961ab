#include <catch2/catch_amalgamated.hpp>

#include "sesh/pgv/parser.hpp"

using namespace sesh::pgv;

TEST_CASE("lambda with annotation") {
  Term t = parse("\\x:Int. x");
  REQUIRE(t.tag() == Term::Tag::Lam);
  CHECK(t.annot() == Type::int_());
  CHECK(t.child0().tag() == Term::Tag::Var);
  CHECK(t.child0().surface() == "x");
}

TEST_CASE("let pair") {
  Term t = parse("let (a,b) = (1, 2) in a + b");
  REQUIRE(t.tag() == Term::Tag::LetPair);
  CHECK(t.surface() == "a");
  CHECK(t.surface2() == "b");
  CHECK(t.child0().tag() == Term::Tag::Pair);
  CHECK(t.child1().tag() == Term::Tag::PrimAdd);
}

TEST_CASE("new with a session annotation") {
  Term t = parse("new[!0 Int. end 1]");
  REQUIRE(t.tag() == Term::Tag::Const);
  CHECK(t.const_kind() == ConstKind::New);
  CHECK(t.annot() == Type::ssend(0, Type::int_(), Type::send_end(1)));
}

TEST_CASE("application binds tighter than arithmetic, which is left associative") {
  Term t = parse("\\f:Int -[top,bot]-> Int. f 1 + f 2 + 3");
  const Term& body = t.child0();
  REQUIRE(body.tag() == Term::Tag::PrimAdd);
  // ((f 1 + f 2) + 3)
  CHECK(body.child1().tag() == Term::Tag::IntLit);
  REQUIRE(body.child0().tag() == Term::Tag::PrimAdd);
  CHECK(body.child0().child0().tag() == Term::Tag::App);
  CHECK(body.child0().child1().tag() == Term::Tag::App);
}

TEST_CASE("multiplication is tighter than addition") {
  Term t = parse("1 + 2 * 3");
  REQUIRE(t.tag() == Term::Tag::PrimAdd);
  CHECK(t.child1().tag() == Term::Tag::PrimMul);
}

TEST_CASE("case with branches") {
  Term t = parse("case inl 1 of { inl x -> x ; inr y -> y + 1 }");
  REQUIRE(t.tag() == Term::Tag::Case);
  CHECK(t.child0().tag() == Term::Tag::Inl);
  CHECK(t.child1().tag() == Term::Tag::Var);
  CHECK(t.child2().tag() == Term::Tag::PrimAdd);
}

TEST_CASE("shadowed binders are renamed apart") {
  Term t = parse("\\x:Int. \\x:Int. x");
  const Term& inner = t.child0();
  REQUIRE(inner.tag() == Term::Tag::Lam);
  CHECK(t.name() != inner.name());
  CHECK(inner.child0().name() == inner.name());  // innermost binding wins
}

TEST_CASE("types parse with the expected precedence") {
  CHECK(parse_type_text("Int * Int + Unit") ==
        Type::sum(Type::prod(Type::int_(), Type::int_()), Type::unit()));
  CHECK(parse_type_text("Int -[0,1]-> Int -[2,3]-> Unit") ==
        Type::arrow(sesh::Bounds{sesh::Priority::at(0), sesh::Priority::at(1)}, Type::int_(),
                    Type::arrow(sesh::Bounds{sesh::Priority::at(2), sesh::Priority::at(3)},
                                Type::int_(), Type::unit())));
  CHECK(parse_type_text("Unit -[top,bot]-> Unit") ==
        Type::arrow(sesh::Bounds::pure(), Type::unit(), Type::unit()));
  // session payloads extend greedily up to the dot
  CHECK(parse_type_text("!0 Int * Int. end 1") ==
        Type::ssend(0, Type::prod(Type::int_(), Type::int_()), Type::send_end(1)));
  CHECK(parse_type_text("?0 (!1 Int. end 2). end 3") ==
        Type::srecv(0, Type::ssend(1, Type::int_(), Type::send_end(2)), Type::send_end(3)));
}

TEST_CASE("type rendering round-trips through the parser") {
  const char* samples[] = {
      "Int",
      "Unit * Void",
      "Int + Unit * Int",
      "(Int + Unit) * Int",
      "!0 Int. ?1 Int. end 2",
      "?0 ((?1 Int. end 2) + (!1 Int. end 2)). end 9",
      "(!0 Int. end 1) -[0,1]-> Unit",
      "Int -[bot,top]-> Int -[0,0]-> Unit",
  };
  for (const char* s : samples) {
    const Type t = parse_type_text(s);
    const Type again = parse_type_text(to_string(t));
    CHECK(again == t);
  }
}

TEST_CASE("comments and whitespace are ignored") {
  Term t = parse("-- a comment\n  1 + -- inline\n 2\n");
  CHECK(t.tag() == Term::Tag::PrimAdd);
}

TEST_CASE("parse errors carry positions") {
  try {
    parse("let (a,b) = in x");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.loc.line == 1);
    CHECK(e.loc.col >= 13);
  }
  CHECK_THROWS_AS(parse("\\x:. x"), ParseError);
  CHECK_THROWS_AS(parse("(1, 2"), ParseError);
  CHECK_THROWS_AS(parse("1 + "), ParseError);
  CHECK_THROWS_AS(parse("nosuchvar"), ParseError);
  CHECK_THROWS_AS(parse("new[Int]"), ParseError);
  CHECK_THROWS_AS(parse("1 2 3 !"), ParseError);
}

TEST_CASE("unbound variables are rejected at parse time") {
  CHECK_THROWS_AS(parse("\\x:Int. y"), ParseError);
}

TEST_CASE("number literals reject overflow") {
  CHECK_THROWS_AS(parse("99999999999999999999999999"), ParseError);
}

TEST_CASE("duality on calculus types") {
  const Type s = parse_type_text("!0 Int. end 1");
  CHECK(dual_type(s) == parse_type_text("?0 Int. end 1"));
  CHECK(dual_type(dual_type(s)) == s);
  CHECK_THROWS_AS(dual_type(Type::int_()), TypeError);
}
