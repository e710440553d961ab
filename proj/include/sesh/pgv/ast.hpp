#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "sesh/errors.hpp"
#include "sesh/priority.hpp"

namespace sesh::pgv {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& msg)
      : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + msg),
        loc(loc) {}

  SourceLoc loc;
};

enum class TypeErrorKind { Linearity, Priority, Mismatch, Kind, Instantiation };

inline const char* to_string(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::Linearity:
      return "LinearityError";
    case TypeErrorKind::Priority:
      return "PriorityError";
    case TypeErrorKind::Mismatch:
      return "MismatchError";
    case TypeErrorKind::Kind:
      return "KindError";
    case TypeErrorKind::Instantiation:
      return "InstantiationError";
  }
  return "TypeError";
}

class TypeError : public std::runtime_error {
 public:
  TypeError(TypeErrorKind kind, std::string rule, SourceLoc loc, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + " at " + std::to_string(loc.line) +
                           ":" + std::to_string(loc.col) + " [" + rule + "]: " + msg),
        kind(kind),
        rule(std::move(rule)),
        loc(loc) {}

  TypeErrorKind kind;
  std::string rule;
  SourceLoc loc;
};

// Types of the calculus. Session constructors carry concrete priorities;
// arrows carry the priority window of the function body.
class Type {
 public:
  enum class Tag { SSend, SRecv, SEnd, Prod, Sum, UnitT, VoidT, IntT, Arrow };

  Type() = default;

  static Type ssend(std::uint64_t o, Type payload, Type cont) {
    return make({Tag::SSend, o, mk(std::move(payload)), mk(std::move(cont)), {}});
  }
  static Type srecv(std::uint64_t o, Type payload, Type cont) {
    return make({Tag::SRecv, o, mk(std::move(payload)), mk(std::move(cont)), {}});
  }
  static Type send_end(std::uint64_t o) { return make({Tag::SEnd, o, {}, {}, {}}); }
  static Type prod(Type a, Type b) {
    return make({Tag::Prod, 0, mk(std::move(a)), mk(std::move(b)), {}});
  }
  static Type sum(Type a, Type b) {
    return make({Tag::Sum, 0, mk(std::move(a)), mk(std::move(b)), {}});
  }
  static Type unit() { return make({Tag::UnitT, 0, {}, {}, {}}); }
  static Type void_() { return make({Tag::VoidT, 0, {}, {}, {}}); }
  static Type int_() { return make({Tag::IntT, 0, {}, {}, {}}); }
  static Type arrow(Bounds b, Type dom, Type cod) {
    return make({Tag::Arrow, 0, mk(std::move(dom)), mk(std::move(cod)), b});
  }

  bool valid() const { return node_ != nullptr; }
  Tag tag() const { return node_->tag; }
  std::uint64_t priority() const { return node_->priority; }
  const Type& first() const { return *node_->a; }   // payload / left / dom
  const Type& second() const { return *node_->b; }  // cont / right / cod
  Bounds bounds() const { return node_->bounds; }

  bool is_session() const {
    return valid() && (tag() == Tag::SSend || tag() == Tag::SRecv || tag() == Tag::SEnd);
  }

  friend bool operator==(const Type& a, const Type& b) {
    if (a.node_ == b.node_) return true;
    if (!a.valid() || !b.valid()) return a.valid() == b.valid();
    if (a.tag() != b.tag()) return false;
    switch (a.tag()) {
      case Tag::SSend:
      case Tag::SRecv:
        return a.priority() == b.priority() && a.first() == b.first() && a.second() == b.second();
      case Tag::SEnd:
        return a.priority() == b.priority();
      case Tag::Prod:
      case Tag::Sum:
        return a.first() == b.first() && a.second() == b.second();
      case Tag::Arrow:
        return a.bounds() == b.bounds() && a.first() == b.first() && a.second() == b.second();
      default:
        return true;
    }
  }

 private:
  struct Node {
    Tag tag;
    std::uint64_t priority;
    std::shared_ptr<const Type> a;
    std::shared_ptr<const Type> b;
    Bounds bounds;
  };

  static std::shared_ptr<const Type> mk(Type t) {
    return std::make_shared<const Type>(std::move(t));
  }
  static Type make(Node n) {
    Type t;
    t.node_ = std::make_shared<const Node>(std::move(n));
    return t;
  }

  std::shared_ptr<const Node> node_;
};

// Rendering follows the source grammar. Precedence: arrows and session
// prefixes are weakest, then sums, then products.
namespace ast_detail {

inline int type_level(const Type& t) {
  switch (t.tag()) {
    case Type::Tag::Arrow:
    case Type::Tag::SSend:
    case Type::Tag::SRecv:
      return 0;
    case Type::Tag::Sum:
      return 1;
    case Type::Tag::Prod:
      return 2;
    default:
      return 3;
  }
}

inline std::string render_type(const Type& t, int min_level) {
  std::string out;
  switch (t.tag()) {
    case Type::Tag::UnitT:
      out = "Unit";
      break;
    case Type::Tag::VoidT:
      out = "Void";
      break;
    case Type::Tag::IntT:
      out = "Int";
      break;
    case Type::Tag::SEnd:
      out = "end " + std::to_string(t.priority());
      break;
    case Type::Tag::SSend:
    case Type::Tag::SRecv:
      out = (t.tag() == Type::Tag::SSend ? "!" : "?") + std::to_string(t.priority()) + " " +
            render_type(t.first(), 1) + ". " + render_type(t.second(), 0);
      break;
    case Type::Tag::Prod:
      out = render_type(t.first(), 2) + " * " + render_type(t.second(), 3);
      break;
    case Type::Tag::Sum:
      out = render_type(t.first(), 1) + " + " + render_type(t.second(), 2);
      break;
    case Type::Tag::Arrow:
      out = render_type(t.first(), 1) + " -" + to_string(t.bounds()) + "-> " +
            render_type(t.second(), 0);
      break;
  }
  if (type_level(t) < min_level) return "(" + out + ")";
  return out;
}

}  // namespace ast_detail

inline std::string to_string(const Type& t) {
  if (!t.valid()) return "<invalid>";
  return ast_detail::render_type(t, 0);
}

// Session duality: send and receive swap, the continuation dualizes, end is
// self-dual; priorities are preserved.
inline Type dual_type(const Type& s, SourceLoc loc = {}) {
  if (!s.is_session()) {
    throw TypeError(TypeErrorKind::Kind, "dual", loc, "not a session type: " + to_string(s));
  }
  switch (s.tag()) {
    case Type::Tag::SSend:
      return Type::srecv(s.priority(), s.first(), dual_type(s.second(), loc));
    case Type::Tag::SRecv:
      return Type::ssend(s.priority(), s.first(), dual_type(s.second(), loc));
    default:
      return Type::send_end(s.priority());
  }
}

enum class ConstKind { New, Fork, Send, Recv, Close, Cancel };

inline const char* to_string(ConstKind k) {
  switch (k) {
    case ConstKind::New:
      return "new";
    case ConstKind::Fork:
      return "fork";
    case ConstKind::Send:
      return "send";
    case ConstKind::Recv:
      return "recv";
    case ConstKind::Close:
      return "close";
    case ConstKind::Cancel:
      return "cancel";
  }
  return "?";
}

// Terms. Binder names are uniqued at parse time; `surface` keeps the name
// as written for diagnostics.
class Term {
 public:
  enum class Tag {
    Var,
    Lam,
    App,
    UnitV,
    LetUnit,
    Pair,
    LetPair,
    Inl,
    Inr,
    Case,
    Absurd,
    Const,
    IntLit,
    PrimAdd,
    PrimMul
  };

  Term() = default;

  static Term var(std::string name, std::string surface, SourceLoc loc = {});
  static Term lam(std::string name, std::string surface, Type annot, Term body,
                  SourceLoc loc = {});
  static Term app(Term fn, Term arg, SourceLoc loc = {});
  static Term unit(SourceLoc loc = {});
  static Term let_unit(Term m, Term n, SourceLoc loc = {});
  static Term pair(Term m, Term n, SourceLoc loc = {});
  static Term let_pair(std::string x, std::string xs, std::string y, std::string ys, Term m,
                       Term n, SourceLoc loc = {});
  static Term inl(Term m, SourceLoc loc = {});
  static Term inr(Term m, SourceLoc loc = {});
  static Term case_sum(Term scrut, std::string x, std::string xs, Term m, std::string y,
                       std::string ys, Term n, SourceLoc loc = {});
  static Term absurd(Term m, SourceLoc loc = {});
  static Term constant(ConstKind k, std::optional<Type> annot = std::nullopt,
                       SourceLoc loc = {});
  static Term int_lit(std::int64_t v, SourceLoc loc = {});
  static Term prim_add(Term a, Term b, SourceLoc loc = {});
  static Term prim_mul(Term a, Term b, SourceLoc loc = {});

  bool valid() const { return node_ != nullptr; }
  Tag tag() const;
  std::uint64_t id() const;
  SourceLoc loc() const;

  const std::string& name() const;
  const std::string& surface() const;
  const std::string& name2() const;
  const std::string& surface2() const;
  const Type& annot() const;
  const Term& child0() const;
  const Term& child1() const;
  const Term& child2() const;
  ConstKind const_kind() const;
  std::int64_t int_value() const;

 private:
  struct Node;

  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{0};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }

  static Term make(Node n);

  std::shared_ptr<const Node> node_;
};

struct Term::Node {
  Tag tag;
  std::uint64_t id;
  SourceLoc loc;
  std::string name, surface;    // Var, first binder
  std::string name2, surface2;  // second binder
  Type annot;                   // Lam annotation / New annotation
  Term c0, c1, c2;
  ConstKind const_kind = ConstKind::New;
  std::int64_t int_value = 0;
};

inline Term::Tag Term::tag() const { return node_->tag; }
inline std::uint64_t Term::id() const { return node_->id; }
inline SourceLoc Term::loc() const { return node_->loc; }
inline const std::string& Term::name() const { return node_->name; }
inline const std::string& Term::surface() const { return node_->surface; }
inline const std::string& Term::name2() const { return node_->name2; }
inline const std::string& Term::surface2() const { return node_->surface2; }
inline const Type& Term::annot() const { return node_->annot; }
inline const Term& Term::child0() const { return node_->c0; }
inline const Term& Term::child1() const { return node_->c1; }
inline const Term& Term::child2() const { return node_->c2; }
inline ConstKind Term::const_kind() const { return node_->const_kind; }
inline std::int64_t Term::int_value() const { return node_->int_value; }

inline Term Term::make(Node n) {
  n.id = next_id();
  Term t;
  t.node_ = std::make_shared<const Node>(std::move(n));
  return t;
}

inline Term Term::var(std::string name, std::string surface, SourceLoc loc) {
  Node n{};
  n.tag = Tag::Var;
  n.loc = loc;
  n.name = std::move(name);
  n.surface = std::move(surface);
  return make(std::move(n));
}

inline Term Term::lam(std::string name, std::string surface, Type annot, Term body,
                      SourceLoc loc) {
  Node n{};
  n.tag = Tag::Lam;
  n.loc = loc;
  n.name = std::move(name);
  n.surface = std::move(surface);
  n.annot = std::move(annot);
  n.c0 = std::move(body);
  return make(std::move(n));
}

inline Term Term::app(Term fn, Term arg, SourceLoc loc) {
  Node n{};
  n.tag = Tag::App;
  n.loc = loc;
  n.c0 = std::move(fn);
  n.c1 = std::move(arg);
  return make(std::move(n));
}

inline Term Term::unit(SourceLoc loc) {
  Node n{};
  n.tag = Tag::UnitV;
  n.loc = loc;
  return make(std::move(n));
}

inline Term Term::let_unit(Term m, Term nn, SourceLoc loc) {
  Node n{};
  n.tag = Tag::LetUnit;
  n.loc = loc;
  n.c0 = std::move(m);
  n.c1 = std::move(nn);
  return make(std::move(n));
}

inline Term Term::pair(Term m, Term nn, SourceLoc loc) {
  Node n{};
  n.tag = Tag::Pair;
  n.loc = loc;
  n.c0 = std::move(m);
  n.c1 = std::move(nn);
  return make(std::move(n));
}

inline Term Term::let_pair(std::string x, std::string xs, std::string y, std::string ys, Term m,
                           Term nn, SourceLoc loc) {
  Node n{};
  n.tag = Tag::LetPair;
  n.loc = loc;
  n.name = std::move(x);
  n.surface = std::move(xs);
  n.name2 = std::move(y);
  n.surface2 = std::move(ys);
  n.c0 = std::move(m);
  n.c1 = std::move(nn);
  return make(std::move(n));
}

inline Term Term::inl(Term m, SourceLoc loc) {
  Node n{};
  n.tag = Tag::Inl;
  n.loc = loc;
  n.c0 = std::move(m);
  return make(std::move(n));
}

inline Term Term::inr(Term m, SourceLoc loc) {
  Node n{};
  n.tag = Tag::Inr;
  n.loc = loc;
  n.c0 = std::move(m);
  return make(std::move(n));
}

inline Term Term::case_sum(Term scrut, std::string x, std::string xs, Term m, std::string y,
                           std::string ys, Term nn, SourceLoc loc) {
  Node n{};
  n.tag = Tag::Case;
  n.loc = loc;
  n.c0 = std::move(scrut);
  n.name = std::move(x);
  n.surface = std::move(xs);
  n.c1 = std::move(m);
  n.name2 = std::move(y);
  n.surface2 = std::move(ys);
  n.c2 = std::move(nn);
  return make(std::move(n));
}

inline Term Term::absurd(Term m, SourceLoc loc) {
  Node n{};
  n.tag = Tag::Absurd;
  n.loc = loc;
  n.c0 = std::move(m);
  return make(std::move(n));
}

inline Term Term::constant(ConstKind k, std::optional<Type> annot, SourceLoc loc) {
  Node n{};
  n.tag = Tag::Const;
  n.loc = loc;
  n.const_kind = k;
  if (annot) n.annot = std::move(*annot);
  return make(std::move(n));
}

inline Term Term::int_lit(std::int64_t v, SourceLoc loc) {
  Node n{};
  n.tag = Tag::IntLit;
  n.loc = loc;
  n.int_value = v;
  return make(std::move(n));
}

inline Term Term::prim_add(Term a, Term b, SourceLoc loc) {
  Node n{};
  n.tag = Tag::PrimAdd;
  n.loc = loc;
  n.c0 = std::move(a);
  n.c1 = std::move(b);
  return make(std::move(n));
}

inline Term Term::prim_mul(Term a, Term b, SourceLoc loc) {
  Node n{};
  n.tag = Tag::PrimMul;
  n.loc = loc;
  n.c0 = std::move(a);
  n.c1 = std::move(b);
  return make(std::move(n));
}

}  // namespace sesh::pgv
