#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

#include "sesh/pgv/ast.hpp"
#include "sesh/priority.hpp"

namespace sesh::pgv {

struct CheckResult {
  Type type;
  Bounds bounds;
  std::set<std::string> used;
};

struct CheckOptions {
  // When false, the q < p' gates are skipped; types and linearity are
  // still enforced and bounds are still computed.
  bool enforce_priorities = true;
};

// Per-node facts recorded during checking, consumed by the translation.
struct NodeInfo {
  Type type;
  Bounds bounds;
  Bounds arrow_bounds = Bounds::pure();  // App nodes: the applied function's window
};

class Annotations {
 public:
  void record(const Term& t, Type type, Bounds bounds) {
    auto& info = map_[t.id()];
    info.type = std::move(type);
    info.bounds = bounds;
  }
  void record_arrow(const Term& t, Bounds arrow) { map_[t.id()].arrow_bounds = arrow; }
  const NodeInfo& at(const Term& t) const { return map_.at(t.id()); }
  bool contains(const Term& t) const { return map_.count(t.id()) > 0; }

 private:
  std::unordered_map<std::uint64_t, NodeInfo> map_;
};

// Linear typing environment.
class TypeContext {
 public:
  void bind(std::string name, Type type) { entries_.emplace_back(std::move(name), std::move(type)); }
  const std::vector<std::pair<std::string, Type>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, Type>> entries_;
};

namespace check_detail {

class Checker {
 public:
  Checker(CheckOptions opts, Annotations* ann) : opts_(opts), ann_(ann) {}

  struct Env {
    std::map<std::string, Type> types;
    std::set<std::string> consumed;
  };

  CheckResult synth(const Term& t, Env& env) {
    CheckResult r = synth_inner(t, env);
    if (ann_) ann_->record(t, r.type, r.bounds);
    return r;
  }

  CheckResult check(const Term& t, const Type& expected, Env& env) {
    CheckResult r = check_inner(t, expected, env);
    if (ann_) ann_->record(t, r.type, r.bounds);
    return r;
  }

 private:
  static Bounds combine(Bounds a, Bounds b) {
    return {meet(a.lower, b.lower), join(a.upper, b.upper)};
  }

  // The q < p' gate shared by every sequencing rule.
  void require_seq(Bounds first, Bounds second, const char* rule, SourceLoc loc) {
    if (!opts_.enforce_priorities) return;
    if (!lt(first.upper, second.lower)) {
      throw TypeError(TypeErrorKind::Priority, rule, loc,
                      "q < p' fails: q = " + to_string(first.upper) +
                          ", p' = " + to_string(second.lower));
    }
  }

  Type lookup(const Term& t, Env& env) {
    auto it = env.types.find(t.name());
    if (it == env.types.end()) {
      throw TypeError(TypeErrorKind::Mismatch, "T-Var", t.loc(),
                      "unbound variable '" + t.surface() + "'");
    }
    if (env.consumed.count(t.name())) {
      throw TypeError(TypeErrorKind::Linearity, "T-Var", t.loc(),
                      "variable '" + t.surface() + "' used more than once");
    }
    env.consumed.insert(t.name());
    return it->second;
  }

  void require_consumed(const std::string& name, const std::string& surface,
                        const std::set<std::string>& used, const char* rule, SourceLoc loc) {
    if (!used.count(name)) {
      throw TypeError(TypeErrorKind::Linearity, rule, loc,
                      "binding '" + surface + "' is never used");
    }
  }

  CheckResult synth_inner(const Term& t, Env& env) {
    switch (t.tag()) {
      case Term::Tag::Var: {
        Type ty = lookup(t, env);
        return {std::move(ty), Bounds::pure(), {t.name()}};
      }
      case Term::Tag::Lam: {
        env.types[t.name()] = t.annot();
        CheckResult body = synth(t.child0(), env);
        require_consumed(t.name(), t.surface(), body.used, "T-Lam", t.loc());
        env.types.erase(t.name());
        body.used.erase(t.name());
        Type arrow = Type::arrow(body.bounds, t.annot(), body.type);
        return {std::move(arrow), Bounds::pure(), std::move(body.used)};
      }
      case Term::Tag::App:
        return check_app(t, env, nullptr);
      case Term::Tag::UnitV:
        return {Type::unit(), Bounds::pure(), {}};
      case Term::Tag::LetUnit:
        return check_let_unit(t, env, nullptr);
      case Term::Tag::Pair: {
        CheckResult rm = synth(t.child0(), env);
        CheckResult rn = synth(t.child1(), env);
        require_seq(rm.bounds, rn.bounds, "T-Pair", t.loc());
        rm.used.insert(rn.used.begin(), rn.used.end());
        return {Type::prod(rm.type, rn.type), combine(rm.bounds, rn.bounds),
                std::move(rm.used)};
      }
      case Term::Tag::LetPair:
        return check_let_pair(t, env, nullptr);
      case Term::Tag::Inl:
      case Term::Tag::Inr:
        throw TypeError(TypeErrorKind::Instantiation,
                        t.tag() == Term::Tag::Inl ? "T-Inl" : "T-Inr", t.loc(),
                        "cannot infer the other component of the sum here");
      case Term::Tag::Case:
        return check_case(t, env, nullptr);
      case Term::Tag::Absurd:
        throw TypeError(TypeErrorKind::Instantiation, "T-Absurd", t.loc(),
                        "cannot infer the result type of absurd here");
      case Term::Tag::Const:
        return check_bare_const(t);
      case Term::Tag::IntLit:
        return {Type::int_(), Bounds::pure(), {}};
      case Term::Tag::PrimAdd:
      case Term::Tag::PrimMul: {
        const char* rule = t.tag() == Term::Tag::PrimAdd ? "T-Add" : "T-Mul";
        CheckResult ra = synth(t.child0(), env);
        if (!(ra.type == Type::int_())) {
          throw TypeError(TypeErrorKind::Mismatch, rule, t.child0().loc(),
                          "arithmetic on a non-integer: " + to_string(ra.type));
        }
        CheckResult rb = synth(t.child1(), env);
        if (!(rb.type == Type::int_())) {
          throw TypeError(TypeErrorKind::Mismatch, rule, t.child1().loc(),
                          "arithmetic on a non-integer: " + to_string(rb.type));
        }
        require_seq(ra.bounds, rb.bounds, rule, t.loc());
        ra.used.insert(rb.used.begin(), rb.used.end());
        return {Type::int_(), combine(ra.bounds, rb.bounds), std::move(ra.used)};
      }
    }
    throw TypeError(TypeErrorKind::Mismatch, "T-?", t.loc(), "malformed term");
  }

  CheckResult check_inner(const Term& t, const Type& expected, Env& env) {
    switch (t.tag()) {
      case Term::Tag::Inl:
      case Term::Tag::Inr: {
        const bool left = t.tag() == Term::Tag::Inl;
        const char* rule = left ? "T-Inl" : "T-Inr";
        if (!expected.valid() || expected.tag() != Type::Tag::Sum) {
          throw TypeError(TypeErrorKind::Mismatch, rule, t.loc(),
                          "expected " + to_string(expected) + ", found a sum injection");
        }
        CheckResult rm = check(t.child0(), left ? expected.first() : expected.second(), env);
        return {expected, rm.bounds, std::move(rm.used)};
      }
      case Term::Tag::Pair: {
        if (!expected.valid() || expected.tag() != Type::Tag::Prod) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Pair", t.loc(),
                          "expected " + to_string(expected) + ", found a pair");
        }
        CheckResult rm = check(t.child0(), expected.first(), env);
        CheckResult rn = check(t.child1(), expected.second(), env);
        require_seq(rm.bounds, rn.bounds, "T-Pair", t.loc());
        rm.used.insert(rn.used.begin(), rn.used.end());
        return {expected, combine(rm.bounds, rn.bounds), std::move(rm.used)};
      }
      case Term::Tag::Lam: {
        if (!expected.valid() || expected.tag() != Type::Tag::Arrow) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Lam", t.loc(),
                          "expected " + to_string(expected) + ", found a function");
        }
        if (!(t.annot() == expected.first())) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Lam", t.loc(),
                          "binder annotated " + to_string(t.annot()) + " but expected domain " +
                              to_string(expected.first()));
        }
        env.types[t.name()] = t.annot();
        CheckResult body = check(t.child0(), expected.second(), env);
        require_consumed(t.name(), t.surface(), body.used, "T-Lam", t.loc());
        env.types.erase(t.name());
        body.used.erase(t.name());
        if (!(body.bounds == expected.bounds())) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Lam", t.loc(),
                          "function window is " + to_string(body.bounds) + " but expected " +
                              to_string(expected.bounds()));
        }
        return {expected, Bounds::pure(), std::move(body.used)};
      }
      case Term::Tag::LetUnit:
        return check_let_unit(t, env, &expected);
      case Term::Tag::LetPair:
        return check_let_pair(t, env, &expected);
      case Term::Tag::Case:
        return check_case(t, env, &expected);
      case Term::Tag::Absurd: {
        CheckResult rm = synth(t.child0(), env);
        if (!(rm.type == Type::void_())) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Absurd", t.child0().loc(),
                          "absurd applied to " + to_string(rm.type));
        }
        return {expected, rm.bounds, std::move(rm.used)};
      }
      default: {
        CheckResult r = synth_inner(t, env);
        if (!(r.type == expected)) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Check", t.loc(),
                          "expected " + to_string(expected) + ", found " + to_string(r.type));
        }
        return r;
      }
    }
  }

  CheckResult check_let_unit(const Term& t, Env& env, const Type* expected) {
    CheckResult rm = synth(t.child0(), env);
    if (!(rm.type == Type::unit())) {
      throw TypeError(TypeErrorKind::Mismatch, "T-LetUnit", t.child0().loc(),
                      "let () binds a " + to_string(rm.type));
    }
    CheckResult rn = expected ? check(t.child1(), *expected, env) : synth(t.child1(), env);
    require_seq(rm.bounds, rn.bounds, "T-LetUnit", t.loc());
    rm.used.insert(rn.used.begin(), rn.used.end());
    return {std::move(rn.type), combine(rm.bounds, rn.bounds), std::move(rm.used)};
  }

  CheckResult check_let_pair(const Term& t, Env& env, const Type* expected) {
    CheckResult rm = synth(t.child0(), env);
    if (!rm.type.valid() || rm.type.tag() != Type::Tag::Prod) {
      throw TypeError(TypeErrorKind::Mismatch, "T-LetPair", t.child0().loc(),
                      "let (x,y) binds a " + to_string(rm.type));
    }
    env.types[t.name()] = rm.type.first();
    env.types[t.name2()] = rm.type.second();
    CheckResult rn = expected ? check(t.child1(), *expected, env) : synth(t.child1(), env);
    require_consumed(t.name(), t.surface(), rn.used, "T-LetPair", t.loc());
    require_consumed(t.name2(), t.surface2(), rn.used, "T-LetPair", t.loc());
    env.types.erase(t.name());
    env.types.erase(t.name2());
    rn.used.erase(t.name());
    rn.used.erase(t.name2());
    require_seq(rm.bounds, rn.bounds, "T-LetPair", t.loc());
    rm.used.insert(rn.used.begin(), rn.used.end());
    return {std::move(rn.type), combine(rm.bounds, rn.bounds), std::move(rm.used)};
  }

  // Both branches must consume the same residual context and agree on the
  // result type; the combined window covers whichever branch runs.
  CheckResult check_case(const Term& t, Env& env, const Type* expected) {
    CheckResult rl = synth(t.child0(), env);
    if (!rl.type.valid() || rl.type.tag() != Type::Tag::Sum) {
      throw TypeError(TypeErrorKind::Mismatch, "T-CaseSum", t.child0().loc(),
                      "case scrutinee is a " + to_string(rl.type));
    }
    const std::set<std::string> before = env.consumed;

    env.types[t.name()] = rl.type.first();
    CheckResult rm = expected ? check(t.child1(), *expected, env) : synth(t.child1(), env);
    require_consumed(t.name(), t.surface(), rm.used, "T-CaseSum", t.loc());
    env.types.erase(t.name());
    rm.used.erase(t.name());

    env.consumed = before;
    env.types[t.name2()] = rl.type.second();
    CheckResult rn = expected ? check(t.child2(), *expected, env) : synth(t.child2(), env);
    require_consumed(t.name2(), t.surface2(), rn.used, "T-CaseSum", t.loc());
    env.types.erase(t.name2());
    rn.used.erase(t.name2());

    if (rm.used != rn.used) {
      throw TypeError(TypeErrorKind::Linearity, "T-CaseSum", t.loc(),
                      "case branches consume different bindings");
    }
    if (!(rm.type == rn.type)) {
      throw TypeError(TypeErrorKind::Mismatch, "T-CaseSum", t.loc(),
                      "branch types differ: " + to_string(rm.type) + " vs " + to_string(rn.type));
    }
    env.consumed = before;
    env.consumed.insert(rm.used.begin(), rm.used.end());

    const Bounds branches = combine(rm.bounds, rn.bounds);
    require_seq(rl.bounds, branches, "T-CaseSum", t.loc());
    rl.used.insert(rm.used.begin(), rm.used.end());
    return {std::move(rm.type), combine(rl.bounds, branches), std::move(rl.used)};
  }

  CheckResult check_bare_const(const Term& t) {
    if (t.const_kind() == ConstKind::New) {
      const Type& s = t.annot();
      if (!s.is_session()) {
        throw TypeError(TypeErrorKind::Kind, "T-Const", t.loc(),
                        "new requires a session type annotation");
      }
      Type result = Type::prod(s, dual_type(s, t.loc()));
      return {Type::arrow(Bounds::pure(), Type::unit(), std::move(result)), Bounds::pure(), {}};
    }
    throw TypeError(TypeErrorKind::Instantiation, "T-Const", t.loc(),
                    std::string("the type of '") + to_string(t.const_kind()) +
                        "' cannot be determined without an argument");
  }

  // T-App, including schema instantiation when the function is a constant.
  CheckResult check_app(const Term& t, Env& env, const Type* /*expected*/) {
    const Term& fn = t.child0();
    const Term& arg = t.child1();

    if (fn.tag() == Term::Tag::Const) {
      return check_const_app(t, fn, arg, env);
    }

    CheckResult rf = synth(fn, env);
    if (!rf.type.valid() || rf.type.tag() != Type::Tag::Arrow) {
      throw TypeError(TypeErrorKind::Mismatch, "T-App", fn.loc(),
                      "applied a non-function of type " + to_string(rf.type));
    }
    const Bounds arrow = rf.type.bounds();
    CheckResult ra = check(arg, rf.type.first(), env);
    require_seq(rf.bounds, ra.bounds, "T-App", t.loc());
    require_seq(ra.bounds, arrow, "T-App", t.loc());
    if (ann_) ann_->record_arrow(t, arrow);
    rf.used.insert(ra.used.begin(), ra.used.end());
    return {rf.type.second(), combine(combine(rf.bounds, ra.bounds), arrow), std::move(rf.used)};
  }

  CheckResult finish_const_app(const Term& t, Bounds arrow, Type result, CheckResult ra) {
    // The constant itself is a pure value; the q < p' gate against the
    // argument is trivially satisfied.
    require_seq(ra.bounds, arrow, "T-App", t.loc());
    if (ann_) ann_->record_arrow(t, arrow);
    return {std::move(result), combine(ra.bounds, arrow), std::move(ra.used)};
  }

  CheckResult check_const_app(const Term& t, const Term& fn, const Term& arg, Env& env) {
    switch (fn.const_kind()) {
      case ConstKind::New: {
        const Type& s = fn.annot();
        if (!s.is_session()) {
          throw TypeError(TypeErrorKind::Kind, "T-Const", fn.loc(),
                          "new requires a session type annotation");
        }
        CheckResult ra = check(arg, Type::unit(), env);
        return finish_const_app(t, Bounds::pure(), Type::prod(s, dual_type(s, fn.loc())),
                                std::move(ra));
      }
      case ConstKind::Fork: {
        CheckResult ra = synth(arg, env);
        if (!ra.type.valid() || ra.type.tag() != Type::Tag::Arrow ||
            !(ra.type.first() == Type::unit()) || !(ra.type.second() == Type::unit())) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Const", arg.loc(),
                          "fork expects a Unit -> Unit thunk, found " + to_string(ra.type));
        }
        return finish_const_app(t, Bounds::pure(), Type::unit(), std::move(ra));
      }
      case ConstKind::Cancel: {
        CheckResult ra = synth(arg, env);
        if (!ra.type.is_session()) {
          throw TypeError(TypeErrorKind::Kind, "T-Const", arg.loc(),
                          "cancel expects a session endpoint, found " + to_string(ra.type));
        }
        return finish_const_app(t, Bounds::pure(), Type::unit(), std::move(ra));
      }
      case ConstKind::Send: {
        // The channel component instantiates the payload type; peek at it
        // before checking the payload so sum injections can be checked.
        if (arg.tag() == Term::Tag::Pair) {
          Env scratch = env;
          Annotations* saved = ann_;
          ann_ = nullptr;
          Type chan_type;
          try {
            chan_type = synth_inner(arg.child1(), scratch).type;
          } catch (...) {
            ann_ = saved;
            throw;
          }
          ann_ = saved;
          if (!chan_type.valid() || chan_type.tag() != Type::Tag::SSend) {
            throw TypeError(TypeErrorKind::Instantiation, "T-Const", arg.child1().loc(),
                            "send requires a '!' channel, found " + to_string(chan_type));
          }
          const std::uint64_t o = chan_type.priority();
          CheckResult rp = check(arg.child0(), chan_type.first(), env);
          CheckResult rc = synth(arg.child1(), env);
          if (!(rc.type == chan_type)) {
            throw TypeError(TypeErrorKind::Mismatch, "T-Const", arg.child1().loc(),
                            "channel type changed between uses");
          }
          require_seq(rp.bounds, rc.bounds, "T-Pair", arg.loc());
          if (ann_) {
            ann_->record(arg, Type::prod(chan_type.first(), chan_type),
                         combine(rp.bounds, rc.bounds));
          }
          rp.used.insert(rc.used.begin(), rc.used.end());
          CheckResult ra{Type::prod(chan_type.first(), chan_type),
                         combine(rp.bounds, rc.bounds), std::move(rp.used)};
          return finish_const_app(t, Bounds::at(o), chan_type.second(), std::move(ra));
        }
        CheckResult ra = synth(arg, env);
        if (!ra.type.valid() || ra.type.tag() != Type::Tag::Prod ||
            ra.type.second().tag() != Type::Tag::SSend) {
          throw TypeError(TypeErrorKind::Instantiation, "T-Const", arg.loc(),
                          "send expects a (value, '!' channel) pair, found " + to_string(ra.type));
        }
        const Type chan_type = ra.type.second();
        if (!(ra.type.first() == chan_type.first())) {
          throw TypeError(TypeErrorKind::Mismatch, "T-Const", arg.loc(),
                          "payload " + to_string(ra.type.first()) + " does not match channel " +
                              to_string(chan_type));
        }
        const std::uint64_t o = chan_type.priority();
        Type result = chan_type.second();
        return finish_const_app(t, Bounds::at(o), std::move(result), std::move(ra));
      }
      case ConstKind::Recv: {
        CheckResult ra = synth(arg, env);
        if (!ra.type.valid() || ra.type.tag() != Type::Tag::SRecv) {
          throw TypeError(TypeErrorKind::Instantiation, "T-Const", arg.loc(),
                          "recv requires a '?' channel, found " + to_string(ra.type));
        }
        const std::uint64_t o = ra.type.priority();
        Type result = Type::prod(ra.type.first(), ra.type.second());
        return finish_const_app(t, Bounds::at(o), std::move(result), std::move(ra));
      }
      case ConstKind::Close: {
        CheckResult ra = synth(arg, env);
        if (!ra.type.valid() || ra.type.tag() != Type::Tag::SEnd) {
          throw TypeError(TypeErrorKind::Instantiation, "T-Const", arg.loc(),
                          "close requires an 'end' channel, found " + to_string(ra.type));
        }
        const std::uint64_t o = ra.type.priority();
        return finish_const_app(t, Bounds::at(o), Type::unit(), std::move(ra));
      }
    }
    throw TypeError(TypeErrorKind::Instantiation, "T-Const", fn.loc(), "unknown constant");
  }

  CheckOptions opts_;
  Annotations* ann_;
};

}  // namespace check_detail

inline CheckResult typecheck(const Term& t, const TypeContext& ctx = {}, CheckOptions opts = {},
                             Annotations* ann = nullptr) {
  check_detail::Checker checker(opts, ann);
  check_detail::Checker::Env env;
  for (const auto& [name, type] : ctx.entries()) env.types[name] = type;
  return checker.synth(t, env);
}

}  // namespace sesh::pgv
