#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "sesh/graded.hpp"
#include "sesh/pgv/ast.hpp"
#include "sesh/pgv/typecheck.hpp"

namespace sesh::pgv {

// Function values of the interpreted calculus.
struct PgvClosure : ClosureBase {
  sesh::detail::UniqueFunction<Sesh<Value>(Value)> fn;
};

// Converts a calculus type to the runtime protocol/payload descriptors.
inline ValueKind to_value_kind(const Type& t);

inline SessionType to_session_type(const Type& t) {
  switch (t.tag()) {
    case Type::Tag::SSend:
      return SessionType::send(to_value_kind(t.first()), to_session_type(t.second()),
                               t.priority());
    case Type::Tag::SRecv:
      return SessionType::recv(to_value_kind(t.first()), to_session_type(t.second()),
                               t.priority());
    case Type::Tag::SEnd:
      return SessionType::end(t.priority());
    default:
      throw UsageError("not a session type: " + to_string(t));
  }
}

inline ValueKind to_value_kind(const Type& t) {
  switch (t.tag()) {
    case Type::Tag::UnitT:
      return ValueKind::unit();
    case Type::Tag::IntT:
      return ValueKind::int_();
    case Type::Tag::VoidT:
      return ValueKind::void_();
    case Type::Tag::Prod:
      return ValueKind::pair(to_value_kind(t.first()), to_value_kind(t.second()));
    case Type::Tag::Sum:
      return ValueKind::sum(to_value_kind(t.first()), to_value_kind(t.second()));
    case Type::Tag::Arrow:
      return ValueKind::fn();
    default:
      return ValueKind::chan(to_session_type(t));
  }
}

namespace translate_detail {

struct EnvNode {
  std::string name;
  std::shared_ptr<std::optional<Value>> slot;
  std::shared_ptr<const EnvNode> next;
};
using EnvPtr = std::shared_ptr<const EnvNode>;

inline EnvPtr extend(EnvPtr env, std::string name, Value v) {
  auto slot = std::make_shared<std::optional<Value>>(std::move(v));
  return std::make_shared<const EnvNode>(
      EnvNode{std::move(name), std::move(slot), std::move(env)});
}

// Variables are linear, so each slot is taken exactly once.
inline Value take(const EnvPtr& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n != nullptr; n = n->next.get()) {
    if (n->name == name) {
      if (!n->slot->has_value()) throw UsageError("variable '" + name + "' consumed twice");
      Value v = std::move(**n->slot);
      n->slot->reset();
      return v;
    }
  }
  throw UsageError("variable '" + name + "' not bound at runtime");
}

struct TransState {
  Annotations ann;
  bool checked = true;
};
using StatePtr = std::shared_ptr<const TransState>;

inline Bounds compose_bounds(const StatePtr& st, Bounds a, Bounds b) {
  if (st->checked) {
    const std::optional<Bounds> r = seq_bounds(a, b);
    if (!r) throw SequenceError(a, b);
    return *r;
  }
  return {meet(a.lower, b.lower), join(a.upper, b.upper)};
}

template <typename A, typename K>
Sesh<Value> seq(const StatePtr& st, Sesh<A> m, Bounds declared, K k) {
  if (st->checked) return bind(std::move(m), declared, std::move(k));
  return bind_unchecked(std::move(m), declared, std::move(k));
}

inline Sesh<Value> widen_to(const StatePtr& st, Sesh<Value> m, Bounds target) {
  if (m.bounds() == target) return m;
  if (st->checked) return weaken(std::move(m), target);
  return Sesh<Value>(target, std::move(m).take_body());
}

inline Sesh<Value> build(const StatePtr& st, const Term& t, EnvPtr env);

inline Value const_value(const StatePtr& st, const Term& t) {
  auto clo = std::make_shared<PgvClosure>();
  switch (t.const_kind()) {
    case ConstKind::New: {
      const SessionType session = to_session_type(t.annot());
      clo->fn = [session](Value) -> Sesh<Value> {
        return map(g_new(session), [](std::pair<Endpoint, Endpoint> eps) {
          return Value::pair(Value::chan(std::move(eps.first)),
                             Value::chan(std::move(eps.second)));
        });
      };
      break;
    }
    case ConstKind::Fork:
      clo->fn = [](Value thunk) -> Sesh<Value> {
        auto base = thunk.take_closure();
        auto* pgv = static_cast<PgvClosure*>(base.get());
        Sesh<Unit> child = map(pgv->fn(Value::unit()), [](Value) { return Unit{}; });
        return map(g_fork(std::move(child)), [](Unit) { return Value::unit(); });
      };
      break;
    case ConstKind::Send:
      clo->fn = [](Value arg) -> Sesh<Value> {
        auto [payload, chan] = arg.take_pair();
        return map(g_send(std::move(payload), chan.take_chan()),
                   [](Endpoint e) { return Value::chan(std::move(e)); });
      };
      break;
    case ConstKind::Recv:
      clo->fn = [](Value chan) -> Sesh<Value> {
        return map(g_recv(chan.take_chan()), [](std::pair<Value, Endpoint> r) {
          return Value::pair(std::move(r.first), Value::chan(std::move(r.second)));
        });
      };
      break;
    case ConstKind::Close:
      clo->fn = [](Value chan) -> Sesh<Value> {
        return map(g_close(chan.take_chan()), [](Unit) { return Value::unit(); });
      };
      break;
    case ConstKind::Cancel:
      clo->fn = [](Value chan) -> Sesh<Value> {
        return map(g_cancel(chan.take_chan()), [](Unit) { return Value::unit(); });
      };
      break;
  }
  return Value::closure(std::move(clo));
}

inline Sesh<Value> build(const StatePtr& st, const Term& t, EnvPtr env) {
  switch (t.tag()) {
    case Term::Tag::Var:
      return ireturn(take(env, t.name()));
    case Term::Tag::IntLit:
      return ireturn(Value::integer(t.int_value()));
    case Term::Tag::UnitV:
      return ireturn(Value::unit());
    case Term::Tag::Lam: {
      auto clo = std::make_shared<PgvClosure>();
      clo->fn = [st, body = t.child0(), env, name = t.name()](Value v) -> Sesh<Value> {
        return build(st, body, extend(env, name, std::move(v)));
      };
      return ireturn(Value::closure(std::move(clo)));
    }
    case Term::Tag::Const:
      return ireturn(const_value(st, t));
    case Term::Tag::App: {
      const Bounds arg_bounds = st->ann.at(t.child1()).bounds;
      const Bounds arrow = st->ann.at(t).arrow_bounds;
      const Bounds inner = compose_bounds(st, arg_bounds, arrow);
      Sesh<Value> fn = build(st, t.child0(), env);
      return seq(st, std::move(fn), inner,
                 [st, arg = t.child1(), env, arrow](Value fv) -> Sesh<Value> {
                   auto base = fv.take_closure();
                   Sesh<Value> argc = build(st, arg, env);
                   return seq(st, std::move(argc), arrow,
                              [base = std::move(base)](Value av) -> Sesh<Value> {
                                auto* pgv = static_cast<PgvClosure*>(base.get());
                                return pgv->fn(std::move(av));
                              });
                 });
    }
    case Term::Tag::LetUnit: {
      const Bounds declared = st->ann.at(t.child1()).bounds;
      Sesh<Value> m = build(st, t.child0(), env);
      return seq(st, std::move(m), declared,
                 [st, n = t.child1(), env](Value) -> Sesh<Value> { return build(st, n, env); });
    }
    case Term::Tag::Pair: {
      const Bounds second = st->ann.at(t.child1()).bounds;
      const Bounds inner = compose_bounds(st, second, Bounds::pure());
      Sesh<Value> m = build(st, t.child0(), env);
      return seq(st, std::move(m), inner,
                 [st, n = t.child1(), env](Value x) mutable -> Sesh<Value> {
                   Sesh<Value> mn = build(st, n, env);
                   return seq(st, std::move(mn), Bounds::pure(),
                              [x = std::move(x)](Value y) mutable -> Sesh<Value> {
                                return ireturn(Value::pair(std::move(x), std::move(y)));
                              });
                 });
    }
    case Term::Tag::LetPair: {
      const Bounds declared = st->ann.at(t.child1()).bounds;
      Sesh<Value> m = build(st, t.child0(), env);
      return seq(st, std::move(m), declared,
                 [st, n = t.child1(), env, x = t.name(), y = t.name2()](Value v) -> Sesh<Value> {
                   auto [a, b] = v.take_pair();
                   return build(st, n, extend(extend(env, x, std::move(a)), y, std::move(b)));
                 });
    }
    case Term::Tag::Inl: {
      return map(build(st, t.child0(), env),
                 [](Value v) { return Value::left(std::move(v)); });
    }
    case Term::Tag::Inr: {
      return map(build(st, t.child0(), env),
                 [](Value v) { return Value::right(std::move(v)); });
    }
    case Term::Tag::Case: {
      const Bounds declared =
          Bounds{meet(st->ann.at(t.child1()).bounds.lower, st->ann.at(t.child2()).bounds.lower),
                 join(st->ann.at(t.child1()).bounds.upper, st->ann.at(t.child2()).bounds.upper)};
      Sesh<Value> scrut = build(st, t.child0(), env);
      return seq(st, std::move(scrut), declared,
                 [st, m = t.child1(), n = t.child2(), env, x = t.name(), y = t.name2(),
                  declared](Value v) -> Sesh<Value> {
                   const bool left = v.sum_is_left();
                   Value inner = v.take_sum();
                   Sesh<Value> branch =
                       left ? build(st, m, extend(env, x, std::move(inner)))
                            : build(st, n, extend(env, y, std::move(inner)));
                   return widen_to(st, std::move(branch), declared);
                 });
    }
    case Term::Tag::Absurd: {
      return map(build(st, t.child0(), env), [](Value) -> Value {
        throw UsageError("absurd evaluated a void value");
      });
    }
    case Term::Tag::PrimAdd:
    case Term::Tag::PrimMul: {
      const bool add = t.tag() == Term::Tag::PrimAdd;
      const Bounds second = st->ann.at(t.child1()).bounds;
      const Bounds inner = compose_bounds(st, second, Bounds::pure());
      Sesh<Value> a = build(st, t.child0(), env);
      return seq(st, std::move(a), inner,
                 [st, rhs = t.child1(), env, add](Value x) mutable -> Sesh<Value> {
                   Sesh<Value> b = build(st, rhs, env);
                   return seq(st, std::move(b), Bounds::pure(),
                              [x = std::move(x), add](Value y) mutable -> Sesh<Value> {
                                const std::int64_t r = add ? x.as_int() + y.as_int()
                                                           : x.as_int() * y.as_int();
                                return ireturn(Value::integer(r));
                              });
                 });
    }
  }
  throw UsageError("malformed term");
}

}  // namespace translate_detail

// Structural translation of a typechecked term into a graded computation.
// The produced computation's bounds equal the typechecked bounds.
inline Sesh<Value> translate(const Term& t, const Annotations& ann, bool checked = true) {
  auto st = std::make_shared<const translate_detail::TransState>(
      translate_detail::TransState{ann, checked});
  return translate_detail::build(st, t, nullptr);
}

}  // namespace sesh::pgv
