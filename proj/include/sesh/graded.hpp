#pragma once

#include <optional>
#include <type_traits>
#include <utility>

#include "sesh/detail/unique_function.hpp"
#include "sesh/session.hpp"

namespace sesh {

// A deferred concurrent computation carrying the priority window of its
// communication actions. Composition is checked: the first computation must
// have finished before the second starts.
template <typename R>
class Sesh {
 public:
  using value_type = R;

  Sesh(Bounds bounds, detail::UniqueFunction<R()> body)
      : bounds_(bounds), body_(std::move(body)) {}

  Sesh(Sesh&&) noexcept = default;
  Sesh& operator=(Sesh&&) noexcept = default;

  Bounds bounds() const { return bounds_; }

  // Internal: releases the deferred body. Prefer run_sesh.
  detail::UniqueFunction<R()> take_body() && { return std::move(body_); }

 private:
  Bounds bounds_;
  detail::UniqueFunction<R()> body_;
};

template <typename R>
Sesh<std::decay_t<R>> ireturn(R&& v) {
  using T = std::decay_t<R>;
  return Sesh<T>(Bounds::pure(),
                 [v = std::forward<R>(v)]() mutable -> T { return std::move(v); });
}

// Checked sequencing. The continuation's bounds are declared up front; the
// composition fails eagerly if the declaration cannot follow this
// computation, and the declaration is verified when the continuation
// materializes at execution time.
template <typename A, typename K>
auto bind(Sesh<A> m, Bounds declared, K k) {
  using SB = std::invoke_result_t<K, A>;
  using B = typename SB::value_type;
  const std::optional<Bounds> composed = seq_bounds(m.bounds(), declared);
  if (!composed) throw SequenceError(m.bounds(), declared);
  detail::UniqueFunction<B()> body =
      [mb = std::move(m).take_body(), declared, k = std::move(k)]() mutable -> B {
        A a = mb();
        SB next = k(std::move(a));
        if (next.bounds() != declared) throw BoundsMismatchError(declared, next.bounds());
        return std::move(next).take_body()();
      };
  return Sesh<B>(*composed, std::move(body));
}

// Sequencing with the ordering check disabled; used when running programs
// whose priority checks were deliberately skipped.
template <typename A, typename K>
auto bind_unchecked(Sesh<A> m, Bounds declared, K k) {
  using SB = std::invoke_result_t<K, A>;
  using B = typename SB::value_type;
  const Bounds combined{meet(m.bounds().lower, declared.lower),
                        join(m.bounds().upper, declared.upper)};
  detail::UniqueFunction<B()> body =
      [mb = std::move(m).take_body(), k = std::move(k)]() mutable -> B {
        A a = mb();
        SB next = k(std::move(a));
        return std::move(next).take_body()();
      };
  return Sesh<B>(combined, std::move(body));
}

// Pure post-processing of the result; bounds are untouched.
template <typename A, typename F>
auto map(Sesh<A> m, F f) {
  using B = std::invoke_result_t<F, A>;
  const Bounds b = m.bounds();
  detail::UniqueFunction<B()> body =
      [mb = std::move(m).take_body(), f = std::move(f)]() mutable -> B {
        return f(mb());
      };
  return Sesh<B>(b, std::move(body));
}

// Loosens the bounds to a superset window.
template <typename R>
Sesh<R> weaken(Sesh<R> m, Bounds wider) {
  const Bounds from = m.bounds();
  const bool lower_ok = wider.lower == from.lower || lt(wider.lower, from.lower);
  const bool upper_ok = wider.upper == from.upper || lt(from.upper, wider.upper);
  if (!lower_ok || !upper_ok) throw WeakenError(from, wider);
  return Sesh<R>(wider, std::move(m).take_body());
}

namespace detail {

// Graded protocols carry a priority on every action and do not recurse.
inline void validate_graded_kind(const ValueKind& k);

inline void validate_graded(const SessionType& s) {
  if (!s.valid()) throw UsageError("invalid session type");
  switch (s.tag()) {
    case SessionType::Tag::Send:
    case SessionType::Tag::Recv:
      if (!s.priority()) throw UsageError("graded protocol action is missing a priority");
      validate_graded_kind(s.payload());
      validate_graded(s.continuation());
      return;
    case SessionType::Tag::End:
      if (!s.priority()) throw UsageError("graded protocol action is missing a priority");
      return;
    case SessionType::Tag::UnitEnd:
      return;
    case SessionType::Tag::Named:
      throw UsageError("graded protocols do not support recursion");
  }
}

inline void validate_graded_kind(const ValueKind& k) {
  switch (k.tag()) {
    case ValueKind::Tag::Pair:
    case ValueKind::Tag::Sum:
      validate_graded_kind(k.first());
      validate_graded_kind(k.second());
      return;
    case ValueKind::Tag::Chan:
      validate_graded(k.session());
      return;
    default:
      return;
  }
}

inline Priority required_head_priority(const Endpoint& e, const char* op) {
  const std::optional<Priority> o = head_priority(e.protocol());
  if (!o) throw UsageError(std::string(op) + " requires a priority-annotated endpoint");
  return *o;
}

}  // namespace detail

inline Sesh<std::pair<Endpoint, Endpoint>> g_new(const SessionType& s) {
  detail::validate_graded(s);
  return Sesh<std::pair<Endpoint, Endpoint>>(
      Bounds::pure(), [s]() { return new_session(s); });
}

inline Sesh<Unit> g_fork(Sesh<Unit> m) {
  return Sesh<Unit>(Bounds::pure(), [mb = std::move(m).take_body()]() mutable -> Unit {
    fork([body = std::move(mb)]() mutable { body(); });
    return Unit{};
  });
}

inline Sesh<Unit> g_cancel(Endpoint e) {
  return Sesh<Unit>(Bounds::pure(), [e = std::move(e)]() mutable -> Unit {
    cancel(std::move(e));
    return Unit{};
  });
}

inline Sesh<Endpoint> g_send(Value v, Endpoint e) {
  const Priority o = detail::required_head_priority(e, "g_send");
  return Sesh<Endpoint>(Bounds::exact(o),
                        [v = std::move(v), e = std::move(e)]() mutable -> Endpoint {
                          return send(std::move(v), std::move(e));
                        });
}

inline Sesh<std::pair<Value, Endpoint>> g_recv(Endpoint e) {
  const Priority o = detail::required_head_priority(e, "g_recv");
  return Sesh<std::pair<Value, Endpoint>>(
      Bounds::exact(o),
      [e = std::move(e)]() mutable -> std::pair<Value, Endpoint> { return recv(std::move(e)); });
}

inline Sesh<Unit> g_close(Endpoint e) {
  const Priority o = detail::required_head_priority(e, "g_close");
  return Sesh<Unit>(Bounds::exact(o), [e = std::move(e)]() mutable -> Unit {
    close(std::move(e));
    return Unit{};
  });
}

inline Sesh<Endpoint> g_select_left(Endpoint e) {
  const Priority o = detail::required_head_priority(e, "g_select_left");
  return Sesh<Endpoint>(Bounds::exact(o), [e = std::move(e)]() mutable -> Endpoint {
    return select_left(std::move(e));
  });
}

inline Sesh<Endpoint> g_select_right(Endpoint e) {
  const Priority o = detail::required_head_priority(e, "g_select_right");
  return Sesh<Endpoint>(Bounds::exact(o), [e = std::move(e)]() mutable -> Endpoint {
    return select_right(std::move(e));
  });
}

// Offer with a declared handler window strictly after the choice action.
template <typename OnLeft, typename OnRight>
auto g_offer_either(Endpoint e, Bounds declared, OnLeft on_left, OnRight on_right) {
  using SB = std::invoke_result_t<OnLeft, Endpoint>;
  using B = typename SB::value_type;
  const Priority o = detail::required_head_priority(e, "g_offer_either");
  if (!lt(o, declared.lower)) throw SequenceError(Bounds::exact(o), declared);
  const Bounds combined{meet(o, declared.lower), join(o, declared.upper)};
  detail::UniqueFunction<B()> body = [e = std::move(e), declared, on_left = std::move(on_left),
                                      on_right = std::move(on_right)]() mutable -> B {
    auto run_branch = [&declared](SB next) -> B {
      if (next.bounds() != declared) throw BoundsMismatchError(declared, next.bounds());
      return std::move(next).take_body()();
    };
    return offer_either(
        std::move(e),
        [&](Endpoint branch) -> B { return run_branch(on_left(std::move(branch))); },
        [&](Endpoint branch) -> B { return run_branch(on_right(std::move(branch))); });
  };
  return Sesh<B>(combined, std::move(body));
}

// Executes a root computation and all the threads it forks. Aborts with a
// DeadlockReport when every thread is blocked; verifies at termination that
// no endpoint created under the run escaped unconsumed.
template <typename R>
R run_sesh(Sesh<R> m, DeadlockPolicy policy = {}) {
  if (Runtime::current()) throw UsageError("run_sesh cannot be nested inside another run");
  Runtime rt(policy);
  std::optional<R> result;
  std::exception_ptr err;
  {
    Runtime::Scope scope(rt);
    try {
      result.emplace(std::move(m).take_body()());
    } catch (...) {
      err = std::current_exception();
    }
  }
  rt.wait_all();
  if (auto report = rt.deadlock_report()) throw DeadlockError(*report);
  if (err) std::rethrow_exception(err);
  if (rt.live_endpoints() != 0) {
    throw EscapeError("endpoints created under run_sesh escaped unconsumed");
  }
  return std::move(*result);
}

}  // namespace sesh
