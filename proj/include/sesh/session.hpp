#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "sesh/oneshot.hpp"
#include "sesh/runtime.hpp"
#include "sesh/session_type.hpp"

namespace sesh {

class Endpoint;
struct Message;

// Opaque base for function values; the interpreter supplies the derived
// type. Session-layer code only moves these around.
class ClosureBase {
 public:
  virtual ~ClosureBase() = default;
};

// A transmissible value: unit, integer, string, pair, sum, endpoint, or
// function. Move-only because endpoints are single-use.
class Value {
 public:
  Value() : v_(Unit{}) {}

  Value(Value&&) noexcept;
  Value& operator=(Value&&) noexcept;
  Value(const Value&) = delete;
  Value& operator=(const Value&) = delete;
  ~Value();

  static Value unit() { return Value(); }
  static Value integer(std::int64_t n) { return Value(Repr(n)); }
  static Value str(std::string s) { return Value(Repr(std::move(s))); }
  static Value pair(Value first, Value second);
  static Value left(Value inner);
  static Value right(Value inner);
  static Value chan(Endpoint e);
  static Value closure(std::shared_ptr<ClosureBase> c) { return Value(Repr(std::move(c))); }

  bool is_unit() const { return std::holds_alternative<Unit>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_str() const { return std::holds_alternative<std::string>(v_); }
  bool is_pair() const { return std::holds_alternative<PairBox>(v_); }
  bool is_sum() const { return std::holds_alternative<SumBox>(v_); }
  bool is_chan() const { return std::holds_alternative<ChanBox>(v_); }
  bool is_closure() const { return std::holds_alternative<std::shared_ptr<ClosureBase>>(v_); }

  std::int64_t as_int() const;
  const std::string& as_str() const;
  bool sum_is_left() const;

  std::pair<Value, Value> take_pair();
  Value take_sum();
  Endpoint take_chan();
  std::shared_ptr<ClosureBase> take_closure();

  const Endpoint& peek_chan() const;

  bool conforms_to(const ValueKind& kind) const;
  std::string to_string() const;

 private:
  struct PairBox {
    std::unique_ptr<std::pair<Value, Value>> p;
  };
  struct SumBox {
    bool is_left;
    std::unique_ptr<Value> inner;
  };
  struct ChanBox {
    std::unique_ptr<Endpoint> e;
  };

  using Repr = std::variant<Unit, std::int64_t, std::string, PairBox, SumBox, ChanBox,
                            std::shared_ptr<ClosureBase>>;

  explicit Value(Repr v) : v_(std::move(v)) {}

  Repr v_;
};

// One side of a session channel: the residual protocol plus the carrier it
// is realized by. Single-use; destroying a live endpoint cancels it.
class Endpoint {
 public:
  Endpoint() = default;
  Endpoint(Endpoint&&) noexcept = default;
  Endpoint& operator=(Endpoint&&) noexcept = default;
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;
  ~Endpoint() = default;

  bool live() const { return type_.valid(); }
  const SessionType& protocol() const { return type_; }

  friend std::pair<Endpoint, Endpoint> new_session(const SessionType& s);
  friend Endpoint send(Value v, Endpoint e);
  friend std::pair<Value, Endpoint> recv(Endpoint e);
  friend void close(Endpoint e);
  friend void cancel(Endpoint e);

  // Unfolds to the head constructor, checking liveness.
  SessionType head(const char* op) const {
    if (!type_.valid()) throw UsageError(std::string(op) + " on an already consumed endpoint");
    SessionType t = type_;
    for (int guard = 0; t.tag() == SessionType::Tag::Named; ++guard) {
      if (guard > 64) throw UsageError("protocol definition never reaches an action");
      t = unfold(t);
    }
    return t;
  }

 private:
  using Carrier =
      std::variant<std::monostate, oneshot::Sender<Message>, oneshot::Receiver<Message>,
                   oneshot::SyncPoint>;

  Endpoint(SessionType t, Carrier c) : type_(std::move(t)), carrier_(std::move(c)) {}

  template <typename C>
  C take_carrier(const char* op) {
    auto* c = std::get_if<C>(&carrier_);
    if (!c) throw UsageError(std::string(op) + " does not match the endpoint's protocol");
    type_ = SessionType();
    C out = std::move(*c);
    carrier_ = std::monostate{};
    return out;
  }

  SessionType type_;
  Carrier carrier_;
};

struct Message {
  Value value;
  Endpoint continuation;
};

inline Value::Value(Value&&) noexcept = default;
inline Value& Value::operator=(Value&&) noexcept = default;
inline Value::~Value() = default;

inline Value Value::pair(Value first, Value second) {
  return Value(Repr(PairBox{std::make_unique<std::pair<Value, Value>>(std::move(first), std::move(second))}));
}

inline Value Value::left(Value inner) {
  return Value(Repr(SumBox{true, std::make_unique<Value>(std::move(inner))}));
}

inline Value Value::right(Value inner) {
  return Value(Repr(SumBox{false, std::make_unique<Value>(std::move(inner))}));
}

inline Value Value::chan(Endpoint e) {
  return Value(Repr(ChanBox{std::make_unique<Endpoint>(std::move(e))}));
}

inline std::int64_t Value::as_int() const {
  if (auto* n = std::get_if<std::int64_t>(&v_)) return *n;
  throw UsageError("value is not an integer");
}

inline const std::string& Value::as_str() const {
  if (auto* s = std::get_if<std::string>(&v_)) return *s;
  throw UsageError("value is not a string");
}

inline bool Value::sum_is_left() const {
  if (auto* s = std::get_if<SumBox>(&v_)) return s->is_left;
  throw UsageError("value is not a sum");
}

inline std::pair<Value, Value> Value::take_pair() {
  if (auto* p = std::get_if<PairBox>(&v_)) return std::move(*p->p);
  throw UsageError("value is not a pair");
}

inline Value Value::take_sum() {
  if (auto* s = std::get_if<SumBox>(&v_)) return std::move(*s->inner);
  throw UsageError("value is not a sum");
}

inline Endpoint Value::take_chan() {
  if (auto* c = std::get_if<ChanBox>(&v_)) return std::move(*c->e);
  throw UsageError("value is not an endpoint");
}

inline const Endpoint& Value::peek_chan() const {
  if (auto* c = std::get_if<ChanBox>(&v_)) return *c->e;
  throw UsageError("value is not an endpoint");
}

inline std::shared_ptr<ClosureBase> Value::take_closure() {
  if (auto* c = std::get_if<std::shared_ptr<ClosureBase>>(&v_)) return std::move(*c);
  throw UsageError("value is not a function");
}

inline bool Value::conforms_to(const ValueKind& kind) const {
  switch (kind.tag()) {
    case ValueKind::Tag::Unit:
      return is_unit();
    case ValueKind::Tag::Int:
      return is_int();
    case ValueKind::Tag::Str:
      return is_str();
    case ValueKind::Tag::Void:
      return false;
    case ValueKind::Tag::Fn:
      return is_closure();
    case ValueKind::Tag::Pair: {
      if (!is_pair()) return false;
      const auto& p = *std::get_if<PairBox>(&v_)->p;
      return p.first.conforms_to(kind.first()) && p.second.conforms_to(kind.second());
    }
    case ValueKind::Tag::Sum: {
      if (!is_sum()) return false;
      const auto& s = *std::get_if<SumBox>(&v_);
      return s.inner->conforms_to(s.is_left ? kind.first() : kind.second());
    }
    case ValueKind::Tag::Chan:
      return is_chan() && peek_chan().protocol() == kind.session();
  }
  return false;
}

inline std::string Value::to_string() const {
  if (is_unit()) return "()";
  if (is_int()) return std::to_string(as_int());
  if (is_str()) return as_str();
  if (is_pair()) {
    const auto& p = *std::get_if<PairBox>(&v_)->p;
    return "(" + p.first.to_string() + ", " + p.second.to_string() + ")";
  }
  if (is_sum()) {
    const auto& s = *std::get_if<SumBox>(&v_);
    return std::string(s.is_left ? "inl " : "inr ") + s.inner->to_string();
  }
  if (is_chan()) return "<chan " + sesh::to_string(peek_chan().protocol()) + ">";
  return "<fn>";
}

// Creates a connected pair of endpoints for a protocol and its dual.
inline std::pair<Endpoint, Endpoint> new_session(const SessionType& s) {
  if (!s.valid()) throw UsageError("new_session on an invalid session type");
  SessionType h = s;
  for (int guard = 0; h.tag() == SessionType::Tag::Named; ++guard) {
    if (guard > 64) throw UsageError("protocol definition never reaches an action");
    h = unfold(h);
  }
  switch (h.tag()) {
    case SessionType::Tag::Send: {
      auto [tx, rx] = oneshot::channel<Message>();
      return {Endpoint(s, std::move(tx)), Endpoint(dual(s), std::move(rx))};
    }
    case SessionType::Tag::Recv: {
      auto [tx, rx] = oneshot::channel<Message>();
      return {Endpoint(s, std::move(rx)), Endpoint(dual(s), std::move(tx))};
    }
    case SessionType::Tag::End: {
      auto [p1, p2] = oneshot::sync_channel();
      return {Endpoint(s, std::move(p1)), Endpoint(dual(s), std::move(p2))};
    }
    case SessionType::Tag::UnitEnd:
      return {Endpoint(s, std::monostate{}), Endpoint(s, std::monostate{})};
    default:
      throw UsageError("new_session on an unbound protocol reference");
  }
}

// Creates the continuation pair, transmits (value, peer continuation), and
// returns this side's continuation. Non-blocking.
inline Endpoint send(Value v, Endpoint e) {
  const SessionType h = e.head("send");
  if (h.tag() != SessionType::Tag::Send) throw UsageError("send on a non-send endpoint");
  if (!v.conforms_to(h.payload())) {
    throw UsageError("payload does not conform to " + to_string(h.payload()));
  }
  auto tx = e.take_carrier<oneshot::Sender<Message>>("send");
  auto [here, there] = new_session(h.continuation());
  oneshot::send(std::move(tx), Message{std::move(v), std::move(there)});
  return std::move(here);
}

// Blocks for the (value, continuation) pair.
inline std::pair<Value, Endpoint> recv(Endpoint e) {
  const SessionType h = e.head("recv");
  if (h.tag() != SessionType::Tag::Recv) throw UsageError("recv on a non-recv endpoint");
  const OpInfo info{"recv", h.priority() ? std::optional(Priority::at(*h.priority())) : std::nullopt};
  auto rx = e.take_carrier<oneshot::Receiver<Message>>("recv");
  Message m = oneshot::recv(std::move(rx), info);
  return {std::move(m.value), std::move(m.continuation)};
}

// Synchronous rendezvous with the peer's close.
inline void close(Endpoint e) {
  const SessionType h = e.head("close");
  if (h.tag() != SessionType::Tag::End) throw UsageError("close on a non-end endpoint");
  const OpInfo info{"close", h.priority() ? std::optional(Priority::at(*h.priority())) : std::nullopt};
  auto sp = e.take_carrier<oneshot::SyncPoint>("close");
  oneshot::sync(std::move(sp), info);
}

// Abandons the endpoint. The peer's receive fails; the peer's send succeeds.
inline void cancel(Endpoint e) {
  if (!e.live()) throw UsageError("cancel on an already consumed endpoint");
  e.type_ = SessionType();
  Endpoint::Carrier carrier = std::move(e.carrier_);
  e.carrier_ = std::monostate{};
  // the carrier's destructor cancels any live halves right here
}

inline Endpoint select_left(Endpoint e) {
  const SessionType h = e.head("select_left");
  if (h.tag() != SessionType::Tag::Send || h.payload().tag() != ValueKind::Tag::Sum ||
      h.payload().first().tag() != ValueKind::Tag::Chan ||
      h.payload().second().tag() != ValueKind::Tag::Chan) {
    throw UsageError("select_left on a non-select endpoint");
  }
  auto [here, there] = new_session(dual(h.payload().first().session()));
  send(Value::left(Value::chan(std::move(there))), std::move(e));
  return std::move(here);
}

inline Endpoint select_right(Endpoint e) {
  const SessionType h = e.head("select_right");
  if (h.tag() != SessionType::Tag::Send || h.payload().tag() != ValueKind::Tag::Sum ||
      h.payload().first().tag() != ValueKind::Tag::Chan ||
      h.payload().second().tag() != ValueKind::Tag::Chan) {
    throw UsageError("select_right on a non-select endpoint");
  }
  auto [here, there] = new_session(dual(h.payload().second().session()));
  send(Value::right(Value::chan(std::move(there))), std::move(e));
  return std::move(here);
}

// Receives the branch chosen by the peer and hands its endpoint to the
// matching handler.
template <typename OnLeft, typename OnRight>
auto offer_either(Endpoint e, OnLeft on_left, OnRight on_right) {
  static_assert(std::is_same_v<std::invoke_result_t<OnLeft, Endpoint>,
                               std::invoke_result_t<OnRight, Endpoint>>,
                "both handlers must return the same type");
  auto [v, rest] = recv(std::move(e));
  // rest is the unit session end of the choice carrier; dropping it is silent.
  (void)rest;
  const bool is_left = v.sum_is_left();
  Endpoint branch = v.take_sum().take_chan();
  return is_left ? on_left(std::move(branch)) : on_right(std::move(branch));
}

// Runs the body on a new thread of the ambient runtime. A body that exits
// abnormally cancels the endpoints it still holds.
template <typename F>
void fork(F&& body) {
  Runtime* rt = Runtime::current();
  if (!rt) throw UsageError("fork requires an active Runtime scope");
  rt->spawn(std::forward<F>(body));
}

// Creates a channel and immediately passes one endpoint to a new thread,
// so the process structure stays a tree.
template <typename F1, typename F2>
auto connect(const SessionType& s, F1 k1, F2 k2) {
  auto [a, b] = new_session(s);
  fork([k = std::move(k1), ep = std::move(a)]() mutable { k(std::move(ep)); });
  return k2(std::move(b));
}

}  // namespace sesh
