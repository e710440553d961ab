#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "sesh/errors.hpp"
#include "sesh/priority.hpp"

namespace sesh {

class SessionType;

// Descriptor of transmissible values: base values, pairs, sums, unit,
// functions, and endpoints (delegation).
class ValueKind {
 public:
  enum class Tag { Unit, Int, Str, Void, Fn, Pair, Sum, Chan };

  static ValueKind unit();
  static ValueKind int_();
  static ValueKind str();
  static ValueKind void_();
  static ValueKind fn();
  static ValueKind pair(ValueKind first, ValueKind second);
  static ValueKind sum(ValueKind left, ValueKind right);
  static ValueKind chan(SessionType session);

  Tag tag() const;
  const ValueKind& first() const;
  const ValueKind& second() const;
  const SessionType& session() const;

  friend bool operator==(const ValueKind& a, const ValueKind& b);

 private:
  struct Node;
  explicit ValueKind(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Protocol descriptor. Send/Recv/End optionally carry the priority of the
// communication action; Named enables recursive protocols, unfolded one
// level per operation. A Named node with no definition is a reference to
// the enclosing definition with the same name.
class SessionType {
 public:
  enum class Tag { Send, Recv, End, UnitEnd, Named };

  SessionType() = default;

  static SessionType send(ValueKind payload, SessionType cont,
                          std::optional<std::uint64_t> priority = std::nullopt);
  static SessionType recv(ValueKind payload, SessionType cont,
                          std::optional<std::uint64_t> priority = std::nullopt);
  static SessionType end(std::optional<std::uint64_t> priority = std::nullopt);
  static SessionType unit();
  static SessionType named(std::string name, SessionType definition);
  static SessionType ref(std::string name);

  // Binary choice, encoded with the primitives: selecting sends the peer's
  // continuation for the chosen branch, offering receives it.
  static SessionType select(SessionType s1, SessionType s2,
                            std::optional<std::uint64_t> priority = std::nullopt);
  static SessionType offer(SessionType s1, SessionType s2,
                           std::optional<std::uint64_t> priority = std::nullopt);

  bool valid() const { return node_ != nullptr; }
  Tag tag() const;
  const ValueKind& payload() const;
  const SessionType& continuation() const;
  std::optional<std::uint64_t> priority() const;
  const std::string& name() const;
  const SessionType& definition() const;
  bool is_reference() const;

  friend bool operator==(const SessionType& a, const SessionType& b);

 private:
  struct Node;
  explicit SessionType(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static SessionType make(Node n);

  std::shared_ptr<const Node> node_;

  friend SessionType dual(const SessionType& s);
  friend SessionType unfold(const SessionType& s);
};

struct ValueKind::Node {
  Tag tag;
  std::shared_ptr<const ValueKind> a;
  std::shared_ptr<const ValueKind> b;
  std::shared_ptr<const SessionType> session;
};

struct SessionType::Node {
  Tag tag;
  std::shared_ptr<const ValueKind> payload;  // Send/Recv
  SessionType cont;                          // Send/Recv
  std::optional<std::uint64_t> priority;     // Send/Recv/End
  std::string name;                          // Named
  SessionType def;                           // Named; invalid for a reference
};

inline ValueKind::Tag ValueKind::tag() const { return node_->tag; }
inline const ValueKind& ValueKind::first() const { return *node_->a; }
inline const ValueKind& ValueKind::second() const { return *node_->b; }
inline const SessionType& ValueKind::session() const { return *node_->session; }

inline ValueKind ValueKind::unit() {
  return ValueKind(std::make_shared<const Node>(Node{Tag::Unit, {}, {}, {}}));
}
inline ValueKind ValueKind::int_() {
  return ValueKind(std::make_shared<const Node>(Node{Tag::Int, {}, {}, {}}));
}
inline ValueKind ValueKind::str() {
  return ValueKind(std::make_shared<const Node>(Node{Tag::Str, {}, {}, {}}));
}
inline ValueKind ValueKind::void_() {
  return ValueKind(std::make_shared<const Node>(Node{Tag::Void, {}, {}, {}}));
}
inline ValueKind ValueKind::fn() {
  return ValueKind(std::make_shared<const Node>(Node{Tag::Fn, {}, {}, {}}));
}

inline ValueKind ValueKind::pair(ValueKind first, ValueKind second) {
  return ValueKind(std::make_shared<const Node>(
      Node{Tag::Pair, std::make_shared<const ValueKind>(std::move(first)),
           std::make_shared<const ValueKind>(std::move(second)), {}}));
}

inline ValueKind ValueKind::sum(ValueKind left, ValueKind right) {
  return ValueKind(std::make_shared<const Node>(
      Node{Tag::Sum, std::make_shared<const ValueKind>(std::move(left)),
           std::make_shared<const ValueKind>(std::move(right)), {}}));
}

inline ValueKind ValueKind::chan(SessionType session) {
  return ValueKind(std::make_shared<const Node>(
      Node{Tag::Chan, {}, {}, std::make_shared<const SessionType>(std::move(session))}));
}

inline SessionType::Tag SessionType::tag() const { return node_->tag; }
inline const ValueKind& SessionType::payload() const { return *node_->payload; }
inline const SessionType& SessionType::continuation() const { return node_->cont; }
inline std::optional<std::uint64_t> SessionType::priority() const { return node_->priority; }
inline const std::string& SessionType::name() const { return node_->name; }
inline const SessionType& SessionType::definition() const { return node_->def; }
inline bool SessionType::is_reference() const {
  return node_->tag == Tag::Named && !node_->def.valid();
}

inline SessionType SessionType::make(Node n) {
  return SessionType(std::make_shared<const Node>(std::move(n)));
}

inline SessionType SessionType::send(ValueKind payload, SessionType cont,
                                     std::optional<std::uint64_t> priority) {
  return make(Node{Tag::Send, std::make_shared<const ValueKind>(std::move(payload)),
                   std::move(cont), priority, {}, {}});
}

inline SessionType SessionType::recv(ValueKind payload, SessionType cont,
                                     std::optional<std::uint64_t> priority) {
  return make(Node{Tag::Recv, std::make_shared<const ValueKind>(std::move(payload)),
                   std::move(cont), priority, {}, {}});
}

inline SessionType SessionType::end(std::optional<std::uint64_t> priority) {
  return make(Node{Tag::End, {}, {}, priority, {}, {}});
}

inline SessionType SessionType::unit() { return make(Node{Tag::UnitEnd, {}, {}, {}, {}, {}}); }

inline SessionType SessionType::named(std::string name, SessionType definition) {
  return make(Node{Tag::Named, {}, {}, {}, std::move(name), std::move(definition)});
}

inline SessionType SessionType::ref(std::string name) {
  return make(Node{Tag::Named, {}, {}, {}, std::move(name), {}});
}

namespace type_detail {

inline std::string toggle(const std::string& name) {
  if (!name.empty() && name[0] == '~') return name.substr(1);
  return "~" + name;
}

}  // namespace type_detail

// Send <-> Recv with dualized continuation; End and UnitEnd are self-dual;
// a Named definition dualizes under a toggled name so that duality stays an
// involution on names as well.
inline SessionType dual(const SessionType& s) {
  switch (s.tag()) {
    case SessionType::Tag::Send:
      return SessionType::recv(s.payload(), dual(s.continuation()), s.priority());
    case SessionType::Tag::Recv:
      return SessionType::send(s.payload(), dual(s.continuation()), s.priority());
    case SessionType::Tag::End:
      return SessionType::end(s.priority());
    case SessionType::Tag::UnitEnd:
      return SessionType::unit();
    case SessionType::Tag::Named:
      if (s.is_reference()) return SessionType::ref(type_detail::toggle(s.name()));
      return SessionType::named(type_detail::toggle(s.name()), dual(s.definition()));
  }
  throw UsageError("invalid session type");
}

inline SessionType SessionType::select(SessionType s1, SessionType s2,
                                       std::optional<std::uint64_t> priority) {
  SessionType d1 = dual(s1);
  SessionType d2 = dual(s2);
  return send(ValueKind::sum(ValueKind::chan(std::move(d1)), ValueKind::chan(std::move(d2))),
              unit(), priority);
}

inline SessionType SessionType::offer(SessionType s1, SessionType s2,
                                      std::optional<std::uint64_t> priority) {
  return recv(ValueKind::sum(ValueKind::chan(std::move(s1)), ValueKind::chan(std::move(s2))),
              unit(), priority);
}

namespace type_detail {

// Substitutes references to `name` (and its dual) inside a definition body
// with the full Named type, realizing one level of unfolding.
inline SessionType substitute(const SessionType& body, const std::string& name,
                              const SessionType& full, const SessionType& full_dual) {
  switch (body.tag()) {
    case SessionType::Tag::Send:
    case SessionType::Tag::Recv: {
      std::function<ValueKind(const ValueKind&)> subst_kind =
          [&](const ValueKind& k) -> ValueKind {
        switch (k.tag()) {
          case ValueKind::Tag::Pair:
            return ValueKind::pair(subst_kind(k.first()), subst_kind(k.second()));
          case ValueKind::Tag::Sum:
            return ValueKind::sum(subst_kind(k.first()), subst_kind(k.second()));
          case ValueKind::Tag::Chan:
            return ValueKind::chan(substitute(k.session(), name, full, full_dual));
          default:
            return k;
        }
      };
      ValueKind payload = subst_kind(body.payload());
      SessionType cont = substitute(body.continuation(), name, full, full_dual);
      return body.tag() == SessionType::Tag::Send
                 ? SessionType::send(std::move(payload), std::move(cont), body.priority())
                 : SessionType::recv(std::move(payload), std::move(cont), body.priority());
    }
    case SessionType::Tag::Named:
      if (body.is_reference()) {
        if (body.name() == name) return full;
        if (body.name() == toggle(name)) return full_dual;
        return body;
      }
      if (body.name() == name || body.name() == toggle(name)) return body;  // shadowed
      return SessionType::named(body.name(), substitute(body.definition(), name, full, full_dual));
    default:
      return body;
  }
}

}  // namespace type_detail

// One level of unfolding for Named types; everything else is returned as is.
inline SessionType unfold(const SessionType& s) {
  if (!s.valid() || s.tag() != SessionType::Tag::Named) return s;
  if (s.is_reference()) {
    throw UsageError("cannot unfold an unbound protocol reference: " + s.name());
  }
  return type_detail::substitute(s.definition(), s.name(), s, dual(s));
}

inline bool operator==(const ValueKind& a, const ValueKind& b) {
  if (a.node_ == b.node_) return true;
  if (a.tag() != b.tag()) return false;
  switch (a.tag()) {
    case ValueKind::Tag::Pair:
    case ValueKind::Tag::Sum:
      return a.first() == b.first() && a.second() == b.second();
    case ValueKind::Tag::Chan:
      return a.session() == b.session();
    default:
      return true;
  }
}

inline bool operator==(const SessionType& a, const SessionType& b) {
  if (a.node_ == b.node_) return true;
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  if (a.tag() != b.tag()) return false;
  switch (a.tag()) {
    case SessionType::Tag::Send:
    case SessionType::Tag::Recv:
      return a.priority() == b.priority() && a.payload() == b.payload() &&
             a.continuation() == b.continuation();
    case SessionType::Tag::End:
      return a.priority() == b.priority();
    case SessionType::Tag::UnitEnd:
      return true;
    case SessionType::Tag::Named:
      return a.name() == b.name() && a.definition() == b.definition();
  }
  return false;
}

inline std::string to_string(const ValueKind& k);

// Canonical textual form: `!T.S`, `?T.S`, `end`, `unit`, with priorities
// rendered when present (`!0 T. S`, `end 1`).
inline std::string to_string(const SessionType& s) {
  if (!s.valid()) return "<consumed>";
  switch (s.tag()) {
    case SessionType::Tag::Send:
    case SessionType::Tag::Recv: {
      std::string out = s.tag() == SessionType::Tag::Send ? "!" : "?";
      if (s.priority()) out += std::to_string(*s.priority()) + " ";
      out += to_string(s.payload());
      out += ". ";
      out += to_string(s.continuation());
      return out;
    }
    case SessionType::Tag::End:
      return s.priority() ? "end " + std::to_string(*s.priority()) : "end";
    case SessionType::Tag::UnitEnd:
      return "unit";
    case SessionType::Tag::Named:
      return s.name();
  }
  return "?";
}

inline std::string to_string(const ValueKind& k) {
  switch (k.tag()) {
    case ValueKind::Tag::Unit:
      return "Unit";
    case ValueKind::Tag::Int:
      return "Int";
    case ValueKind::Tag::Str:
      return "Str";
    case ValueKind::Tag::Void:
      return "Void";
    case ValueKind::Tag::Fn:
      return "Fn";
    case ValueKind::Tag::Pair:
      return "(" + to_string(k.first()) + " * " + to_string(k.second()) + ")";
    case ValueKind::Tag::Sum:
      return "(" + to_string(k.first()) + " + " + to_string(k.second()) + ")";
    case ValueKind::Tag::Chan:
      return "[" + to_string(k.session()) + "]";
  }
  return "?";
}

// Head priority of an (unfolded) session type.
inline std::optional<Priority> head_priority(const SessionType& s) {
  if (!s.valid()) return std::nullopt;
  SessionType u = s;
  for (int guard = 0; u.tag() == SessionType::Tag::Named && guard < 64; ++guard) u = unfold(u);
  switch (u.tag()) {
    case SessionType::Tag::Send:
    case SessionType::Tag::Recv:
    case SessionType::Tag::End:
      if (u.priority()) return Priority::at(*u.priority());
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

}  // namespace sesh
