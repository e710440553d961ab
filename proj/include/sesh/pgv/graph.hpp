#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sesh/pgv/ast.hpp"

namespace sesh::pgv {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphNode {
  int id = 0;
  std::string op;
  std::uint64_t priority = 0;
  int thread = 0;
};

// Directed graph of communication actions: solid edges order actions within
// a thread, pairing edges link the two sides of the same channel step.
struct CommGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<int, int>> seq_edges;
  std::vector<std::pair<int, int>> pairing_edges;

  // Cyclic after contracting the pairing edges.
  bool is_cyclic() const {
    std::vector<int> parent(nodes.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [a, b] : pairing_edges) parent[find(a)] = find(b);

    std::map<int, std::vector<int>> adj;
    for (const auto& [a, b] : seq_edges) {
      const int ra = find(a), rb = find(b);
      if (ra != rb) adj[ra].push_back(rb);
    }
    std::map<int, int> color;  // 0 = new, 1 = on stack, 2 = done
    std::function<bool(int)> dfs = [&](int v) {
      color[v] = 1;
      for (const int w : adj[v]) {
        if (color[w] == 1) return true;
        if (color[w] == 0 && dfs(w)) return true;
      }
      color[v] = 2;
      return false;
    };
    for (const auto& n : nodes) {
      const int r = find(n.id);
      if (color[r] == 0 && dfs(r)) return true;
    }
    return false;
  }

  std::string to_dot() const {
    std::string out = "digraph comm {\n";
    for (const auto& n : nodes) {
      out += "  n" + std::to_string(n.id) + " [label=\"" + n.op + "@" +
             std::to_string(n.priority) + "\"];\n";
    }
    for (const auto& [a, b] : seq_edges) {
      out += "  n" + std::to_string(a) + " -> n" + std::to_string(b) + ";\n";
    }
    for (const auto& [a, b] : pairing_edges) {
      out += "  n" + std::to_string(a) + " -> n" + std::to_string(b) +
             " [dir=none, style=dashed];\n";
    }
    out += "}\n";
    return out;
  }
};

namespace graph_detail {

struct SymNode;
using SymVal = std::shared_ptr<const SymNode>;

struct Slot {
  std::optional<SymVal> value;
};
using SlotPtr = std::shared_ptr<Slot>;

struct SymEnvNode;
using SymEnv = std::shared_ptr<const SymEnvNode>;

struct SymEnvNode {
  std::string name;
  SymVal value;
  SymEnv next;
};

struct SymNode {
  enum class Tag { Unit, Int, Pair, Sum, Chan, Closure, Const, Hole } tag;
  // Pair / Sum
  SymVal a, b;
  bool is_left = false;
  // Chan
  int chan = 0;
  int step = 0;
  int side = 0;
  Type residual;
  // Closure
  std::string param;
  Term body;
  SymEnv env;
  // Const
  ConstKind const_kind = ConstKind::New;
  Type annot;
  // Hole
  SlotPtr slot;
};

inline SymVal mk(SymNode n) { return std::make_shared<const SymNode>(std::move(n)); }
inline SymVal sym_unit() {
  SymNode n{};
  n.tag = SymNode::Tag::Unit;
  return mk(std::move(n));
}
inline SymVal sym_int() {
  SymNode n{};
  n.tag = SymNode::Tag::Int;
  return mk(std::move(n));
}

// Follows filled holes to the underlying value; returns nullptr for an
// unresolved hole.
inline SymVal deref(SymVal v) {
  while (v && v->tag == SymNode::Tag::Hole) {
    if (!v->slot->value) return nullptr;
    v = *v->slot->value;
  }
  return v;
}

inline SymVal env_lookup(const SymEnv& env, const std::string& name) {
  for (const SymEnvNode* n = env.get(); n != nullptr; n = n->next.get()) {
    if (n->name == name) return n->value;
  }
  throw GraphError("variable '" + name + "' not bound during graph construction");
}

inline SymEnv env_extend(SymEnv env, std::string name, SymVal v) {
  return std::make_shared<const SymEnvNode>(SymEnvNode{std::move(name), std::move(v), std::move(env)});
}

struct Frame {
  enum class Tag {
    AppFn,     // evaluated the function; term holds the argument
    AppArg,    // evaluated the argument; val holds the function
    LetUnit,
    LetPair,
    PairFst,
    PairSnd,
    Inl,
    Inr,
    Case,
    Absurd,
    ArithL,
    ArithR
  } tag;
  Term term;   // continuation term (argument / body / rhs)
  Term term2;  // second branch for Case
  SymEnv env;
  SymVal val;
  std::string x, y;
};

struct Thread {
  int id = 0;
  bool has_term = false;
  Term control_term;
  SymEnv control_env;
  SymVal control_val;
  std::vector<Frame> frames;
  bool done = false;
  SlotPtr waiting;
};

class Machine {
 public:
  explicit Machine(const Term& program) {
    Thread t;
    t.id = 0;
    t.has_term = true;
    t.control_term = program;
    threads_.push_back(std::move(t));
  }

  CommGraph run() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t i = 0; i < threads_.size(); ++i) {
        if (run_thread(threads_[i])) progress = true;
      }
    }
    for (const auto& t : threads_) {
      if (!t.done) {
        throw GraphError("graph construction stalled on data-dependent control flow");
      }
    }
    finish_edges();
    return std::move(graph_);
  }

 private:
  using Key = std::tuple<int, int, int>;  // chan, step, sender side

  static SlotPtr unresolved_slot(SymVal v) {
    while (v->tag == SymNode::Tag::Hole && v->slot->value) v = *v->slot->value;
    return v->slot;
  }

  bool run_thread(Thread& t) {
    if (t.done) return false;
    if (t.waiting && !t.waiting->value) return false;
    t.waiting = nullptr;
    bool stepped = false;
    while (!t.done && !t.waiting) {
      step(t);
      stepped = true;
    }
    return stepped;
  }

  void ret(Thread& t, SymVal v) {
    t.has_term = false;
    t.control_val = std::move(v);
  }

  void enter(Thread& t, const Term& term, SymEnv env) {
    t.has_term = true;
    t.control_term = term;
    t.control_env = std::move(env);
  }

  int record(Thread& t, const char* op, const Type& residual, int chan, int step) {
    const int id = static_cast<int>(graph_.nodes.size());
    graph_.nodes.push_back({id, op, residual.priority(), t.id});
    auto& per_thread = thread_nodes_[t.id];
    if (!per_thread.empty()) graph_.seq_edges.emplace_back(per_thread.back(), id);
    per_thread.push_back(id);
    pair_nodes_[{chan, step}].push_back(id);
    return id;
  }

  void step(Thread& t) {
    if (t.has_term) {
      const Term& m = t.control_term;
      const SymEnv env = t.control_env;
      switch (m.tag()) {
        case Term::Tag::Var:
          ret(t, env_lookup(env, m.name()));
          return;
        case Term::Tag::IntLit:
          ret(t, sym_int());
          return;
        case Term::Tag::UnitV:
          ret(t, sym_unit());
          return;
        case Term::Tag::Lam: {
          SymNode n{};
          n.tag = SymNode::Tag::Closure;
          n.param = m.name();
          n.body = m.child0();
          n.env = env;
          ret(t, mk(std::move(n)));
          return;
        }
        case Term::Tag::Const: {
          SymNode n{};
          n.tag = SymNode::Tag::Const;
          n.const_kind = m.const_kind();
          if (m.const_kind() == ConstKind::New) n.annot = m.annot();
          ret(t, mk(std::move(n)));
          return;
        }
        case Term::Tag::App:
          t.frames.push_back({Frame::Tag::AppFn, m.child1(), {}, env, {}, {}, {}});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::LetUnit:
          t.frames.push_back({Frame::Tag::LetUnit, m.child1(), {}, env, {}, {}, {}});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::LetPair:
          t.frames.push_back({Frame::Tag::LetPair, m.child1(), {}, env, {}, m.name(), m.name2()});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::Pair:
          t.frames.push_back({Frame::Tag::PairFst, m.child1(), {}, env, {}, {}, {}});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::Inl:
          t.frames.push_back({Frame::Tag::Inl, {}, {}, env, {}, {}, {}});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::Inr:
          t.frames.push_back({Frame::Tag::Inr, {}, {}, env, {}, {}, {}});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::Case:
          t.frames.push_back({Frame::Tag::Case, m.child1(), m.child2(), env, {}, m.name(), m.name2()});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::Absurd:
          t.frames.push_back({Frame::Tag::Absurd, {}, {}, env, {}, {}, {}});
          enter(t, m.child0(), env);
          return;
        case Term::Tag::PrimAdd:
        case Term::Tag::PrimMul:
          t.frames.push_back({Frame::Tag::ArithL, m.child1(), {}, env, {}, {}, {}});
          enter(t, m.child0(), env);
          return;
      }
      throw GraphError("malformed term during graph construction");
    }

    // Returning a value to the top frame.
    if (t.frames.empty()) {
      t.done = true;
      return;
    }
    Frame f = std::move(t.frames.back());
    t.frames.pop_back();
    SymVal v = std::move(t.control_val);
    switch (f.tag) {
      case Frame::Tag::AppFn:
        t.frames.push_back({Frame::Tag::AppArg, {}, {}, f.env, std::move(v), {}, {}});
        enter(t, f.term, f.env);
        return;
      case Frame::Tag::AppArg:
        apply(t, std::move(f.val), std::move(v));
        return;
      case Frame::Tag::LetUnit:
        enter(t, f.term, f.env);
        return;
      case Frame::Tag::LetPair: {
        const SymVal p = deref(v);
        if (!p) {
          suspend(t, v, std::move(f));
          return;
        }
        if (p->tag != SymNode::Tag::Pair) throw GraphError("let (x,y) on a non-pair");
        enter(t, f.term, env_extend(env_extend(f.env, f.x, p->a), f.y, p->b));
        return;
      }
      case Frame::Tag::PairFst:
        t.frames.push_back({Frame::Tag::PairSnd, {}, {}, f.env, std::move(v), {}, {}});
        enter(t, f.term, f.env);
        return;
      case Frame::Tag::PairSnd: {
        SymNode n{};
        n.tag = SymNode::Tag::Pair;
        n.a = std::move(f.val);
        n.b = std::move(v);
        ret(t, mk(std::move(n)));
        return;
      }
      case Frame::Tag::Inl:
      case Frame::Tag::Inr: {
        SymNode n{};
        n.tag = SymNode::Tag::Sum;
        n.is_left = f.tag == Frame::Tag::Inl;
        n.a = std::move(v);
        ret(t, mk(std::move(n)));
        return;
      }
      case Frame::Tag::Case: {
        const SymVal s = deref(v);
        if (!s) {
          suspend(t, v, std::move(f));
          return;
        }
        if (s->tag != SymNode::Tag::Sum) throw GraphError("case on a non-sum");
        if (s->is_left) {
          enter(t, f.term, env_extend(f.env, f.x, s->a));
        } else {
          enter(t, f.term2, env_extend(f.env, f.y, s->a));
        }
        return;
      }
      case Frame::Tag::Absurd:
        throw GraphError("absurd reached during graph construction");
      case Frame::Tag::ArithL:
        t.frames.push_back({Frame::Tag::ArithR, {}, {}, f.env, std::move(v), {}, {}});
        enter(t, f.term, f.env);
        return;
      case Frame::Tag::ArithR:
        ret(t, sym_int());
        return;
    }
  }

  // Re-park the thread exactly where it was: the frame goes back and the
  // value stays the control value.
  void suspend(Thread& t, SymVal v, Frame f) {
    t.waiting = unresolved_slot(v);
    t.frames.push_back(std::move(f));
    t.control_val = std::move(v);
    t.has_term = false;
  }

  void apply(Thread& t, SymVal fn, SymVal arg) {
    const SymVal f = deref(fn);
    if (!f) {
      // Re-run the application once the function is known.
      SymVal hole = fn;
      suspend_apply(t, std::move(fn), std::move(arg), std::move(hole));
      return;
    }
    if (f->tag == SymNode::Tag::Closure) {
      enter(t, f->body, env_extend(f->env, f->param, std::move(arg)));
      return;
    }
    if (f->tag != SymNode::Tag::Const) throw GraphError("applied a non-function");
    switch (f->const_kind) {
      case ConstKind::New: {
        const int c = next_chan_++;
        SymNode a{};
        a.tag = SymNode::Tag::Chan;
        a.chan = c;
        a.side = 0;
        a.residual = f->annot;
        SymNode b{};
        b.tag = SymNode::Tag::Chan;
        b.chan = c;
        b.side = 1;
        b.residual = dual_type(f->annot);
        SymNode p{};
        p.tag = SymNode::Tag::Pair;
        p.a = mk(std::move(a));
        p.b = mk(std::move(b));
        ret(t, mk(std::move(p)));
        return;
      }
      case ConstKind::Fork: {
        const SymVal thunk = deref(arg);
        if (!thunk || thunk->tag != SymNode::Tag::Closure) {
          throw GraphError("fork needs a literal thunk during graph construction");
        }
        Thread child;
        child.id = static_cast<int>(threads_.size());
        child.has_term = true;
        child.control_term = thunk->body;
        child.control_env = env_extend(thunk->env, thunk->param, sym_unit());
        threads_.push_back(std::move(child));
        ret(t, sym_unit());
        return;
      }
      case ConstKind::Send: {
        const SymVal pair = deref(arg);
        if (!pair || pair->tag != SymNode::Tag::Pair) {
          throw GraphError("send needs a (value, channel) pair");
        }
        const SymVal chan = deref(pair->b);
        if (!chan) {
          suspend_apply(t, std::move(fn), std::move(arg), pair->b);
          return;
        }
        if (chan->tag != SymNode::Tag::Chan) throw GraphError("send on a non-channel");
        record(t, "send", chan->residual, chan->chan, chan->step);
        deliver({chan->chan, chan->step, chan->side}, pair->a);
        ret(t, advance(*chan));
        return;
      }
      case ConstKind::Recv: {
        const SymVal chan = deref(arg);
        if (!chan) {
          SymVal hole = arg;
          suspend_apply(t, std::move(fn), std::move(arg), std::move(hole));
          return;
        }
        if (chan->tag != SymNode::Tag::Chan) throw GraphError("recv on a non-channel");
        record(t, "recv", chan->residual, chan->chan, chan->step);
        SymVal payload = obtain({chan->chan, chan->step, 1 - chan->side});
        SymNode p{};
        p.tag = SymNode::Tag::Pair;
        p.a = std::move(payload);
        p.b = advance(*chan);
        ret(t, mk(std::move(p)));
        return;
      }
      case ConstKind::Close: {
        const SymVal chan = deref(arg);
        if (!chan) {
          SymVal hole = arg;
          suspend_apply(t, std::move(fn), std::move(arg), std::move(hole));
          return;
        }
        if (chan->tag != SymNode::Tag::Chan) throw GraphError("close on a non-channel");
        record(t, "close", chan->residual, chan->chan, chan->step);
        ret(t, sym_unit());
        return;
      }
      case ConstKind::Cancel:
        ret(t, sym_unit());
        return;
    }
  }

  void suspend_apply(Thread& t, SymVal fn, SymVal arg, SymVal hole) {
    t.waiting = unresolved_slot(std::move(hole));
    t.frames.push_back({Frame::Tag::AppArg, {}, {}, {}, std::move(fn), {}, {}});
    t.control_val = std::move(arg);
    t.has_term = false;
  }

  SymVal advance(const SymNode& chan) {
    SymNode n{};
    n.tag = SymNode::Tag::Chan;
    n.chan = chan.chan;
    n.step = chan.step + 1;
    n.side = chan.side;
    if (chan.residual.valid() &&
        (chan.residual.tag() == Type::Tag::SSend || chan.residual.tag() == Type::Tag::SRecv)) {
      n.residual = chan.residual.second();
    }
    return mk(std::move(n));
  }

  void deliver(const Key& key, SymVal payload) {
    auto it = waiting_slots_.find(key);
    if (it != waiting_slots_.end()) {
      it->second->value = std::move(payload);
      waiting_slots_.erase(it);
      return;
    }
    buffered_[key] = std::move(payload);
  }

  SymVal obtain(const Key& key) {
    auto it = buffered_.find(key);
    if (it != buffered_.end()) {
      SymVal v = std::move(it->second);
      buffered_.erase(it);
      return v;
    }
    auto slot = std::make_shared<Slot>();
    waiting_slots_[key] = slot;
    SymNode n{};
    n.tag = SymNode::Tag::Hole;
    n.slot = std::move(slot);
    return mk(std::move(n));
  }

  void finish_edges() {
    for (const auto& [key, ids] : pair_nodes_) {
      for (std::size_t i = 1; i < ids.size(); ++i) {
        graph_.pairing_edges.emplace_back(ids[0], ids[i]);
      }
    }
    std::sort(graph_.pairing_edges.begin(), graph_.pairing_edges.end());
  }

  std::deque<Thread> threads_;
  CommGraph graph_;
  std::map<int, std::vector<int>> thread_nodes_;
  std::map<std::pair<int, int>, std::vector<int>> pair_nodes_;
  std::map<Key, SymVal> buffered_;
  std::map<Key, SlotPtr> waiting_slots_;
  int next_chan_ = 0;
};

}  // namespace graph_detail

// Builds the communication graph of a typechecked program by a symbolic,
// deterministic execution in which receives never block.
inline CommGraph comm_graph(const Term& t) {
  graph_detail::Machine m(t);
  return m.run();
}

}  // namespace sesh::pgv
