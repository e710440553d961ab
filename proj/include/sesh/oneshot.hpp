#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "sesh/errors.hpp"
#include "sesh/runtime.hpp"

namespace sesh::oneshot {

namespace detail {

// Single-slot mailbox shared by the two endpoints of a one-shot channel.
// States: empty -> full (put), empty -> sender_cancelled,
// empty/full -> receiver_cancelled, full -> done (take). At most one value
// is ever stored and at most one receiver ever blocks.
template <typename V>
class Cell {
 public:
  void put(V v) {
    std::lock_guard lock(mu_);
    switch (state_.load(std::memory_order_relaxed)) {
      case State::Empty:
        slot_.emplace(std::move(v));
        state_.store(State::Full, std::memory_order_release);
        cv_.notify_all();
        break;
      case State::ReceiverCancelled:
        // The value is discarded; sending to a cancelled receiver succeeds.
        state_.store(State::Done, std::memory_order_release);
        break;
      default:
        throw UsageError("one-shot cell received a second value");
    }
  }

  V take(const OpInfo& info) {
    std::unique_lock lock(mu_);
    if (state_.load(std::memory_order_relaxed) == State::Empty) {
      auto ready = [this] { return state_.load(std::memory_order_relaxed) != State::Empty; };
      if (Runtime* rt = Runtime::current()) {
        rt->blocking_wait(
            lock, cv_, ready,
            [this] { return state_.load(std::memory_order_acquire) == State::Empty; }, info);
      } else {
        cv_.wait(lock, ready);
      }
    }
    switch (state_.load(std::memory_order_relaxed)) {
      case State::Full: {
        V out = std::move(*slot_);
        slot_.reset();
        state_.store(State::Done, std::memory_order_release);
        return out;
      }
      case State::SenderCancelled:
        throw CancellationError();
      default:
        throw UsageError("one-shot cell already consumed");
    }
  }

  void cancel_sender() noexcept {
    std::lock_guard lock(mu_);
    switch (state_.load(std::memory_order_relaxed)) {
      case State::Empty:
        state_.store(State::SenderCancelled, std::memory_order_release);
        cv_.notify_all();  // a blocked receiver wakes with CancellationError
        break;
      case State::ReceiverCancelled:
        state_.store(State::Done, std::memory_order_release);
        break;
      default:
        break;
    }
  }

  void cancel_receiver() noexcept {
    std::lock_guard lock(mu_);
    switch (state_.load(std::memory_order_relaxed)) {
      case State::Empty:
        state_.store(State::ReceiverCancelled, std::memory_order_release);
        break;
      case State::Full:
        slot_.reset();
        state_.store(State::Done, std::memory_order_release);
        break;
      case State::SenderCancelled:
        state_.store(State::Done, std::memory_order_release);
        break;
      default:
        break;
    }
  }

 private:
  enum class State { Empty, Full, SenderCancelled, ReceiverCancelled, Done };

  std::mutex mu_;
  std::condition_variable cv_;
  std::atomic<State> state_{State::Empty};
  std::optional<V> slot_;
};

// Consumable endpoint handle. Destroying an unused handle cancels its side.
template <typename V, bool IsSender>
class Handle {
 public:
  Handle() = default;

  explicit Handle(std::shared_ptr<Cell<V>> cell) : cell_(std::move(cell)) {
    if ((rt_ = Runtime::current())) rt_->endpoint_created();
  }

  Handle(Handle&& other) noexcept : cell_(std::move(other.cell_)), rt_(other.rt_) {
    other.cell_.reset();
    other.rt_ = nullptr;
  }

  Handle& operator=(Handle&& other) noexcept {
    if (this != &other) {
      release_cancel();
      cell_ = std::move(other.cell_);
      rt_ = other.rt_;
      other.cell_.reset();
      other.rt_ = nullptr;
    }
    return *this;
  }

  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;

  ~Handle() { release_cancel(); }

  bool live() const { return cell_ != nullptr; }

  // Takes the cell out, consuming the handle.
  std::shared_ptr<Cell<V>> consume(const char* op) {
    if (!cell_) throw UsageError(std::string(op) + " on an already consumed endpoint");
    if (rt_) rt_->endpoint_consumed();
    rt_ = nullptr;
    return std::exchange(cell_, nullptr);
  }

 private:
  void release_cancel() noexcept {
    if (!cell_) return;
    if constexpr (IsSender) {
      cell_->cancel_sender();
    } else {
      cell_->cancel_receiver();
    }
    cell_.reset();
    if (rt_) rt_->endpoint_consumed();
    rt_ = nullptr;
  }

  std::shared_ptr<Cell<V>> cell_;
  Runtime* rt_ = nullptr;
};

}  // namespace detail

template <typename V>
using Sender = detail::Handle<V, true>;

template <typename V>
using Receiver = detail::Handle<V, false>;

template <typename V>
std::pair<Sender<V>, Receiver<V>> channel() {
  auto cell = std::make_shared<detail::Cell<V>>();
  return {Sender<V>(cell), Receiver<V>(std::move(cell))};
}

// Non-blocking: stores the value (or discards it when the receiver has
// cancelled) and returns immediately.
template <typename V>
void send(Sender<V> s, V v) {
  s.consume("send")->put(std::move(v));
}

// Blocks until a value is available; throws CancellationError when the
// sender was cancelled or destroyed unused.
template <typename V>
V recv(Receiver<V> r, const OpInfo& info = {}) {
  return r.consume("recv")->take(info);
}

template <typename V>
void cancel(Sender<V> s) {
  s.consume("cancel")->cancel_sender();
}

template <typename V>
void cancel(Receiver<V> r) {
  r.consume("cancel")->cancel_receiver();
}

// One-shot rendezvous built from two one-shot channels wired crosswise:
// each side sends a unit on its own sender, then waits on its receiver.
struct SyncPoint {
  Sender<Unit> tx;
  Receiver<Unit> rx;

  bool live() const { return tx.live() || rx.live(); }
};

inline std::pair<SyncPoint, SyncPoint> sync_channel() {
  auto [tx1, rx1] = channel<Unit>();
  auto [tx2, rx2] = channel<Unit>();
  return {SyncPoint{std::move(tx1), std::move(rx2)}, SyncPoint{std::move(tx2), std::move(rx1)}};
}

inline void sync(SyncPoint p, const OpInfo& info = {}) {
  send(std::move(p.tx), Unit{});
  recv(std::move(p.rx), info);
}

inline void cancel(SyncPoint p) {
  cancel(std::move(p.tx));
  cancel(std::move(p.rx));
}

}  // namespace sesh::oneshot
