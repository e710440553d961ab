#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "sesh/errors.hpp"

namespace sesh {

struct DeadlockPolicy {
  // Wall-clock backstop; the all-blocked detector normally fires first.
  std::chrono::milliseconds timeout{5000};
};

struct OpInfo {
  const char* op = "recv";
  std::optional<Priority> priority;
};

// Owns the threads spawned by fork/connect and watches for the all-blocked
// condition: when every participating thread is parked on a channel and no
// pending wakeup exists, the run cannot progress and is aborted with a
// DeadlockReport. Threads participate either by being spawned here or by
// entering a Scope.
class Runtime {
 public:
  explicit Runtime(DeadlockPolicy policy = {}) : policy_(policy) {}

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  ~Runtime() { wait_all(); }

  static Runtime* current() { return tls_current(); }

  // Marks the calling thread as a participant and makes this runtime
  // ambient for fork/connect and endpoint accounting.
  class Scope {
   public:
    explicit Scope(Runtime& rt) : rt_(&rt), prev_(tls_current()) {
      tls_current() = rt_;
      std::lock_guard lock(rt_->mu_);
      rt_->ordinal_locked();
      ++rt_->participants_;
    }

    ~Scope() {
      {
        std::lock_guard lock(rt_->mu_);
        --rt_->participants_;
        rt_->maybe_detect_locked();
      }
      tls_current() = prev_;
    }

    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Runtime* rt_;
    Runtime* prev_;
  };

  template <typename F>
  void spawn(F&& body) {
    int id;
    {
      std::lock_guard lock(mu_);
      id = next_id_++;
      ++participants_;
    }
    std::thread t([this, id, b = std::optional<std::decay_t<F>>(std::forward<F>(body))]() mutable {
      tls_current() = this;
      {
        std::lock_guard lock(mu_);
        ids_.emplace_back(std::this_thread::get_id(), id);
      }
      try {
        (*b)();
      } catch (...) {
        // A crashed body abandons its endpoints; their destructors cancel.
      }
      b.reset();  // destroy the body (and cancel anything it still held) first
      tls_current() = nullptr;
      std::lock_guard lock(mu_);
      --participants_;
      maybe_detect_locked();
    });
    std::lock_guard lock(mu_);
    threads_.push_back(std::move(t));
  }

  void wait_all() {
    for (;;) {
      std::vector<std::thread> batch;
      {
        std::lock_guard lock(mu_);
        batch.swap(threads_);
      }
      if (batch.empty()) break;
      for (auto& t : batch) t.join();
    }
  }

  // Blocks on `cv` until `ready` holds, participating in deadlock detection.
  // `still_pending` must be callable without the caller's lock held.
  // Throws DeadlockError if the run is aborted while waiting.
  template <typename Ready>
  void blocking_wait(std::unique_lock<std::mutex>& lk, std::condition_variable& cv, Ready ready,
                     std::function<bool()> still_pending, const OpInfo& info) {
    std::list<WaitRecord>::iterator rec;
    {
      std::lock_guard lock(mu_);
      rec = records_.emplace(records_.end(),
                             WaitRecord{std::move(still_pending), &cv, info.op, info.priority,
                                        ordinal_locked()});
      maybe_detect_locked();
    }
    const auto deadline = std::chrono::steady_clock::now() + policy_.timeout;
    bool timed_out = false;
    while (!ready() && !aborted_.load(std::memory_order_acquire)) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) {
        timed_out = true;
        break;
      }
      // The wall-clock overload keeps the wait on plain pthread_cond_timedwait.
      const auto rel = std::chrono::duration_cast<std::chrono::system_clock::duration>(
          deadline - now);
      cv.wait_until(lk, std::chrono::system_clock::now() + rel);
    }
    {
      std::lock_guard lock(mu_);
      if (timed_out) abort_locked();
      records_.erase(rec);
    }
    if (!ready() && aborted_.load(std::memory_order_acquire)) {
      throw DeadlockError(report());
    }
  }

  std::optional<DeadlockReport> deadlock_report() {
    std::lock_guard lock(mu_);
    if (!aborted_.load(std::memory_order_acquire)) return std::nullopt;
    return report_;
  }

  bool aborted() const { return aborted_.load(std::memory_order_acquire); }

  // Live-endpoint accounting, used to detect endpoints escaping a run.
  void endpoint_created() { live_endpoints_.fetch_add(1, std::memory_order_relaxed); }
  void endpoint_consumed() { live_endpoints_.fetch_sub(1, std::memory_order_relaxed); }
  long live_endpoints() const { return live_endpoints_.load(std::memory_order_relaxed); }

 private:
  struct WaitRecord {
    std::function<bool()> still_pending;
    std::condition_variable* cv;
    std::string op;
    std::optional<Priority> priority;
    int thread_id;
  };

  static Runtime*& tls_current() {
    thread_local Runtime* current = nullptr;
    return current;
  }

  int ordinal_locked() {
    const auto tid = std::this_thread::get_id();
    for (const auto& [id, ord] : ids_) {
      if (id == tid) return ord;
    }
    int ord = next_id_++;
    ids_.emplace_back(tid, ord);
    return ord;
  }

  // Requires mu_. All participants blocked and every wait genuinely pending
  // means no wakeup can ever arrive.
  void maybe_detect_locked() {
    if (aborted_.load(std::memory_order_acquire)) return;
    if (participants_ <= 0) return;
    if (static_cast<long>(records_.size()) < participants_) return;
    for (const auto& rec : records_) {
      if (!rec.still_pending()) return;
    }
    abort_locked();
  }

  void abort_locked() {
    if (aborted_.load(std::memory_order_acquire)) return;
    report_.blocked.clear();
    for (const auto& rec : records_) {
      report_.blocked.push_back({rec.thread_id, rec.op, rec.priority});
    }
    std::sort(report_.blocked.begin(), report_.blocked.end(),
              [](const BlockedOp& a, const BlockedOp& b) { return a.thread_id < b.thread_id; });
    aborted_.store(true, std::memory_order_release);
    for (const auto& rec : records_) rec.cv->notify_all();
  }

  DeadlockReport report() {
    std::lock_guard lock(mu_);
    return report_;
  }

  DeadlockPolicy policy_;
  std::mutex mu_;
  std::vector<std::thread> threads_;
  std::vector<std::pair<std::thread::id, int>> ids_;
  int next_id_ = 0;
  long participants_ = 0;
  std::list<WaitRecord> records_;
  std::atomic<bool> aborted_{false};
  DeadlockReport report_;
  std::atomic<long> live_endpoints_{0};
};

}  // namespace sesh
