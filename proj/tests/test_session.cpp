#include <chrono>
#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "sesh/session.hpp"
#include "support/gen.hpp"

using namespace sesh;

namespace {

SessionType mul_server_type() {
  return SessionType::recv(
      ValueKind::int_(),
      SessionType::recv(ValueKind::int_(),
                        SessionType::send(ValueKind::int_(), SessionType::end())));
}

void mul_server(Endpoint s) {
  auto [x, s1] = recv(std::move(s));
  auto [y, s2] = recv(std::move(s1));
  Endpoint s3 = send(Value::integer(x.as_int() * y.as_int()), std::move(s2));
  close(std::move(s3));
}

std::int64_t mul_client(Endpoint c) {
  Endpoint c1 = send(Value::integer(32), std::move(c));
  Endpoint c2 = send(Value::integer(41), std::move(c1));
  auto [z, c3] = recv(std::move(c2));
  close(std::move(c3));
  return z.as_int();
}

// SumSrv = Offer (Recv Int SumSrv) (Send Int End), as a recursive protocol.
SessionType sum_server_type() {
  return SessionType::named(
      "SumSrv", SessionType::offer(
                    SessionType::recv(ValueKind::int_(), SessionType::ref("SumSrv")),
                    SessionType::send(ValueKind::int_(), SessionType::end())));
}

void sum_server(std::int64_t total, Endpoint s) {
  offer_either(
      std::move(s),
      [total](Endpoint more) {
        auto [v, cont] = recv(std::move(more));
        sum_server(total + v.as_int(), std::move(cont));
      },
      [total](Endpoint done) {
        Endpoint e = send(Value::integer(total), std::move(done));
        close(std::move(e));
      });
}

}  // namespace

TEST_CASE("duality examples") {
  const SessionType send_int_end = SessionType::send(ValueKind::int_(), SessionType::end());
  const SessionType recv_int_end = SessionType::recv(ValueKind::int_(), SessionType::end());
  CHECK(dual(send_int_end) == recv_int_end);
  CHECK(dual(SessionType::end()) == SessionType::end());
  CHECK(dual(SessionType::unit()) == SessionType::unit());

  const SessionType mul_srv = mul_server_type();
  const SessionType mul_cli =
      SessionType::send(ValueKind::int_(),
                        SessionType::send(ValueKind::int_(),
                                          SessionType::recv(ValueKind::int_(), SessionType::end())));
  CHECK(dual(mul_srv) == mul_cli);
  CHECK(dual(dual(mul_srv)) == mul_srv);
}

TEST_CASE("duality is an involution on 1000 random session types") {
  testgen::Rng rng(20260810);
  for (int i = 0; i < 1000; ++i) {
    const bool graded = i % 2 == 0;
    const SessionType s = testgen::random_session_type(rng, testgen::pick(rng, 0, 8), graded);
    CHECK(dual(dual(s)) == s);
  }
}

TEST_CASE("duality preserves priorities positionally") {
  testgen::Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const SessionType s = testgen::random_session_type(rng, testgen::pick(rng, 1, 8), true);
    std::vector<std::optional<std::uint64_t>> a, b;
    testgen::collect_priorities(s, a);
    testgen::collect_priorities(dual(s), b);
    CHECK(a == b);
  }
}

TEST_CASE("mul session via connect returns 1312") {
  Runtime rt;
  Runtime::Scope scope(rt);
  const std::int64_t z = connect(mul_server_type(), mul_server, mul_client);
  rt.wait_all();
  CHECK(z == 1312);
}

TEST_CASE("send on Send(Unit, UnitEnd) recovers one-shot semantics") {
  Runtime rt;
  Runtime::Scope scope(rt);
  auto [a, b] = new_session(SessionType::send(ValueKind::unit(), SessionType::unit()));
  Endpoint rest = send(Value::unit(), std::move(a));
  CHECK(rest.protocol() == SessionType::unit());
  auto [v, cont] = recv(std::move(b));
  CHECK(v.is_unit());
  CHECK(cont.protocol() == SessionType::unit());
  rt.wait_all();
}

TEST_CASE("session cancellation is asymmetric") {
  Runtime rt;
  Runtime::Scope scope(rt);
  const SessionType ch = SessionType::send(ValueKind::int_(), SessionType::unit());

  // cancelAndRecv: peer cancels the send side, recv fails
  {
    auto [s, r] = new_session(ch);
    fork([s = std::move(s)]() mutable { cancel(std::move(s)); });
    CHECK_THROWS_AS(recv(std::move(r)), CancellationError);
  }
  // cancelAndSend: peer cancels the recv side, send succeeds
  {
    auto [s, r] = new_session(ch);
    fork([r = std::move(r)]() mutable { cancel(std::move(r)); });
    CHECK_NOTHROW(send(Value::integer(1), std::move(s)));
  }
  // blocked receiver is woken by a cancel
  {
    auto [s, r] = new_session(ch);
    fork([s = std::move(s)]() mutable {
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
      cancel(std::move(s));
    });
    CHECK_THROWS_AS(recv(std::move(r)), CancellationError);
  }
  // cancel of an End endpoint: the peer's close errors
  {
    auto [a, b] = new_session(SessionType::end());
    cancel(std::move(a));
    CHECK_THROWS_AS(close(std::move(b)), CancellationError);
  }
  rt.wait_all();
}

TEST_CASE("fork body crash cancels its endpoints") {
  Runtime rt;
  Runtime::Scope scope(rt);
  auto [s, r] = new_session(SessionType::send(ValueKind::int_(), SessionType::unit()));
  fork([s = std::move(s)]() mutable {
    throw std::runtime_error("crash mid-protocol");
  });
  CHECK_THROWS_AS(recv(std::move(r)), CancellationError);
  rt.wait_all();
}

TEST_CASE("double use of an endpoint raises UsageError") {
  Runtime rt;
  Runtime::Scope scope(rt);
  auto [s, r] = new_session(SessionType::send(ValueKind::int_(), SessionType::unit()));
  Endpoint cont = send(Value::integer(1), std::move(s));
  CHECK_THROWS_AS(send(Value::integer(2), std::move(s)), UsageError);
  CHECK_THROWS_AS(cancel(std::move(s)), UsageError);
  cancel(std::move(r));
  rt.wait_all();
  (void)cont;
}

TEST_CASE("payload conformance is checked") {
  Runtime rt;
  Runtime::Scope scope(rt);
  auto [s, r] = new_session(SessionType::send(ValueKind::int_(), SessionType::unit()));
  CHECK_THROWS_AS(send(Value::str("nope"), std::move(s)), UsageError);
  cancel(std::move(r));
  rt.wait_all();
}

TEST_CASE("choice: selection reaches the matching handler") {
  Runtime rt;
  Runtime::Scope scope(rt);
  const SessionType left_branch = SessionType::recv(ValueKind::int_(), SessionType::unit());
  const SessionType right_branch = SessionType::send(ValueKind::int_(), SessionType::unit());
  const SessionType offer_t = SessionType::offer(left_branch, right_branch);

  auto [off, sel] = new_session(offer_t);
  fork([sel = std::move(sel)]() mutable {
    Endpoint b = select_left(std::move(sel));
    // Selected left: our side now sends what the offerer receives.
    Endpoint rest = send(Value::integer(99), std::move(b));
    (void)rest;
  });
  const std::int64_t got = offer_either(
      std::move(off),
      [](Endpoint l) {
        auto [v, rest] = recv(std::move(l));
        (void)rest;
        return v.as_int();
      },
      [](Endpoint r) {
        Endpoint rest = send(Value::integer(-1), std::move(r));
        (void)rest;
        return std::int64_t{-1};
      });
  CHECK(got == 99);
  rt.wait_all();
}

TEST_CASE("recursive summation protocol: 1, 2, then total") {
  Runtime rt;
  Runtime::Scope scope(rt);
  const std::int64_t total = connect(
      sum_server_type(), [](Endpoint srv) { sum_server(0, std::move(srv)); },
      [](Endpoint cnt) {
        Endpoint c = select_left(std::move(cnt));
        c = send(Value::integer(1), std::move(c));
        c = select_left(std::move(c));
        c = send(Value::integer(2), std::move(c));
        c = select_right(std::move(c));
        auto [v, e] = recv(std::move(c));
        close(std::move(e));
        return v.as_int();
      });
  CHECK(total == 3);
  rt.wait_all();
}

TEST_CASE("selecting and then cancelling the branch fails the peer's handler") {
  Runtime rt;
  {
    Runtime::Scope scope(rt);
    const SessionType left_branch = SessionType::recv(ValueKind::int_(), SessionType::unit());
    const SessionType right_branch = SessionType::send(ValueKind::int_(), SessionType::unit());
    auto [off, sel] = new_session(SessionType::offer(left_branch, right_branch));
    fork([sel = std::move(sel)]() mutable {
      Endpoint b = select_left(std::move(sel));
      cancel(std::move(b));
    });
    bool cancelled = false;
    try {
      offer_either(
          std::move(off),
          [](Endpoint l) {
            auto [v, rest] = recv(std::move(l));
            (void)rest;
            return v.as_int();
          },
          [](Endpoint r) {
            cancel(std::move(r));
            return std::int64_t{0};
          });
    } catch (const CancellationError&) {
      cancelled = true;
    }
    rt.wait_all();
    CHECK(cancelled);
  }
}

TEST_CASE("offer fails when the selecting peer cancels instead") {
  Runtime rt;
  {
    Runtime::Scope scope(rt);
    const SessionType branch = SessionType::send(ValueKind::int_(), SessionType::unit());
    auto [off, sel] = new_session(SessionType::offer(branch, branch));
    fork([sel = std::move(sel)]() mutable { cancel(std::move(sel)); });
    bool cancelled = false;
    try {
      offer_either(
          std::move(off), [](Endpoint) { return 0; }, [](Endpoint) { return 0; });
    } catch (const CancellationError&) {
      cancelled = true;
    }
    rt.wait_all();
    CHECK(cancelled);
  }
}

TEST_CASE("connect with a cancelling worker fails the receive") {
  Runtime rt;
  {
    Runtime::Scope scope(rt);
    const SessionType ch = SessionType::send(ValueKind::int_(), SessionType::unit());
    bool cancelled = false;
    try {
      connect(
          ch, [](Endpoint s) { cancel(std::move(s)); },
          [](Endpoint r) {
            auto [v, rest] = recv(std::move(r));
            (void)rest;
            return v.as_int();
          });
    } catch (const CancellationError&) {
      cancelled = true;
    }
    rt.wait_all();
    CHECK(cancelled);
  }
}

TEST_CASE("delegation: an endpoint travels over a channel") {
  Runtime rt;
  Runtime::Scope scope(rt);
  const SessionType inner = SessionType::send(ValueKind::int_(), SessionType::unit());
  const SessionType outer = SessionType::send(ValueKind::chan(inner), SessionType::unit());

  auto [is, ir] = new_session(inner);
  auto [os, orr] = new_session(outer);
  fork([os = std::move(os), is = std::move(is)]() mutable {
    // Delegate the send half; the receiver will use it.
    Endpoint rest = send(Value::chan(std::move(is)), std::move(os));
    (void)rest;
  });
  auto [v, rest] = recv(std::move(orr));
  Endpoint delegated = v.take_chan();
  Endpoint after = send(Value::integer(5), std::move(delegated));
  (void)after;
  (void)rest;
  auto [got, cont] = recv(std::move(ir));
  CHECK(got.as_int() == 5);
  (void)cont;
  rt.wait_all();
}

TEST_CASE("connect nests into a process tree") {
  Runtime rt;
  Runtime::Scope scope(rt);
  const SessionType ch = SessionType::send(ValueKind::int_(), SessionType::unit());
  const std::int64_t result = connect(
      ch,
      [&](Endpoint up) {
        // Inner connect from the worker: another leaf below it.
        const std::int64_t inner = connect(
            ch,
            [](Endpoint leaf_up) {
              Endpoint rest = send(Value::integer(10), std::move(leaf_up));
              (void)rest;
            },
            [](Endpoint leaf_down) {
              auto [v, rest] = recv(std::move(leaf_down));
              (void)rest;
              return v.as_int();
            });
        Endpoint rest = send(Value::integer(inner + 1), std::move(up));
        (void)rest;
      },
      [](Endpoint down) {
        auto [v, rest] = recv(std::move(down));
        (void)rest;
        return v.as_int();
      });
  CHECK(result == 11);
  rt.wait_all();
}

TEST_CASE("the cyclic wait expressible with raw new deadlocks under the watchdog") {
  Runtime rt;
  bool deadlocked = false;
  {
    Runtime::Scope scope(rt);
    const SessionType ch = SessionType::send(ValueKind::int_(), SessionType::unit());
    auto [s1, r1] = new_session(ch);
    auto [s2, r2] = new_session(ch);
    fork([r1 = std::move(r1), s2 = std::move(s2)]() mutable {
      auto [x, u] = recv(std::move(r1));
      (void)u;
      Endpoint rest = send(std::move(x), std::move(s2));
      (void)rest;
    });
    try {
      auto [y, u] = recv(std::move(r2));
      (void)u;
      Endpoint rest = send(std::move(y), std::move(s1));
      (void)rest;
    } catch (const DeadlockError&) {
      deadlocked = true;
    }
  }
  rt.wait_all();
  CHECK(deadlocked);
  CHECK(rt.deadlock_report().has_value());
}

TEST_CASE("the same shape with main sending first returns Hiya!") {
  Runtime rt;
  std::string got;
  {
    Runtime::Scope scope(rt);
    const SessionType ch = SessionType::send(ValueKind::str(), SessionType::unit());
    auto [s1, r1] = new_session(ch);
    auto [s2, r2] = new_session(ch);
    fork([r1 = std::move(r1), s2 = std::move(s2)]() mutable {
      auto [x, u] = recv(std::move(r1));
      (void)u;
      Endpoint rest = send(std::move(x), std::move(s2));
      (void)rest;
    });
    Endpoint rest = send(Value::str("Hiya!"), std::move(s1));
    (void)rest;
    auto [y, u] = recv(std::move(r2));
    (void)u;
    got = y.as_str();
  }
  rt.wait_all();
  CHECK(got == "Hiya!");
}

TEST_CASE("protocol conformance: completed sessions run dual action sequences") {
  // Drive both endpoints directly from the protocol and record the ops.
  testgen::Rng rng(7);
  for (int round = 0; round < 50; ++round) {
    // Linear protocols only (no choice): a random run of sends/recvs.
    const int len = testgen::pick(rng, 1, 5);
    SessionType proto = testgen::chance(rng, 0.5) ? SessionType::end() : SessionType::unit();
    for (int i = 0; i < len; ++i) {
      proto = testgen::chance(rng, 0.5)
                  ? SessionType::send(ValueKind::int_(), std::move(proto))
                  : SessionType::recv(ValueKind::int_(), std::move(proto));
    }
    const auto drive = [](Endpoint e, std::vector<std::string>& ops) {
      while (true) {
        SessionType head = e.protocol();
        while (head.tag() == SessionType::Tag::Named) head = unfold(head);
        switch (head.tag()) {
          case SessionType::Tag::Send:
            ops.push_back("send");
            e = send(Value::integer(0), std::move(e));
            break;
          case SessionType::Tag::Recv: {
            ops.push_back("recv");
            auto [v, cont] = recv(std::move(e));
            e = std::move(cont);
            break;
          }
          case SessionType::Tag::End:
            ops.push_back("close");
            close(std::move(e));
            return;
          case SessionType::Tag::UnitEnd:
            ops.push_back("unit");
            return;
          default:
            return;
        }
      }
    };
    Runtime rt;
    {
      Runtime::Scope scope(rt);
      auto [a, b] = new_session(proto);
      std::vector<std::string> ours, theirs;
      fork([&theirs, b = std::move(b), &drive]() mutable { drive(std::move(b), theirs); });
      drive(std::move(a), ours);
      rt.wait_all();
      REQUIRE(ours.size() == theirs.size());
      for (std::size_t i = 0; i < ours.size(); ++i) {
        if (ours[i] == "send") CHECK(theirs[i] == "recv");
        if (ours[i] == "recv") CHECK(theirs[i] == "send");
        if (ours[i] == "close") CHECK(theirs[i] == "close");
        if (ours[i] == "unit") CHECK(theirs[i] == "unit");
      }
    }
  }
}
