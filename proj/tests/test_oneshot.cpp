#include <atomic>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "sesh/oneshot.hpp"

using namespace sesh;

TEST_CASE("round trip") {
  auto [tx, rx] = oneshot::channel<int>();
  oneshot::send(std::move(tx), 42);
  CHECK(oneshot::recv(std::move(rx)) == 42);
}

TEST_CASE("recv blocks until a value becomes available") {
  auto [tx, rx] = oneshot::channel<std::string>();
  std::atomic<bool> sent{false};
  std::thread t([tx = std::move(tx), &sent]() mutable {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    sent.store(true);
    oneshot::send(std::move(tx), std::string("x"));
  });
  const std::string got = oneshot::recv(std::move(rx));
  CHECK(sent.load());
  CHECK(got == "x");
  t.join();
}

TEST_CASE("send is non-blocking with no receiver waiting") {
  auto [tx, rx] = oneshot::channel<int>();
  const auto t0 = std::chrono::steady_clock::now();
  oneshot::send(std::move(tx), 1);
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(elapsed < std::chrono::milliseconds(100));
  CHECK(oneshot::recv(std::move(rx)) == 1);
}

TEST_CASE("send after receiver cancelled succeeds, value dropped") {
  auto [tx, rx] = oneshot::channel<int>();
  oneshot::cancel(std::move(rx));
  CHECK_NOTHROW(oneshot::send(std::move(tx), 7));
}

TEST_CASE("recv after sender cancelled fails") {
  auto [tx, rx] = oneshot::channel<int>();
  oneshot::cancel(std::move(tx));
  CHECK_THROWS_AS(oneshot::recv(std::move(rx)), CancellationError);
}

TEST_CASE("a blocked receiver is woken by sender destruction") {
  auto [tx, rx] = oneshot::channel<int>();
  std::thread t([tx = std::move(tx)]() mutable {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    auto dropped = std::move(tx);  // destroyed unused at scope end
  });
  CHECK_THROWS_AS(oneshot::recv(std::move(rx)), CancellationError);
  t.join();
}

TEST_CASE("destroying both endpoints unused is silent") {
  auto [tx, rx] = oneshot::channel<int>();
  (void)tx;
  (void)rx;
}

TEST_CASE("double use raises UsageError") {
  auto [tx, rx] = oneshot::channel<int>();
  oneshot::send(std::move(tx), 1);
  CHECK_THROWS_AS(oneshot::send(std::move(tx), 2), UsageError);
  (void)oneshot::recv(std::move(rx));
  CHECK_THROWS_AS(oneshot::recv(std::move(rx)), UsageError);

  auto [tx2, rx2] = oneshot::channel<int>();
  oneshot::cancel(std::move(tx2));
  CHECK_THROWS_AS(oneshot::cancel(std::move(tx2)), UsageError);
  oneshot::cancel(std::move(rx2));
  CHECK_THROWS_AS(oneshot::cancel(std::move(rx2)), UsageError);
}

TEST_CASE("exactly-once delivery under racing send and recv") {
  for (int round = 0; round < 200; ++round) {
    auto [tx, rx] = oneshot::channel<int>();
    std::thread sender([tx = std::move(tx), round]() mutable {
      oneshot::send(std::move(tx), round);
    });
    int got = -1;
    std::thread receiver([rx = std::move(rx), &got]() mutable {
      got = oneshot::recv(std::move(rx));
    });
    sender.join();
    receiver.join();
    REQUIRE(got == round);
  }
}

TEST_CASE("sync completes when both sides participate") {
  auto [p1, p2] = oneshot::sync_channel();
  std::thread t([p = std::move(p1)]() mutable { oneshot::sync(std::move(p)); });
  CHECK_NOTHROW(oneshot::sync(std::move(p2)));
  t.join();
}

TEST_CASE("sync fails when the peer cancels both halves") {
  auto [p1, p2] = oneshot::sync_channel();
  oneshot::cancel(std::move(p2));
  CHECK_THROWS_AS(oneshot::sync(std::move(p1)), CancellationError);
}

TEST_CASE("cancellation is asymmetric") {
  // sender cancel -> receiver errors
  {
    auto [tx, rx] = oneshot::channel<int>();
    std::thread t([tx = std::move(tx)]() mutable { oneshot::cancel(std::move(tx)); });
    CHECK_THROWS_AS(oneshot::recv(std::move(rx)), CancellationError);
    t.join();
  }
  // receiver cancel -> sender succeeds
  {
    auto [tx, rx] = oneshot::channel<int>();
    oneshot::cancel(std::move(rx));
    CHECK_NOTHROW(oneshot::send(std::move(tx), 3));
  }
}
