#include <doctest.h>

#include <vector>

#include "gen.hpp"
#include "predscale/errors.hpp"
#include "predscale/loadgen.hpp"
#include "predscale/trace.hpp"

using namespace predscale;

namespace {

// Records every call and answers with a per-batch latency script.
class ScriptedTarget final : public Target {
 public:
  explicit ScriptedTarget(std::vector<double> latencies) : latencies_(std::move(latencies)) {}

  double now() override { return now_; }
  void wait_until(double t) override { now_ = std::max(now_, t); }
  std::vector<RequestOutcome> fire(std::size_t count, double) override {
    fired_at.push_back(now_);
    const double l = call_ < latencies_.size() ? latencies_[call_] : 0.1;
    ++call_;
    if (count > 0) now_ += l;
    return std::vector<RequestOutcome>(count, RequestOutcome::success(l));
  }

  std::vector<double> fired_at;

 private:
  std::vector<double> latencies_;
  std::size_t call_ = 0;
  double now_ = 0.0;
};

}  // namespace

TEST_SUITE("loadgen") {

TEST_CASE("plan_batches: partition by hand") {
  const auto b = plan_batches(parse_text_trace("0\n1\n4\n6"), 5);
  REQUIRE(b.size() == 2);
  CHECK(b[0].size() == 3);
  CHECK(b[1].size() == 1);
  CHECK(b[1].events[0].seconds() == 1.0);  // offset within the window
  CHECK(b[1].scheduled_start == 5.0);
}

TEST_CASE("plan_batches: empty and leading empty windows") {
  CHECK(plan_batches({}, 5).empty());
  const auto b = plan_batches(parse_text_trace("12"), 5);
  REQUIRE(b.size() == 3);
  CHECK(b[0].size() == 0);
  CHECK(b[1].size() == 0);
  CHECK(b[2].size() == 1);
  CHECK(b[2].index == 2);
}

TEST_CASE("plan_batches: rejects unsorted input and bad interval") {
  const Trace unsorted{{2000}, {1000}};
  CHECK_THROWS_AS(plan_batches(unsorted, 5), OrderingError);
  CHECK_THROWS_AS(plan_batches(parse_text_trace("1"), 0), ValidationError);
}

TEST_CASE("plan_batches: every event lands in its own window") {
  gen::Rng r(21);
  for (int i = 0; i < 200; ++i) {
    const auto t = gen::trace(r, 200, 300.0);
    const double interval = r.uniform(0.5, 20.0);
    const auto batches = plan_batches(t, interval);
    std::size_t total = 0;
    for (const auto& b : batches) {
      total += b.size();
      for (const auto& e : b.events) {
        CHECK(e.seconds() >= 0.0);
        CHECK(e.seconds() < interval + 1e-9);
      }
    }
    CHECK(total == t.size());
    if (!batches.empty()) CHECK(batches.back().size() > 0);
  }
}

TEST_CASE("execute_batch: fixed-latency stub") {
  VirtualStubTarget stub(0.2);
  Batch batch{0, 0.0, {{0}, {1}, {2}}};
  const auto r = execute_batch(batch, stub, 30);
  CHECK(r.succeeded == 3);
  CHECK(r.failed == 0);
  REQUIRE(r.mean_response_time);
  CHECK(*r.mean_response_time == 0.2);
}

TEST_CASE("execute_batch: empty batch") {
  VirtualStubTarget stub(0.2);
  const auto r = execute_batch(Batch{}, stub, 30);
  CHECK(r.succeeded == 0);
  CHECK(r.failed == 0);
  CHECK_FALSE(r.mean_response_time);
}

TEST_CASE("execute_batch: unreachable target fails every request") {
  VirtualStubTarget stub(0.2, 0.0, 0, false);
  Batch batch{0, 0.0, {{0}, {1}}};
  const auto r = execute_batch(batch, stub, 30);
  CHECK(r.succeeded == 0);
  CHECK(r.failed == 2);
  CHECK(r.failed_connection == 2);
}

TEST_CASE("execute_batch: responses slower than the timeout are failures") {
  VirtualStubTarget stub(40.0);
  Batch batch{0, 0.0, {{0}}};
  const auto r = execute_batch(batch, stub, 30);
  CHECK(r.failed == 1);
  CHECK(r.failed_timeout == 1);
}

TEST_CASE("run_load: no drift when batches finish early") {
  ScriptedTarget t({2.0, 2.0});
  const auto res = run_load(parse_text_trace("0\n6"), t, {});
  REQUIRE(res.size() == 2);
  CHECK(res[1].dispatch_time == 5.0);
}

TEST_CASE("run_load: slow batch delays the next dispatch") {
  ScriptedTarget t({7.0, 1.0});
  const auto res = run_load(parse_text_trace("0\n6"), t, {});
  REQUIRE(res.size() == 2);
  CHECK(res[1].dispatch_time == 7.0);
  CHECK(res[1].scheduled_start == 5.0);
}

TEST_CASE("run_load: trace of only empty batches") {
  // A lone late event makes the leading windows empty.
  VirtualStubTarget stub(0.1);
  const auto res = run_load(parse_text_trace("14"), stub, {});
  REQUIRE(res.size() == 3);
  CHECK(res[0].dispatched() == 0);
  CHECK(res[1].dispatched() == 0);
  CHECK_FALSE(res[0].mean_response_time);
}

TEST_CASE("run_load: conservation, monotone dispatch, exact stub mean") {
  gen::Rng r(22);
  for (int i = 0; i < 200; ++i) {
    const auto t = gen::trace(r, 300, 200.0);
    const double latency = r.uniform(0.01, 12.0);
    VirtualStubTarget stub(latency, r.coin() ? 0.0 : 0.3, r.u64(0, 1000));
    std::size_t observed = 0;
    const auto res = run_load(t, stub, {5.0, 30.0, false},
                              [&](const BatchResult&) { ++observed; });
    CHECK(observed == res.size());
    std::uint64_t total = 0;
    double prev = -1.0;
    for (const auto& b : res) {
      total += b.dispatched();
      CHECK(b.dispatch_time >= b.scheduled_start);
      CHECK(b.dispatch_time >= prev);
      prev = b.dispatch_time;
      if (b.succeeded > 0) CHECK(*b.mean_response_time == latency);
    }
    CHECK(total == t.size());
  }
}

TEST_CASE("batch result JSON round trip") {
  BatchResult b;
  b.index = 4;
  b.scheduled_start = 20;
  b.dispatch_time = 21.5;
  b.succeeded = 7;
  b.failed = 2;
  b.failed_status = 2;
  b.mean_response_time = 0.125;
  b.wall_duration = 3.25;
  b.latencies = {0.1, 0.15};
  const auto back = batch_result_from_json(to_json(b));
  CHECK(back.index == b.index);
  CHECK(back.dispatch_time == b.dispatch_time);
  CHECK(back.succeeded == b.succeeded);
  CHECK(back.failed_status == 2);
  CHECK(back.mean_response_time == b.mean_response_time);
  CHECK(back.wall_duration == b.wall_duration);
  CHECK(back.latencies == b.latencies);

  BatchResult empty;
  CHECK_FALSE(batch_result_from_json(to_json(empty)).mean_response_time);
}

}  // TEST_SUITE
