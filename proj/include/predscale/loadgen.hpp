#pragma once

// Batched load generation.
//
// A trace is cut into fixed windows (5 s by default). Every request of a
// window is fired at once when the window's batch is dispatched, and the
// next batch cannot start before the previous one has fully resolved, so a
// slow batch pushes later dispatches back.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "predscale/trace.hpp"

namespace predscale {

struct Batch {
  std::size_t index = 0;
  double scheduled_start = 0.0;
  std::vector<TraceEvent> events;  ///< offsets within the batch window

  std::size_t size() const { return events.size(); }
};

/// Partitions sorted events into [i*interval, (i+1)*interval) windows. Empty
/// windows between non-empty ones are kept; trailing empty windows are not.
std::vector<Batch> plan_batches(std::span<const TraceEvent> events, double interval = 5.0);

enum class FailureKind { none, timeout, connection, status };

std::string_view to_string(FailureKind kind);

/// Resolution of one request: success with a latency, or a failure detected
/// `elapsed` seconds after dispatch.
struct RequestOutcome {
  bool ok = false;
  double elapsed = 0.0;
  FailureKind failure = FailureKind::none;

  static RequestOutcome success(double latency) { return {true, latency, FailureKind::none}; }
  static RequestOutcome failed(FailureKind kind, double elapsed) { return {false, elapsed, kind}; }
};

/// Something requests can be sent to. Time is seconds since the run began,
/// either virtual (simulation) or wall clock (live HTTP).
class Target {
 public:
  virtual ~Target() = default;

  virtual double now() = 0;
  /// Blocks (or advances virtual time) until now() >= t. No-op if already past.
  virtual void wait_until(double t) = 0;
  /// Fires `count` concurrent requests at now() and returns once every one
  /// has resolved. On return now() is the instant the last one resolved.
  virtual std::vector<RequestOutcome> fire(std::size_t count, double timeout) = 0;
};

struct BatchResult {
  std::size_t index = 0;
  double scheduled_start = 0.0;
  double dispatch_time = 0.0;
  std::uint64_t succeeded = 0;
  std::uint64_t failed = 0;
  std::uint64_t failed_timeout = 0;
  std::uint64_t failed_connection = 0;
  std::uint64_t failed_status = 0;
  std::optional<double> mean_response_time;  ///< over succeeded requests only
  double wall_duration = 0.0;
  std::vector<double> latencies;  ///< only filled when raw latencies are kept

  std::uint64_t dispatched() const { return succeeded + failed; }
  double completion_time() const { return dispatch_time + wall_duration; }
};

nlohmann::json to_json(const BatchResult& r);
BatchResult batch_result_from_json(const nlohmann::json& j);

struct LoadOptions {
  double interval = 5.0;
  double timeout = 30.0;
  bool keep_latencies = false;
};

/// Dispatches one batch at target.now(). Requests slower than `timeout` are
/// counted as timed-out failures.
BatchResult execute_batch(const Batch& batch, Target& target, double timeout,
                          bool keep_latencies = false);

using BatchObserver = std::function<void(const BatchResult&)>;

/// Runs every batch in order. Batch i+1 dispatches at
/// max(scheduled_start(i+1), completion of batch i).
std::vector<BatchResult> run_load(std::span<const TraceEvent> events, Target& target,
                                  const LoadOptions& options,
                                  const BatchObserver& observer = {});

/// Virtual-time target answering every request after a fixed latency.
/// A failure_rate > 0 fails a seeded random subset with HTTP-status failures;
/// an unreachable stub fails everything immediately as connection errors.
class VirtualStubTarget final : public Target {
 public:
  explicit VirtualStubTarget(double latency, double failure_rate = 0.0, std::uint64_t seed = 0,
                             bool reachable = true);

  double now() override { return now_; }
  void wait_until(double t) override;
  std::vector<RequestOutcome> fire(std::size_t count, double timeout) override;

 private:
  double latency_;
  double failure_rate_;
  bool reachable_;
  double now_ = 0.0;
  std::mt19937_64 rng_;
};

}  // namespace predscale
