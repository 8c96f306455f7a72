#pragma once

// Run scoring.
//
//   total = sum_i(succ_i * rt_i^2) / sum_i(succ_i)
//         + failed * failed_request_penalty
//         + average_replicas * scarcity_factor
//
// where rt_i is batch i's mean response time. The default failure penalty
// prices a failed request like a 30 s response (30^2).

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "predscale/loadgen.hpp"

namespace predscale {

struct PenaltyParams {
  double failed_request_penalty = 900.0;
  double scarcity_factor = 1.0;

  void validate() const;
};

struct ReplicaStep {
  double time = 0.0;
  int replicas = 1;

  bool operator==(const ReplicaStep&) const = default;
};

/// Step function of ready replicas, held from each step's time until the
/// next one, and from the last one until end_time.
struct ReplicaTimeline {
  std::vector<ReplicaStep> steps;
  double end_time = 0.0;

  /// Strictly increasing times, replicas >= 1, end_time > first time.
  void validate() const;
  /// Value in effect at t (the first step's value before it).
  int at(double t) const;
};

nlohmann::json to_json(const ReplicaTimeline& t);
ReplicaTimeline replica_timeline_from_json(const nlohmann::json& j);

struct PenaltyBreakdown {
  double latency_term = 0.0;
  double failure_term = 0.0;
  double resource_term = 0.0;
  double total = 0.0;
  std::uint64_t total_succeeded = 0;
  std::uint64_t total_failed = 0;
  double average_replicas = 0.0;
  /// Failure term divided by the number of dispatched requests; reported next
  /// to the literal equation, never in place of it.
  double normalized_failure_term = 0.0;
  double normalized_total = 0.0;
};

nlohmann::json to_json(const PenaltyBreakdown& b);

/// Success-weighted mean of squared batch mean latencies; 0 with no successes.
double latency_term(std::span<const BatchResult> batches);

/// Time-weighted mean of the replica step function over [first step, end].
double average_replicas(const ReplicaTimeline& timeline);

PenaltyBreakdown penalty(std::span<const BatchResult> batches, const ReplicaTimeline& timeline,
                         const PenaltyParams& params = {});

/// Success-weighted mean latency over a run; 0 with no successes.
double mean_latency(std::span<const BatchResult> batches);

}  // namespace predscale
