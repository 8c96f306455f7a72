#include "predscale/scoring.hpp"

#include <algorithm>

#include "predscale/errors.hpp"

namespace predscale {

void PenaltyParams::validate() const {
  if (!(failed_request_penalty >= 0.0) || !(scarcity_factor >= 0.0)) {
    throw ValidationError("penalty parameters must be >= 0");
  }
}

void ReplicaTimeline::validate() const {
  if (steps.empty()) throw ValidationError("replica timeline is empty");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].replicas < 1) throw ValidationError("replica timeline: count below 1");
    if (i > 0 && !(steps[i].time > steps[i - 1].time)) {
      throw ValidationError("replica timeline: times must be strictly increasing");
    }
  }
  if (!(end_time > steps.front().time)) {
    throw ValidationError("replica timeline: end_time must be after the first step");
  }
}

int ReplicaTimeline::at(double t) const {
  if (steps.empty()) return 0;
  auto it = std::upper_bound(steps.begin(), steps.end(), t,
                             [](double x, const ReplicaStep& s) { return x < s.time; });
  if (it == steps.begin()) return steps.front().replicas;
  return std::prev(it)->replicas;
}

nlohmann::json to_json(const ReplicaTimeline& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) steps.push_back({s.time, s.replicas});
  return {{"end_time", t.end_time}, {"steps", steps}};
}

ReplicaTimeline replica_timeline_from_json(const nlohmann::json& j) {
  ReplicaTimeline t;
  try {
    t.end_time = j.at("end_time").get<double>();
    for (const auto& s : j.at("steps")) {
      t.steps.push_back({s.at(0).get<double>(), s.at(1).get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("replica timeline: ") + e.what());
  }
  t.validate();
  return t;
}

nlohmann::json to_json(const PenaltyBreakdown& b) {
  return {{"latency_term", b.latency_term},
          {"failure_term", b.failure_term},
          {"resource_term", b.resource_term},
          {"total", b.total},
          {"total_succeeded", b.total_succeeded},
          {"total_failed", b.total_failed},
          {"average_replicas", b.average_replicas},
          {"normalized_failure_term", b.normalized_failure_term},
          {"normalized_total", b.normalized_total}};
}

double latency_term(std::span<const BatchResult> batches) {
  double weighted = 0.0;
  std::uint64_t succeeded = 0;
  for (const auto& b : batches) {
    if (b.succeeded == 0 || !b.mean_response_time) continue;
    const double rt = *b.mean_response_time;
    weighted += static_cast<double>(b.succeeded) * rt * rt;
    succeeded += b.succeeded;
  }
  return succeeded == 0 ? 0.0 : weighted / static_cast<double>(succeeded);
}

double average_replicas(const ReplicaTimeline& timeline) {
  timeline.validate();
  double area = 0.0;
  for (std::size_t i = 0; i < timeline.steps.size(); ++i) {
    const double from = timeline.steps[i].time;
    if (from >= timeline.end_time) break;
    const double to = i + 1 < timeline.steps.size()
                          ? std::min(timeline.steps[i + 1].time, timeline.end_time)
                          : timeline.end_time;
    area += timeline.steps[i].replicas * (to - from);
  }
  return area / (timeline.end_time - timeline.steps.front().time);
}

PenaltyBreakdown penalty(std::span<const BatchResult> batches, const ReplicaTimeline& timeline,
                         const PenaltyParams& params) {
  params.validate();
  PenaltyBreakdown b;
  for (const auto& r : batches) {
    b.total_succeeded += r.succeeded;
    b.total_failed += r.failed;
  }
  b.latency_term = latency_term(batches);
  b.failure_term = static_cast<double>(b.total_failed) * params.failed_request_penalty;
  b.average_replicas = average_replicas(timeline);
  b.resource_term = b.average_replicas * params.scarcity_factor;
  b.total = b.latency_term + b.failure_term + b.resource_term;

  const auto dispatched = b.total_succeeded + b.total_failed;
  b.normalized_failure_term =
      dispatched == 0 ? 0.0 : b.failure_term / static_cast<double>(dispatched);
  b.normalized_total = b.latency_term + b.normalized_failure_term + b.resource_term;
  return b;
}

double mean_latency(std::span<const BatchResult> batches) {
  double sum = 0.0;
  std::uint64_t n = 0;
  for (const auto& b : batches) {
    if (b.succeeded == 0 || !b.mean_response_time) continue;
    sum += static_cast<double>(b.succeeded) * *b.mean_response_time;
    n += b.succeeded;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace predscale
