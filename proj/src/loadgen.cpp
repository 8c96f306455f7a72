#include "predscale/loadgen.hpp"

#include <algorithm>

#include "predscale/errors.hpp"

namespace predscale {

std::vector<Batch> plan_batches(std::span<const TraceEvent> events, double interval) {
  if (!(interval > 0.0)) throw ValidationError("plan_batches: interval must be > 0");
  const auto interval_ms = to_millis(interval);
  if (interval_ms <= 0) throw ValidationError("plan_batches: interval below 1 ms");

  std::vector<Batch> batches;
  std::int64_t prev = 0;
  for (const auto& e : events) {
    if (e.millis < prev) throw OrderingError("plan_batches: events are not sorted");
    prev = e.millis;
    const auto idx = static_cast<std::size_t>(e.millis / interval_ms);
    while (batches.size() <= idx) {
      Batch b;
      b.index = batches.size();
      b.scheduled_start = static_cast<double>(b.index) * interval;
      batches.push_back(std::move(b));
    }
    batches[idx].events.push_back(
        TraceEvent::from_millis(e.millis - static_cast<std::int64_t>(idx) * interval_ms));
  }
  return batches;
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::none: return "none";
    case FailureKind::timeout: return "timeout";
    case FailureKind::connection: return "connection";
    case FailureKind::status: return "status";
  }
  return "none";
}

BatchResult execute_batch(const Batch& batch, Target& target, double timeout,
                          bool keep_latencies) {
  if (!(timeout > 0.0)) throw ValidationError("execute_batch: timeout must be > 0");
  BatchResult result;
  result.index = batch.index;
  result.scheduled_start = batch.scheduled_start;
  result.dispatch_time = target.now();
  if (batch.events.empty()) return result;

  const auto outcomes = target.fire(batch.size(), timeout);
  result.wall_duration = target.now() - result.dispatch_time;

  // Incremental mean: exact when every latency is identical.
  double mean = 0.0;
  for (const auto& o : outcomes) {
    FailureKind failure = o.failure;
    if (o.ok && o.elapsed > timeout) failure = FailureKind::timeout;
    if (o.ok && failure == FailureKind::none) {
      ++result.succeeded;
      mean += (o.elapsed - mean) / static_cast<double>(result.succeeded);
      if (keep_latencies) result.latencies.push_back(o.elapsed);
      continue;
    }
    ++result.failed;
    switch (failure) {
      case FailureKind::timeout: ++result.failed_timeout; break;
      case FailureKind::status: ++result.failed_status; break;
      default: ++result.failed_connection; break;
    }
  }
  if (result.succeeded > 0) result.mean_response_time = mean;
  return result;
}

std::vector<BatchResult> run_load(std::span<const TraceEvent> events, Target& target,
                                  const LoadOptions& options, const BatchObserver& observer) {
  const auto batches = plan_batches(events, options.interval);
  std::vector<BatchResult> results;
  results.reserve(batches.size());
  for (const auto& batch : batches) {
    target.wait_until(batch.scheduled_start);
    results.push_back(execute_batch(batch, target, options.timeout, options.keep_latencies));
    if (observer) observer(results.back());
  }
  return results;
}

nlohmann::json to_json(const BatchResult& r) {
  nlohmann::json j = {
      {"index", r.index},
      {"scheduled_start", r.scheduled_start},
      {"dispatch_time", r.dispatch_time},
      {"succeeded", r.succeeded},
      {"failed", r.failed},
      {"failed_timeout", r.failed_timeout},
      {"failed_connection", r.failed_connection},
      {"failed_status", r.failed_status},
      {"mean_response_time", nullptr},
      {"wall_duration", r.wall_duration},
  };
  if (r.mean_response_time) j["mean_response_time"] = *r.mean_response_time;
  if (!r.latencies.empty()) j["latencies"] = r.latencies;
  return j;
}

BatchResult batch_result_from_json(const nlohmann::json& j) {
  BatchResult r;
  try {
    r.index = j.at("index").get<std::size_t>();
    r.dispatch_time = j.at("dispatch_time").get<double>();
    r.succeeded = j.at("succeeded").get<std::uint64_t>();
    r.failed = j.at("failed").get<std::uint64_t>();
    r.wall_duration = j.at("wall_duration").get<double>();
    r.scheduled_start = j.value("scheduled_start", r.dispatch_time);
    r.failed_timeout = j.value("failed_timeout", std::uint64_t{0});
    r.failed_connection = j.value("failed_connection", std::uint64_t{0});
    r.failed_status = j.value("failed_status", std::uint64_t{0});
    if (const auto& m = j.at("mean_response_time"); !m.is_null()) {
      r.mean_response_time = m.get<double>();
    }
    if (j.contains("latencies")) r.latencies = j["latencies"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("batch result: ") + e.what());
  }
  if (r.mean_response_time && *r.mean_response_time < 0.0) {
    throw ValidationError("batch result: negative mean_response_time");
  }
  if (r.succeeded > 0 && !r.mean_response_time) {
    throw ValidationError("batch result: succeeded > 0 but mean_response_time is null");
  }
  return r;
}

VirtualStubTarget::VirtualStubTarget(double latency, double failure_rate, std::uint64_t seed,
                                     bool reachable)
    : latency_(latency), failure_rate_(failure_rate), reachable_(reachable), rng_(seed) {
  if (latency < 0.0) throw ValidationError("stub target: negative latency");
  if (failure_rate < 0.0 || failure_rate > 1.0) {
    throw ValidationError("stub target: failure_rate must be in [0, 1]");
  }
}

void VirtualStubTarget::wait_until(double t) { now_ = std::max(now_, t); }

std::vector<RequestOutcome> VirtualStubTarget::fire(std::size_t count, double timeout) {
  std::vector<RequestOutcome> out;
  out.reserve(count);
  double last = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    RequestOutcome o;
    if (!reachable_) {
      o = RequestOutcome::failed(FailureKind::connection, 0.0);
    } else if (latency_ > timeout) {
      o = RequestOutcome::failed(FailureKind::timeout, timeout);
    } else {
      const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      o = u < failure_rate_ ? RequestOutcome::failed(FailureKind::status, latency_)
                            : RequestOutcome::success(latency_);
    }
    last = std::max(last, o.elapsed);
    out.push_back(o);
  }
  now_ += last;
  return out;
}

}  // namespace predscale
