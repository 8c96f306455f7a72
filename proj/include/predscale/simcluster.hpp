#pragma once

// Discrete-event model of a horizontally scaled service.
//
// Requests wait in one FIFO queue and start on the lowest-id ready pod that
// has a free slot. New pods serve nothing until their startup delay has
// elapsed. Scale-down takes capacity away immediately; pods that still hold
// requests drain them before they disappear. A request whose total latency
// would exceed the timeout fails at arrival + timeout.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace predscale {

using RequestId = std::uint64_t;
using PodId = int;

struct ServiceModel {
  double base_service_time = 0.05;
  double jitter_fraction = 0.0;  ///< service time ~ U[base(1-j), base(1+j)]
  int per_pod_concurrency = 1;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct ClusterConfig {
  ServiceModel service;
  int min_replicas = 1;
  int max_replicas = 10;
  int initial_replicas = 1;
  bool cold_start = false;   ///< initial pods start pending instead of ready
  double startup_delay = 10.0;
  double utilization_window = 15.0;
  double request_timeout = 30.0;

  void validate() const;
};

enum class SimEventKind { completion, failure, pod_ready, scaled, clamp_warning };

std::string_view to_string(SimEventKind kind);

struct SimEvent {
  SimEventKind kind = SimEventKind::completion;
  double time = 0.0;
  std::optional<PodId> pod;
  std::optional<RequestId> request;
  std::optional<double> latency;
  int ready_replicas = 0;    ///< after the event
  int desired_replicas = 0;  ///< after the event

  bool operator==(const SimEvent&) const = default;
};

nlohmann::json to_json(const SimEvent& e);

struct PodRecord {
  PodId id = 0;
  double ready_at = 0.0;
  std::vector<double> busy_until;  ///< per slot: end of the current or last service
  int in_flight = 0;
  bool ready = false;
  bool draining = false;
};

struct ClusterSnapshot {
  double now = 0.0;
  int desired_replicas = 0;
  int ready_replicas = 0;
  std::vector<PodRecord> pending;
  std::size_t queued = 0;
  std::size_t in_service = 0;  ///< requests started and not yet resolved
  std::size_t arriving = 0;    ///< submitted with a future arrival time
  std::uint64_t submitted = 0;
  std::uint64_t completed = 0;
  std::uint64_t failed = 0;
  std::uint64_t in_flight = 0;
};

class Cluster {
 public:
  explicit Cluster(ClusterConfig config, double start_time = 0.0);

  /// Queues a request arriving at `arrival` (>= now()). Its outcome is
  /// emitted by advance() as a completion or failure event.
  RequestId submit(double arrival);

  /// Scales to n replicas at now(). Out-of-range n is clamped and a
  /// clamp_warning event is included in the returned events.
  std::vector<SimEvent> set_desired_replicas(int n);

  /// Busy slot-seconds of ready pods over the trailing window divided by
  /// ready * concurrency * window, clipped to [0, 1]. 1.0 with no ready pod.
  double cpu_utilization() const;

  /// Processes every scheduled event with time <= until, in time order with
  /// ties in scheduling order, and returns the externally visible ones.
  std::vector<SimEvent> advance(double until);

  std::optional<double> next_event_time() const;

  double now() const { return now_; }
  int desired_replicas() const { return desired_; }
  int ready_replicas() const { return ready_; }
  std::size_t pending_replicas() const;
  std::uint64_t submitted() const { return submitted_; }
  std::uint64_t completed() const { return completed_; }
  std::uint64_t failed() const { return failed_; }
  std::uint64_t in_flight() const { return submitted_ - completed_ - failed_; }
  const ClusterConfig& config() const { return config_; }

  /// Ready time of any pod ever created (including cancelled/removed ones).
  std::optional<double> pod_ready_at(PodId id) const;

  ClusterSnapshot snapshot() const;

 private:
  enum class Action { arrival, service_end, timeout_in_queue, timeout_in_service, pod_ready };

  struct Scheduled {
    double time;
    std::uint64_t seq;
    Action action;
    RequestId request;
    PodId pod;
    std::size_t slot;

    bool operator>(const Scheduled& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  enum class RequestState { pending_arrival, queued, in_service, done };

  struct Request {
    double arrival = 0.0;
    RequestState state = RequestState::pending_arrival;
  };

  struct Pod {
    PodRecord record;
    std::deque<std::pair<double, double>> busy;  ///< service intervals [start, end)
    std::vector<bool> occupied;
  };

  void schedule(double time, Action action, RequestId request = 0, PodId pod = 0,
                std::size_t slot = 0);
  void handle(const Scheduled& ev, std::vector<SimEvent>& out);
  void dispatch();
  double sample_service_time();
  SimEvent make_event(SimEventKind kind) const;
  void prune_busy();

  ClusterConfig config_;
  double now_;
  int desired_ = 0;
  int ready_ = 0;
  PodId next_pod_id_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t submitted_ = 0;
  std::uint64_t completed_ = 0;
  std::uint64_t failed_ = 0;

  std::map<PodId, Pod> pods_;  ///< live pods: pending, ready or draining
  std::map<PodId, double> ready_at_;
  std::vector<Request> requests_;
  std::deque<RequestId> queue_;
  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> agenda_;
  std::mt19937_64 rng_;
};

}  // namespace predscale
