#include "predscale/simcluster.hpp"

#include <algorithm>
#include <cmath>

#include "predscale/errors.hpp"

namespace predscale {

void ServiceModel::validate() const {
  if (!(base_service_time > 0.0)) throw ValidationError("service: base_service_time must be > 0");
  if (!(jitter_fraction >= 0.0 && jitter_fraction < 1.0)) {
    throw ValidationError("service: jitter_fraction must be in [0, 1)");
  }
  if (per_pod_concurrency < 1) throw ValidationError("service: per_pod_concurrency must be >= 1");
}

void ClusterConfig::validate() const {
  service.validate();
  if (min_replicas < 1) throw ValidationError("cluster: min_replicas must be >= 1");
  if (max_replicas < min_replicas) throw ValidationError("cluster: max_replicas < min_replicas");
  if (initial_replicas < min_replicas || initial_replicas > max_replicas) {
    throw ValidationError("cluster: initial_replicas outside [min_replicas, max_replicas]");
  }
  if (!(startup_delay >= 0.0)) throw ValidationError("cluster: startup_delay must be >= 0");
  if (!(utilization_window > 0.0)) throw ValidationError("cluster: utilization_window must be > 0");
  if (!(request_timeout > 0.0)) throw ValidationError("cluster: request_timeout must be > 0");
}

std::string_view to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::completion: return "completion";
    case SimEventKind::failure: return "failure";
    case SimEventKind::pod_ready: return "pod_ready";
    case SimEventKind::scaled: return "scaled";
    case SimEventKind::clamp_warning: return "clamp_warning";
  }
  return "completion";
}

nlohmann::json to_json(const SimEvent& e) {
  nlohmann::json j = {{"kind", to_string(e.kind)},
                      {"timestamp", e.time},
                      {"pod", nullptr},
                      {"request", nullptr},
                      {"latency", nullptr},
                      {"ready_replicas", e.ready_replicas},
                      {"desired_replicas", e.desired_replicas}};
  if (e.pod) j["pod"] = *e.pod;
  if (e.request) j["request"] = *e.request;
  if (e.latency) j["latency"] = *e.latency;
  return j;
}

Cluster::Cluster(ClusterConfig config, double start_time)
    : config_(std::move(config)), now_(start_time), rng_(config_.service.rng_seed) {
  config_.validate();
  const double ready_at = config_.cold_start ? start_time + config_.startup_delay : start_time;
  for (int i = 0; i < config_.initial_replicas; ++i) {
    Pod pod;
    pod.record.id = next_pod_id_++;
    pod.record.ready_at = ready_at;
    pod.record.ready = !config_.cold_start;
    pod.record.busy_until.assign(static_cast<std::size_t>(config_.service.per_pod_concurrency),
                                 ready_at);
    pod.occupied.assign(pod.record.busy_until.size(), false);
    ready_at_[pod.record.id] = ready_at;
    if (config_.cold_start) schedule(ready_at, Action::pod_ready, 0, pod.record.id);
    pods_.emplace(pod.record.id, std::move(pod));
  }
  desired_ = config_.initial_replicas;
  ready_ = config_.cold_start ? 0 : config_.initial_replicas;
}

void Cluster::schedule(double time, Action action, RequestId request, PodId pod,
                       std::size_t slot) {
  agenda_.push(Scheduled{time, next_seq_++, action, request, pod, slot});
}

RequestId Cluster::submit(double arrival) {
  if (arrival < now_) throw ValidationError("submit: arrival precedes current time");
  const RequestId id = requests_.size();
  requests_.push_back(Request{arrival, RequestState::pending_arrival});
  ++submitted_;
  schedule(arrival, Action::arrival, id);
  return id;
}

double Cluster::sample_service_time() {
  const auto& svc = config_.service;
  if (svc.jitter_fraction == 0.0) return svc.base_service_time;
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return svc.base_service_time * (1.0 + svc.jitter_fraction * (2.0 * u - 1.0));
}

SimEvent Cluster::make_event(SimEventKind kind) const {
  SimEvent e;
  e.kind = kind;
  e.time = now_;
  e.ready_replicas = ready_;
  e.desired_replicas = desired_;
  return e;
}

void Cluster::dispatch() {
  const auto concurrency = config_.service.per_pod_concurrency;
  while (!queue_.empty()) {
    const RequestId id = queue_.front();
    if (requests_[id].state != RequestState::queued) {
      queue_.pop_front();
      continue;
    }
    Pod* target = nullptr;
    for (auto& [pid, pod] : pods_) {
      if (pod.record.ready && !pod.record.draining && pod.record.in_flight < concurrency) {
        target = &pod;
        break;
      }
    }
    if (target == nullptr) return;
    queue_.pop_front();

    auto& rec = target->record;
    const auto slot = static_cast<std::size_t>(
        std::find(target->occupied.begin(), target->occupied.end(), false) -
        target->occupied.begin());
    const double start = now_;
    const double end = start + sample_service_time();
    auto& req = requests_[id];
    req.state = RequestState::in_service;
    rec.busy_until[slot] = end;
    target->occupied[slot] = true;
    ++rec.in_flight;
    target->busy.emplace_back(start, end);
    schedule(end, Action::service_end, id, rec.id, slot);
    if (end - req.arrival > config_.request_timeout) {
      schedule(req.arrival + config_.request_timeout, Action::timeout_in_service, id, rec.id);
    }
  }
}

void Cluster::handle(const Scheduled& ev, std::vector<SimEvent>& out) {
  switch (ev.action) {
    case Action::arrival: {
      requests_[ev.request].state = RequestState::queued;
      queue_.push_back(ev.request);
      schedule(now_ + config_.request_timeout, Action::timeout_in_queue, ev.request);
      dispatch();
      break;
    }
    case Action::timeout_in_queue: {
      auto& req = requests_[ev.request];
      if (req.state != RequestState::queued) break;
      req.state = RequestState::done;
      ++failed_;
      auto e = make_event(SimEventKind::failure);
      e.request = ev.request;
      e.latency = config_.request_timeout;
      out.push_back(e);
      break;
    }
    case Action::timeout_in_service: {
      auto& req = requests_[ev.request];
      if (req.state != RequestState::in_service) break;
      req.state = RequestState::done;
      ++failed_;
      auto e = make_event(SimEventKind::failure);
      e.request = ev.request;
      e.pod = ev.pod;
      e.latency = config_.request_timeout;
      out.push_back(e);
      break;
    }
    case Action::service_end: {
      auto it = pods_.find(ev.pod);
      if (it != pods_.end()) {
        it->second.occupied[ev.slot] = false;
        --it->second.record.in_flight;
      }
      auto& req = requests_[ev.request];
      if (req.state == RequestState::in_service) {
        req.state = RequestState::done;
        ++completed_;
        auto e = make_event(SimEventKind::completion);
        e.request = ev.request;
        e.pod = ev.pod;
        e.latency = now_ - req.arrival;
        out.push_back(e);
      }
      if (it != pods_.end() && it->second.record.draining && it->second.record.in_flight == 0) {
        pods_.erase(it);
      }
      dispatch();
      break;
    }
    case Action::pod_ready: {
      auto it = pods_.find(ev.pod);
      if (it == pods_.end()) break;  // cancelled before it came up
      it->second.record.ready = true;
      ++ready_;
      auto e = make_event(SimEventKind::pod_ready);
      e.pod = ev.pod;
      out.push_back(e);
      dispatch();
      break;
    }
  }
}

std::vector<SimEvent> Cluster::advance(double until) {
  if (until < now_) throw ValidationError("advance: target time precedes current time");
  std::vector<SimEvent> out;
  while (!agenda_.empty() && agenda_.top().time <= until) {
    const Scheduled ev = agenda_.top();
    agenda_.pop();
    now_ = ev.time;
    handle(ev, out);
  }
  now_ = until;
  prune_busy();
  return out;
}

void Cluster::prune_busy() {
  const double horizon = now_ - config_.utilization_window;
  for (auto& [id, pod] : pods_) {
    while (!pod.busy.empty() && pod.busy.front().second < horizon) pod.busy.pop_front();
  }
}

std::optional<double> Cluster::next_event_time() const {
  if (agenda_.empty()) return std::nullopt;
  return agenda_.top().time;
}

std::vector<SimEvent> Cluster::set_desired_replicas(int n) {
  std::vector<SimEvent> out;
  const int clamped = std::clamp(n, config_.min_replicas, config_.max_replicas);
  if (clamped != n) out.push_back(make_event(SimEventKind::clamp_warning));
  n = clamped;
  if (n == desired_) return out;

  if (n > desired_) {
    for (int i = desired_; i < n; ++i) {
      Pod pod;
      pod.record.id = next_pod_id_++;
      pod.record.ready_at = now_ + config_.startup_delay;
      pod.record.busy_until.assign(static_cast<std::size_t>(config_.service.per_pod_concurrency),
                                   pod.record.ready_at);
      pod.occupied.assign(pod.record.busy_until.size(), false);
      ready_at_[pod.record.id] = pod.record.ready_at;
      schedule(pod.record.ready_at, Action::pod_ready, 0, pod.record.id);
      pods_.emplace(pod.record.id, std::move(pod));
    }
  } else {
    int remove = desired_ - n;
    // Cancel the most recently requested pending pods first.
    for (auto it = pods_.rbegin(); it != pods_.rend() && remove > 0;) {
      if (!it->second.record.ready && !it->second.record.draining) {
        it = std::make_reverse_iterator(pods_.erase(std::next(it).base()));
        --remove;
      } else {
        ++it;
      }
    }
    // Then idle ready pods, newest first.
    for (auto it = pods_.rbegin(); it != pods_.rend() && remove > 0;) {
      auto& rec = it->second.record;
      if (rec.ready && !rec.draining && rec.in_flight == 0) {
        it = std::make_reverse_iterator(pods_.erase(std::next(it).base()));
        --ready_;
        --remove;
      } else {
        ++it;
      }
    }
    // Then busy pods, least loaded first; they finish what they hold.
    if (remove > 0) {
      std::vector<Pod*> busy;
      for (auto& [id, pod] : pods_) {
        if (pod.record.ready && !pod.record.draining) busy.push_back(&pod);
      }
      std::stable_sort(busy.begin(), busy.end(), [](const Pod* a, const Pod* b) {
        if (a->record.in_flight != b->record.in_flight) {
          return a->record.in_flight < b->record.in_flight;
        }
        return a->record.id > b->record.id;
      });
      for (Pod* pod : busy) {
        if (remove == 0) break;
        pod->record.ready = false;
        pod->record.draining = true;
        --ready_;
        --remove;
      }
    }
  }
  desired_ = n;
  out.push_back(make_event(SimEventKind::scaled));
  return out;
}

double Cluster::cpu_utilization() const {
  if (ready_ <= 0) return 1.0;
  const double window = config_.utilization_window;
  const double lo = now_ - window;
  double busy = 0.0;
  for (const auto& [id, pod] : pods_) {
    if (!pod.record.ready || pod.record.draining) continue;
    for (const auto& [start, end] : pod.busy) {
      const double overlap = std::min(end, now_) - std::max(start, lo);
      if (overlap > 0.0) busy += overlap;
    }
  }
  const double capacity =
      static_cast<double>(ready_) * config_.service.per_pod_concurrency * window;
  return std::clamp(busy / capacity, 0.0, 1.0);
}

std::size_t Cluster::pending_replicas() const {
  return static_cast<std::size_t>(std::count_if(pods_.begin(), pods_.end(), [](const auto& kv) {
    return !kv.second.record.ready && !kv.second.record.draining;
  }));
}

std::optional<double> Cluster::pod_ready_at(PodId id) const {
  if (auto it = ready_at_.find(id); it != ready_at_.end()) return it->second;
  return std::nullopt;
}

ClusterSnapshot Cluster::snapshot() const {
  ClusterSnapshot s;
  s.now = now_;
  s.desired_replicas = desired_;
  s.ready_replicas = ready_;
  for (const auto& [id, pod] : pods_) {
    if (!pod.record.ready && !pod.record.draining) s.pending.push_back(pod.record);
  }
  s.queued = static_cast<std::size_t>(std::count_if(queue_.begin(), queue_.end(), [&](RequestId r) {
    return requests_[r].state == RequestState::queued;
  }));
  for (const auto& r : requests_) {
    if (r.state == RequestState::in_service) ++s.in_service;
    if (r.state == RequestState::pending_arrival) ++s.arriving;
  }
  s.submitted = submitted_;
  s.completed = completed_;
  s.failed = failed_;
  s.in_flight = in_flight();
  return s;
}

}  // namespace predscale
