#pragma once

// Drives a Cluster through a random workload, one scheduled event at a time.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "gen.hpp"
#include "predscale/simcluster.hpp"

namespace simdrive {

using predscale::Cluster;
using predscale::ClusterConfig;
using predscale::SimEvent;

struct Workload {
  std::vector<double> arrivals;                 // sorted
  std::vector<std::pair<double, int>> scaling;  // (time, desired), sorted
};

Workload random_workload(gen::Rng& r, double span) {
  Workload w;
  const int n = r.integer(0, 400);
  for (int i = 0; i < n; ++i) w.arrivals.push_back(std::round(r.uniform(0.0, span) * 1000) / 1000);
  std::sort(w.arrivals.begin(), w.arrivals.end());
  const int k = r.integer(0, 8);
  for (int i = 0; i < k; ++i) w.scaling.push_back({std::round(r.uniform(0.0, span)), r.integer(1, 10)});
  std::sort(w.scaling.begin(), w.scaling.end());
  return w;
}

ClusterConfig random_config(gen::Rng& r) {
  ClusterConfig c;
  c.service.base_service_time = r.uniform(0.05, 2.0);
  c.service.jitter_fraction = r.coin() ? 0.0 : r.uniform(0.0, 0.9);
  c.service.per_pod_concurrency = r.integer(1, 4);
  c.service.rng_seed = r.u64(0, 1u << 30);
  c.initial_replicas = r.integer(1, 3);
  c.startup_delay = r.uniform(0.0, 20.0);
  c.request_timeout = r.uniform(1.0, 30.0);
  return c;
}

// Feeds the workload in time order and calls `check` after every step.
template <typename Check>
std::vector<SimEvent> drive(Cluster& c, const Workload& w, Check&& check) {
  std::vector<SimEvent> all;
  auto take = [&](std::vector<SimEvent> ev) {
    all.insert(all.end(), ev.begin(), ev.end());
    check(c, all);
  };
  std::size_t ai = 0, si = 0;
  while (ai < w.arrivals.size() || si < w.scaling.size()) {
    const bool arrival_next =
        si >= w.scaling.size() || (ai < w.arrivals.size() && w.arrivals[ai] <= w.scaling[si].first);
    const double t = arrival_next ? w.arrivals[ai] : w.scaling[si].first;
    // Step through pending events one at a time up to t.
    while (auto next = c.next_event_time()) {
      if (*next > t) break;
      take(c.advance(*next));
    }
    take(c.advance(t));
    if (arrival_next) {
      c.submit(t);
      ++ai;
    } else {
      take(c.set_desired_replicas(w.scaling[si].second));
      ++si;
    }
  }
  while (auto next = c.next_event_time()) take(c.advance(*next));
  return all;
}

}  // namespace simdrive
