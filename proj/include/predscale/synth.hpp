#pragma once

// Seeded synthetic arrival traces for desk-scale experiments.

#include <cstdint>
#include <vector>

#include "predscale/trace.hpp"

namespace predscale {

/// A burst on top of the baseline: linear ramp up, plateau, linear ramp down.
struct Burst {
  double start = 0.0;
  double ramp = 10.0;
  double hold = 60.0;
  double peak_rate = 40.0;  ///< requests/s added at the plateau
};

struct SynthOptions {
  double duration = 1800.0;
  double base_rate = 10.0;        ///< requests/s
  double wave_amplitude = 0.3;    ///< slow sinusoidal swing, fraction of base_rate
  double wave_period = 900.0;
  std::vector<Burst> bursts;
  std::uint64_t seed = 1;
};

/// Default profile used for the bundled bursty trace.
SynthOptions bursty_profile(double duration = 1800.0, std::uint64_t seed = 1998);

/// Arrival rate (requests/s) at time t under `opts`.
double synth_rate(const SynthOptions& opts, double t);

/// Poisson arrivals following synth_rate, one-second resolution, sorted.
Trace synthesize_trace(const SynthOptions& opts);

/// Evenly spaced arrivals at `rate` requests/s over [0, duration).
Trace constant_rate_trace(double rate, double duration);

}  // namespace predscale
