#include "predscale/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "predscale/errors.hpp"

namespace predscale {

SynthOptions bursty_profile(double duration, std::uint64_t seed) {
  SynthOptions opts;
  opts.duration = duration;
  opts.base_rate = 8.0;
  opts.wave_amplitude = 0.35;
  opts.wave_period = 1200.0;
  opts.seed = seed;
  // Spikes of differing steepness and height, roughly one every five minutes.
  opts.bursts = {
      {150.0, 20.0, 90.0, 30.0},
      {420.0, 5.0, 60.0, 45.0},
      {700.0, 40.0, 150.0, 25.0},
      {1020.0, 10.0, 45.0, 50.0},
      {1260.0, 30.0, 120.0, 35.0},
      {1560.0, 5.0, 75.0, 40.0},
  };
  std::erase_if(opts.bursts, [&](const Burst& b) { return b.start >= duration; });
  return opts;
}

double synth_rate(const SynthOptions& opts, double t) {
  double rate = opts.base_rate *
                (1.0 + opts.wave_amplitude * std::sin(2.0 * std::numbers::pi * t / opts.wave_period));
  for (const auto& b : opts.bursts) {
    const double dt = t - b.start;
    if (dt < 0.0) continue;
    double shape = 0.0;
    if (dt < b.ramp) {
      shape = dt / b.ramp;
    } else if (dt < b.ramp + b.hold) {
      shape = 1.0;
    } else if (dt < 2.0 * b.ramp + b.hold) {
      shape = 1.0 - (dt - b.ramp - b.hold) / b.ramp;
    }
    rate += shape * b.peak_rate;
  }
  return std::max(rate, 0.0);
}

Trace synthesize_trace(const SynthOptions& opts) {
  if (!(opts.duration > 0.0)) throw ValidationError("synth: duration must be > 0");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> offset(0.0, 1.0);
  Trace out;
  const auto seconds = static_cast<std::int64_t>(std::ceil(opts.duration));
  for (std::int64_t s = 0; s < seconds; ++s) {
    const double mid = static_cast<double>(s) + 0.5;
    std::poisson_distribution<int> count(synth_rate(opts, mid));
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(s) + offset(rng);
      if (t < opts.duration) out.push_back(TraceEvent::from_seconds(t));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Trace constant_rate_trace(double rate, double duration) {
  if (!(rate > 0.0) || !(duration > 0.0)) {
    throw ValidationError("constant_rate_trace: rate and duration must be > 0");
  }
  Trace out;
  const double gap = 1.0 / rate;
  for (std::int64_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * gap;
    if (t >= duration) break;
    out.push_back(TraceEvent::from_seconds(t));
  }
  return out;
}

}  // namespace predscale
