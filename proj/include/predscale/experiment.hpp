#pragma once

// Experiment orchestration: trace -> batched load -> target -> autoscaler -> score.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "predscale/autoscaler.hpp"
#include "predscale/config.hpp"
#include "predscale/loadgen.hpp"
#include "predscale/report.hpp"
#include "predscale/simcluster.hpp"

namespace predscale {

/// Simulated cluster plus its autoscaler, exposed to the load generator as a
/// Target running in virtual time. Autoscaler ticks interleave with request
/// processing, so capacity can change while a batch is still draining.
class SimulatedWorld final : public Target {
 public:
  /// `time_compression` paces virtual time against the wall clock; pass
  /// std::nullopt to run as fast as possible.
  SimulatedWorld(ClusterConfig cluster, AutoscalerConfig autoscaler,
                 std::vector<Recommendation> lookahead = {},
                 std::optional<double> time_compression = std::nullopt,
                 bool keep_events = false);

  double now() override { return cluster_.now(); }
  void wait_until(double t) override;
  std::vector<RequestOutcome> fire(std::size_t count, double timeout) override;

  const Cluster& cluster() const { return cluster_; }
  const PredictiveAutoscaler& autoscaler() const { return scaler_; }
  const std::vector<TickRecord>& ticks() const { return ticks_; }
  const std::vector<SimEvent>& events() const { return events_; }
  const std::vector<ReplicaStep>& ready_steps() const { return ready_steps_; }
  const std::vector<ReplicaStep>& desired_steps() const { return desired_steps_; }

 private:
  void step_to(double t);
  void absorb(std::vector<SimEvent> events);
  void record_step(std::vector<ReplicaStep>& steps, double time, int replicas);
  void pace(double virtual_time) const;

  Cluster cluster_;
  PredictiveAutoscaler scaler_;
  ScalingHooks hooks_;
  std::optional<double> compression_;
  bool keep_events_;
  std::chrono::steady_clock::time_point wall_start_;

  std::vector<TickRecord> ticks_;
  std::vector<SimEvent> events_;
  std::vector<ReplicaStep> ready_steps_;
  std::vector<ReplicaStep> desired_steps_;

  // Outcome collection for the batch currently in flight.
  RequestId batch_first_ = 0;
  std::vector<std::optional<RequestOutcome>>* batch_outcomes_ = nullptr;
  std::size_t unresolved_ = 0;
};

/// Runs one experiment. Writes the run artifacts when cfg.output.dir is set.
/// Throws ConfigError/StartupError before any load is sent if the config is
/// invalid, the trace unreadable or the live target unreachable.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Loads and windows the configured trace.
Trace load_experiment_trace(const ExperimentConfig& cfg);

struct ComparisonResult {
  ComparisonTable table;
  std::vector<ExperimentReport> reports;
};

/// Runs every model for `repetitions` runs each. Repetition r uses seed
/// cfg.seed + r. Runs go to <output.dir>/<model>-rep<r>/ and the table to
/// <output.dir>/comparison.{csv,json}. If a run fails, the table of the runs
/// completed so far is written before the error propagates.
ComparisonResult compare_models(const ExperimentConfig& cfg,
                                std::span<const ForecastModel> models, int repetitions);

}  // namespace predscale
