#include "predscale/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "predscale/errors.hpp"
#include "predscale/http_target.hpp"

namespace predscale {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t interval_count(double duration, double interval) {
  const double n = duration / interval;
  const double nearest = std::round(n);
  if (std::abs(n - nearest) < 1e-9) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(n));
}

std::vector<ReportRow> build_rows(const ExperimentConfig& cfg,
                                  const std::vector<BatchResult>& batches,
                                  const std::vector<ReplicaStep>& ready,
                                  const std::vector<ReplicaStep>& desired) {
  const ReplicaTimeline ready_line{ready, 0.0};
  const ReplicaTimeline desired_line{desired, 0.0};
  std::size_t n = interval_count(cfg.duration, cfg.batch_interval);
  if (!batches.empty()) n = std::max(n, batches.back().index + 1);

  std::vector<ReportRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].time_s = static_cast<double>(i) * cfg.batch_interval;
    rows[i].ready_replicas = ready_line.at(rows[i].time_s);
    rows[i].desired_replicas = desired_line.at(rows[i].time_s);
  }
  for (const auto& b : batches) {
    auto& row = rows[b.index];
    row.requests = b.dispatched();
    row.succeeded = b.succeeded;
    row.failed = b.failed;
    row.mean_latency_s = b.mean_response_time;
  }
  return rows;
}

}  // namespace

SimulatedWorld::SimulatedWorld(ClusterConfig cluster, AutoscalerConfig autoscaler,
                               std::vector<Recommendation> lookahead,
                               std::optional<double> time_compression, bool keep_events)
    : cluster_(std::move(cluster)),
      scaler_(std::move(autoscaler), std::move(lookahead)),
      compression_(time_compression),
      keep_events_(keep_events),
      wall_start_(Clock::now()) {
  hooks_.utilization = [this] { return cluster_.cpu_utilization(); };
  hooks_.current_replicas = [this] { return cluster_.desired_replicas(); };
  hooks_.apply = [this](int n) { absorb(cluster_.set_desired_replicas(n)); };
  ready_steps_.push_back({cluster_.now(), cluster_.ready_replicas()});
  desired_steps_.push_back({cluster_.now(), cluster_.desired_replicas()});
}

void SimulatedWorld::pace(double virtual_time) const {
  if (!compression_) return;
  const auto offset = std::chrono::duration<double>(virtual_time / *compression_);
  std::this_thread::sleep_until(wall_start_ + std::chrono::duration_cast<Clock::duration>(offset));
}

void SimulatedWorld::record_step(std::vector<ReplicaStep>& steps, double time, int replicas) {
  if (steps.back().replicas == replicas) return;
  if (steps.back().time == time) {
    steps.back().replicas = replicas;
    // Collapsing may have made it equal to the step before.
    if (steps.size() > 1 && steps[steps.size() - 2].replicas == replicas) steps.pop_back();
    return;
  }
  steps.push_back({time, replicas});
}

void SimulatedWorld::absorb(std::vector<SimEvent> events) {
  for (auto& e : events) {
    switch (e.kind) {
      case SimEventKind::completion:
      case SimEventKind::failure:
        if (batch_outcomes_ != nullptr && e.request && *e.request >= batch_first_ &&
            *e.request < batch_first_ + batch_outcomes_->size()) {
          auto& slot = (*batch_outcomes_)[*e.request - batch_first_];
          slot = e.kind == SimEventKind::completion
                     ? RequestOutcome::success(*e.latency)
                     : RequestOutcome::failed(FailureKind::timeout, *e.latency);
          --unresolved_;
        }
        break;
      case SimEventKind::pod_ready:
      case SimEventKind::scaled:
        record_step(ready_steps_, e.time, e.ready_replicas);
        record_step(desired_steps_, e.time, e.desired_replicas);
        break;
      case SimEventKind::clamp_warning:
        break;
    }
    if (keep_events_) events_.push_back(std::move(e));
  }
}

void SimulatedWorld::step_to(double t) {
  for (;;) {
    const double tick = scaler_.next_tick();
    if (tick > t) break;
    pace(tick);
    absorb(cluster_.advance(tick));
    auto records = scaler_.tick(tick, hooks_);
    ticks_.insert(ticks_.end(), records.begin(), records.end());
  }
  absorb(cluster_.advance(t));
}

void SimulatedWorld::wait_until(double t) {
  if (t <= cluster_.now()) return;
  pace(t);
  step_to(t);
}

std::vector<RequestOutcome> SimulatedWorld::fire(std::size_t count, double timeout) {
  (void)timeout;  // the cluster applies its own configured timeout
  std::vector<RequestOutcome> result;
  if (count == 0) return result;

  std::vector<std::optional<RequestOutcome>> outcomes(count);
  const double at = cluster_.now();
  batch_first_ = cluster_.submit(at);
  for (std::size_t i = 1; i < count; ++i) cluster_.submit(at);
  batch_outcomes_ = &outcomes;
  unresolved_ = count;
  while (unresolved_ > 0) {
    const auto next = cluster_.next_event_time();
    if (!next) {
      batch_outcomes_ = nullptr;
      throw std::logic_error("simulation stalled with unresolved requests");
    }
    step_to(*next);
  }
  batch_outcomes_ = nullptr;

  result.reserve(count);
  for (auto& o : outcomes) result.push_back(*o);
  return result;
}

Trace load_experiment_trace(const ExperimentConfig& cfg) {
  const auto events =
      load_trace_file(cfg.trace.resolved, cfg.trace.format, cfg.trace.layout, cfg.trace.rebase);
  return slice_window(events, cfg.trace.window_start, cfg.duration);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto wall0 = Clock::now();
  cfg.validate();

  Trace events;
  try {
    events = load_experiment_trace(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw StartupError(std::string("cannot load trace: ") + e.what());
  }

  ExperimentReport report;
  report.config = cfg;
  report.model = std::string(to_string(cfg.autoscaler.model));
  report.trace_events = events.size();
  const LoadOptions load{cfg.batch_interval, cfg.request_timeout, cfg.output.dump_latencies};

  std::vector<ReplicaStep> ready;
  std::vector<ReplicaStep> desired;
  if (cfg.mode == RunMode::simulate) {
    std::vector<Recommendation> lookahead;
    if (cfg.autoscaler.model == ForecastModel::oracle) {
      // Reactive pass over the same trace and seed; its recommendations are
      // the oracle's view of the future.
      auto reactive = cfg.autoscaler;
      reactive.model = ForecastModel::hold;
      SimulatedWorld pass(cfg.cluster_config(), reactive);
      run_load(events, pass, load);
      pass.wait_until(std::max(cfg.duration, pass.now()));
      lookahead = pass.autoscaler().reactive_log();
    }
    SimulatedWorld world(cfg.cluster_config(), cfg.autoscaler, std::move(lookahead),
                         cfg.time_compression, cfg.output.dump_sim_events);
    report.batches = run_load(events, world, load);
    report.end_time = std::max(cfg.duration, world.now());
    world.wait_until(report.end_time);
    ready = world.ready_steps();
    desired = world.desired_steps();
    report.ticks = world.ticks();
    report.sim_events = world.events();
  } else {
    HttpTargetOptions opts;
    opts.url = cfg.live.url;
    opts.body = cfg.live.body;
    opts.content_type = cfg.live.content_type;
    opts.headers = cfg.live.headers;
    opts.max_connections = cfg.live.max_connections;
    HttpTarget target(std::move(opts));
    if (!target.probe()) throw StartupError("live target unreachable: " + cfg.live.url);
    report.batches = run_load(events, target, load);
    report.end_time = std::max(cfg.duration, target.now());
    target.wait_until(report.end_time);
    ready = desired = {{0.0, cfg.live.replicas}};
  }

  report.timeline = ReplicaTimeline{ready, report.end_time};
  report.rows = build_rows(cfg, report.batches, ready, desired);
  report.score = penalty(report.batches, report.timeline, cfg.penalty);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - wall0).count();
  if (!cfg.output.dir.empty()) write_run_artifacts(report, cfg.output.dir);
  return report;
}

ComparisonResult compare_models(const ExperimentConfig& cfg,
                                std::span<const ForecastModel> models, int repetitions) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (models.empty()) throw ConfigError("at least one model is required");
  ComparisonResult result;
  for (const auto model : models) {
    for (int rep = 0; rep < repetitions; ++rep) {
      auto run_cfg = cfg;
      run_cfg.autoscaler.model = model;
      run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(rep);
      const std::string name = std::string(to_string(model)) + "-rep" + std::to_string(rep);
      run_cfg.output.dir = cfg.output.dir.empty() ? std::filesystem::path{} : cfg.output.dir / name;
      try {
        result.reports.push_back(run_experiment(run_cfg));
      } catch (...) {
        if (!cfg.output.dir.empty()) {
          result.table.recompute_aggregates();
          write_comparison(result.table, cfg.output.dir);
        }
        throw;
      }
      const auto& rep_report = result.reports.back();
      result.table.rows.push_back({std::string(to_string(model)), rep, run_cfg.seed,
                                   rep_report.score.total, rep_report.score.normalized_total,
                                   rep_report.score.total_failed, mean_latency(rep_report.batches),
                                   run_cfg.output.dir.empty() ? std::string{} : name});
    }
  }
  result.table.recompute_aggregates();
  if (!cfg.output.dir.empty()) write_comparison(result.table, cfg.output.dir);
  return result;
}

}  // namespace predscale
