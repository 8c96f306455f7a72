#pragma once

// Experiment reports and their on-disk artifacts.
//
// A run directory holds:
//   report.csv        per-interval rows (requests, outcomes, latency, replicas)
//   report.json       penalty breakdown, parameters and config echo
//   batches.jsonl     one BatchResult per line
//   autoscaler.jsonl  one tick record per line
//   timeline.json     ready-replica step function
//   run_meta.json     wall-clock duration and host details (not deterministic)
//   events.jsonl      simulator events, only when requested

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "predscale/autoscaler.hpp"
#include "predscale/config.hpp"
#include "predscale/loadgen.hpp"
#include "predscale/scoring.hpp"
#include "predscale/simcluster.hpp"

namespace predscale {

struct ReportRow {
  double time_s = 0.0;
  std::uint64_t requests = 0;
  std::uint64_t succeeded = 0;
  std::uint64_t failed = 0;
  std::optional<double> mean_latency_s;
  int ready_replicas = 0;
  int desired_replicas = 0;

  bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport {
  std::string model;
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  PenaltyBreakdown score;
  std::vector<BatchResult> batches;
  ReplicaTimeline timeline;
  std::vector<TickRecord> ticks;
  std::vector<SimEvent> sim_events;  ///< only when output.dump_sim_events
  std::uint64_t trace_events = 0;
  double end_time = 0.0;      ///< virtual/run time at which the run closed
  double wall_seconds = 0.0;  ///< wall-clock duration
};

inline constexpr const char* kReportCsvHeader =
    "time_s,requests,succeeded,failed,mean_latency_s,ready_replicas,desired_replicas";

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
/// Writes the CSV to `path`. IoError (with the path) on failure.
void emit_report_csv(const ExperimentReport& report, const std::filesystem::path& path);

std::vector<ReportRow> parse_report_csv(std::istream& in);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// Deterministic summary: everything but wall-clock data.
nlohmann::json report_json(const ExperimentReport& report);

/// Writes every artifact of one run into `dir` (created if needed).
void write_run_artifacts(const ExperimentReport& report, const std::filesystem::path& dir);

std::vector<BatchResult> read_batch_log(const std::filesystem::path& path);
void write_batch_log(const std::filesystem::path& path, const std::vector<BatchResult>& batches);
ReplicaTimeline read_timeline(const std::filesystem::path& path);

/// Score report produced by `score`: breakdown plus the parameters used.
nlohmann::json score_report_json(const PenaltyBreakdown& breakdown, const PenaltyParams& params);

struct ComparisonRow {
  std::string model;
  int repetition = 0;
  std::uint64_t seed = 0;
  double penalty_total = 0.0;
  double normalized_total = 0.0;
  std::uint64_t failed = 0;
  double mean_latency = 0.0;
  std::string report_dir;
};

struct ComparisonAggregate {
  std::string model;
  int runs = 0;
  double mean_penalty = 0.0;
  double mean_normalized = 0.0;
  double mean_failed = 0.0;
  double mean_latency = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonAggregate> aggregates;  ///< one per model, in first-seen order

  void recompute_aggregates();
};

void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
nlohmann::json to_json(const ComparisonTable& table);
void write_comparison(const ComparisonTable& table, const std::filesystem::path& dir);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace predscale
