#pragma once

// Experiment configuration, loaded from a JSON file and echoed verbatim
// (after defaults are filled in) into every report.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "predscale/autoscaler.hpp"
#include "predscale/scoring.hpp"
#include "predscale/simcluster.hpp"
#include "predscale/trace.hpp"

namespace predscale {

enum class RunMode { simulate, live };

std::string_view to_string(RunMode mode);

struct TraceSource {
  std::string path;                   ///< as written in the config
  std::filesystem::path resolved;     ///< relative to the config file's directory
  TraceFormat format = TraceFormat::text;
  BinaryRecordLayout layout;
  bool rebase = true;                 ///< binary traces only
  double window_start = 0.0;
};

struct LiveOptions {
  std::string url;
  std::string body = R"json({"language":"python","code":"print(\"hello there\")"})json";
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
  int replicas = 1;  ///< replica count charged in the score; nothing is actuated
  std::size_t max_connections = 1024;
};

struct OutputOptions {
  std::filesystem::path dir;  ///< empty: keep results in memory only
  bool dump_latencies = false;
  bool dump_sim_events = false;
};

struct ExperimentConfig {
  RunMode mode = RunMode::simulate;
  TraceSource trace;
  LiveOptions live;
  double batch_interval = 5.0;
  double duration = 1800.0;
  double request_timeout = 30.0;
  double time_compression = 3600.0;  ///< virtual seconds per wall second (simulate)
  std::uint64_t seed = 1;

  ServiceModel service;
  int initial_replicas = 1;
  double startup_delay = 10.0;
  double utilization_window = 15.0;

  AutoscalerConfig autoscaler;
  PenaltyParams penalty;
  OutputOptions output;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  ClusterConfig cluster_config() const;
};

/// Reads a config file. Relative trace paths resolve against its directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds a config from parsed JSON. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Binary record layout from a JSON object with the keys used under
/// trace.layout in the config.
BinaryRecordLayout layout_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BinaryRecordLayout& layout);

}  // namespace predscale
