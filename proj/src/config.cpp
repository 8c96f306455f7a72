#include "predscale/config.hpp"

#include <fstream>
#include <set>

#include "predscale/errors.hpp"

namespace predscale {

namespace {

using nlohmann::json;

// Typed, path-aware access to one JSON object of the config.
class Section {
 public:
  Section(const json& j, std::string path, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.contains(key)) throw ConfigError("unknown config key '" + path_ + key + "'");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void read(const std::string& key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + path_ + key + "' has the wrong type");
    }
  }

  Section child(const std::string& key, std::set<std::string> allowed) const {
    return Section(j_.at(key), path_ + key + ".", std::move(allowed));
  }

 private:
  std::string where() const { return path_.empty() ? "config " : "config '" + path_ + "' "; }

  const json& j_;
  std::string path_;
};

void read_layout(const Section& s, BinaryRecordLayout& layout) {
  s.read("record_size", layout.record_size);
  s.read("timestamp_offset", layout.timestamp_offset);
  s.read("timestamp_width", layout.timestamp_width);
  std::string endian = layout.endianness == Endianness::big ? "big" : "little";
  s.read("endianness", endian);
  if (endian != "big" && endian != "little") {
    throw ConfigError("trace.layout.endianness must be 'big' or 'little'");
  }
  layout.endianness = endian == "big" ? Endianness::big : Endianness::little;
  std::string unit = layout.timestamp_unit == TimestampUnit::seconds ? "seconds" : "milliseconds";
  s.read("timestamp_unit", unit);
  if (unit != "seconds" && unit != "milliseconds") {
    throw ConfigError("trace.layout.timestamp_unit must be 'seconds' or 'milliseconds'");
  }
  layout.timestamp_unit = unit == "seconds" ? TimestampUnit::seconds : TimestampUnit::milliseconds;
}

}  // namespace

json to_json(const BinaryRecordLayout& l) {
  return {{"record_size", l.record_size},
          {"timestamp_offset", l.timestamp_offset},
          {"timestamp_width", l.timestamp_width},
          {"endianness", l.endianness == Endianness::big ? "big" : "little"},
          {"timestamp_unit", l.timestamp_unit == TimestampUnit::seconds ? "seconds" : "milliseconds"}};
}

BinaryRecordLayout layout_from_json(const json& j) {
  BinaryRecordLayout layout;
  read_layout(Section(j, "layout.", {"record_size", "timestamp_offset", "timestamp_width",
                                     "endianness", "timestamp_unit", "note"}),
              layout);
  try {
    layout.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return layout;
}

std::string_view to_string(RunMode mode) {
  return mode == RunMode::simulate ? "simulate" : "live";
}

void ExperimentConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (!(batch_interval > 0.0)) throw ConfigError("batch_interval must be > 0");
  if (!(request_timeout > 0.0)) throw ConfigError("request_timeout must be > 0");
  if (!(time_compression >= 1.0)) throw ConfigError("time_compression must be >= 1");
  if (mode == RunMode::live && live.url.empty()) throw ConfigError("live mode needs live.url");
  if (mode == RunMode::simulate && !live.url.empty()) {
    throw ConfigError("simulate mode must not set live.url (exactly one target)");
  }
  if (mode == RunMode::live) {
    if (live.replicas < 1) throw ConfigError("live.replicas must be >= 1");
    if (live.max_connections < 1) throw ConfigError("live.max_connections must be >= 1");
  }
  if (trace.path.empty()) throw ConfigError("trace.path is required");
  if (trace.window_start < 0.0) throw ConfigError("trace.window_start must be >= 0");
  try {
    if (trace.format == TraceFormat::binary) trace.layout.validate();
    service.validate();
    penalty.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  autoscaler.validate();
  if (autoscaler.model == ForecastModel::oracle && mode == RunMode::live) {
    throw ConfigError("the oracle model needs a lookahead pass and only runs in simulate mode");
  }
  if (initial_replicas < autoscaler.min_replicas || initial_replicas > autoscaler.max_replicas) {
    throw ConfigError("cluster.initial_replicas must be within [min_replicas, max_replicas]");
  }
  if (!(startup_delay >= 0.0)) throw ConfigError("cluster.startup_delay must be >= 0");
  if (!(utilization_window > 0.0)) throw ConfigError("cluster.utilization_window must be > 0");
}

ClusterConfig ExperimentConfig::cluster_config() const {
  ClusterConfig c;
  c.service = service;
  c.service.rng_seed = seed;
  c.min_replicas = autoscaler.min_replicas;
  c.max_replicas = autoscaler.max_replicas;
  c.initial_replicas = initial_replicas;
  c.startup_delay = startup_delay;
  c.utilization_window = utilization_window;
  c.request_timeout = request_timeout;
  return c;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  const Section root(j, "",
                     {"mode", "seed", "duration", "batch_interval", "request_timeout",
                      "time_compression", "trace", "service", "cluster", "autoscaler", "penalty",
                      "live", "output"});
  std::string mode = "simulate";
  root.read("mode", mode);
  if (mode == "simulate") {
    cfg.mode = RunMode::simulate;
  } else if (mode == "live") {
    cfg.mode = RunMode::live;
  } else {
    throw ConfigError("mode must be 'simulate' or 'live'");
  }
  root.read("seed", cfg.seed);
  root.read("duration", cfg.duration);
  root.read("batch_interval", cfg.batch_interval);
  root.read("request_timeout", cfg.request_timeout);
  root.read("time_compression", cfg.time_compression);

  if (!root.has("trace")) throw ConfigError("config needs a 'trace' section");
  {
    const auto s = root.child("trace", {"path", "format", "window_start", "rebase", "layout"});
    s.read("path", cfg.trace.path);
    std::string format = "text";
    s.read("format", format);
    try {
      cfg.trace.format = parse_trace_format(format);
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("trace.format: ") + e.what());
    }
    s.read("window_start", cfg.trace.window_start);
    s.read("rebase", cfg.trace.rebase);
    if (s.has("layout")) {
      read_layout(s.child("layout", {"record_size", "timestamp_offset", "timestamp_width",
                                     "endianness", "timestamp_unit", "note"}),
                  cfg.trace.layout);
    }
    std::filesystem::path p(cfg.trace.path);
    cfg.trace.resolved = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  if (root.has("service")) {
    const auto s = root.child("service", {"base_service_time", "jitter_fraction",
                                          "per_pod_concurrency"});
    s.read("base_service_time", cfg.service.base_service_time);
    s.read("jitter_fraction", cfg.service.jitter_fraction);
    s.read("per_pod_concurrency", cfg.service.per_pod_concurrency);
  }
  if (root.has("cluster")) {
    const auto s = root.child("cluster", {"startup_delay", "utilization_window", "initial_replicas"});
    s.read("startup_delay", cfg.startup_delay);
    s.read("utilization_window", cfg.utilization_window);
    s.read("initial_replicas", cfg.initial_replicas);
  }
  if (root.has("autoscaler")) {
    const auto s = root.child(
        "autoscaler", {"cpu_target", "tolerance", "min_replicas", "max_replicas",
                       "reactive_interval", "forecast_interval", "forecast_horizon", "model",
                       "knn_k", "combination", "history_capacity", "history_span"});
    auto& a = cfg.autoscaler;
    s.read("cpu_target", a.cpu_target);
    s.read("tolerance", a.tolerance);
    s.read("min_replicas", a.min_replicas);
    s.read("max_replicas", a.max_replicas);
    s.read("reactive_interval", a.reactive_interval);
    s.read("forecast_interval", a.forecast_interval);
    s.read("forecast_horizon", a.forecast_horizon);
    std::string model{to_string(a.model)};
    s.read("model", model);
    a.model = parse_forecast_model(model);
    s.read("knn_k", a.knn_k);
    std::string combination{to_string(a.combination)};
    s.read("combination", combination);
    a.combination = parse_combination_policy(combination);
    s.read("history_capacity", a.history_capacity);
    s.read("history_span", a.history_span);
  }
  if (root.has("penalty")) {
    const auto s = root.child("penalty", {"failed_request_penalty", "scarcity_factor"});
    s.read("failed_request_penalty", cfg.penalty.failed_request_penalty);
    s.read("scarcity_factor", cfg.penalty.scarcity_factor);
  }
  if (root.has("live")) {
    const auto s = root.child("live", {"url", "body", "content_type", "headers", "replicas",
                                       "max_connections"});
    s.read("url", cfg.live.url);
    s.read("body", cfg.live.body);
    s.read("content_type", cfg.live.content_type);
    s.read("headers", cfg.live.headers);
    s.read("replicas", cfg.live.replicas);
    s.read("max_connections", cfg.live.max_connections);
  }
  if (root.has("output")) {
    const auto s = root.child("output", {"dir", "dump_latencies", "dump_sim_events"});
    std::string dir;
    s.read("dir", dir);
    if (!dir.empty()) {
      std::filesystem::path p(dir);
      cfg.output.dir = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    s.read("dump_latencies", cfg.output.dump_latencies);
    s.read("dump_sim_events", cfg.output.dump_sim_events);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& cfg) {
  const auto& a = cfg.autoscaler;
  json j = {
      {"mode", to_string(cfg.mode)},
      {"seed", cfg.seed},
      {"duration", cfg.duration},
      {"batch_interval", cfg.batch_interval},
      {"request_timeout", cfg.request_timeout},
      {"time_compression", cfg.time_compression},
      {"trace",
       {{"path", cfg.trace.path},
        {"format", to_string(cfg.trace.format)},
        {"window_start", cfg.trace.window_start},
        {"rebase", cfg.trace.rebase},
        {"layout", to_json(cfg.trace.layout)}}},
      {"service",
       {{"base_service_time", cfg.service.base_service_time},
        {"jitter_fraction", cfg.service.jitter_fraction},
        {"per_pod_concurrency", cfg.service.per_pod_concurrency}}},
      {"cluster",
       {{"startup_delay", cfg.startup_delay},
        {"utilization_window", cfg.utilization_window},
        {"initial_replicas", cfg.initial_replicas}}},
      {"autoscaler",
       {{"cpu_target", a.cpu_target},
        {"tolerance", a.tolerance},
        {"min_replicas", a.min_replicas},
        {"max_replicas", a.max_replicas},
        {"reactive_interval", a.reactive_interval},
        {"forecast_interval", a.forecast_interval},
        {"forecast_horizon", a.forecast_horizon},
        {"model", to_string(a.model)},
        {"knn_k", a.knn_k},
        {"combination", to_string(a.combination)},
        {"history_capacity", a.history_capacity},
        {"history_span", a.history_span}}},
      {"penalty",
       {{"failed_request_penalty", cfg.penalty.failed_request_penalty},
        {"scarcity_factor", cfg.penalty.scarcity_factor}}},
      {"output",
       {{"dump_latencies", cfg.output.dump_latencies},
        {"dump_sim_events", cfg.output.dump_sim_events}}},
  };
  if (cfg.mode == RunMode::live) {
    j["live"] = {{"url", cfg.live.url},
                 {"body", cfg.live.body},
                 {"content_type", cfg.live.content_type},
                 {"headers", cfg.live.headers},
                 {"replicas", cfg.live.replicas},
                 {"max_connections", cfg.live.max_connections}};
  }
  return j;
}

}  // namespace predscale
