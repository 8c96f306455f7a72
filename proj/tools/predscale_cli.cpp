// predscale: command-line front end for the autoscaling experiment engine.
//
// Exit codes: 0 success, 1 configuration or startup error, 2 runtime failure.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "predscale/config.hpp"
#include "predscale/errors.hpp"
#include "predscale/experiment.hpp"
#include "predscale/report.hpp"
#include "predscale/scoring.hpp"
#include "predscale/stub_server.hpp"
#include "predscale/synth.hpp"
#include "predscale/trace.hpp"

using nlohmann::json;
using namespace predscale;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

BinaryRecordLayout read_layout_file(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open layout file: " + path);
  try {
    return layout_from_json(json::parse(in, nullptr, true, true));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void print_summary(const ExperimentReport& r) {
  const auto& s = r.score;
  std::printf("model %-8s penalty %.4f  (latency %.4f + failures %.1f + resources %.4f)\n",
              r.model.c_str(), s.total, s.latency_term, s.failure_term, s.resource_term);
  std::printf("  requests %llu  succeeded %llu  failed %llu  avg replicas %.3f  mean latency %.4f s\n",
              static_cast<unsigned long long>(s.total_succeeded + s.total_failed),
              static_cast<unsigned long long>(s.total_succeeded),
              static_cast<unsigned long long>(s.total_failed), s.average_replicas,
              mean_latency(r.batches));
  std::printf("  normalized penalty %.4f  wall %.2f s\n", s.normalized_total, r.wall_seconds);
}

void apply_overrides(ExperimentConfig& cfg, const std::string& out, double compression,
                     long long seed) {
  if (!out.empty()) cfg.output.dir = out;
  if (compression > 0.0) cfg.time_compression = compression;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.validate();
}

std::vector<ForecastModel> parse_models(const std::vector<std::string>& names) {
  std::vector<ForecastModel> models;
  for (const auto& n : names) models.push_back(parse_forecast_model(n));
  return models;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven experiments for predictive horizontal autoscaling"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out, sim_model;
  double sim_compression = 0.0;
  long long sim_seed = -1;
  auto* simulate = app.add_subcommand("simulate", "Replay a trace against the simulated cluster");
  simulate->add_option("config", sim_config, "Experiment config (JSON)")->required();
  simulate->add_option("--out", sim_out, "Output directory (overrides output.dir)");
  simulate->add_option("--model", sim_model, "Forecast model: hold, linear, knn, oracle");
  simulate->add_option("--compression", sim_compression, "Virtual seconds per wall second");
  simulate->add_option("--seed", sim_seed, "Override the seed");

  // loadtest
  std::string lt_config, lt_out;
  auto* loadtest = app.add_subcommand("loadtest", "Replay a trace against a live HTTP endpoint");
  loadtest->add_option("config", lt_config, "Experiment config with mode \"live\"")->required();
  loadtest->add_option("--out", lt_out, "Output directory (overrides output.dir)");

  // score
  std::string score_batches, score_timeline, score_out;
  PenaltyParams score_params;
  auto* score = app.add_subcommand("score", "Recompute the penalty from a batch log and timeline");
  score->add_option("batch-log", score_batches, "batches.jsonl")->required()->check(CLI::ExistingFile);
  score->add_option("timeline", score_timeline, "timeline.json")->required()->check(CLI::ExistingFile);
  score->add_option("--failed-penalty", score_params.failed_request_penalty,
                    "Penalty per failed request")
      ->capture_default_str();
  score->add_option("--scarcity", score_params.scarcity_factor, "Scarcity factor")
      ->capture_default_str();
  score->add_option("--out", score_out, "Write the JSON result here as well");

  // trace
  auto* trace = app.add_subcommand("trace", "Inspect, convert or synthesize traces");
  trace->require_subcommand(1);
  std::string tr_file, tr_format = "text", tr_layout, tr_out, tr_to = "text";
  bool tr_rebase = false;
  double tr_bucket = 60.0, tr_start = 0.0, tr_duration = 0.0;
  auto* inspect = trace->add_subcommand("inspect", "Summary statistics of a trace");
  auto* convert = trace->add_subcommand("convert", "Convert or window a trace");
  for (auto* sub : {inspect, convert}) {
    sub->add_option("file", tr_file, "Trace file")->required()->check(CLI::ExistingFile);
    sub->add_option("--format", tr_format, "Input format: text or binary")->capture_default_str();
    sub->add_option("--layout", tr_layout, "Binary record layout (JSON)");
    sub->add_flag("--rebase", tr_rebase, "Shift binary timestamps so the first is 0");
  }
  inspect->add_option("--bucket", tr_bucket, "Rate bucket width in seconds")->capture_default_str();
  convert->add_option("-o,--out", tr_out, "Output file")->required();
  convert->add_option("--to", tr_to, "Output format: text or binary")->capture_default_str();
  convert->add_option("--start", tr_start, "Window start (s)");
  convert->add_option("--duration", tr_duration, "Window length (s); 0 keeps everything");

  std::string syn_out, syn_profile = "bursty";
  double syn_duration = 1800.0, syn_rate = 10.0;
  std::uint64_t syn_seed = 1998;
  auto* synth = trace->add_subcommand("synth", "Write a seeded synthetic trace");
  synth->add_option("-o,--out", syn_out, "Output text trace")->required();
  synth->add_option("--profile", syn_profile, "bursty or constant")->capture_default_str();
  synth->add_option("--duration", syn_duration, "Seconds")->capture_default_str();
  synth->add_option("--seed", syn_seed, "Seed (bursty)")->capture_default_str();
  synth->add_option("--rate", syn_rate, "Requests/s (constant)")->capture_default_str();

  // compare
  std::string cmp_config, cmp_out, cmp_models = "hold,linear,knn";
  int cmp_reps = 2;
  double cmp_compression = 0.0;
  auto* compare = app.add_subcommand("compare", "Run several models and tabulate their penalties");
  compare->add_option("config", cmp_config, "Experiment config (JSON)")->required();
  compare->add_option("--models", cmp_models, "Comma-separated model list")->capture_default_str();
  compare->add_option("--reps", cmp_reps, "Repetitions per model")->capture_default_str();
  compare->add_option("--out", cmp_out, "Output directory (overrides output.dir)");
  compare->add_option("--compression", cmp_compression, "Virtual seconds per wall second");

  // stub-target
  StubTargetOptions stub;
  auto* stub_target = app.add_subcommand("stub-target", "Serve a fixed-latency HTTP endpoint");
  stub_target->add_option("--latency", stub.latency, "Seconds per request")->capture_default_str();
  stub_target->add_option("--failure-rate", stub.failure_rate, "Fraction answered with 500")
      ->capture_default_str();
  stub_target->add_option("--port", stub.port, "Port (0 picks one)")->capture_default_str();
  stub_target->add_option("--seed", stub.seed, "Failure draw seed")->capture_default_str();
  stub_target->add_option("--host", stub.host, "Bind address")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      auto cfg = load_config(sim_config);
      if (cfg.mode != RunMode::simulate) throw ConfigError("simulate needs mode \"simulate\"");
      if (!sim_model.empty()) cfg.autoscaler.model = parse_forecast_model(sim_model);
      apply_overrides(cfg, sim_out, sim_compression, sim_seed);
      const auto report = run_experiment(cfg);
      print_summary(report);
      if (!cfg.output.dir.empty()) std::printf("  artifacts in %s\n", cfg.output.dir.c_str());
    } else if (*loadtest) {
      auto cfg = load_config(lt_config);
      if (cfg.mode != RunMode::live) throw ConfigError("loadtest needs mode \"live\"");
      apply_overrides(cfg, lt_out, 0.0, -1);
      const auto report = run_experiment(cfg);
      print_summary(report);
      if (!cfg.output.dir.empty()) std::printf("  artifacts in %s\n", cfg.output.dir.c_str());
    } else if (*score) {
      score_params.validate();
      const auto batches = read_batch_log(score_batches);
      const auto timeline = read_timeline(score_timeline);
      const auto result = score_report_json(penalty(batches, timeline, score_params), score_params);
      std::cout << result.dump(2) << '\n';
      if (!score_out.empty()) {
        std::ofstream out(score_out);
        if (!out) throw IoError("cannot write " + score_out);
        out << result.dump(2) << '\n';
      }
    } else if (*inspect || *convert) {
      const auto format = parse_trace_format(tr_format);
      const auto layout = read_layout_file(tr_layout);
      auto events = load_trace_file(tr_file, format, layout, tr_rebase);
      if (*inspect) {
        const auto rates = to_rate_series(events, tr_bucket);
        std::uint64_t peak = 0;
        for (auto c : rates.counts) peak = std::max(peak, c);
        json j = {{"events", events.size()},
                  {"first", events.empty() ? 0.0 : events.front().seconds()},
                  {"last", events.empty() ? 0.0 : events.back().seconds()},
                  {"bucket_width", tr_bucket},
                  {"buckets", rates.counts.size()},
                  {"peak_bucket", peak},
                  {"counts", rates.counts}};
        std::cout << j.dump(2) << '\n';
      } else {
        if (tr_duration > 0.0) events = slice_window(events, tr_start, tr_duration);
        const auto to = parse_trace_format(tr_to);
        std::ofstream out(tr_out, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tr_out);
        if (to == TraceFormat::text) {
          write_text_trace(out, events);
        } else {
          const auto bytes = serialize_binary_trace(events, layout);
          out.write(reinterpret_cast<const char*>(bytes.data()),
                    static_cast<std::streamsize>(bytes.size()));
        }
        out.flush();
        if (!out) throw IoError("write failed: " + tr_out);
        std::printf("wrote %zu events to %s\n", events.size(), tr_out.c_str());
      }
    } else if (*synth) {
      Trace events;
      if (syn_profile == "bursty") {
        events = synthesize_trace(bursty_profile(syn_duration, syn_seed));
      } else if (syn_profile == "constant") {
        events = constant_rate_trace(syn_rate, syn_duration);
      } else {
        throw ConfigError("unknown profile '" + syn_profile + "'");
      }
      std::ofstream out(syn_out, std::ios::trunc);
      if (!out) throw IoError("cannot write " + syn_out);
      write_text_trace(out, events);
      std::printf("wrote %zu events to %s\n", events.size(), syn_out.c_str());
    } else if (*compare) {
      auto cfg = load_config(cmp_config);
      std::vector<std::string> names;
      std::stringstream ss(cmp_models);
      for (std::string n; std::getline(ss, n, ',');) {
        if (!n.empty()) names.push_back(n);
      }
      const auto models = parse_models(names);
      apply_overrides(cfg, cmp_out, cmp_compression, -1);
      const auto result = compare_models(cfg, models, cmp_reps);
      for (const auto& r : result.reports) print_summary(r);
      write_comparison_csv(std::cout, result.table);
    } else if (*stub_target) {
      StubTargetServer server(stub);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("stub target listening on %s\n", server.url().c_str());
      std::fflush(stdout);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.shutdown();
      std::printf("served %llu requests\n",
                  static_cast<unsigned long long>(server.requests_served()));
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const StartupError& e) {
    std::fprintf(stderr, "startup error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
