#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>
#include <vector>

#include "predscale/autoscaler.hpp"
#include "predscale/config.hpp"
#include "predscale/errors.hpp"
#include "predscale/experiment.hpp"
#include "predscale/report.hpp"
#include "predscale/scoring.hpp"
#include "predscale/synth.hpp"
#include "predscale/trace.hpp"

namespace py = pybind11;
using namespace predscale;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
json parse(const std::string& text) { return json::parse(text, nullptr, true, true); }

std::vector<double> seconds_of(const Trace& t) {
  std::vector<double> out;
  out.reserve(t.size());
  for (const auto& e : t) out.push_back(e.seconds());
  return out;
}

Trace trace_of(const std::vector<double>& seconds) {
  Trace t;
  t.reserve(seconds.size());
  for (double s : seconds) t.push_back(TraceEvent::from_seconds(s));
  return t;
}

RecommendationHistory history_of(const std::vector<std::pair<double, int>>& entries,
                                 const AutoscalerConfig& cfg) {
  RecommendationHistory h(cfg.history_capacity, cfg.history_span);
  for (const auto& [t, n] : entries) h.push({t, n});
  return h;
}

std::vector<Recommendation> recs_of(const std::vector<std::pair<double, int>>& entries) {
  std::vector<Recommendation> out;
  for (const auto& [t, n] : entries) out.push_back({t, n});
  return out;
}

std::vector<BatchResult> batches_of(const std::string& text) {
  std::vector<BatchResult> out;
  for (const auto& j : parse(text)) out.push_back(batch_result_from_json(j));
  return out;
}

// A config is either a path to a JSON file or JSON text resolved against base_dir.
ExperimentConfig config_of(const std::string& source, bool is_path,
                           const std::filesystem::path& base_dir) {
  if (is_path) return load_config(source);
  json j;
  try {
    j = parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j, base_dir);
}

std::vector<ForecastModel> models_of(const std::vector<std::string>& names) {
  std::vector<ForecastModel> out;
  for (const auto& n : names) out.push_back(parse_forecast_model(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trace-driven autoscaling experiments";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<TruncationError>(m, "TruncationError", base.ptr());
  py::register_exception<InsufficientData>(m, "InsufficientData", base.ptr());
  py::register_exception<OrderingError>(m, "OrderingError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<StartupError>(m, "StartupError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // Traces, as lists of seconds.
  m.def("parse_text_trace", [](const std::string& text) { return seconds_of(parse_text_trace(text)); },
        py::arg("text"));
  m.def("serialize_text_trace", [](const std::vector<double>& s) { return serialize_text_trace(trace_of(s)); },
        py::arg("seconds"));
  m.def(
      "parse_binary_trace",
      [](const py::bytes& data, const std::string& layout, bool rebase) {
        const std::string raw = data;
        const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
        return seconds_of(parse_binary_trace(bytes, layout_from_json(parse(layout)), rebase));
      },
      py::arg("data"), py::arg("layout_json") = "{}", py::arg("rebase") = false);
  m.def(
      "serialize_binary_trace",
      [](const std::vector<double>& s, const std::string& layout) {
        const auto bytes = serialize_binary_trace(trace_of(s), layout_from_json(parse(layout)));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("seconds"), py::arg("layout_json") = "{}");
  m.def(
      "load_trace_file",
      [](const std::filesystem::path& p, const std::string& format, const std::string& layout,
         bool rebase) {
        return seconds_of(
            load_trace_file(p, parse_trace_format(format), layout_from_json(parse(layout)), rebase));
      },
      py::arg("path"), py::arg("format") = "text", py::arg("layout_json") = "{}",
      py::arg("rebase") = false);
  m.def(
      "slice_window",
      [](const std::vector<double>& s, double start, double duration) {
        return seconds_of(slice_window(trace_of(s), start, duration));
      },
      py::arg("seconds"), py::arg("start"), py::arg("duration"));
  m.def(
      "rate_series",
      [](const std::vector<double>& s, double width) { return to_rate_series(trace_of(s), width).counts; },
      py::arg("seconds"), py::arg("bucket_width"));
  m.def(
      "synthesize_bursty",
      [](double duration, std::uint64_t seed) { return seconds_of(synthesize_trace(bursty_profile(duration, seed))); },
      py::arg("duration") = 1800.0, py::arg("seed") = 1998);
  m.def("constant_rate_trace", [](double rate, double duration) { return seconds_of(constant_rate_trace(rate, duration)); },
        py::arg("rate"), py::arg("duration"));

  // Autoscaler rules. Histories are lists of (time, replicas).
  py::class_<AutoscalerConfig>(m, "AutoscalerConfig")
      .def(py::init<>())
      .def_readwrite("cpu_target", &AutoscalerConfig::cpu_target)
      .def_readwrite("tolerance", &AutoscalerConfig::tolerance)
      .def_readwrite("min_replicas", &AutoscalerConfig::min_replicas)
      .def_readwrite("max_replicas", &AutoscalerConfig::max_replicas)
      .def_readwrite("reactive_interval", &AutoscalerConfig::reactive_interval)
      .def_readwrite("forecast_interval", &AutoscalerConfig::forecast_interval)
      .def_readwrite("forecast_horizon", &AutoscalerConfig::forecast_horizon)
      .def_readwrite("knn_k", &AutoscalerConfig::knn_k)
      .def_readwrite("history_capacity", &AutoscalerConfig::history_capacity)
      .def_readwrite("history_span", &AutoscalerConfig::history_span)
      .def_property(
          "model", [](const AutoscalerConfig& c) { return std::string(to_string(c.model)); },
          [](AutoscalerConfig& c, const std::string& n) { c.model = parse_forecast_model(n); })
      .def("validate", &AutoscalerConfig::validate);

  m.def(
      "reactive_recommend",
      [](int current, double utilization, const AutoscalerConfig& cfg) {
        return reactive_recommend(current, utilization, cfg).replicas;
      },
      py::arg("current"), py::arg("utilization"), py::arg("config") = AutoscalerConfig{});
  m.def(
      "forecast",
      [](const std::vector<std::pair<double, int>>& history, double target_time,
         const AutoscalerConfig& cfg, const std::vector<std::pair<double, int>>& lookahead) {
        const auto la = recs_of(lookahead);
        return forecast(history_of(history, cfg), target_time, cfg, la);
      },
      py::arg("history"), py::arg("target_time"), py::arg("config") = AutoscalerConfig{},
      py::arg("lookahead") = std::vector<std::pair<double, int>>{});
  m.def(
      "forecast_linear_raw",
      [](const std::vector<std::pair<double, int>>& history, double target_time) {
        AutoscalerConfig cfg;
        return forecast_linear_raw(history_of(history, cfg), target_time);
      },
      py::arg("history"), py::arg("target_time"));

  // Scoring. Batches and timelines use the on-disk JSON shapes.
  m.def(
      "penalty",
      [](const std::string& batches, const std::string& timeline, double failed, double scarcity) {
        const auto b = batches_of(batches);
        const PenaltyParams params{failed, scarcity};
        return to_json(penalty(b, replica_timeline_from_json(parse(timeline)), params)).dump();
      },
      py::arg("batches_json"), py::arg("timeline_json"), py::arg("failed_request_penalty") = 900.0,
      py::arg("scarcity_factor") = 1.0);

  // Experiments, configured with the same JSON documents as the CLI.
  m.def(
      "load_config", [](const std::filesystem::path& p) { return to_json(load_config(p)).dump(); },
      py::arg("path"));
  m.def(
      "run_experiment",
      [](const std::string& config, bool is_path, const std::filesystem::path& base_dir) {
        const auto cfg = config_of(config, is_path, base_dir);
        std::string report, csv;
        {
          py::gil_scoped_release release;
          const auto r = run_experiment(cfg);
          std::ostringstream rows;
          write_report_csv(rows, r.rows);
          report = report_json(r).dump();
          csv = rows.str();
        }
        return py::make_tuple(report, csv);
      },
      py::arg("config"), py::arg("is_path") = false, py::arg("base_dir") = std::filesystem::path{});
  m.def(
      "compare_models",
      [](const std::string& config, const std::vector<std::string>& models, int reps,
         bool is_path, const std::filesystem::path& base_dir) {
        const auto cfg = config_of(config, is_path, base_dir);
        const auto ms = models_of(models);
        py::gil_scoped_release release;
        return to_json(compare_models(cfg, ms, reps).table).dump();
      },
      py::arg("config"), py::arg("models"), py::arg("repetitions") = 1,
      py::arg("is_path") = false, py::arg("base_dir") = std::filesystem::path{});
}
