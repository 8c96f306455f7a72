#include "predscale/report.hpp"

#include <unistd.h>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "predscale/errors.hpp"

namespace predscale {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line, std::string("bad ") + name + " field '" + std::string(field) + "'");
  }
  return value;
}

std::string hostname() {
  std::array<char, 256> buf{};
  if (gethostname(buf.data(), buf.size() - 1) != 0) return "unknown";
  return buf.data();
}

template <typename Range>
void write_jsonl(const std::filesystem::path& path, const Range& items) {
  auto out = open_out(path);
  for (const auto& item : items) out << to_json(item).dump() << '\n';
  check_written(out, path);
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.time_s) << ',' << r.requests << ',' << r.succeeded << ',' << r.failed
        << ',' << (r.mean_latency_s ? format_double(*r.mean_latency_s) : std::string{}) << ','
        << r.ready_replicas << ',' << r.desired_replicas << '\n';
  }
}

void emit_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_report_csv(out, report.rows);
  check_written(out, path);
}

std::vector<ReportRow> parse_report_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) {
    throw ParseError(1, "missing or unexpected report CSV header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) throw ParseError(line_no, "expected 7 fields");
    ReportRow r;
    r.time_s = parse_field<double>(f[0], line_no, "time_s");
    r.requests = parse_field<std::uint64_t>(f[1], line_no, "requests");
    r.succeeded = parse_field<std::uint64_t>(f[2], line_no, "succeeded");
    r.failed = parse_field<std::uint64_t>(f[3], line_no, "failed");
    if (!f[4].empty()) r.mean_latency_s = parse_field<double>(f[4], line_no, "mean_latency_s");
    r.ready_replicas = parse_field<int>(f[5], line_no, "ready_replicas");
    r.desired_replicas = parse_field<int>(f[6], line_no, "desired_replicas");
    rows.push_back(r);
  }
  return rows;
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_report_csv(in);
}

json report_json(const ExperimentReport& report) {
  const auto& rows = report.rows;
  std::uint64_t requests = 0;
  for (const auto& r : rows) requests += r.requests;
  return {
      {"model", report.model},
      {"knn_k", report.config.autoscaler.knn_k},
      {"mode", to_string(report.config.mode)},
      {"trace_events", report.trace_events},
      {"requests", requests},
      {"intervals", rows.size()},
      {"end_time", report.end_time},
      {"mean_latency", mean_latency(report.batches)},
      {"penalty", to_json(report.score)},
      {"params",
       {{"failed_request_penalty", report.config.penalty.failed_request_penalty},
        {"scarcity_factor", report.config.penalty.scarcity_factor}}},
      {"config", to_json(report.config)},
  };
}

nlohmann::json score_report_json(const PenaltyBreakdown& breakdown, const PenaltyParams& params) {
  return {{"penalty", to_json(breakdown)},
          {"params",
           {{"failed_request_penalty", params.failed_request_penalty},
            {"scarcity_factor", params.scarcity_factor}}}};
}

void write_batch_log(const std::filesystem::path& path, const std::vector<BatchResult>& batches) {
  write_jsonl(path, batches);
}

void write_run_artifacts(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  emit_report_csv(report, dir / "report.csv");
  {
    const auto path = dir / "report.json";
    auto out = open_out(path);
    out << report_json(report).dump(2) << '\n';
    check_written(out, path);
  }
  write_batch_log(dir / "batches.jsonl", report.batches);
  write_jsonl(dir / "autoscaler.jsonl", report.ticks);
  {
    const auto path = dir / "timeline.json";
    auto out = open_out(path);
    out << to_json(report.timeline).dump() << '\n';
    check_written(out, path);
  }
  {
    const auto path = dir / "run_meta.json";
    auto out = open_out(path);
    out << json{{"wall_seconds", report.wall_seconds},
                {"host", hostname()},
                {"mode", to_string(report.config.mode)},
                {"time_compression", report.config.time_compression}}
               .dump(2)
        << '\n';
    check_written(out, path);
  }
  if (report.config.output.dump_sim_events) write_jsonl(dir / "events.jsonl", report.sim_events);
}

std::vector<BatchResult> read_batch_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<BatchResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(batch_result_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    }
  }
  return out;
}

ReplicaTimeline read_timeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return replica_timeline_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(1, path.string() + ": " + e.what());
  }
}

void ComparisonTable::recompute_aggregates() {
  aggregates.clear();
  for (const auto& row : rows) {
    auto it = std::find_if(aggregates.begin(), aggregates.end(),
                           [&](const auto& a) { return a.model == row.model; });
    if (it == aggregates.end()) {
      aggregates.push_back({row.model});
      it = std::prev(aggregates.end());
    }
    ++it->runs;
    it->mean_penalty += row.penalty_total;
    it->mean_normalized += row.normalized_total;
    it->mean_failed += static_cast<double>(row.failed);
    it->mean_latency += row.mean_latency;
  }
  for (auto& a : aggregates) {
    a.mean_penalty /= a.runs;
    a.mean_normalized /= a.runs;
    a.mean_failed /= a.runs;
    a.mean_latency /= a.runs;
  }
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "model,repetition,seed,penalty_total,normalized_total,failed,mean_latency_s,report_dir\n";
  for (const auto& r : table.rows) {
    out << r.model << ',' << r.repetition << ',' << r.seed << ',' << format_double(r.penalty_total)
        << ',' << format_double(r.normalized_total) << ',' << r.failed << ','
        << format_double(r.mean_latency) << ',' << r.report_dir << '\n';
  }
  for (const auto& a : table.aggregates) {
    out << a.model << ",mean,," << format_double(a.mean_penalty) << ','
        << format_double(a.mean_normalized) << ',' << format_double(a.mean_failed) << ','
        << format_double(a.mean_latency) << ",\n";
  }
}

nlohmann::json to_json(const ComparisonTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"model", r.model},
                    {"repetition", r.repetition},
                    {"seed", r.seed},
                    {"penalty_total", r.penalty_total},
                    {"normalized_total", r.normalized_total},
                    {"failed", r.failed},
                    {"mean_latency", r.mean_latency},
                    {"report_dir", r.report_dir}});
  }
  json aggregates = json::array();
  for (const auto& a : table.aggregates) {
    aggregates.push_back({{"model", a.model},
                          {"runs", a.runs},
                          {"mean_penalty", a.mean_penalty},
                          {"mean_normalized", a.mean_normalized},
                          {"mean_failed", a.mean_failed},
                          {"mean_latency", a.mean_latency}});
  }
  return {{"runs", rows}, {"aggregates", aggregates}};
}

void write_comparison(const ComparisonTable& table, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  {
    const auto path = dir / "comparison.csv";
    auto out = open_out(path);
    write_comparison_csv(out, table);
    check_written(out, path);
  }
  {
    const auto path = dir / "comparison.json";
    auto out = open_out(path);
    out << to_json(table).dump(2) << '\n';
    check_written(out, path);
  }
}

}  // namespace predscale
