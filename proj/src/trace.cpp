#include "predscale/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "predscale/errors.hpp"

namespace predscale {

namespace {

// Largest millisecond count that still converts to double exactly.
constexpr double kMaxMillis = 9007199254740992.0;  // 2^53

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::int64_t bucket_index(std::int64_t millis, double width_seconds) {
  const double width_ms = width_seconds * 1000.0;
  const auto whole = std::llround(width_ms);
  if (whole > 0 && std::abs(width_ms - static_cast<double>(whole)) < 1e-6) {
    return millis / whole;
  }
  return static_cast<std::int64_t>(std::floor(static_cast<double>(millis) / width_ms));
}

}  // namespace

std::int64_t to_millis(double seconds) {
  if (!std::isfinite(seconds)) throw ValidationError("non-finite time value");
  const double ms = std::round(seconds * 1000.0);
  if (std::abs(ms) > kMaxMillis) throw ValidationError("time value out of range");
  return static_cast<std::int64_t>(ms);
}

TraceEvent TraceEvent::from_seconds(double seconds) {
  if (std::isnan(seconds)) throw ValidationError("timestamp is NaN");
  if (seconds < 0.0) throw ValidationError("negative timestamp");
  return TraceEvent{to_millis(seconds)};
}

std::uint64_t RateSeries::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void BinaryRecordLayout::validate() const {
  if (record_size == 0) throw ValidationError("binary layout: record_size must be > 0");
  if (timestamp_width < 1 || timestamp_width > 8) {
    throw ValidationError("binary layout: timestamp_width must be in [1, 8]");
  }
  if (timestamp_offset + timestamp_width > record_size) {
    throw ValidationError("binary layout: timestamp field extends past the record");
  }
}

Trace parse_text_trace(std::istream& in) {
  Trace events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;

    double value = 0.0;
    const auto* first = body.data();
    const auto* last = body.data() + body.size();
    // from_chars rejects a leading '+', accept it for hand-written fixtures.
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
      throw ParseError(line_no, "not a decimal timestamp: '" + std::string(body) + "'");
    }
    if (!std::isfinite(value)) throw ParseError(line_no, "timestamp is not finite");
    if (value < 0.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": negative timestamp");
    }
    try {
      events.push_back(TraceEvent::from_seconds(value));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::stable_sort(events.begin(), events.end());
  return events;
}

Trace parse_text_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_text_trace(in);
}

void write_text_trace(std::ostream& out, std::span<const TraceEvent> events) {
  for (const auto& e : events) {
    out << e.millis / 1000 << '.';
    const auto frac = e.millis % 1000;
    if (frac < 100) out << '0';
    if (frac < 10) out << '0';
    out << frac << '\n';
  }
}

std::string serialize_text_trace(std::span<const TraceEvent> events) {
  std::ostringstream out;
  write_text_trace(out, events);
  return out.str();
}

Trace parse_binary_trace(std::span<const std::uint8_t> data, const BinaryRecordLayout& layout,
                         bool rebase) {
  layout.validate();
  if (data.size() % layout.record_size != 0) {
    throw TruncationError("binary trace: " + std::to_string(data.size()) +
                          " bytes is not a whole number of " +
                          std::to_string(layout.record_size) + "-byte records");
  }
  const std::size_t n = data.size() / layout.record_size;
  Trace events;
  events.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto field = data.subspan(r * layout.record_size + layout.timestamp_offset,
                                    layout.timestamp_width);
    std::uint64_t raw = 0;
    if (layout.endianness == Endianness::big) {
      for (auto b : field) raw = (raw << 8) | b;
    } else {
      for (auto it = field.rbegin(); it != field.rend(); ++it) raw = (raw << 8) | *it;
    }
    const double scale = layout.timestamp_unit == TimestampUnit::seconds ? 1000.0 : 1.0;
    const double millis = static_cast<double>(raw) * scale;
    if (millis > kMaxMillis) {
      throw ValidationError("binary trace: record " + std::to_string(r) +
                            " timestamp overflows the millisecond range");
    }
    events.push_back(TraceEvent{static_cast<std::int64_t>(millis)});
  }
  std::stable_sort(events.begin(), events.end());
  if (rebase && !events.empty()) {
    const auto origin = events.front().millis;
    for (auto& e : events) e.millis -= origin;
  }
  return events;
}

std::vector<std::uint8_t> serialize_binary_trace(std::span<const TraceEvent> events,
                                                 const BinaryRecordLayout& layout) {
  layout.validate();
  std::vector<std::uint8_t> out(events.size() * layout.record_size, 0);
  const int bits = static_cast<int>(layout.timestamp_width) * 8;
  for (std::size_t r = 0; r < events.size(); ++r) {
    std::uint64_t raw = static_cast<std::uint64_t>(events[r].millis);
    if (layout.timestamp_unit == TimestampUnit::seconds) raw /= 1000;
    if (bits < 64 && (raw >> bits) != 0) {
      throw ValidationError("binary trace: event " + std::to_string(r) + " does not fit in " +
                            std::to_string(layout.timestamp_width) + " bytes");
    }
    auto* field = out.data() + r * layout.record_size + layout.timestamp_offset;
    for (std::size_t b = 0; b < layout.timestamp_width; ++b) {
      const auto byte = static_cast<std::uint8_t>(raw >> (8 * b));
      const std::size_t pos =
          layout.endianness == Endianness::big ? layout.timestamp_width - 1 - b : b;
      field[pos] = byte;
    }
  }
  return out;
}

Trace slice_window(std::span<const TraceEvent> events, double start, double duration) {
  if (!(duration > 0.0)) throw ValidationError("slice_window: duration must be > 0");
  const auto start_ms = to_millis(start);
  const auto end_ms = to_millis(start + duration);
  Trace out;
  for (const auto& e : events) {
    if (e.millis >= start_ms && e.millis < end_ms) out.push_back({e.millis - start_ms});
  }
  std::stable_sort(out.begin(), out.end());
  return out;
}

RateSeries to_rate_series(std::span<const TraceEvent> events, double bucket_width) {
  if (!(bucket_width > 0.0)) throw ValidationError("to_rate_series: bucket_width must be > 0");
  RateSeries series;
  series.bucket_width = bucket_width;
  for (const auto& e : events) {
    const auto idx = static_cast<std::size_t>(bucket_index(e.millis, bucket_width));
    if (idx >= series.counts.size()) series.counts.resize(idx + 1, 0);
    ++series.counts[idx];
  }
  return series;
}

Trace load_trace_file(const std::filesystem::path& path, TraceFormat format,
                      const BinaryRecordLayout& layout, bool rebase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file: " + path.string());
  if (format == TraceFormat::text) {
    try {
      return parse_text_trace(in);
    } catch (const ParseError& e) {
      throw ParseError(e.line(), path.string() + ": " + e.detail());
    }
  }
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  return parse_binary_trace(bytes, layout, rebase);
}

TraceFormat parse_trace_format(std::string_view name) {
  if (name == "text") return TraceFormat::text;
  if (name == "binary") return TraceFormat::binary;
  throw ValidationError("unknown trace format '" + std::string(name) + "'");
}

std::string_view to_string(TraceFormat format) {
  return format == TraceFormat::text ? "text" : "binary";
}

}  // namespace predscale
