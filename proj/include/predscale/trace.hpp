#pragma once

// Request traces: parsing, windowing and rate views.
//
// Timestamps are kept on a millisecond grid. Everything that reads or
// derives a timestamp rounds to the nearest millisecond, which makes the
// text format round-trip exactly.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace predscale {

struct TraceEvent {
  std::int64_t millis = 0;  ///< milliseconds since trace epoch, >= 0

  /// Rounds to the nearest millisecond. Throws ValidationError for negative,
  /// non-finite or unrepresentable values.
  static TraceEvent from_seconds(double seconds);
  static constexpr TraceEvent from_millis(std::int64_t ms) { return TraceEvent{ms}; }

  constexpr double seconds() const { return static_cast<double>(millis) / 1000.0; }

  auto operator<=>(const TraceEvent&) const = default;
};

using Trace = std::vector<TraceEvent>;

/// Request counts in consecutive half-open buckets [origin + i*w, origin + (i+1)*w).
struct RateSeries {
  double origin = 0.0;
  double bucket_width = 1.0;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
};

enum class Endianness { big, little };
enum class TimestampUnit { seconds, milliseconds };

/// Where the arrival time lives inside a fixed-width binary record.
struct BinaryRecordLayout {
  std::size_t record_size = 20;
  std::size_t timestamp_offset = 0;
  std::size_t timestamp_width = 4;
  Endianness endianness = Endianness::big;
  TimestampUnit timestamp_unit = TimestampUnit::seconds;

  /// Throws ValidationError unless 1 <= width <= 8 and offset + width <= size.
  void validate() const;
};

enum class TraceFormat { text, binary };

// --- canonical text format: one decimal timestamp (seconds) per line ---

Trace parse_text_trace(std::istream& in);
Trace parse_text_trace(std::string_view text);

/// Writes one timestamp per line with millisecond precision.
void write_text_trace(std::ostream& out, std::span<const TraceEvent> events);
std::string serialize_text_trace(std::span<const TraceEvent> events);

// --- fixed-width binary records ---

/// Decodes one event per record. The result is sorted; with `rebase` set
/// every timestamp is shifted so the earliest event sits at t = 0.
Trace parse_binary_trace(std::span<const std::uint8_t> data,
                         const BinaryRecordLayout& layout, bool rebase = false);

/// Encodes events as zero-filled records. Second-unit layouts truncate to
/// whole seconds; ValidationError if a timestamp does not fit the field.
std::vector<std::uint8_t> serialize_binary_trace(std::span<const TraceEvent> events,
                                                 const BinaryRecordLayout& layout);

// --- windowing / rate view ---

/// Events with start <= t < start + duration, shifted so the window starts at 0.
Trace slice_window(std::span<const TraceEvent> events, double start, double duration);

/// counts[i] = #events with i*w <= t < (i+1)*w; sized to cover the last event.
RateSeries to_rate_series(std::span<const TraceEvent> events, double bucket_width);

/// Reads a trace file in the given format. IoError if it cannot be opened.
Trace load_trace_file(const std::filesystem::path& path, TraceFormat format,
                      const BinaryRecordLayout& layout = {}, bool rebase = false);

TraceFormat parse_trace_format(std::string_view name);
std::string_view to_string(TraceFormat format);

/// Converts a duration in seconds to whole milliseconds (nearest).
std::int64_t to_millis(double seconds);

}  // namespace predscale
