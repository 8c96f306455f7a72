#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "gen.hpp"
#include "predscale/errors.hpp"
#include "predscale/synth.hpp"
#include "predscale/trace.hpp"

using namespace predscale;

namespace {

std::vector<double> seconds_of(const Trace& t) {
  std::vector<double> out;
  for (const auto& e : t) out.push_back(e.seconds());
  return out;
}

std::vector<std::uint8_t> be_records(std::initializer_list<std::uint32_t> stamps) {
  std::vector<std::uint8_t> out;
  for (auto s : stamps) {
    std::uint8_t rec[20] = {};
    rec[0] = static_cast<std::uint8_t>(s >> 24);
    rec[1] = static_cast<std::uint8_t>(s >> 16);
    rec[2] = static_cast<std::uint8_t>(s >> 8);
    rec[3] = static_cast<std::uint8_t>(s);
    for (int i = 4; i < 20; ++i) rec[i] = 0xAB;  // unrelated fields
    out.insert(out.end(), rec, rec + 20);
  }
  return out;
}

}  // namespace

TEST_SUITE("trace_ingest") {

TEST_CASE("text: empty input") { CHECK(parse_text_trace("").empty()); }

TEST_CASE("text: duplicates kept, order preserved") {
  const auto t = parse_text_trace("0.0\n1.5\n1.5\n9.2");
  CHECK(seconds_of(t) == std::vector<double>{0.0, 1.5, 1.5, 9.2});
  CHECK(parse_text_trace(serialize_text_trace(t)) == t);
}

TEST_CASE("text: out of order lines are sorted") {
  CHECK(seconds_of(parse_text_trace("3.0\n1.0")) == std::vector<double>{1.0, 3.0});
}

TEST_CASE("text: comments, blanks, CRLF and whitespace") {
  const auto t = parse_text_trace("# header\n\n  2.5  \r\n# mid\n1\n");
  CHECK(seconds_of(t) == std::vector<double>{1.0, 2.5});
}

TEST_CASE("text: malformed line reports its number") {
  try {
    parse_text_trace("1.0\n2.0\nabc\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_text_trace("1.0x\n"), ParseError);
}

TEST_CASE("text: negative timestamp is a validation error") {
  CHECK_THROWS_AS(parse_text_trace("1.0\n-0.5\n"), ValidationError);
}

TEST_CASE("text: round trip property") {
  gen::Rng r(11);
  for (int i = 0; i < 300; ++i) {
    const auto t = gen::trace(r, 200, 5000.0);
    CHECK(parse_text_trace(serialize_text_trace(t)) == t);
  }
}

TEST_CASE("binary: empty stream") { CHECK(parse_binary_trace({}, BinaryRecordLayout{}).empty()); }

TEST_CASE("binary: hand-assembled big-endian records, rebased") {
  const auto bytes = be_records({100, 160});
  CHECK(seconds_of(parse_binary_trace(bytes, {}, true)) == std::vector<double>{0.0, 60.0});
  CHECK(seconds_of(parse_binary_trace(bytes, {}, false)) == std::vector<double>{100.0, 160.0});
}

TEST_CASE("binary: partial trailing record") {
  const std::vector<std::uint8_t> bytes(25, 0);
  CHECK_THROWS_AS(parse_binary_trace(bytes, {}), TruncationError);
}

TEST_CASE("binary: little endian milliseconds at an offset") {
  BinaryRecordLayout layout;
  layout.record_size = 8;
  layout.timestamp_offset = 2;
  layout.timestamp_width = 4;
  layout.endianness = Endianness::little;
  layout.timestamp_unit = TimestampUnit::milliseconds;
  std::vector<std::uint8_t> bytes = {9, 9, 0xE8, 0x03, 0, 0, 9, 9};  // 1000 ms
  CHECK(seconds_of(parse_binary_trace(bytes, layout)) == std::vector<double>{1.0});
}

TEST_CASE("binary: 8-byte field overflowing the millisecond range") {
  BinaryRecordLayout layout;
  layout.record_size = 8;
  layout.timestamp_width = 8;
  const std::vector<std::uint8_t> bytes(8, 0xFF);
  CHECK_THROWS_AS(parse_binary_trace(bytes, layout), ValidationError);
}

TEST_CASE("binary: invalid layout") {
  BinaryRecordLayout layout;
  layout.timestamp_offset = 18;
  CHECK_THROWS_AS(layout.validate(), ValidationError);
  layout.timestamp_offset = 0;
  layout.timestamp_width = 0;
  CHECK_THROWS_AS(layout.validate(), ValidationError);
}

TEST_CASE("binary: concatenation of whole records splits the parse") {
  gen::Rng r(12);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> a, b;
    const int na = r.integer(0, 20), nb = r.integer(0, 20);
    for (int k = 0; k < na; ++k) {
      const auto rec = be_records({static_cast<std::uint32_t>(r.integer(0, 1 << 30))});
      a.insert(a.end(), rec.begin(), rec.end());
    }
    for (int k = 0; k < nb; ++k) {
      const auto rec = be_records({static_cast<std::uint32_t>(r.integer(0, 1 << 30))});
      b.insert(b.end(), rec.begin(), rec.end());
    }
    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    auto expected = parse_binary_trace(a, {});
    const auto tail = parse_binary_trace(b, {});
    expected.insert(expected.end(), tail.begin(), tail.end());
    std::sort(expected.begin(), expected.end());
    CHECK(parse_binary_trace(ab, {}) == expected);
  }
}

TEST_CASE("binary: serialize then parse is the identity on whole seconds") {
  gen::Rng r(13);
  BinaryRecordLayout layout;
  for (int i = 0; i < 100; ++i) {
    Trace t;
    const int n = r.integer(0, 50);
    for (int k = 0; k < n; ++k) t.push_back({1000LL * r.integer(0, 1 << 30)});
    std::sort(t.begin(), t.end());
    CHECK(parse_binary_trace(serialize_binary_trace(t, layout), layout) == t);
  }
}

TEST_CASE("slice_window: membership and rebasing") {
  const auto t = parse_text_trace("0\n10\n20\n30");
  CHECK(seconds_of(slice_window(t, 10, 15)) == std::vector<double>{0.0, 10.0});
  CHECK(slice_window(t, 0, 1000) == t);
  CHECK(slice_window(parse_text_trace("5"), 10, 5).empty());
  CHECK_THROWS_AS(slice_window(t, 0, 0), ValidationError);
}

TEST_CASE("slice_window: output sorted and within [0, duration)") {
  gen::Rng r(14);
  for (int i = 0; i < 300; ++i) {
    const auto t = gen::trace(r, 100, 1000.0);
    const double start = r.uniform(0.0, 800.0);
    const double duration = r.uniform(0.5, 400.0);
    const auto w = slice_window(t, start, duration);
    CHECK(std::is_sorted(w.begin(), w.end()));
    for (const auto& e : w) {
      CHECK(e.seconds() >= 0.0);
      CHECK(e.seconds() < duration + 1e-9);
    }
  }
}

TEST_CASE("to_rate_series: hand-counted buckets") {
  CHECK(to_rate_series({}, 5).counts.empty());
  CHECK(to_rate_series(parse_text_trace("0\n1\n4\n6"), 5).counts ==
        std::vector<std::uint64_t>{3, 1});
  CHECK(to_rate_series(parse_text_trace("0\n5"), 5).counts == std::vector<std::uint64_t>{1, 1});
  CHECK_THROWS_AS(to_rate_series(parse_text_trace("0"), 0), ValidationError);
}

TEST_CASE("to_rate_series: counts sum to the event count") {
  gen::Rng r(15);
  for (int i = 0; i < 300; ++i) {
    const auto t = gen::trace(r, 300, 2000.0);
    const double w = r.uniform(0.01, 100.0);
    CHECK(to_rate_series(t, w).total() == t.size());
  }
}

TEST_CASE("load_trace_file: missing file is an I/O error") {
  CHECK_THROWS_AS(load_trace_file("/nonexistent/trace.txt", TraceFormat::text), IoError);
}

TEST_CASE("synthetic traces are seeded and sorted") {
  const auto a = synthesize_trace(bursty_profile(300, 7));
  const auto b = synthesize_trace(bursty_profile(300, 7));
  CHECK(a == b);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(synthesize_trace(bursty_profile(300, 8)) != a);
  const auto c = constant_rate_trace(2.0, 10.0);
  CHECK(c.size() == 20);
  CHECK(c.back().seconds() < 10.0);
}

}  // TEST_SUITE
