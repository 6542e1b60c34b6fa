#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "otp/common.hpp"
#include "otp/qsim/gates.hpp"
#include "otp/qsim/states.hpp"

namespace otp::tabler {

// Line lifecycle. A line leaves Available exactly once; Deleted lines are
// announced to the peer so both views stay synchronized.
enum class LineStatus : std::uint8_t { Available = 0, Proposed = 1, Consumed = 2, Deleted = 3 };

inline bool status_valid(std::uint8_t v) { return v <= 3; }

struct AliceLine {
  std::uint64_t line_id = 0;
  qsim::GateG1 gate = qsim::GateG1::Const0;
  LineStatus status = LineStatus::Available;
};

struct BobLine {
  std::uint64_t line_id = 0;
  std::uint8_t input = 0;   // measurement basis bit: 0 = Z, 1 = X
  std::uint8_t output = 0;  // measurement outcome
  LineStatus status = LineStatus::Available;
};

inline constexpr char kTableMagic[4] = {'O', 'T', 'P', 'T'};
inline constexpr std::uint16_t kTableVersion = 1;

enum class Party : std::uint8_t { Alice = 0, Bob = 1 };

// Shared-table halves. line_ids are strictly increasing (sequential from 0
// for freshly reconciled tables).
struct SharedTableAlice {
  std::uint64_t seed = 0;
  std::vector<AliceLine> lines;
};

struct SharedTableBob {
  std::uint64_t seed = 0;
  std::vector<BobLine> lines;
};

namespace detail {

inline std::vector<std::uint8_t> table_header(Party party, std::uint64_t line_count,
                                              std::uint64_t seed) {
  std::vector<std::uint8_t> out;
  out.reserve(24);
  put_bytes(out, std::span<const std::uint8_t>(
                     reinterpret_cast<const std::uint8_t*>(kTableMagic), 4));
  put_u16(out, kTableVersion);
  put_u8(out, static_cast<std::uint8_t>(party));
  put_u8(out, 0);  // reserved
  put_u64(out, line_count);
  put_u64(out, seed);
  return out;
}

// Parses and validates the 24-byte header; returns (party, line_count, seed).
inline std::tuple<Party, std::uint64_t, std::uint64_t> check_table_envelope(
    std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 28) fail(Errc::truncated, "table file shorter than header+crc");
  const std::uint32_t stored =
      static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
  if (crc32_bytes(bytes.first(bytes.size() - 4)) != stored)
    fail(Errc::checksum_mismatch, "table file checksum mismatch");
  ByteReader r(bytes);
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kTableMagic))
    fail(Errc::bad_magic, "not a table file");
  const std::uint16_t version = r.u16();
  if (version != kTableVersion) fail(Errc::version_mismatch, "unsupported table version");
  const std::uint8_t party = r.u8();
  if (party > 1) fail(Errc::malformed, "bad party byte");
  r.u8();  // reserved
  const std::uint64_t count = r.u64();
  const std::uint64_t seed = r.u64();
  return {static_cast<Party>(party), count, seed};
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const SharedTableAlice& t) {
  std::vector<std::uint8_t> out = detail::table_header(Party::Alice, t.lines.size(), t.seed);
  out.reserve(out.size() + t.lines.size() * 10 + 4);
  for (const AliceLine& l : t.lines) {
    put_u64(out, l.line_id);
    put_u8(out, static_cast<std::uint8_t>(l.gate));
    put_u8(out, static_cast<std::uint8_t>(l.status));
  }
  put_u32(out, crc32_bytes(out));
  return out;
}

inline std::vector<std::uint8_t> serialize(const SharedTableBob& t) {
  std::vector<std::uint8_t> out = detail::table_header(Party::Bob, t.lines.size(), t.seed);
  out.reserve(out.size() + t.lines.size() * 11 + 4);
  for (const BobLine& l : t.lines) {
    put_u64(out, l.line_id);
    put_u8(out, l.input);
    put_u8(out, l.output);
    put_u8(out, static_cast<std::uint8_t>(l.status));
  }
  put_u32(out, crc32_bytes(out));
  return out;
}

inline SharedTableAlice parse_alice_table(std::span<const std::uint8_t> bytes) {
  const auto [party, count, seed] = detail::check_table_envelope(bytes);
  if (party != Party::Alice) fail(Errc::malformed, "expected an operator-side table");
  if (bytes.size() != 28 + count * 10) fail(Errc::truncated, "table record area size mismatch");
  ByteReader r(bytes.subspan(24, bytes.size() - 28));
  SharedTableAlice t;
  t.seed = seed;
  t.lines.resize(count);
  std::uint64_t prev_id = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    AliceLine& l = t.lines[i];
    l.line_id = r.u64();
    const std::uint8_t g = r.u8();
    const std::uint8_t s = r.u8();
    auto gate = qsim::gate_from_byte(g);
    if (!gate || !status_valid(s)) fail(Errc::malformed, "bad line record");
    l.gate = *gate;
    l.status = static_cast<LineStatus>(s);
    if (i > 0 && l.line_id <= prev_id) fail(Errc::malformed, "line ids not increasing");
    prev_id = l.line_id;
  }
  return t;
}

inline SharedTableBob parse_bob_table(std::span<const std::uint8_t> bytes) {
  const auto [party, count, seed] = detail::check_table_envelope(bytes);
  if (party != Party::Bob) fail(Errc::malformed, "expected an evaluator-side table");
  if (bytes.size() != 28 + count * 11) fail(Errc::truncated, "table record area size mismatch");
  ByteReader r(bytes.subspan(24, bytes.size() - 28));
  SharedTableBob t;
  t.seed = seed;
  t.lines.resize(count);
  std::uint64_t prev_id = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    BobLine& l = t.lines[i];
    l.line_id = r.u64();
    l.input = r.u8();
    l.output = r.u8();
    const std::uint8_t s = r.u8();
    if (l.input > 1 || l.output > 1 || !status_valid(s)) fail(Errc::malformed, "bad line record");
    l.status = static_cast<LineStatus>(s);
    if (i > 0 && l.line_id <= prev_id) fail(Errc::malformed, "line ids not increasing");
    prev_id = l.line_id;
  }
  return t;
}

inline void save_table(const SharedTableAlice& t, const std::string& path) {
  const auto bytes = serialize(t);
  write_file(path, bytes);
}
inline void save_table(const SharedTableBob& t, const std::string& path) {
  const auto bytes = serialize(t);
  write_file(path, bytes);
}

inline SharedTableAlice load_alice_table(const std::string& path) {
  return parse_alice_table(read_file(path));
}
inline SharedTableBob load_bob_table(const std::string& path) {
  return parse_bob_table(read_file(path));
}

// Summary digest of a table view: line count plus a CRC over (line_id,
// status) pairs. Used to confirm both parties hold consistent views.
inline std::uint32_t status_digest(const SharedTableAlice& t) {
  std::vector<std::uint8_t> buf;
  buf.reserve(t.lines.size() * 9);
  for (const AliceLine& l : t.lines) {
    put_u64(buf, l.line_id);
    put_u8(buf, static_cast<std::uint8_t>(l.status));
  }
  return crc32_bytes(buf);
}

inline std::uint32_t status_digest(const SharedTableBob& t) {
  std::vector<std::uint8_t> buf;
  buf.reserve(t.lines.size() * 9);
  for (const BobLine& l : t.lines) {
    put_u64(buf, l.line_id);
    put_u8(buf, static_cast<std::uint8_t>(l.status));
  }
  return crc32_bytes(buf);
}

}  // namespace otp::tabler
