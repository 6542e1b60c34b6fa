#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otp/common.hpp"
#include "otp/engine/machines.hpp"
#include "otp/wire/frame.hpp"

namespace otp::wire {

inline constexpr std::uint16_t kProtocolVersion = 1;

enum class Role : std::uint8_t { alice = 0, bob = 1 };

enum class JobType : std::uint8_t { none = 0, exec = 1, sign = 2 };

struct Hello {
  Role role = Role::alice;
  std::uint16_t protocol_version = kProtocolVersion;
  std::uint64_t table_lines = 0;
  std::uint64_t table_seed = 0;
  JobType job = JobType::none;
  std::uint32_t replicas = 0;   // sign: replicas per digest bit; exec: request count
  std::uint16_t bits = 0;       // sign only
  std::uint8_t run_chsh = 0;
  std::uint32_t chsh_lines = 0;
  std::uint64_t chsh_seed = 0;
};

inline std::vector<std::uint8_t> encode_hello(const Hello& h) {
  std::vector<std::uint8_t> out;
  put_u8(out, static_cast<std::uint8_t>(h.role));
  put_u16(out, h.protocol_version);
  put_u64(out, h.table_lines);
  put_u64(out, h.table_seed);
  put_u8(out, static_cast<std::uint8_t>(h.job));
  put_u32(out, h.replicas);
  put_u16(out, h.bits);
  put_u8(out, h.run_chsh);
  put_u32(out, h.chsh_lines);
  put_u64(out, h.chsh_seed);
  return out;
}

inline Hello decode_hello(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  Hello h;
  const std::uint8_t role = r.u8();
  if (role > 1) fail(Errc::malformed, "bad role");
  h.role = static_cast<Role>(role);
  h.protocol_version = r.u16();
  h.table_lines = r.u64();
  h.table_seed = r.u64();
  const std::uint8_t job = r.u8();
  if (job > 2) fail(Errc::malformed, "bad job type");
  h.job = static_cast<JobType>(job);
  h.replicas = r.u32();
  h.bits = r.u16();
  h.run_chsh = r.u8();
  if (h.run_chsh > 1) fail(Errc::malformed, "bad chsh flag");
  h.chsh_lines = r.u32();
  h.chsh_seed = r.u64();
  if (r.remaining() != 0) fail(Errc::malformed, "trailing bytes in hello");
  return h;
}

struct TableDigest {
  std::uint64_t line_count = 0;
  std::uint32_t status_digest = 0;
};

inline std::vector<std::uint8_t> encode_table_digest(const TableDigest& d) {
  std::vector<std::uint8_t> out;
  put_u64(out, d.line_count);
  put_u32(out, d.status_digest);
  return out;
}

inline TableDigest decode_table_digest(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  TableDigest d;
  d.line_count = r.u64();
  d.status_digest = r.u32();
  if (r.remaining() != 0) fail(Errc::malformed, "trailing bytes in table digest");
  return d;
}

// Detection timestamps travel in chunks during table reconciliation; only
// times are public, bases and outcomes stay on their side.
struct DetectionDigest {
  std::uint32_t chunk = 0;
  std::uint32_t total_chunks = 0;
  std::uint64_t base_index = 0;
  std::vector<std::int64_t> times_ps;
};

inline std::vector<std::uint8_t> encode_detection_digest(const DetectionDigest& d) {
  std::vector<std::uint8_t> out;
  put_u32(out, d.chunk);
  put_u32(out, d.total_chunks);
  put_u64(out, d.base_index);
  put_u32(out, static_cast<std::uint32_t>(d.times_ps.size()));
  for (const std::int64_t t : d.times_ps) put_i64(out, t);
  return out;
}

inline DetectionDigest decode_detection_digest(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  DetectionDigest d;
  d.chunk = r.u32();
  d.total_chunks = r.u32();
  d.base_index = r.u64();
  const std::uint32_t n = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * 8)
    fail(Errc::malformed, "detection digest length mismatch");
  d.times_ps.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) d.times_ps.push_back(r.i64());
  return d;
}

struct CoincConfirm {
  std::uint32_t chunk = 0;
  std::uint32_t total_chunks = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;  // (alice idx, bob idx)
};

inline std::vector<std::uint8_t> encode_coinc_confirm(const CoincConfirm& c) {
  std::vector<std::uint8_t> out;
  put_u32(out, c.chunk);
  put_u32(out, c.total_chunks);
  put_u32(out, static_cast<std::uint32_t>(c.pairs.size()));
  for (const auto& [a, b] : c.pairs) {
    put_u64(out, a);
    put_u64(out, b);
  }
  return out;
}

inline CoincConfirm decode_coinc_confirm(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  CoincConfirm c;
  c.chunk = r.u32();
  c.total_chunks = r.u32();
  const std::uint32_t n = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * 16)
    fail(Errc::malformed, "coincidence chunk length mismatch");
  c.pairs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint64_t a = r.u64();
    const std::uint64_t b = r.u64();
    c.pairs.emplace_back(a, b);
  }
  return c;
}

// Reveals for the previous round ride in front of the new proposals, so a
// steady-state round costs one frame each way.
struct ProposeBatch {
  std::vector<engine::Reveal> reveals;
  std::vector<engine::Proposal> proposals;
};

inline std::vector<std::uint8_t> encode_propose_batch(const ProposeBatch& b) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(b.reveals.size()));
  for (const auto& rev : b.reveals) {
    put_u64(out, rev.request_id);
    put_u8(out, rev.pad);
  }
  put_u32(out, static_cast<std::uint32_t>(b.proposals.size()));
  for (const auto& p : b.proposals) {
    put_u64(out, p.request_id);
    put_u16(out, static_cast<std::uint16_t>(p.candidate_lines.size()));
    for (const std::uint64_t id : p.candidate_lines) put_u64(out, id);
    put_u32(out, static_cast<std::uint32_t>(p.deleted_lines.size()));
    for (const std::uint64_t id : p.deleted_lines) put_u64(out, id);
  }
  return out;
}

inline ProposeBatch decode_propose_batch(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  ProposeBatch b;
  const std::uint32_t nrev = r.u32();
  b.reveals.reserve(nrev);
  for (std::uint32_t i = 0; i < nrev; ++i) {
    engine::Reveal rev;
    rev.request_id = r.u64();
    rev.pad = r.u8();
    if (rev.pad > 1) fail(Errc::malformed, "pad must be a bit");
    b.reveals.push_back(rev);
  }
  const std::uint32_t np = r.u32();
  b.proposals.reserve(np);
  for (std::uint32_t i = 0; i < np; ++i) {
    engine::Proposal p;
    p.request_id = r.u64();
    const std::uint16_t nc = r.u16();
    if (nc == 0) fail(Errc::malformed, "proposal without candidates");
    p.candidate_lines.reserve(nc);
    for (std::uint16_t c = 0; c < nc; ++c) p.candidate_lines.push_back(r.u64());
    const std::uint32_t nd = r.u32();
    p.deleted_lines.reserve(nd);
    for (std::uint32_t c = 0; c < nd; ++c) p.deleted_lines.push_back(r.u64());
    b.proposals.push_back(std::move(p));
  }
  if (r.remaining() != 0) fail(Errc::malformed, "trailing bytes in propose batch");
  return b;
}

inline std::vector<std::uint8_t> encode_respond_batch(const std::vector<engine::Response>& rs) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(rs.size()));
  for (const auto& resp : rs) {
    put_u64(out, resp.request_id);
    put_u8(out, resp.accept);
  }
  return out;
}

inline std::vector<engine::Response> decode_respond_batch(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const std::uint32_t n = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * 9)
    fail(Errc::malformed, "respond batch length mismatch");
  std::vector<engine::Response> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    engine::Response resp;
    resp.request_id = r.u64();
    resp.accept = r.u8();
    out.push_back(resp);
  }
  return out;
}

inline std::vector<std::uint8_t> encode_reveal_batch(const std::vector<engine::Reveal>& rs) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(rs.size()));
  for (const auto& rev : rs) {
    put_u64(out, rev.request_id);
    put_u8(out, rev.pad);
  }
  return out;
}

inline std::vector<engine::Reveal> decode_reveal_batch(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const std::uint32_t n = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * 9)
    fail(Errc::malformed, "reveal batch length mismatch");
  std::vector<engine::Reveal> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    engine::Reveal rev;
    rev.request_id = r.u64();
    rev.pad = r.u8();
    if (rev.pad > 1) fail(Errc::malformed, "pad must be a bit");
    out.push_back(rev);
  }
  return out;
}

// Per-line disclosure for the correlation test: Alice's byte is her gate,
// Bob's packs input and output. Lines are sacrificed on both sides.
struct TestLines {
  std::vector<std::pair<std::uint64_t, std::uint8_t>> disclosures;
};

inline std::vector<std::uint8_t> encode_test_lines(const TestLines& t) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(t.disclosures.size()));
  for (const auto& [id, v] : t.disclosures) {
    put_u64(out, id);
    put_u8(out, v);
  }
  return out;
}

inline TestLines decode_test_lines(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const std::uint32_t n = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * 9)
    fail(Errc::malformed, "test lines length mismatch");
  TestLines t;
  t.disclosures.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint64_t id = r.u64();
    const std::uint8_t v = r.u8();
    if (v > 3) fail(Errc::malformed, "disclosure byte out of range");
    t.disclosures.emplace_back(id, v);
  }
  return t;
}

struct VerifyResultMsg {
  std::uint8_t accepted = 0;
  double min_fraction = 0;
  std::uint32_t rejected_bits = 0;
};

inline std::vector<std::uint8_t> encode_verify_result(const VerifyResultMsg& v) {
  std::vector<std::uint8_t> out;
  put_u8(out, v.accepted);
  put_f64(out, v.min_fraction);
  put_u32(out, v.rejected_bits);
  return out;
}

inline VerifyResultMsg decode_verify_result(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  VerifyResultMsg v;
  v.accepted = r.u8();
  if (v.accepted > 1) fail(Errc::malformed, "bad verify flag");
  v.min_fraction = r.f64();
  v.rejected_bits = r.u32();
  if (r.remaining() != 0) fail(Errc::malformed, "trailing bytes in verify result");
  return v;
}

enum class AbortReason : std::uint8_t {
  protocol_violation = 1,
  table_exhausted = 2,
  chsh_failure = 3,
  threshold_failure = 4,
  digest_mismatch = 5,
};

struct Abort {
  AbortReason reason = AbortReason::protocol_violation;
  std::string detail;
};

inline std::vector<std::uint8_t> encode_abort(const Abort& a) {
  std::vector<std::uint8_t> out;
  put_u8(out, static_cast<std::uint8_t>(a.reason));
  put_u32(out, static_cast<std::uint32_t>(a.detail.size()));
  put_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(a.detail.data()), a.detail.size()));
  return out;
}

inline Abort decode_abort(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  Abort a;
  const std::uint8_t reason = r.u8();
  if (reason < 1 || reason > 5) fail(Errc::malformed, "unknown abort reason");
  a.reason = static_cast<AbortReason>(reason);
  const std::uint32_t n = r.u32();
  const auto s = r.bytes(n);
  a.detail.assign(s.begin(), s.end());
  if (r.remaining() != 0) fail(Errc::malformed, "trailing bytes in abort");
  return a;
}

inline const char* abort_reason_name(AbortReason r) {
  switch (r) {
    case AbortReason::protocol_violation: return "protocol_violation";
    case AbortReason::table_exhausted: return "table_exhausted";
    case AbortReason::chsh_failure: return "chsh_failure";
    case AbortReason::threshold_failure: return "threshold_failure";
    case AbortReason::digest_mismatch: return "digest_mismatch";
  }
  return "unknown";
}

}  // namespace otp::wire
