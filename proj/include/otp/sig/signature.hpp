#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "otp/common.hpp"
#include "otp/engine/batch.hpp"
#include "otp/engine/machines.hpp"
#include "otp/qsim/gates.hpp"
#include "otp/sig/sha3.hpp"

namespace otp::sig {

struct SigParams {
  std::uint32_t replicas = 1000;  // independent evaluations per digest bit
  std::uint16_t bits = 224;       // digest bits used (SHA3-224 prefix)
  double threshold = 0.776;       // per-bit accept fraction
};

inline void validate_params(const SigParams& p) {
  if (p.replicas == 0) fail(Errc::invalid_argument, "replicas must be positive");
  if (p.bits == 0 || p.bits > kDigestBits) fail(Errc::invalid_argument, "bits out of range");
  if (!(p.threshold > 0.5) || !(p.threshold <= 1.0))
    fail(Errc::invalid_argument, "threshold must be in (0.5, 1]");
}

// Evaluations needed per bit: fraction >= threshold over `replicas` draws.
inline std::int64_t accept_count(const SigParams& p) {
  return static_cast<std::int64_t>(
      std::ceil(p.threshold * static_cast<double>(p.replicas) - 1e-9));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// The signer's secret per-request gate, derived statelessly from the key
// seed. Verification needs only the seed, never the session transcript.
inline qsim::GateG1 request_gate(std::uint64_t key_seed, std::uint64_t request_id) {
  return static_cast<qsim::GateG1>(splitmix64(key_seed ^ splitmix64(request_id)) & 3);
}

inline std::uint64_t request_id_of(const SigParams& p, std::uint32_t bit, std::uint32_t replica) {
  return static_cast<std::uint64_t>(bit) * p.replicas + replica;
}

struct SignatureDoc {
  std::uint32_t replicas = 0;
  std::uint16_t bits = 0;
  std::uint8_t hash_algo = 0;  // 0 = SHA3-224
  std::vector<std::uint8_t> message;
  std::vector<std::uint8_t> sig_bits;  // packed, LSB-first, index = bit * replicas + replica
};

inline int sig_bit(const SignatureDoc& doc, std::uint64_t index) {
  return (doc.sig_bits[index / 8] >> (index % 8)) & 1;
}

inline void set_sig_bit(SignatureDoc& doc, std::uint64_t index, int v) {
  if (v)
    doc.sig_bits[index / 8] |= static_cast<std::uint8_t>(1u << (index % 8));
  else
    doc.sig_bits[index / 8] &= static_cast<std::uint8_t>(~(1u << (index % 8)));
}

struct SignResult {
  SignatureDoc doc;
  int rounds = 0;
};

// One-time signing run over pre-registered tables. Bob hashes the message,
// evaluates every (bit, replica) request at his digest bit, and assembles
// the signature from the padded outputs. Alice never sees the digest bits.
inline SignResult sign_message(engine::AliceEngine& alice, engine::BobEngine& bob,
                               std::uint64_t key_seed, const SigParams& params,
                               std::span<const std::uint8_t> message,
                               const engine::BatchOptions& opt = {}) {
  validate_params(params);
  const auto digest = sha3_224(message);
  for (std::uint32_t i = 0; i < params.bits; ++i) {
    const int b = digest_bit(digest, i);
    for (std::uint32_t j = 0; j < params.replicas; ++j) {
      const std::uint64_t id = request_id_of(params, i, j);
      alice.add_request(id, request_gate(key_seed, id));
      bob.add_request(id, b);
    }
  }
  const engine::BatchResult batch = engine::run_batch(alice, bob, opt);
  SignResult res;
  res.rounds = batch.rounds;
  res.doc.replicas = params.replicas;
  res.doc.bits = params.bits;
  res.doc.message.assign(message.begin(), message.end());
  res.doc.sig_bits.assign(
      (static_cast<std::size_t>(params.bits) * params.replicas + 7) / 8, 0);
  for (const auto& [id, out] : batch.outputs) set_sig_bit(res.doc, id, out);
  return res;
}

struct VerifyReport {
  bool accepted = false;
  double min_fraction = 0;
  int rejected_bits = 0;
  std::vector<double> per_bit_fraction;
};

inline VerifyReport verify_signature(const SignatureDoc& doc, std::uint64_t key_seed,
                                     double threshold) {
  SigParams p{doc.replicas, doc.bits, threshold};
  validate_params(p);
  if (doc.hash_algo != 0) fail(Errc::invalid_argument, "unknown hash algorithm");
  const auto digest = sha3_224(doc.message);
  const std::int64_t need = accept_count(p);
  VerifyReport rep;
  rep.accepted = true;
  rep.min_fraction = 1;
  rep.per_bit_fraction.reserve(doc.bits);
  for (std::uint32_t i = 0; i < doc.bits; ++i) {
    const int b = digest_bit(digest, i);
    std::int64_t matches = 0;
    for (std::uint32_t j = 0; j < doc.replicas; ++j) {
      const std::uint64_t id = request_id_of(p, i, j);
      const int expected = qsim::apply_gate(request_gate(key_seed, id), b);
      matches += sig_bit(doc, id) == expected ? 1 : 0;
    }
    const double frac = static_cast<double>(matches) / doc.replicas;
    rep.per_bit_fraction.push_back(frac);
    if (frac < rep.min_fraction) rep.min_fraction = frac;
    if (matches < need) {
      rep.accepted = false;
      ++rep.rejected_bits;
    }
  }
  return rep;
}

inline constexpr char kSigMagic[4] = {'O', 'T', 'P', 'S'};
inline constexpr std::uint16_t kSigVersion = 1;
inline constexpr std::size_t kMaxSigMessage = 16u << 20;

inline std::vector<std::uint8_t> serialize_signature(const SignatureDoc& doc) {
  if (doc.message.size() > kMaxSigMessage) fail(Errc::oversize, "message too large");
  const std::size_t nbits = static_cast<std::size_t>(doc.bits) * doc.replicas;
  if (doc.sig_bits.size() != (nbits + 7) / 8)
    fail(Errc::invalid_argument, "signature bit buffer has wrong size");
  std::vector<std::uint8_t> out;
  out.reserve(4 + 2 + 4 + 2 + 1 + 4 + doc.message.size() + doc.sig_bits.size() + 4);
  put_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(kSigMagic), 4));
  put_u16(out, kSigVersion);
  put_u32(out, doc.replicas);
  put_u16(out, doc.bits);
  put_u8(out, doc.hash_algo);
  put_u32(out, static_cast<std::uint32_t>(doc.message.size()));
  put_bytes(out, doc.message);
  put_bytes(out, doc.sig_bits);
  put_u32(out, crc32_bytes(out));
  return out;
}

inline SignatureDoc parse_signature(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) fail(Errc::truncated, "signature file truncated");
  const std::uint32_t stored = ByteReader(bytes.subspan(bytes.size() - 4)).u32();
  if (crc32_bytes(bytes.first(bytes.size() - 4)) != stored)
    fail(Errc::checksum_mismatch, "signature file checksum mismatch");
  ByteReader r(bytes.first(bytes.size() - 4));
  const auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), kSigMagic, 4) != 0) fail(Errc::bad_magic, "not a signature file");
  if (r.u16() != kSigVersion) fail(Errc::version_mismatch, "unsupported signature version");
  SignatureDoc doc;
  doc.replicas = r.u32();
  doc.bits = r.u16();
  doc.hash_algo = r.u8();
  if (doc.replicas == 0 || doc.bits == 0 || doc.bits > kDigestBits)
    fail(Errc::malformed, "signature header out of range");
  if (doc.hash_algo != 0) fail(Errc::malformed, "unknown hash algorithm");
  const std::uint32_t msg_len = r.u32();
  if (msg_len > kMaxSigMessage) fail(Errc::oversize, "message too large");
  const auto msg = r.bytes(msg_len);
  doc.message.assign(msg.begin(), msg.end());
  const std::size_t nbits = static_cast<std::size_t>(doc.bits) * doc.replicas;
  const auto packed = r.bytes((nbits + 7) / 8);
  doc.sig_bits.assign(packed.begin(), packed.end());
  if (r.remaining() != 0) fail(Errc::malformed, "trailing bytes in signature file");
  if (nbits % 8 != 0 && (doc.sig_bits.back() >> (nbits % 8)) != 0)
    fail(Errc::malformed, "nonzero padding bits");
  return doc;
}

}  // namespace otp::sig
