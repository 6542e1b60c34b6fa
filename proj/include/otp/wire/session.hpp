#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "otp/common.hpp"
#include "otp/engine/batch.hpp"
#include "otp/engine/machines.hpp"
#include "otp/security/chsh.hpp"
#include "otp/sig/signature.hpp"
#include "otp/tabler/table.hpp"
#include "otp/wire/frame.hpp"
#include "otp/wire/messages.hpp"
#include "otp/wire/transport.hpp"

namespace otp::wire {

struct TranscriptEntry {
  bool from_alice = false;
  Frame frame;
};
using Transcript = std::vector<TranscriptEntry>;

struct SessionStats {
  int rounds = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

namespace detail {

// Frame-level endpoint: pins the session id after the first frame and
// records the transcript when asked.
class FrameIo {
 public:
  FrameIo(Duplex& io, bool is_alice, Transcript* transcript)
      : io_(io), is_alice_(is_alice), transcript_(transcript) {}

  void set_session(std::uint64_t id) {
    session_id_ = id;
    have_session_ = true;
  }
  std::uint64_t session() const { return session_id_; }

  void send(MsgType type, std::vector<std::uint8_t> payload) {
    Frame f;
    f.type = type;
    f.session_id = session_id_;
    f.payload = std::move(payload);
    const auto bytes = encode_frame(f);
    io_.send(bytes);
    ++stats.frames_sent;
    stats.bytes_sent += bytes.size();
    if (transcript_) transcript_->push_back({is_alice_, std::move(f)});
  }

  Frame recv() {
    for (;;) {
      if (auto f = dec_.next()) {
        if (!have_session_) set_session(f->session_id);
        if (f->session_id != session_id_)
          fail(Errc::protocol_violation, "frame for a different session");
        ++stats.frames_received;
        if (transcript_) transcript_->push_back({!is_alice_, *f});
        return std::move(*f);
      }
      std::uint8_t buf[1 << 16];
      const std::size_t n = io_.recv(buf);
      if (n == 0) fail(Errc::io, "peer closed the connection");
      stats.bytes_received += n;
      dec_.feed(std::span(buf, n));
    }
  }

  SessionStats stats;

 private:
  Duplex& io_;
  bool is_alice_;
  Transcript* transcript_;
  FrameDecoder dec_;
  std::uint64_t session_id_ = 0;
  bool have_session_ = false;
};

inline std::uint8_t pack_bob_disclosure(std::uint8_t input, std::uint8_t output) {
  return static_cast<std::uint8_t>((input << 1) | output);
}

}  // namespace detail

struct AliceConfig {
  std::uint64_t engine_seed = 1;
  std::uint64_t key_seed = 0;  // secret per-request gate derivation
  int candidates_per_request = 1;
  double chsh_abort_threshold = 2.5;
  double sig_threshold = 0.776;
  bool collect_audit = false;
};

struct AliceOutcome {
  bool completed = false;
  std::optional<Abort> aborted;  // set when either side aborted
  std::optional<sig::VerifyReport> verify;
  std::optional<security::ChshEstimate> chsh;
  SessionStats stats;
};

struct BobExecJob {
  std::vector<std::pair<std::uint64_t, int>> inputs;  // (request id, input bit)
};

struct BobSignJob {
  std::vector<std::uint8_t> message;
  sig::SigParams params;
};

struct BobConfig {
  std::uint64_t session_id = 1;
  std::optional<BobExecJob> exec;
  std::optional<BobSignJob> sign;
  bool run_chsh = false;
  std::uint32_t chsh_lines = 0;
  std::uint64_t chsh_seed = 0;
  double chsh_abort_threshold = 2.5;
  bool collect_audit = false;
};

struct BobOutcome {
  bool completed = false;
  std::optional<Abort> aborted;
  std::vector<std::pair<std::uint64_t, int>> outputs;
  std::optional<sig::SignatureDoc> signature;
  std::optional<VerifyResultMsg> verify;
  std::optional<security::ChshEstimate> chsh;
  SessionStats stats;
};

// Serves one session over an established connection. The table is consumed
// in place; persist it afterwards to retain one-time semantics.
inline AliceOutcome run_alice_session(Duplex& io, tabler::SharedTableAlice& table,
                                      const AliceConfig& cfg, Transcript* transcript = nullptr) {
  detail::FrameIo fio(io, true, transcript);
  AliceOutcome out;
  const auto finish = [&] {
    out.stats = fio.stats;
    return out;
  };
  const auto abort_local = [&](AbortReason reason, const std::string& why) {
    Abort a{reason, why};
    fio.send(MsgType::abort, encode_abort(a));
    out.aborted = a;
    return finish();
  };

  Frame f = fio.recv();
  if (f.type == MsgType::abort) {
    out.aborted = decode_abort(f.payload);
    return finish();
  }
  if (f.type != MsgType::hello) fail(Errc::protocol_violation, "expected hello");
  const Hello peer = decode_hello(f.payload);
  if (peer.role != Role::bob) fail(Errc::protocol_violation, "peer must open as bob");
  if (peer.protocol_version != kProtocolVersion)
    return abort_local(AbortReason::protocol_violation, "protocol version mismatch");
  if (peer.table_seed != table.seed || peer.table_lines != table.lines.size())
    return abort_local(AbortReason::digest_mismatch, "table identity mismatch");

  Hello mine;
  mine.role = Role::alice;
  mine.table_lines = table.lines.size();
  mine.table_seed = table.seed;
  mine.job = peer.job;
  mine.replicas = peer.replicas;
  mine.bits = peer.bits;
  mine.run_chsh = peer.run_chsh;
  mine.chsh_lines = peer.chsh_lines;
  mine.chsh_seed = peer.chsh_seed;
  fio.send(MsgType::hello, encode_hello(mine));
  fio.send(MsgType::table_digest,
           encode_table_digest({table.lines.size(), tabler::status_digest(table)}));

  if (peer.run_chsh) {
    Frame tf = fio.recv();
    if (tf.type == MsgType::abort) {
      out.aborted = decode_abort(tf.payload);
      return finish();
    }
    if (tf.type != MsgType::test_lines) fail(Errc::protocol_violation, "expected test lines");
    const TestLines bob_lines = decode_test_lines(tf.payload);
    const auto idx = security::test_line_indices(table, peer.chsh_lines, peer.chsh_seed);
    if (bob_lines.disclosures.size() != idx.size())
      return abort_local(AbortReason::protocol_violation, "test line set size mismatch");
    TestLines mine_lines;
    std::vector<security::ChshSample> samples;
    samples.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      tabler::AliceLine& line = table.lines[idx[i]];
      const auto& [id, packed] = bob_lines.disclosures[i];
      if (id != line.line_id)
        return abort_local(AbortReason::protocol_violation, "test line ids diverge");
      samples.push_back({line.gate, static_cast<std::uint8_t>(packed >> 1),
                         static_cast<std::uint8_t>(packed & 1)});
      mine_lines.disclosures.emplace_back(line.line_id, static_cast<std::uint8_t>(line.gate));
      line.status = tabler::LineStatus::Consumed;
    }
    fio.send(MsgType::test_lines, encode_test_lines(mine_lines));
    out.chsh = security::chsh_estimate(samples);
    if (out.chsh->s < cfg.chsh_abort_threshold)
      return abort_local(AbortReason::chsh_failure, "correlation check failed");
  }

  engine::AliceEngine eng(std::move(table), cfg.engine_seed, cfg.collect_audit);
  std::uint64_t total_requests = 0;
  if (peer.job == JobType::exec) {
    total_requests = peer.replicas;
  } else if (peer.job == JobType::sign) {
    total_requests = static_cast<std::uint64_t>(peer.replicas) * peer.bits;
  }
  for (std::uint64_t id = 0; id < total_requests; ++id)
    eng.add_request(id, sig::request_gate(cfg.key_seed, id));

  std::vector<engine::Reveal> reveals;
  try {
    while (!eng.done()) {
      const auto props = eng.propose_round(cfg.candidates_per_request);
      fio.send(MsgType::propose_batch, encode_propose_batch({reveals, props}));
      reveals.clear();
      Frame rf = fio.recv();
      if (rf.type == MsgType::abort) {
        out.aborted = decode_abort(rf.payload);
        table = std::move(eng.table());
        return finish();
      }
      if (rf.type != MsgType::respond_batch) fail(Errc::protocol_violation, "expected responses");
      reveals = eng.absorb_responses(decode_respond_batch(rf.payload));
      ++fio.stats.rounds;
    }
  } catch (const Error& e) {
    table = std::move(eng.table());
    if (e.code() != Errc::table_exhausted) throw;
    return abort_local(AbortReason::table_exhausted, "table exhausted");
  }
  fio.send(MsgType::reveal_batch, encode_reveal_batch(reveals));
  table = std::move(eng.table());

  if (peer.job == JobType::sign) {
    Frame sf = fio.recv();
    if (sf.type == MsgType::abort) {
      out.aborted = decode_abort(sf.payload);
      return finish();
    }
    if (sf.type != MsgType::sign_submit) fail(Errc::protocol_violation, "expected signature");
    const sig::SignatureDoc doc = sig::parse_signature(sf.payload);
    if (doc.replicas != peer.replicas || doc.bits != peer.bits)
      return abort_local(AbortReason::protocol_violation, "signature shape mismatch");
    out.verify = sig::verify_signature(doc, cfg.key_seed, cfg.sig_threshold);
    VerifyResultMsg vr;
    vr.accepted = out.verify->accepted ? 1 : 0;
    vr.min_fraction = out.verify->min_fraction;
    vr.rejected_bits = static_cast<std::uint32_t>(out.verify->rejected_bits);
    fio.send(MsgType::verify_result, encode_verify_result(vr));
  }

  out.completed = true;
  return finish();
}

inline BobOutcome run_bob_session(Duplex& io, tabler::SharedTableBob& table, const BobConfig& cfg,
                                  Transcript* transcript = nullptr) {
  if (cfg.exec.has_value() == cfg.sign.has_value())
    fail(Errc::invalid_argument, "configure exactly one job");
  detail::FrameIo fio(io, false, transcript);
  fio.set_session(cfg.session_id);
  BobOutcome out;
  const auto finish = [&] {
    out.stats = fio.stats;
    return out;
  };
  const auto abort_local = [&](AbortReason reason, const std::string& why) {
    Abort a{reason, why};
    fio.send(MsgType::abort, encode_abort(a));
    out.aborted = a;
    return finish();
  };

  Hello hello;
  hello.role = Role::bob;
  hello.table_lines = table.lines.size();
  hello.table_seed = table.seed;
  hello.run_chsh = cfg.run_chsh ? 1 : 0;
  hello.chsh_lines = cfg.chsh_lines;
  hello.chsh_seed = cfg.chsh_seed;
  if (cfg.exec) {
    hello.job = JobType::exec;
    hello.replicas = static_cast<std::uint32_t>(cfg.exec->inputs.size());
  } else {
    hello.job = JobType::sign;
    hello.replicas = cfg.sign->params.replicas;
    hello.bits = cfg.sign->params.bits;
  }
  fio.send(MsgType::hello, encode_hello(hello));

  Frame f = fio.recv();
  if (f.type == MsgType::abort) {
    out.aborted = decode_abort(f.payload);
    return finish();
  }
  if (f.type != MsgType::hello) fail(Errc::protocol_violation, "expected hello");
  const Hello peer = decode_hello(f.payload);
  if (peer.role != Role::alice) fail(Errc::protocol_violation, "peer must answer as alice");

  Frame df = fio.recv();
  if (df.type == MsgType::abort) {
    out.aborted = decode_abort(df.payload);
    return finish();
  }
  if (df.type != MsgType::table_digest) fail(Errc::protocol_violation, "expected table digest");
  const TableDigest digest = decode_table_digest(df.payload);
  if (digest.line_count != table.lines.size() || digest.status_digest != tabler::status_digest(table))
    return abort_local(AbortReason::digest_mismatch, "table digest mismatch");

  if (cfg.run_chsh) {
    // Disclosed lines are burned the moment they leave this side, whatever
    // the peer does with them.
    const auto idx = security::test_line_indices(table, cfg.chsh_lines, cfg.chsh_seed);
    TestLines mine;
    mine.disclosures.reserve(idx.size());
    for (const std::size_t i : idx) {
      tabler::BobLine& line = table.lines[i];
      mine.disclosures.emplace_back(line.line_id,
                                    detail::pack_bob_disclosure(line.input, line.output));
      line.status = tabler::LineStatus::Consumed;
    }
    fio.send(MsgType::test_lines, encode_test_lines(mine));
    Frame tf = fio.recv();
    if (tf.type == MsgType::abort) {
      out.aborted = decode_abort(tf.payload);
      return finish();
    }
    if (tf.type != MsgType::test_lines) fail(Errc::protocol_violation, "expected test lines");
    const TestLines alice_lines = decode_test_lines(tf.payload);
    if (alice_lines.disclosures.size() != idx.size())
      return abort_local(AbortReason::protocol_violation, "test line set size mismatch");
    std::vector<security::ChshSample> samples;
    samples.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const tabler::BobLine& line = table.lines[idx[i]];
      const auto& [id, gate_byte] = alice_lines.disclosures[i];
      if (id != line.line_id)
        return abort_local(AbortReason::protocol_violation, "test line ids diverge");
      const auto gate = qsim::gate_from_byte(gate_byte);
      if (!gate) return abort_local(AbortReason::protocol_violation, "bad gate disclosure");
      samples.push_back({*gate, line.input, line.output});
    }
    out.chsh = security::chsh_estimate(samples);
    if (out.chsh->s < cfg.chsh_abort_threshold)
      return abort_local(AbortReason::chsh_failure, "correlation check failed");
  }

  engine::BobEngine eng(std::move(table), cfg.collect_audit);
  if (cfg.exec) {
    for (const auto& [id, input] : cfg.exec->inputs) eng.add_request(id, input);
  } else {
    sig::validate_params(cfg.sign->params);
    const auto d = sig::sha3_224(cfg.sign->message);
    for (std::uint32_t i = 0; i < cfg.sign->params.bits; ++i) {
      const int b = sig::digest_bit(d, i);
      for (std::uint32_t j = 0; j < cfg.sign->params.replicas; ++j)
        eng.add_request(sig::request_id_of(cfg.sign->params, i, j), b);
    }
  }

  try {
    for (;;) {
      Frame rf = fio.recv();
      if (rf.type == MsgType::abort) {
        out.aborted = decode_abort(rf.payload);
        table = std::move(eng.table());
        return finish();
      }
      if (rf.type == MsgType::reveal_batch) {
        for (const auto& rev : decode_reveal_batch(rf.payload)) eng.apply_reveal(rev);
        break;
      }
      if (rf.type != MsgType::propose_batch) fail(Errc::protocol_violation, "expected proposals");
      const ProposeBatch batch = decode_propose_batch(rf.payload);
      for (const auto& rev : batch.reveals) eng.apply_reveal(rev);
      std::vector<engine::Response> resps;
      resps.reserve(batch.proposals.size());
      for (const auto& p : batch.proposals) resps.push_back(eng.respond(p));
      fio.send(MsgType::respond_batch, encode_respond_batch(resps));
      ++fio.stats.rounds;
    }
  } catch (...) {
    table = std::move(eng.table());
    throw;
  }
  for (const auto& c : eng.completed()) out.outputs.emplace_back(c.request_id, c.output);
  table = std::move(eng.table());

  if (cfg.sign) {
    sig::SignatureDoc doc;
    doc.replicas = cfg.sign->params.replicas;
    doc.bits = cfg.sign->params.bits;
    doc.message = cfg.sign->message;
    doc.sig_bits.assign(
        (static_cast<std::size_t>(doc.bits) * doc.replicas + 7) / 8, 0);
    for (const auto& [id, bit] : out.outputs) sig::set_sig_bit(doc, id, bit);
    fio.send(MsgType::sign_submit, sig::serialize_signature(doc));
    out.signature = std::move(doc);
    Frame vf = fio.recv();
    if (vf.type == MsgType::abort) {
      out.aborted = decode_abort(vf.payload);
      return finish();
    }
    if (vf.type != MsgType::verify_result) fail(Errc::protocol_violation, "expected verify result");
    out.verify = decode_verify_result(vf.payload);
  }

  out.completed = true;
  return finish();
}

// Recomputes Bob's outputs from the captured frames and a pristine copy of
// his table. The desired inputs never travel on the wire, so the caller
// supplies them; recomputed responses must match the recorded ones bit for
// bit or the transcript is inconsistent.
inline std::vector<std::pair<std::uint64_t, int>> replay_transcript(
    const Transcript& transcript, tabler::SharedTableBob table,
    const std::vector<std::pair<std::uint64_t, std::uint8_t>>& desired_inputs) {
  engine::BobEngine eng(std::move(table));
  for (const auto& [id, input] : desired_inputs) eng.add_request(id, input);
  const auto respond_after = [&](std::size_t after) -> const Frame& {
    for (std::size_t k = after; k < transcript.size(); ++k)
      if (!transcript[k].from_alice && transcript[k].frame.type == MsgType::respond_batch)
        return transcript[k].frame;
    fail(Errc::protocol_violation, "transcript missing a respond frame");
  };
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    const TranscriptEntry& e = transcript[i];
    if (!e.from_alice) continue;
    if (e.frame.type == MsgType::propose_batch) {
      const ProposeBatch batch = decode_propose_batch(e.frame.payload);
      for (const auto& rev : batch.reveals) eng.apply_reveal(rev);
      std::vector<engine::Response> resps;
      for (const auto& p : batch.proposals) resps.push_back(eng.respond(p));
      const auto recorded = decode_respond_batch(respond_after(i + 1).payload);
      if (recorded.size() != resps.size())
        fail(Errc::protocol_violation, "transcript responses diverge");
      for (std::size_t k = 0; k < resps.size(); ++k)
        if (recorded[k].request_id != resps[k].request_id || recorded[k].accept != resps[k].accept)
          fail(Errc::protocol_violation, "transcript responses diverge");
    } else if (e.frame.type == MsgType::reveal_batch) {
      for (const auto& rev : decode_reveal_batch(e.frame.payload)) eng.apply_reveal(rev);
    }
  }
  std::vector<std::pair<std::uint64_t, int>> outputs;
  for (const auto& c : eng.completed()) outputs.emplace_back(c.request_id, c.output);
  return outputs;
}

}  // namespace otp::wire
