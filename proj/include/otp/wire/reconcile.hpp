#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "otp/common.hpp"
#include "otp/tabler/session.hpp"
#include "otp/tabler/sync.hpp"
#include "otp/tabler/table.hpp"
#include "otp/wire/session.hpp"

namespace otp::wire {

// Table reconciliation over the wire. Alice streams the timestamps of her
// payload detections; Bob recovers the clock model against his own capture,
// matches coincidences, and confirms the pairs that carry payload on his
// side too. Each confirmed pair becomes one table line, numbered in stream
// order, so both halves agree on ids without ever exchanging gate, input,
// or output data.
struct ReconcileOptions {
  std::int64_t window_ps = 6000;
  std::uint64_t table_seed = 0;
  std::size_t chunk_events = 1 << 16;
};

struct AliceReconcileResult {
  tabler::SharedTableAlice table;
  std::uint64_t events_sent = 0;
  SessionStats stats;
};

struct BobReconcileResult {
  tabler::SharedTableBob table;
  double offset_start_ps = 0.0;
  double skew_ppm = 0.0;
  std::uint64_t events_received = 0;
  std::uint64_t matched = 0;  // raw coincidences before the payload filter
  SessionStats stats;
};

namespace detail {

inline std::size_t chunk_count(std::size_t items, std::size_t per_chunk) {
  if (per_chunk == 0) fail(Errc::invalid_argument, "chunk size must be positive");
  return items == 0 ? 1 : (items + per_chunk - 1) / per_chunk;
}

}  // namespace detail

inline AliceReconcileResult run_alice_reconcile(Duplex& io, const tabler::AliceCapture& cap,
                                                const ReconcileOptions& opt,
                                                std::uint64_t session_id,
                                                Transcript* transcript = nullptr) {
  detail::FrameIo fio(io, true, transcript);
  fio.set_session(session_id);

  // Payload detections only; calibration photons and dark counts stay home.
  std::vector<std::size_t> sent;
  sent.reserve(cap.events.size());
  for (std::size_t i = 0; i < cap.events.size(); ++i)
    if (cap.record_of[i] >= 0) sent.push_back(i);

  const std::size_t chunks = detail::chunk_count(sent.size(), opt.chunk_events);
  for (std::size_t c = 0; c < chunks; ++c) {
    DetectionDigest d;
    d.chunk = static_cast<std::uint32_t>(c);
    d.total_chunks = static_cast<std::uint32_t>(chunks);
    d.base_index = static_cast<std::uint64_t>(c * opt.chunk_events);
    const std::size_t lo = c * opt.chunk_events;
    const std::size_t hi = std::min(sent.size(), lo + opt.chunk_events);
    d.times_ps.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) d.times_ps.push_back(cap.events[sent[i]].time_ps);
    fio.send(MsgType::detection_digest, encode_detection_digest(d));
  }

  AliceReconcileResult res;
  res.events_sent = sent.size();
  res.table.seed = opt.table_seed;

  std::uint64_t line_id = 0;
  std::uint64_t last_alice = 0;
  bool first_pair = true;
  for (std::uint32_t expect = 0, total = 1; expect < total; ++expect) {
    const Frame f = fio.recv();
    if (f.type == MsgType::abort) {
      const Abort a = decode_abort(f.payload);
      fail(Errc::protocol_violation,
           std::string("peer aborted reconciliation: ") + abort_reason_name(a.reason));
    }
    if (f.type != MsgType::coinc_confirm) fail(Errc::protocol_violation, "expected coincidences");
    const CoincConfirm c = decode_coinc_confirm(f.payload);
    if (c.chunk != expect || c.total_chunks == 0)
      fail(Errc::protocol_violation, "coincidence chunks out of order");
    total = c.total_chunks;
    for (const auto& [a, b] : c.pairs) {
      (void)b;
      if (a >= sent.size()) fail(Errc::protocol_violation, "confirmed index out of range");
      if (!first_pair && a <= last_alice)
        fail(Errc::protocol_violation, "confirmed indices must increase");
      first_pair = false;
      last_alice = a;
      const std::int32_t rec = cap.record_of[sent[a]];
      res.table.lines.push_back(
          {line_id, cap.gates[static_cast<std::size_t>(rec)], tabler::LineStatus::Available});
      ++line_id;
    }
  }
  res.stats = fio.stats;
  return res;
}

inline BobReconcileResult run_bob_reconcile(Duplex& io, const tabler::BobCapture& cap,
                                            const ReconcileOptions& opt,
                                            Transcript* transcript = nullptr) {
  detail::FrameIo fio(io, false, transcript);

  std::vector<tabler::DetectionEvent> remote;
  for (std::uint32_t expect = 0, total = 1; expect < total; ++expect) {
    const Frame f = fio.recv();
    if (f.type == MsgType::abort) {
      const Abort a = decode_abort(f.payload);
      fail(Errc::protocol_violation,
           std::string("peer aborted reconciliation: ") + abort_reason_name(a.reason));
    }
    if (f.type != MsgType::detection_digest) fail(Errc::protocol_violation, "expected detections");
    const DetectionDigest d = decode_detection_digest(f.payload);
    if (d.chunk != expect || d.total_chunks == 0 || d.base_index != remote.size())
      fail(Errc::protocol_violation, "detection chunks out of order");
    total = d.total_chunks;
    for (const std::int64_t t : d.times_ps) remote.push_back({t, 0});
  }

  // The digest holds payload detections only, so Bob matches against his
  // payload subset as well: both rate edges then sit at the data-segment
  // onset and every coincidence carries a record on both sides. The data
  // stream itself is dense enough for the clock pipeline.
  std::vector<tabler::DetectionEvent> local;
  std::vector<std::size_t> local_index;
  local.reserve(cap.events.size());
  for (std::size_t i = 0; i < cap.events.size(); ++i) {
    if (cap.record_of[i] < 0) continue;
    local.push_back(cap.events[i]);
    local_index.push_back(i);
  }

  const tabler::ClockSync sync = tabler::find_clock_offset(remote, local);
  const auto pairs = tabler::match_coincidences(remote, local, opt.window_ps, sync.track);

  std::vector<std::pair<std::uint64_t, std::uint64_t>> kept;
  kept.reserve(pairs.size());
  for (const tabler::CoincidencePair& p : pairs)
    kept.emplace_back(static_cast<std::uint64_t>(p.alice_index),
                      static_cast<std::uint64_t>(local_index[p.bob_index]));

  const std::size_t per_chunk = std::max<std::size_t>(1, opt.chunk_events / 2);
  const std::size_t chunks = detail::chunk_count(kept.size(), per_chunk);
  for (std::size_t c = 0; c < chunks; ++c) {
    CoincConfirm msg;
    msg.chunk = static_cast<std::uint32_t>(c);
    msg.total_chunks = static_cast<std::uint32_t>(chunks);
    const std::size_t lo = c * per_chunk;
    const std::size_t hi = std::min(kept.size(), lo + per_chunk);
    msg.pairs.assign(kept.begin() + static_cast<std::ptrdiff_t>(lo),
                     kept.begin() + static_cast<std::ptrdiff_t>(hi));
    fio.send(MsgType::coinc_confirm, encode_coinc_confirm(msg));
  }

  BobReconcileResult res;
  res.offset_start_ps = sync.offset_start_ps;
  res.skew_ppm = sync.skew_ppm;
  res.events_received = remote.size();
  res.matched = pairs.size();
  res.table.seed = opt.table_seed;
  std::uint64_t line_id = 0;
  for (const auto& [a, b] : kept) {
    (void)a;
    const std::int32_t rec = cap.record_of[b];
    res.table.lines.push_back({line_id, cap.inputs[static_cast<std::size_t>(rec)],
                               cap.outputs[static_cast<std::size_t>(rec)],
                               tabler::LineStatus::Available});
    ++line_id;
  }
  res.stats = fio.stats;
  return res;
}

}  // namespace otp::wire
