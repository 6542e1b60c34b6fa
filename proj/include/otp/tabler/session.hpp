#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "otp/common.hpp"
#include "otp/qsim/noise.hpp"
#include "otp/tabler/table.hpp"

namespace otp::tabler {

// Detection-level simulation parameters. Times are picoseconds; Alice's
// clock is the reference, Bob's recorded time is
// offset + (1 + skew_ppm*1e-6) * true_time + jitter.
struct SessionParams {
  double pair_rate_hz = 10000.0;
  double duration_s = 10.0;  // data segment length
  std::int64_t coincidence_window_ps = 6000;
  std::int64_t clock_offset_ps = 0;
  double clock_skew_ppm = 0.0;
  double timestamp_jitter_ps = 100.0;
  qsim::NoiseModel noise;
  std::uint64_t seed = 0;
};

// Session timeline: a silent lead-in, a calibration flood used for clock
// recovery, a second silence, then the data segment that feeds the table.
inline constexpr std::int64_t kSilenceAPs = 10'000'000'000;      // [0, 10 ms)
inline constexpr std::int64_t kCalibStartPs = kSilenceAPs;       // [10 ms, 100 ms)
inline constexpr std::int64_t kCalibEndPs = 100'000'000'000;
inline constexpr std::int64_t kDataStartPs = 110'000'000'000;    // 10 ms more silence

struct DetectionEvent {
  std::int64_t time_ps = 0;
  std::uint8_t channel = 0;  // 2*basis + outcome index
};

// One party's raw capture. record_of maps an event to its payload record
// (-1 for calibration photons and dark counts). Payload arrays are indexed
// by that record id.
struct AliceCapture {
  std::vector<DetectionEvent> events;
  std::vector<std::int32_t> record_of;
  std::vector<qsim::GateG1> gates;
  std::vector<std::uint8_t> multi_photon;
};

struct BobCapture {
  std::vector<DetectionEvent> events;
  std::vector<std::int32_t> record_of;
  std::vector<std::uint8_t> inputs;
  std::vector<std::uint8_t> outputs;
};

struct SessionCapture {
  SessionParams params;
  AliceCapture alice;
  BobCapture bob;
  std::uint64_t emitted_pairs = 0;
  std::uint64_t data_pairs = 0;
  std::uint64_t bob_lost = 0;
};

namespace detail {

struct EventSorter {
  bool operator()(const DetectionEvent& a, const DetectionEvent& b) const {
    return a.time_ps < b.time_ps;
  }
};

// Sorts events and keeps the record map aligned.
template <class Capture>
inline void sort_capture(Capture& cap) {
  const std::size_t n = cap.events.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cap.events[a].time_ps < cap.events[b].time_ps;
  });
  std::vector<DetectionEvent> ev(n);
  std::vector<std::int32_t> rec(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev[i] = cap.events[order[i]];
    rec[i] = cap.record_of[order[i]];
  }
  cap.events = std::move(ev);
  cap.record_of = std::move(rec);
}

}  // namespace detail

// Runs one entangled-pair session and returns both raw captures. Alice
// detects every emission; Bob's photon is lost with probability loss_prob.
// Calibration-segment photons produce detections but no payload records.
inline SessionCapture simulate_session(const SessionParams& params) {
  SessionCapture cap;
  cap.params = params;
  Rng rng(params.seed);
  std::exponential_distribution<double> gap_s(params.pair_rate_hz);
  std::normal_distribution<double> jitter(0.0, params.timestamp_jitter_ps);

  const double skew_factor = 1.0 + params.clock_skew_ppm * 1e-6;
  auto bob_clock = [&](double true_ps) {
    return static_cast<std::int64_t>(static_cast<double>(params.clock_offset_ps) +
                                     skew_factor * true_ps);
  };

  const std::int64_t data_end_ps =
      kDataStartPs + static_cast<std::int64_t>(params.duration_s * 1e12);

  // Two emission windows: calibration and data.
  const std::int64_t spans[2][2] = {{kCalibStartPs, kCalibEndPs}, {kDataStartPs, data_end_ps}};
  for (int seg = 0; seg < 2; ++seg) {
    const bool data_segment = seg == 1;
    double t = static_cast<double>(spans[seg][0]);
    const double end = static_cast<double>(spans[seg][1]);
    for (;;) {
      t += gap_s(rng) * 1e12;
      if (t >= end) break;
      ++cap.emitted_pairs;
      const qsim::PairEvent ev = qsim::sample_pair_event(params.noise, rng);

      // Alice channel: 2*basis + her own outcome index.
      const qsim::AliceBasis abasis = qsim::basis_of_gate(ev.gate);
      const std::uint8_t a_ch = static_cast<std::uint8_t>(
          2 * static_cast<int>(abasis) + (qsim::alice_outcome_negative(ev.gate) ? 1 : 0));
      std::int32_t a_rec = -1;
      if (data_segment) {
        a_rec = static_cast<std::int32_t>(cap.alice.gates.size());
        cap.alice.gates.push_back(ev.gate);
        cap.alice.multi_photon.push_back(ev.multi_photon ? 1 : 0);
        ++cap.data_pairs;
      }
      cap.alice.events.push_back(
          {static_cast<std::int64_t>(t + jitter(rng)), a_ch});
      cap.alice.record_of.push_back(a_rec);

      if (ev.bob_lost) {
        if (data_segment) ++cap.bob_lost;
        continue;
      }
      const std::uint8_t b_ch = static_cast<std::uint8_t>(
          2 * static_cast<int>(ev.input) + ev.output);
      std::int32_t b_rec = -1;
      if (data_segment) {
        b_rec = static_cast<std::int32_t>(cap.bob.inputs.size());
        cap.bob.inputs.push_back(static_cast<std::uint8_t>(ev.input));
        cap.bob.outputs.push_back(ev.output);
      }
      cap.bob.events.push_back({bob_clock(t + jitter(rng)), b_ch});
      cap.bob.record_of.push_back(b_rec);
    }
  }

  // Dark counts over the whole session, both parties, no payload.
  if (params.noise.dark_count_rate > 0.0) {
    std::exponential_distribution<double> dark_gap(params.noise.dark_count_rate);
    for (int party = 0; party < 2; ++party) {
      double t = 0.0;
      const double end = static_cast<double>(data_end_ps);
      for (;;) {
        t += dark_gap(rng) * 1e12;
        if (t >= end) break;
        const std::uint8_t ch = static_cast<std::uint8_t>(rng() & 3);
        if (party == 0) {
          cap.alice.events.push_back({static_cast<std::int64_t>(t), ch});
          cap.alice.record_of.push_back(-1);
        } else {
          cap.bob.events.push_back({bob_clock(t), ch});
          cap.bob.record_of.push_back(-1);
        }
      }
    }
  }

  detail::sort_capture(cap.alice);
  detail::sort_capture(cap.bob);
  return cap;
}

}  // namespace otp::tabler
