#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "otp/common.hpp"
#include "otp/tabler/session.hpp"
#include "otp/tabler/table.hpp"

namespace otp::tabler {

// Piecewise-linear clock offset as a function of Alice time:
// bob_time ~ alice_time + eval(alice_time). A single knot degenerates to a
// constant offset.
struct OffsetTrack {
  std::vector<std::int64_t> knot_t;       // strictly increasing alice times
  std::vector<double> knot_offset;

  double eval(std::int64_t t) const {
    if (knot_t.empty()) return 0.0;
    if (knot_t.size() == 1) return knot_offset.front();
    if (t <= knot_t.front()) {
      const double dt = static_cast<double>(knot_t[1] - knot_t[0]);
      const double slope = (knot_offset[1] - knot_offset[0]) / dt;
      return knot_offset[0] + slope * static_cast<double>(t - knot_t[0]);
    }
    if (t >= knot_t.back()) {
      // Extrapolate with the last segment's slope.
      const std::size_t n = knot_t.size();
      const double dt = static_cast<double>(knot_t[n - 1] - knot_t[n - 2]);
      const double slope = (knot_offset[n - 1] - knot_offset[n - 2]) / dt;
      return knot_offset[n - 1] + slope * static_cast<double>(t - knot_t[n - 1]);
    }
    const auto it = std::upper_bound(knot_t.begin(), knot_t.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - knot_t.begin());
    const std::size_t lo = hi - 1;
    const double f = static_cast<double>(t - knot_t[lo]) /
                     static_cast<double>(knot_t[hi] - knot_t[lo]);
    return knot_offset[lo] + f * (knot_offset[hi] - knot_offset[lo]);
  }

  static OffsetTrack constant(double offset) { return {{0}, {offset}}; }
};

struct ClockSync {
  std::int64_t edge_alice_ps = 0;
  std::int64_t edge_bob_ps = 0;
  double offset_start_ps = 0.0;  // track value at the first alice event
  double skew_ppm = 0.0;         // overall track slope
  OffsetTrack track;
};

namespace detail {

// First time the event rate jumps: a 5 ms window holding >= min_count events
// while the preceding 10 ms holds less than a fifth of that. Returns the
// first event time of the triggering window.
inline std::int64_t rate_edge(const std::vector<DetectionEvent>& events, int min_count = 15) {
  const std::int64_t win = 5'000'000'000;    // 5 ms
  const std::int64_t pre = 10'000'000'000;   // 10 ms
  const std::size_t n = events.size();
  std::size_t hi = 0, lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t t = events[i].time_ps;
    while (hi < n && events[hi].time_ps < t + win) ++hi;
    while (lo < i && events[lo].time_ps < t - pre) ++lo;
    const std::size_t in_window = hi - i;
    const std::size_t preceding = i - lo;
    if (in_window >= static_cast<std::size_t>(min_count) && preceding * 5 < in_window)
      return t;
  }
  fail(Errc::insufficient_lines, "no calibration edge found");
}

// Histogram of (t_b - t_a - center) over +-half_span at the given bin width,
// restricted to the alice index range. Returns the centroid of the peak and
// its support, in ps relative to center.
struct PeakEstimate {
  bool found = false;
  double delta_ps = 0.0;
  std::uint64_t pairs_in_peak = 0;
};

inline PeakEstimate histogram_peak(const std::vector<DetectionEvent>& alice,
                                   const std::vector<DetectionEvent>& bob, std::size_t a_begin,
                                   std::size_t a_end, double center, std::int64_t half_span,
                                   std::int64_t bin_ps, std::uint64_t min_pairs) {
  const std::size_t bins = static_cast<std::size_t>(2 * half_span / bin_ps) + 1;
  std::vector<std::uint32_t> hist(bins, 0);
  std::size_t j = 0;
  for (std::size_t i = a_begin; i < a_end && i < alice.size(); ++i) {
    const double target = static_cast<double>(alice[i].time_ps) + center;
    const double lo = target - static_cast<double>(half_span);
    while (j < bob.size() && static_cast<double>(bob[j].time_ps) < lo) ++j;
    for (std::size_t k = j; k < bob.size(); ++k) {
      const double d = static_cast<double>(bob[k].time_ps) - target;
      if (d > static_cast<double>(half_span)) break;
      const std::size_t bin = static_cast<std::size_t>(
          (d + static_cast<double>(half_span)) / static_cast<double>(bin_ps));
      if (bin < bins) ++hist[bin];
    }
  }
  std::size_t best = 0;
  for (std::size_t b = 1; b < bins; ++b)
    if (hist[b] > hist[best]) best = b;
  PeakEstimate out;
  // Centroid over the peak bin and two neighbors each side.
  std::uint64_t weight = 0;
  double sum = 0.0;
  for (std::size_t b = best >= 2 ? best - 2 : 0; b < std::min(bins, best + 3); ++b) {
    weight += hist[b];
    sum += static_cast<double>(hist[b]) *
           ((static_cast<double>(b) + 0.5) * static_cast<double>(bin_ps) -
            static_cast<double>(half_span));
  }
  if (weight < min_pairs) return out;
  out.found = true;
  out.delta_ps = sum / static_cast<double>(weight);
  out.pairs_in_peak = weight;
  return out;
}

// Median of residuals d = t_b - t_a - predicted(t_a) within +-half_span, for
// alice events in [a_begin, a_end). Robust against the sparse accidentals
// that fall inside the window.
struct ResidualStat {
  std::uint64_t count = 0;
  double median_ps = 0.0;
};

template <class Predict>
inline ResidualStat residual_median(const std::vector<DetectionEvent>& alice,
                                    const std::vector<DetectionEvent>& bob, std::size_t a_begin,
                                    std::size_t a_end, Predict&& predicted_ofs,
                                    double half_span) {
  std::vector<double> ds;
  std::size_t j = 0;
  for (std::size_t i = a_begin; i < a_end && i < alice.size(); ++i) {
    const double target = static_cast<double>(alice[i].time_ps) + predicted_ofs(alice[i].time_ps);
    while (j < bob.size() && static_cast<double>(bob[j].time_ps) < target - half_span) ++j;
    for (std::size_t k = j; k < bob.size(); ++k) {
      const double d = static_cast<double>(bob[k].time_ps) - target;
      if (d > half_span) break;
      ds.push_back(d);
    }
  }
  ResidualStat out;
  out.count = ds.size();
  if (ds.empty()) return out;
  std::nth_element(ds.begin(), ds.begin() + ds.size() / 2, ds.end());
  out.median_ps = ds[ds.size() / 2];
  return out;
}

}  // namespace detail

// Recovers the relative clock model from the two raw event streams. Handles
// initial offsets up to the calibration design range (edges do the coarse
// alignment) and smooth skews of tens of ppm (piecewise track).
inline ClockSync find_clock_offset(const std::vector<DetectionEvent>& alice,
                                   const std::vector<DetectionEvent>& bob) {
  if (alice.size() < 100 || bob.size() < 100)
    fail(Errc::insufficient_lines, "too few events to synchronize");
  ClockSync sync;
  sync.edge_alice_ps = detail::rate_edge(alice);
  sync.edge_bob_ps = detail::rate_edge(bob);
  const double offset0 = static_cast<double>(sync.edge_bob_ps - sync.edge_alice_ps);

  // Coarse histogram: 1 us bins over +-20 ms. Restricted to the first
  // ~1.5 s of the stream so clock skew cannot smear the peak, and capped in
  // count to bound the pair walk.
  std::size_t coarse_n = 0;
  while (coarse_n < alice.size() && coarse_n < 20000 &&
         alice[coarse_n].time_ps < alice.front().time_ps + 1'500'000'000'000)
    ++coarse_n;
  const auto coarse = detail::histogram_peak(alice, bob, 0, coarse_n, offset0, 20'000'000'000,
                                             1'000'000, 50);
  if (!coarse.found) fail(Errc::insufficient_lines, "no coincidence peak near edge offset");
  const double offset1 = offset0 + coarse.delta_ps;

  // Per-chunk medium histograms: 100 ns bins over +-15 us, 100 ms chunks.
  // Each chunk is seeded by its predecessor so slow drift is tracked.
  const std::int64_t chunk_ps = 100'000'000'000;  // 100 ms
  const std::int64_t t0 = alice.front().time_ps;
  const std::int64_t t1 = alice.back().time_ps;
  const std::size_t chunks =
      static_cast<std::size_t>(std::max<std::int64_t>(1, (t1 - t0) / chunk_ps + 1));
  OffsetTrack medium;
  double seed_ofs = offset1;
  std::size_t a_idx = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::int64_t c_lo = t0 + static_cast<std::int64_t>(c) * chunk_ps;
    const std::int64_t c_hi = c_lo + chunk_ps;
    std::size_t a_begin = a_idx;
    while (a_begin < alice.size() && alice[a_begin].time_ps < c_lo) ++a_begin;
    std::size_t a_end = a_begin;
    while (a_end < alice.size() && alice[a_end].time_ps < c_hi) ++a_end;
    a_idx = a_end;
    if (a_end - a_begin < 50) continue;  // silent stretch
    const auto est = detail::histogram_peak(alice, bob, a_begin, a_end, seed_ofs, 15'000'000,
                                            100'000, 30);
    if (!est.found) continue;
    seed_ofs += est.delta_ps;
    medium.knot_t.push_back((c_lo + c_hi) / 2);
    medium.knot_offset.push_back(seed_ofs);
  }
  if (medium.knot_t.empty()) fail(Errc::insufficient_lines, "offset track empty");

  // Global drift slope from the medium knots: each knot is good to half a
  // histogram bin, so a least-squares line over the full session baseline
  // pins the slope to sub-ppb. Removing it collapses the within-chunk
  // residual spread from (skew x chunk) back to the jitter floor.
  double slope = 0.0;
  if (medium.knot_t.size() >= 2) {
    double st = 0.0, so = 0.0, stt = 0.0, sto = 0.0;
    const double tref = static_cast<double>(medium.knot_t.front());
    const double n = static_cast<double>(medium.knot_t.size());
    for (std::size_t c = 0; c < medium.knot_t.size(); ++c) {
      const double tc = static_cast<double>(medium.knot_t[c]) - tref;
      st += tc;
      so += medium.knot_offset[c];
      stt += tc * tc;
      sto += tc * medium.knot_offset[c];
    }
    const double denom = n * stt - st * st;
    if (denom > 0.0) slope = (n * sto - st * so) / denom;
  }

  // Fine pass: each knot re-estimated as the median of slope-corrected
  // residuals against its own constant medium value. The +-2 us window
  // covers the medium quantization; the sparse accidentals inside it cannot
  // move a median.
  OffsetTrack fine = medium;
  a_idx = 0;
  for (std::size_t c = 0; c < medium.knot_t.size(); ++c) {
    const std::int64_t c_lo = medium.knot_t[c] - chunk_ps / 2;
    const std::int64_t c_hi = medium.knot_t[c] + chunk_ps / 2;
    std::size_t a_begin = a_idx;
    while (a_begin < alice.size() && alice[a_begin].time_ps < c_lo) ++a_begin;
    std::size_t a_end = a_begin;
    while (a_end < alice.size() && alice[a_end].time_ps < c_hi) ++a_end;
    a_idx = a_end;
    const double knot_ofs = medium.knot_offset[c];
    const std::int64_t t_center = medium.knot_t[c];
    const auto stat = detail::residual_median(
        alice, bob, a_begin, a_end,
        [&](std::int64_t t) { return knot_ofs + slope * static_cast<double>(t - t_center); },
        2'000'000.0);
    if (stat.count >= 30) fine.knot_offset[c] = knot_ofs + stat.median_ps;
  }

  sync.track = std::move(fine);
  sync.offset_start_ps = sync.track.eval(alice.front().time_ps);
  if (sync.track.knot_t.size() >= 2) {
    const double span =
        static_cast<double>(sync.track.knot_t.back() - sync.track.knot_t.front());
    sync.skew_ppm =
        (sync.track.knot_offset.back() - sync.track.knot_offset.front()) / span * 1e6;
  }
  return sync;
}

struct CoincidencePair {
  std::size_t alice_index = 0;
  std::size_t bob_index = 0;
};

// Greedy nearest-neighbor pairing with the clock model applied: Bob events
// within the window of the corrected Alice time, closest residual wins,
// each event used at most once. Streams are time-ordered so one forward
// pass suffices.
inline std::vector<CoincidencePair> match_coincidences(const std::vector<DetectionEvent>& alice,
                                                       const std::vector<DetectionEvent>& bob,
                                                       std::int64_t window_ps,
                                                       const OffsetTrack& track) {
  std::vector<CoincidencePair> out;
  std::vector<bool> bob_used(bob.size(), false);
  std::size_t j = 0;
  for (std::size_t i = 0; i < alice.size(); ++i) {
    const double target = static_cast<double>(alice[i].time_ps) + track.eval(alice[i].time_ps);
    const double lo = target - static_cast<double>(window_ps);
    while (j < bob.size() && static_cast<double>(bob[j].time_ps) < lo) ++j;
    double best_abs = 0.0;
    std::size_t best = bob.size();
    for (std::size_t k = j; k < bob.size(); ++k) {
      const double d = static_cast<double>(bob[k].time_ps) - target;
      if (d > static_cast<double>(window_ps)) break;
      if (bob_used[k]) continue;
      const double ad = std::abs(d);
      if (best == bob.size() || ad < best_abs) {
        best = k;
        best_abs = ad;
      }
    }
    if (best != bob.size()) {
      bob_used[best] = true;
      out.push_back({i, best});
    }
  }
  return out;
}

struct ReconcileReport {
  double offset_start_ps = 0.0;
  double skew_ppm = 0.0;
  std::uint64_t alice_events = 0;
  std::uint64_t bob_events = 0;
  std::uint64_t matched_events = 0;
  std::uint64_t table_lines = 0;
  double multi_photon_fraction = 0.0;
  double success_fraction = 0.0;
  // success / total per (gate, input) cell
  std::array<std::array<std::uint64_t, 2>, 4> cell_total{};
  std::array<std::array<std::uint64_t, 2>, 4> cell_success{};
};

struct ReconcileResult {
  SharedTableAlice alice;
  SharedTableBob bob;
  ReconcileReport report;
};

// Builds both table halves from raw captures: clock recovery, coincidence
// matching, then one line per matched pair that carries payload on both
// sides. Lines are ordered by Alice time and numbered sequentially.
inline ReconcileResult reconcile(const AliceCapture& alice, const BobCapture& bob,
                                 std::int64_t window_ps, std::uint64_t table_seed) {
  ReconcileResult res;
  const ClockSync sync = find_clock_offset(alice.events, bob.events);
  const auto pairs = match_coincidences(alice.events, bob.events, window_ps, sync.track);

  res.report.offset_start_ps = sync.offset_start_ps;
  res.report.skew_ppm = sync.skew_ppm;
  res.report.alice_events = alice.events.size();
  res.report.bob_events = bob.events.size();
  res.report.matched_events = pairs.size();

  res.alice.seed = table_seed;
  res.bob.seed = table_seed;
  std::uint64_t line_id = 0;
  std::uint64_t mp = 0, success = 0;
  for (const CoincidencePair& p : pairs) {
    const std::int32_t ar = alice.record_of[p.alice_index];
    const std::int32_t br = bob.record_of[p.bob_index];
    if (ar < 0 || br < 0) continue;  // calibration or dark-count match
    const qsim::GateG1 gate = alice.gates[ar];
    const std::uint8_t input = bob.inputs[br];
    const std::uint8_t output = bob.outputs[br];
    res.alice.lines.push_back({line_id, gate, LineStatus::Available});
    res.bob.lines.push_back({line_id, input, output, LineStatus::Available});
    ++line_id;
    if (alice.multi_photon[ar]) ++mp;
    const bool ok = output == qsim::apply_gate(gate, input);
    if (ok) ++success;
    ++res.report.cell_total[static_cast<int>(gate)][input];
    if (ok) ++res.report.cell_success[static_cast<int>(gate)][input];
  }
  res.report.table_lines = line_id;
  if (line_id > 0) {
    res.report.multi_photon_fraction = static_cast<double>(mp) / static_cast<double>(line_id);
    res.report.success_fraction = static_cast<double>(success) / static_cast<double>(line_id);
  }
  return res;
}

}  // namespace otp::tabler
