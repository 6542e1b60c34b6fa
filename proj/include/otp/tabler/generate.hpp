#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "otp/common.hpp"
#include "otp/qsim/noise.hpp"
#include "otp/tabler/table.hpp"

namespace otp::tabler {

// Slow sinusoidal modulation of the channel visibility, modeling setup
// drift across a long run: v(line) = v0 + amplitude * sin(2 pi line/period
// + phase). Disabled when amplitude == 0.
struct DriftModel {
  double amplitude_v = 0.0;
  double period_lines = 1.0;
  double phase = 0.0;

  // Amplitude calibrated so the per-bit success spread over signature-scale
  // runs widens from the binomial 0.0118 to the observed 0.013.
  static DriftModel bench(double phase = 0.0) { return {0.02138, 1.3e7, phase}; }
};

struct GeneratedTables {
  SharedTableAlice alice;
  SharedTableBob bob;
  std::uint64_t multi_photon_lines = 0;
};

// Emits n already-reconciled lines directly at the line level. Loss only
// thins the reconciled stream without changing per-line statistics, so the
// generator skips loss draws entirely; the detection-level simulator in
// session.hpp models loss, timing, and reconciliation explicitly.
inline GeneratedTables generate_tables(std::uint64_t n, const qsim::NoiseModel& noise,
                                       std::uint64_t seed, const DriftModel& drift = {}) {
  GeneratedTables out;
  out.alice.seed = seed;
  out.bob.seed = seed;
  out.alice.lines.resize(n);
  out.bob.lines.resize(n);
  Rng rng(seed);
  const bool drifting = drift.amplitude_v != 0.0;
  const bool flag_mp = noise.multi_photon_fraction > 0.0;
  double v = noise.visibility;
  const double inv_sqrt8 = 1.0 / (2.0 * std::sqrt(2.0));
  for (std::uint64_t i = 0; i < n; ++i) {
    if (drifting && (i & 0xFF) == 0) {
      // Period >> 256 lines, so refreshing the sinusoid every 256 lines is
      // exact to ~1e-5 of the amplitude.
      v = noise.visibility +
          drift.amplitude_v * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) /
                                           drift.period_lines +
                                       drift.phase);
    }
    const qsim::AliceBasis abasis = uniform_bit(rng) ? qsim::AliceBasis::A2 : qsim::AliceBasis::A1;
    const bool negative = uniform_bit(rng);
    const qsim::GateG1 gate = qsim::remote_gate(abasis, negative);
    if (flag_mp && uniform_real(rng) < noise.multi_photon_fraction) ++out.multi_photon_lines;

    const bool x_basis = uniform_bit(rng);
    const int input = x_basis ? 1 : 0;
    // P(success) = 1/2 + v/(2 sqrt 2) for every gate/basis cell; fold the
    // Werner mixture into one Born draw.
    const bool success = uniform_real(rng) < 0.5 + v * inv_sqrt8;
    const std::uint8_t ideal = qsim::apply_gate(gate, input);
    const std::uint8_t output = success ? ideal : static_cast<std::uint8_t>(1 - ideal);

    out.alice.lines[i] = {i, gate, LineStatus::Available};
    out.bob.lines[i] = {i, static_cast<std::uint8_t>(input), output, LineStatus::Available};
  }
  return out;
}

// Same shape as generate_tables but runs every emission through a Bloch
// channel (eavesdropper hook) and honors loss, since an intercepting channel
// may depend on it. Emits exactly n surviving lines.
template <class Channel>
inline GeneratedTables generate_tables_channel(std::uint64_t n, const qsim::NoiseModel& noise,
                                               std::uint64_t seed, Channel&& channel) {
  GeneratedTables out;
  out.alice.seed = seed;
  out.bob.seed = seed;
  out.alice.lines.reserve(n);
  out.bob.lines.reserve(n);
  Rng rng(seed);
  std::uint64_t i = 0;
  while (i < n) {
    const qsim::PairEvent ev = qsim::sample_pair_event(noise, rng, channel);
    if (ev.bob_lost) continue;
    if (ev.multi_photon) ++out.multi_photon_lines;
    out.alice.lines.push_back({i, ev.gate, LineStatus::Available});
    out.bob.lines.push_back(
        {i, static_cast<std::uint8_t>(ev.input == qsim::MeasBasis::X ? 1 : 0), ev.output,
         LineStatus::Available});
    ++i;
  }
  return out;
}

}  // namespace otp::tabler
