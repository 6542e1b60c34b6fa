#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "otp/common.hpp"
#include "otp/qsim/states.hpp"

namespace otp::qsim {

// Channel parameters. visibility is the Werner-state parameter v: the shared
// pair is v |psi-><psi-| + (1-v) I/4. loss_prob is the probability that the
// partner photon never reaches a detector; multi_photon_fraction the rate of
// double-pair emissions (flagged, not modeled as extra detections here);
// dark_count_rate in counts/s per party feeds the detection-level simulator.
struct NoiseModel {
  double visibility = 1.0;
  double loss_prob = 0.0;
  double multi_photon_fraction = 0.0;
  double dark_count_rate = 0.0;

  static NoiseModel ideal() { return {1.0, 0.0, 0.0, 0.0}; }

  // Visibility giving per-line success 0.831 exactly: v = 0.331 * 2 sqrt(2).
  static NoiseModel bench_p831() {
    return {0.331 * 2.0 * std::sqrt(2.0), 0.13, 0.00097, 0.0};
  }

  // Visibility reproducing the benchmark CHSH value 2.701 = v * 2 sqrt(2).
  static NoiseModel bench_s2701() {
    return {2.701 / (2.0 * std::sqrt(2.0)), 0.13, 0.00097, 0.0};
  }
};

inline std::optional<NoiseModel> noise_preset(std::string_view name) {
  if (name == "ideal") return NoiseModel::ideal();
  if (name == "bench-p0.831") return NoiseModel::bench_p831();
  if (name == "bench-s2.701") return NoiseModel::bench_s2701();
  return std::nullopt;
}

// Per-line success probability of the handshake carrier measurement:
// 1/2 + v/(2 sqrt(2)).
inline double line_success_prob(double visibility) {
  return 0.5 + visibility / (2.0 * std::sqrt(2.0));
}

// Direction in the Bloch X-Z plane.
struct Dir2 {
  double x = 0.0;
  double z = 0.0;
};

inline double dot(Dir2 a, Dir2 b) { return a.x * b.x + a.z * b.z; }

inline Dir2 basis_dir(MeasBasis b) { return b == MeasBasis::Z ? Dir2{0.0, 1.0} : Dir2{1.0, 0.0}; }

inline Dir2 alice_basis_dir(AliceBasis b) {
  const double s = 1.0 / std::sqrt(2.0);
  return b == AliceBasis::A1 ? Dir2{s, s} : Dir2{-s, s};
}

// Exact two-party correlator for the Werner pair: E(a,b) = -v (a . b).
// Sign convention: Alice counts +1 on her positive-index outcome, Bob +1 on
// outcome 0.
inline double correlator(Dir2 alice_dir, Dir2 bob_dir, const NoiseModel& noise) {
  return -noise.visibility * dot(alice_dir, bob_dir);
}

// One reconciled line as both tables will see it: Alice's gate record and
// Bob's measurement record.
struct TableLine {
  GateG1 gate = GateG1::Const0;
  MeasBasis input = MeasBasis::Z;
  std::uint8_t output = 0;
};

// One source emission. Alice always detects her half; Bob's half may be
// lost. multi_photon marks double-pair emissions for session statistics.
struct PairEvent {
  GateG1 gate = GateG1::Const0;
  bool bob_lost = false;
  bool multi_photon = false;
  MeasBasis input = MeasBasis::Z;
  std::uint8_t output = 0;

  TableLine line() const { return {gate, input, output}; }
};

// Optional eavesdropper hook: transforms Bob's conditional Bloch vector
// between source and measurement. Identity when absent.
using BlochChannel = std::function<Dir2(Dir2, Rng&)>;

// Samples one emission. Channel is templated so the bulk generator pays no
// call overhead; pass a lambda or qsim::NoChannel.
struct NoChannel {
  Dir2 operator()(Dir2 v, Rng&) const { return v; }
};

template <class Channel = NoChannel>
inline PairEvent sample_pair_event(const NoiseModel& noise, Rng& rng, Channel&& channel = {}) {
  PairEvent ev;
  // Alice's basis and outcome are uniform regardless of v: her reduced state
  // is maximally mixed.
  const AliceBasis abasis = uniform_bit(rng) ? AliceBasis::A2 : AliceBasis::A1;
  const bool outcome_negative = uniform_bit(rng);
  ev.gate = remote_gate(abasis, outcome_negative);

  if (noise.multi_photon_fraction > 0.0)
    ev.multi_photon = uniform_real(rng) < noise.multi_photon_fraction;

  if (noise.loss_prob > 0.0 && uniform_real(rng) < noise.loss_prob) {
    ev.bob_lost = true;
    return ev;
  }

  // Bob's conditional state: the recorded gate's carrier w.p. v, else the
  // maximally mixed state (Bloch origin). Folding the mixture into the Bloch
  // vector keeps the Born rule a single draw.
  const PureQubit ideal = gate_state(ev.gate);
  Dir2 bloch{noise.visibility * ideal.bloch_x(), noise.visibility * ideal.bloch_z()};
  bloch = channel(bloch, rng);

  const bool x_basis = uniform_bit(rng);
  ev.input = x_basis ? MeasBasis::X : MeasBasis::Z;
  const double p0 = 0.5 * (1.0 + dot(bloch, basis_dir(ev.input)));
  ev.output = uniform_real(rng) < p0 ? 0 : 1;
  return ev;
}

// Spec-facing single-line sampler: nullopt when Bob's photon is lost.
inline std::optional<TableLine> sample_table_line(const NoiseModel& noise, Rng& rng) {
  PairEvent ev = sample_pair_event(noise, rng);
  if (ev.bob_lost) return std::nullopt;
  return ev.line();
}

// Whether the handshake carrier measurement on this line succeeded: Bob's
// output equals the gate's output on his input.
inline bool line_success(const TableLine& line) {
  return line.output == apply_gate(line.gate, line.input == MeasBasis::X ? 1 : 0);
}

}  // namespace otp::qsim
