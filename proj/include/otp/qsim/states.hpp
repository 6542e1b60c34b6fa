#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "otp/common.hpp"
#include "otp/qsim/gates.hpp"

namespace otp::qsim {

// Bob's measurement basis, fixed by his input bit: 0 -> Z, 1 -> X.
enum class MeasBasis : std::uint8_t { Z = 0, X = 1 };

constexpr MeasBasis basis_for_input(int input) {
  return (input & 1) ? MeasBasis::X : MeasBasis::Z;
}

// Alice's two projective bases. A1 spans the carrier states of the constant
// gates, A2 those of id/not. On the Bloch X-Z plane A1 measures along
// (Z+X)/sqrt(2) and A2 along (Z-X)/sqrt(2).
enum class AliceBasis : std::uint8_t { A1 = 0, A2 = 1 };

struct PureQubit {
  std::complex<double> a0{1.0, 0.0};
  std::complex<double> a1{0.0, 0.0};

  double norm_sq() const { return std::norm(a0) + std::norm(a1); }
  double bloch_x() const { return 2.0 * std::real(std::conj(a0) * a1); }
  double bloch_y() const { return 2.0 * std::imag(std::conj(a0) * a1); }
  double bloch_z() const { return std::norm(a0) - std::norm(a1); }
};

// Carrier state of a gate. All four live in the X-Z plane at 45 degrees to
// the measurement axes; orthogonal pairs carry opposite gates.
inline PureQubit gate_state(GateG1 g) {
  // 1/sqrt(2 + sqrt(2)) normalizes |0> + |+> and friends.
  const double n = 1.0 / std::sqrt(2.0 + std::sqrt(2.0));
  const double s = 1.0 / std::sqrt(2.0);
  switch (g) {
    case GateG1::Const0: return {n * (1.0 + s), n * s};        // |0> + |+>
    case GateG1::Const1: return {-n * s, n * (1.0 + s)};       // |1> - |->
    case GateG1::Id: return {n * (1.0 + s), -n * s};           // |0> + |->
    case GateG1::Not: return {n * s, n * (1.0 + s)};           // |1> + |+>
  }
  return {};
}

// P(outcome 0) when measuring in the given basis; outcome 0 is the positive
// eigenstate (|0> for Z, |+> for X).
inline double prob_outcome0(const PureQubit& q, MeasBasis basis) {
  if (basis == MeasBasis::Z) return std::norm(q.a0);
  return 0.5 * std::norm(q.a0 + q.a1);
}

inline int measure(const PureQubit& q, MeasBasis basis, Rng& rng) {
  return uniform_real(rng) < prob_outcome0(q, basis) ? 0 : 1;
}

// Which of Alice's bases contains the carrier state of this gate.
constexpr AliceBasis basis_of_gate(GateG1 g) {
  return (g == GateG1::Const0 || g == GateG1::Const1) ? AliceBasis::A1 : AliceBasis::A2;
}

// Gate written to Alice's table when she projects: her click collapses the
// partner qubit onto the state orthogonal to her outcome, so she records the
// gate of that orthogonal state. outcome_negative selects the second state
// of the basis pair (Const1's state in A1, Not's state in A2).
constexpr GateG1 remote_gate(AliceBasis basis, bool outcome_negative) {
  if (basis == AliceBasis::A1) return outcome_negative ? GateG1::Const0 : GateG1::Const1;
  return outcome_negative ? GateG1::Id : GateG1::Not;
}

// Inverse view: given a recorded gate, whether Alice's own click was the
// negative-index state of her basis pair.
constexpr bool alice_outcome_negative(GateG1 recorded) {
  return recorded == GateG1::Const0 || recorded == GateG1::Id;
}

}  // namespace otp::qsim
