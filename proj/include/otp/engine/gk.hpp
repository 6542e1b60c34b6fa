#pragma once

#include <cstdint>
#include <vector>

#include "otp/engine/batch.hpp"
#include "otp/engine/machines.hpp"
#include "otp/qsim/density.hpp"
#include "otp/qsim/pauli.hpp"

namespace otp::engine {

// Table-backed execution plan for a k-input gate: the gate's carrier density
// splits into an equal-weight mixture of per-qubit one-bit carriers, so one
// evaluation costs one handshake per non-identity letter of the selected
// measurement string, combined by XOR.
struct GkPlan {
  qsim::GateGk gate;
  qsim::ProductDecomposition dec;
  std::vector<qsim::PauliString> meas;
};

inline GkPlan make_gk_plan(const qsim::GateGk& gate) {
  auto dec = qsim::decompose_product_states(gate);
  if (!dec) fail(Errc::invalid_state, "no product decomposition for this gate");
  GkPlan plan{gate, std::move(*dec), qsim::measurement_set(gate.k)};
  // Every branch must agree with the truth table on every input; the XOR
  // identity is what makes the handshake reduction sound.
  for (const auto& branch : plan.dec.branches) {
    for (std::size_t x = 0; x < plan.gate.outputs.size(); ++x) {
      int parity = 0;
      const qsim::PauliString& m = plan.meas[x];
      for (std::size_t j = 0; j < m.ops.size(); ++j) {
        if (m.ops[j] == qsim::Pauli::I) continue;
        const int input = m.ops[j] == qsim::Pauli::X ? 1 : 0;
        parity ^= qsim::apply_gate(branch[j], input);
      }
      if (parity != plan.gate.outputs[x])
        fail(Errc::invalid_state, "decomposition branch disagrees with truth table");
    }
  }
  return plan;
}

// Monte Carlo shortcut without a table: the measurement succeeds with the
// closed-form probability, independent of input and truth table.
inline int simulate_gk(const qsim::GateGk& gate, std::size_t input_index, Rng& rng) {
  if (input_index >= gate.outputs.size()) fail(Errc::invalid_argument, "input index out of range");
  const double p = qsim::gk_success_prob(gate.k);
  const int truth = gate.outputs[input_index];
  return uniform_real(rng) < p ? truth : 1 - truth;
}

struct GkRunResult {
  int output = 0;
  int rounds = 0;
  int handshakes = 0;
};

// One table-backed evaluation. Alice samples the mixture branch; Bob's
// desired input per handshake is fixed by the public measurement string, so
// the input index never leaves his side.
inline GkRunResult run_gk(AliceEngine& alice, BobEngine& bob, const GkPlan& plan,
                          std::size_t input_index, Rng& alice_rng,
                          std::uint64_t base_request_id, const BatchOptions& opt = {}) {
  if (input_index >= plan.gate.outputs.size())
    fail(Errc::invalid_argument, "input index out of range");
  const auto& branch =
      plan.dec.branches[plan.dec.branches.size() == 1
                            ? 0
                            : static_cast<std::size_t>(rng_below(alice_rng, plan.dec.branches.size()))];
  const qsim::PauliString& m = plan.meas[input_index];
  GkRunResult res;
  for (std::size_t j = 0; j < m.ops.size(); ++j) {
    if (m.ops[j] == qsim::Pauli::I) continue;
    const std::uint64_t id = base_request_id + j;
    alice.add_request(id, branch[j]);
    bob.add_request(id, m.ops[j] == qsim::Pauli::X ? 1 : 0);
    ++res.handshakes;
  }
  const BatchResult batch = run_batch(alice, bob, opt);
  res.rounds = batch.rounds;
  for (const auto& [id, out] : batch.outputs) res.output ^= out;
  return res;
}

}  // namespace otp::engine
