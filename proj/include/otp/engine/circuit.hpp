#pragma once

#include <cstdint>
#include <vector>

#include "otp/engine/batch.hpp"
#include "otp/engine/machines.hpp"
#include "otp/qsim/gates.hpp"

namespace otp::engine {

// Layered single-bit circuit: `gates[level][wire]` transforms the wire's bit;
// levels run sequentially, wires within a level batch into one request set.
struct Circuit {
  std::size_t width = 0;
  std::vector<std::vector<qsim::GateG1>> gates;  // [depth][width]

  std::size_t depth() const { return gates.size(); }
};

inline Circuit random_circuit(std::size_t width, std::size_t depth, Rng& rng) {
  Circuit c;
  c.width = width;
  c.gates.resize(depth);
  for (auto& level : c.gates) {
    level.reserve(width);
    for (std::size_t w = 0; w < width; ++w)
      level.push_back(static_cast<qsim::GateG1>(rng() & 3));
  }
  return c;
}

inline std::vector<int> evaluate_reference(const Circuit& c, std::vector<int> bits) {
  if (bits.size() != c.width) fail(Errc::invalid_argument, "input width mismatch");
  for (const auto& level : c.gates)
    for (std::size_t w = 0; w < c.width; ++w) bits[w] = qsim::apply_gate(level[w], bits[w]);
  return bits;
}

struct CircuitRunResult {
  std::vector<int> outputs;
  int rounds = 0;
};

// Evaluates the circuit over the shared tables. Alice holds the gates, Bob
// holds the input bits; Bob learns one output per wire per level and nothing
// else, Alice learns nothing about the bits.
inline CircuitRunResult run_circuit(AliceEngine& alice, BobEngine& bob, const Circuit& c,
                                    const std::vector<int>& bits, const BatchOptions& opt = {}) {
  if (bits.size() != c.width) fail(Errc::invalid_argument, "input width mismatch");
  std::vector<int> cur = bits;
  CircuitRunResult res;
  for (std::size_t level = 0; level < c.depth(); ++level) {
    for (std::size_t w = 0; w < c.width; ++w) {
      const std::uint64_t id = level * c.width + w;
      alice.add_request(id, c.gates[level][w]);
      bob.add_request(id, cur[w]);
    }
    const BatchResult batch = run_batch(alice, bob, opt);
    res.rounds += batch.rounds;
    for (const auto& [id, out] : batch.outputs) cur[id % c.width] = out;
  }
  res.outputs = std::move(cur);
  return res;
}

}  // namespace otp::engine
