#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "otp/common.hpp"
#include "otp/engine/machines.hpp"
#include "otp/qsim/gates.hpp"

namespace otp::security {

// Quantifies what each party could learn beyond its contract.
//
// Bob's one-time guarantee: after evaluating target(T) at his input d he
// must know nothing about T(1-d). An implementation that leaked the pads of
// declined candidates would hand him exactly that bit, at the table's line
// success rate. The audit replays both engines' records and scores a
// simulated adversary with and without the leaked pads.
struct PrivacyReport {
  std::size_t requests = 0;
  std::size_t requests_with_declines = 0;
  std::size_t declined_candidates = 0;
  double unqueried_accuracy_hidden = 0;  // honest protocol: guessing T(1-d)
  double unqueried_accuracy_leaked = 0;  // pads of declined candidates leaked
  // Alice-side inference of Bob's input from decline counts: her best guess
  // achieves exactly 1/2 because declines are input-independent.
  double alice_input_guess_accuracy = 0;
};

inline PrivacyReport privacy_audit(const engine::AliceEngine& alice, const engine::BobEngine& bob,
                                   std::uint64_t adversary_seed = 0x5eed) {
  const auto& completed_a = alice.completed();
  const auto& declined_a = alice.declined_audit();
  const auto& declined_b = bob.decline_audit();

  std::unordered_map<std::uint64_t, const engine::CompletedRequest*> done;
  done.reserve(completed_a.size());
  for (const auto& c : completed_a) done[c.request_id] = &c;

  // Joined view of declined candidates: alice knows (target, pad), bob's
  // transcript holds (line input, line output). First decline per request is
  // what the leak adversary uses.
  struct Leak {
    qsim::GateG1 target;
    std::uint8_t pad, line_output, desired;
    bool valid = false;
  };
  std::unordered_map<std::uint64_t, Leak> first_decline;
  std::unordered_map<std::uint64_t, std::uint8_t> pads;
  pads.reserve(declined_a.size());
  std::unordered_map<std::uint64_t, qsim::GateG1> targets;
  for (const auto& d : declined_a) {
    pads[d.line_id] = d.pad;
    targets[d.line_id] = d.target;
  }
  for (const auto& d : declined_b) {
    auto& slot = first_decline[d.request_id];
    if (slot.valid) continue;
    const auto pit = pads.find(d.line_id);
    if (pit == pads.end()) continue;
    slot = {targets[d.line_id], pit->second, d.line_output, d.desired_input, true};
  }

  if (declined_b.empty() || declined_a.empty())
    fail(Errc::invalid_state, "privacy audit needs both engines built with audit collection");

  std::unordered_map<std::uint64_t, std::uint8_t> desired;
  for (const auto& [id, d] : bob.desired_inputs()) desired[id] = d;

  PrivacyReport rep;
  rep.requests = completed_a.size();
  rep.declined_candidates = declined_b.size();
  Rng rng(adversary_seed);
  std::size_t hidden_ok = 0, leaked_ok = 0, alice_ok = 0;
  for (const auto& c : completed_a) {
    const int d = static_cast<int>(desired.at(c.request_id));
    const int truth = qsim::apply_gate(c.target, 1 - d);
    // Without the leak, T(1-d) is independent of everything Bob holds.
    hidden_ok += (uniform_bit(rng) ? 1 : 0) == truth ? 1 : 0;
    const auto it = first_decline.find(c.request_id);
    if (it != first_decline.end() && it->second.valid) {
      ++rep.requests_with_declines;
      // Declined candidate's input is 1-d; its padded output estimates the
      // wanted gate there, and the leaked pad strips the mask.
      const int guess = it->second.line_output ^ it->second.pad;
      leaked_ok += guess == truth ? 1 : 0;
    } else {
      leaked_ok += (uniform_bit(rng) ? 1 : 0) == truth ? 1 : 0;
    }
    // Alice guesses Bob's input from her full view; decline behaviour is
    // independent of d, so she can do no better than a coin.
    alice_ok += (uniform_bit(rng) ? 1 : 0) == d ? 1 : 0;
  }
  if (rep.requests == 0) fail(Errc::sample_too_small, "no completed requests to audit");
  rep.unqueried_accuracy_hidden = static_cast<double>(hidden_ok) / rep.requests;
  rep.unqueried_accuracy_leaked = static_cast<double>(leaked_ok) / rep.requests;
  rep.alice_input_guess_accuracy = static_cast<double>(alice_ok) / rep.requests;
  return rep;
}

}  // namespace otp::security
