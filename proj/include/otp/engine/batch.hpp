#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "otp/engine/machines.hpp"

namespace otp::engine {

struct BatchOptions {
  int candidates_per_request = 1;
  int max_rounds = 1 << 20;
};

struct BatchResult {
  // request_id -> padded output, in completion order.
  std::vector<std::pair<std::uint64_t, int>> outputs;
  int rounds = 0;  // propose/respond exchanges; the final reveal flush is free
};

// Runs both engines to completion in-process. Requests must already be
// registered on both sides with matching ids.
inline BatchResult run_batch(AliceEngine& alice, BobEngine& bob, const BatchOptions& opt = {}) {
  BatchResult res;
  const std::size_t base = bob.completed().size();
  std::vector<Reveal> reveals;
  while (!alice.done()) {
    if (res.rounds >= opt.max_rounds) fail(Errc::invalid_state, "round limit exceeded");
    const std::vector<Proposal> props = alice.propose_round(opt.candidates_per_request);
    for (const Reveal& rev : reveals) bob.apply_reveal(rev);
    std::vector<Response> resps;
    resps.reserve(props.size());
    for (const Proposal& p : props) resps.push_back(bob.respond(p));
    reveals = alice.absorb_responses(resps);
    ++res.rounds;
  }
  for (const Reveal& rev : reveals) bob.apply_reveal(rev);
  for (std::size_t i = base; i < bob.completed().size(); ++i) {
    const CompletedRequest& c = bob.completed()[i];
    res.outputs.emplace_back(c.request_id, c.output);
  }
  return res;
}

}  // namespace otp::engine
