// Walks one gate evaluation over a freshly generated table, tracing every
// proposal so the handshake and the burn-on-use rule are visible.

#include <cstdio>

#include "otp/engine/machines.hpp"
#include "otp/qsim/gates.hpp"
#include "otp/tabler/generate.hpp"

using namespace otp;

int main() {
  const auto tables = tabler::generate_tables(256, qsim::NoiseModel::ideal(), 42);
  engine::AliceEngine alice(tables.alice, 7);
  engine::BobEngine bob(tables.bob);

  const qsim::GateG1 target = qsim::GateG1::Not;
  const int input = 0;
  std::printf("one-time evaluation of %s on input %d\n\n",
              std::string(qsim::gate_name(target)).c_str(), input);

  alice.add_request(1, target);
  bob.add_request(1, input);

  int round = 0;
  std::vector<engine::Reveal> reveals;
  while (!alice.done()) {
    const auto proposals = alice.propose_round();
    for (const auto& rev : reveals) bob.apply_reveal(rev);
    std::vector<engine::Response> responses;
    for (const auto& prop : proposals) {
      const auto resp = bob.respond(prop);
      std::printf("round %d: alice offers line %llu (%zu scanned lines burned)  ->  bob %s\n",
                  round, static_cast<unsigned long long>(prop.candidate_lines.front()),
                  prop.deleted_lines.size(),
                  resp.accept ? "accepts" : "declines, wrong input on his side");
      responses.push_back(resp);
    }
    reveals = alice.absorb_responses(responses);
    ++round;
  }
  for (const auto& rev : reveals) bob.apply_reveal(rev);

  const auto& done = bob.completed().front();
  std::printf("\noutput: %d (pad %d applied to the table line)\n", done.output, done.pad);
  std::printf("expected for %s(%d): %d\n",
              std::string(qsim::gate_name(target)).c_str(), input,
              qsim::apply_gate(target, input));

  std::size_t consumed = 0, deleted = 0;
  for (const auto& line : bob.table().lines) {
    consumed += line.status == tabler::LineStatus::Consumed;
    deleted += line.status == tabler::LineStatus::Deleted;
  }
  std::printf("table after the run: %zu consumed, %zu deleted of %zu lines\n", consumed,
              deleted, bob.table().lines.size());
  std::printf("every offered line is gone for good; a rerun draws new ones.\n");
  return 0;
}
