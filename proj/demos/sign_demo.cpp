// One-time delegated signature end to end: table generation, the signing
// run, verification, then a forgery attempt against the spent table.

#include <algorithm>
#include <cstdio>
#include <cstring>

#include "otp/sig/signature.hpp"
#include "otp/tabler/generate.hpp"

using namespace otp;

int main() {
  const sig::SigParams params{400, 48, 0.776};
  const std::uint64_t key_seed = 0xfeedbeef;
  const char* text = "pay the bearer one bell pair";
  const std::vector<std::uint8_t> message(text, text + std::strlen(text));

  const std::uint64_t lines =
      static_cast<std::uint64_t>(params.replicas) * params.bits * 9 + 4096;
  const auto tables = tabler::generate_tables(lines, qsim::NoiseModel::bench_p831(), 21);
  std::printf("table: %llu lines at per-line success 0.831\n",
              static_cast<unsigned long long>(lines));

  engine::AliceEngine alice(tables.alice, 5);
  engine::BobEngine bob(tables.bob);
  const auto signed_doc = sig::sign_message(alice, bob, key_seed, params, message);
  std::printf("signed %zu bytes over %u x %u evaluations in %d rounds\n\n", message.size(),
              params.bits, params.replicas, signed_doc.rounds);

  const auto verdict = sig::verify_signature(signed_doc.doc, key_seed, params.threshold);
  const auto spread = std::minmax_element(verdict.per_bit_fraction.begin(),
                                          verdict.per_bit_fraction.end());
  std::printf("verify: %s  (per-bit fractions %.3f .. %.3f, threshold %.3f)\n",
              verdict.accepted ? "ACCEPT" : "REJECT", *spread.first, *spread.second,
              params.threshold);

  // A forger changes the message but can only replay the spent signature.
  auto forged = signed_doc.doc;
  forged.message.back() ^= 0x01;
  const auto forged_verdict = sig::verify_signature(forged, key_seed, params.threshold);
  std::printf("forged message: %s  (%d digest bits fell below threshold)\n",
              forged_verdict.accepted ? "ACCEPT" : "REJECT", forged_verdict.rejected_bits);

  // And the signer cannot sign twice: the lines are gone.
  std::size_t available = 0;
  for (const auto& line : bob.table().lines)
    available += line.status == tabler::LineStatus::Available;
  std::printf("lines left for a second signature: %zu of %llu\n", available,
              static_cast<unsigned long long>(lines));
  return 0;
}
