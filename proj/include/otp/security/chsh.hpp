#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "otp/common.hpp"
#include "otp/qsim/noise.hpp"
#include "otp/qsim/states.hpp"
#include "otp/tabler/table.hpp"

namespace otp::security {

// One sacrificed table line, with both sides' private data disclosed.
struct ChshSample {
  qsim::GateG1 gate = qsim::GateG1::Const0;
  std::uint8_t input = 0;
  std::uint8_t output = 0;
};

struct ChshEstimate {
  // correlators[a][b]: a = alice setting (0/1), b = bob setting (Z/X)
  std::array<std::array<double, 2>, 2> correlators{};
  std::array<std::array<std::int64_t, 2>, 2> counts{};
  double s = 0;
  double sigma = 0;  // statistical error of s
};

// S = E(A1,Z) + E(A1,X) + E(A2,Z) - E(A2,X); the ideal channel reaches
// 2*sqrt(2) * visibility.
inline ChshEstimate chsh_estimate(const std::vector<ChshSample>& samples) {
  std::array<std::array<double, 2>, 2> sum{};
  std::array<std::array<std::int64_t, 2>, 2> n{};
  for (const ChshSample& smp : samples) {
    const int a = qsim::basis_of_gate(smp.gate) == qsim::AliceBasis::A1 ? 0 : 1;
    const int b = smp.input & 1;
    const int sa = qsim::alice_outcome_negative(smp.gate) ? -1 : 1;
    const int sb = smp.output == 0 ? 1 : -1;
    sum[a][b] += sa * sb;
    ++n[a][b];
  }
  ChshEstimate est;
  double var = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (n[a][b] == 0) fail(Errc::sample_too_small, "empty correlator cell");
      est.correlators[a][b] = sum[a][b] / static_cast<double>(n[a][b]);
      est.counts[a][b] = n[a][b];
      var += (1 - est.correlators[a][b] * est.correlators[a][b]) /
             static_cast<double>(n[a][b]);
    }
  }
  est.s = std::fabs(est.correlators[0][0] + est.correlators[0][1] + est.correlators[1][0] -
                    est.correlators[1][1]);
  est.sigma = std::sqrt(var);
  return est;
}

inline double chsh_ideal(double visibility) { return 2 * std::sqrt(2.0) * visibility; }

// Deterministic public sample of `count` available line indices; both sides
// derive the identical set from the shared seed, provided their status
// digests agree.
template <class Table>
std::vector<std::size_t> test_line_indices(const Table& table, std::size_t count,
                                           std::uint64_t seed) {
  std::vector<std::size_t> avail;
  avail.reserve(table.lines.size());
  for (std::size_t i = 0; i < table.lines.size(); ++i)
    if (table.lines[i].status == tabler::LineStatus::Available) avail.push_back(i);
  if (avail.size() < count) fail(Errc::insufficient_lines, "not enough lines for the test");
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng_below(rng, avail.size() - i));
    std::swap(avail[i], avail[j]);
  }
  avail.resize(count);
  std::sort(avail.begin(), avail.end());
  return avail;
}

// Builds the CHSH estimate straight from freshly generated tables by
// sacrificing `count` seeded lines on both sides.
inline ChshEstimate chsh_from_tables(tabler::SharedTableAlice& alice,
                                     tabler::SharedTableBob& bob, std::size_t count,
                                     std::uint64_t seed) {
  const auto idx = test_line_indices(alice, count, seed);
  std::vector<ChshSample> samples;
  samples.reserve(idx.size());
  for (const std::size_t i : idx) {
    if (bob.lines[i].status != tabler::LineStatus::Available)
      fail(Errc::protocol_violation, "test line not available on both sides");
    if (alice.lines[i].line_id != bob.lines[i].line_id)
      fail(Errc::protocol_violation, "table line ids diverge");
    samples.push_back({alice.lines[i].gate, bob.lines[i].input, bob.lines[i].output});
    alice.lines[i].status = tabler::LineStatus::Consumed;
    bob.lines[i].status = tabler::LineStatus::Consumed;
  }
  return chsh_estimate(samples);
}

}  // namespace otp::security
