#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "otp/engine/batch.hpp"
#include "otp/engine/machines.hpp"
#include "otp/security/attack.hpp"
#include "otp/security/audit.hpp"
#include "otp/security/chsh.hpp"
#include "otp/tabler/generate.hpp"
#include "support/tables.hpp"

using namespace otp;

namespace {

constexpr double kRoot2 = 1.4142135623730951;

security::ChshEstimate estimate_from_fresh_tables(const qsim::NoiseModel& noise, std::size_t lines,
                                                  std::size_t count, std::uint64_t seed) {
  auto gen = tabler::generate_tables(lines, noise, seed);
  return security::chsh_from_tables(gen.alice, gen.bob, count, seed ^ 0x9e3779b97f4a7c15ull);
}

}  // namespace

TEST_CASE("chsh estimate matches the closed form per cell") {
  const auto noise = qsim::NoiseModel::bench_s2701();
  auto gen = tabler::generate_tables(200000, noise, 11);
  const auto est = security::chsh_from_tables(gen.alice, gen.bob, 120000, 12);

  // Sign conventions put every cell at -v/sqrt(2) except (A2, X) at
  // +v/sqrt(2); the S combination folds the four magnitudes together.
  const double e = noise.visibility / kRoot2;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double expect = (a == 1 && b == 1) ? e : -e;
      const double n = static_cast<double>(est.counts[a][b]);
      const double cell_sigma = std::sqrt((1 - expect * expect) / n);
      CHECK(std::abs(est.correlators[a][b] - expect) < 5 * cell_sigma);
    }
  }
  CHECK(std::abs(est.s - 2.701) < 5 * est.sigma);
  CHECK(std::abs(security::chsh_ideal(noise.visibility) - 2.701) < 1e-12);

  // Consumed on both sides, identical selections.
  const auto consumed_a =
      std::count_if(gen.alice.lines.begin(), gen.alice.lines.end(),
                    [](const auto& l) { return l.status == tabler::LineStatus::Consumed; });
  const auto consumed_b =
      std::count_if(gen.bob.lines.begin(), gen.bob.lines.end(),
                    [](const auto& l) { return l.status == tabler::LineStatus::Consumed; });
  CHECK(consumed_a == 120000);
  CHECK(consumed_b == 120000);
}

TEST_CASE("chsh estimate tracks the benchmark presets") {
  const auto s2701 = estimate_from_fresh_tables(qsim::NoiseModel::bench_s2701(), 60000, 40000, 21);
  CHECK(std::abs(s2701.s - 2.701) < 5 * s2701.sigma);

  const auto p831 = estimate_from_fresh_tables(qsim::NoiseModel::bench_p831(), 60000, 40000, 22);
  const double expected = security::chsh_ideal(qsim::NoiseModel::bench_p831().visibility);
  CHECK(std::abs(p831.s - expected) < 5 * p831.sigma);

  const auto ideal = estimate_from_fresh_tables(qsim::NoiseModel::ideal(), 60000, 40000, 23);
  CHECK(std::abs(ideal.s - 2 * kRoot2) < 5 * ideal.sigma);
  CHECK(ideal.s <= 2 * kRoot2 + 5 * ideal.sigma);
}

TEST_CASE("reported sigma matches the spread over independent runs") {
  const auto noise = qsim::NoiseModel::bench_s2701();
  std::vector<double> ss;
  double sigma_sum = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto est = estimate_from_fresh_tables(noise, 9000, 8000, 1000 + t);
    ss.push_back(est.s);
    sigma_sum += est.sigma;
  }
  const double mean = std::accumulate(ss.begin(), ss.end(), 0.0) / static_cast<double>(ss.size());
  double var = 0;
  for (const double s : ss) var += (s - mean) * (s - mean);
  var /= static_cast<double>(ss.size() - 1);
  const double spread = std::sqrt(var);
  const double sigma_mean = sigma_sum / static_cast<double>(ss.size());
  // 50 samples pin the ratio to ~20%; the factor-1.5 band is loose enough to
  // be stable and tight enough to catch a wrong normalization (2x or 1/2x).
  CHECK(spread / sigma_mean > 1.0 / 1.5);
  CHECK(spread / sigma_mean < 1.5);
  CHECK(std::abs(mean - 2.701) < 5 * sigma_mean / std::sqrt(50.0));
}

TEST_CASE("chsh estimate needs every cell populated") {
  std::vector<security::ChshSample> samples;
  // Only A1 gates: both A2 cells stay empty.
  for (int i = 0; i < 100; ++i)
    samples.push_back({i % 2 ? qsim::GateG1::Const0 : qsim::GateG1::Const1,
                       static_cast<std::uint8_t>(i % 2), static_cast<std::uint8_t>(i % 2)});
  try {
    security::chsh_estimate(samples);
    FAIL("expected sample_too_small");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::sample_too_small);
  }
}

TEST_CASE("test line selection is deterministic and status-aware") {
  auto [ta, tb] = testsupport::perfect_tables(5000, 900);
  // Knock out a block of lines on both sides.
  for (std::size_t i = 1000; i < 1400; ++i) {
    ta.lines[i].status = tabler::LineStatus::Deleted;
    tb.lines[i].status = tabler::LineStatus::Deleted;
  }
  const auto ia = security::test_line_indices(ta, 800, 555);
  const auto ib = security::test_line_indices(tb, 800, 555);
  CHECK(ia == ib);
  CHECK(std::is_sorted(ia.begin(), ia.end()));
  CHECK(std::adjacent_find(ia.begin(), ia.end()) == ia.end());
  for (const std::size_t i : ia) {
    CHECK(ta.lines[i].status == tabler::LineStatus::Available);
    CHECK((i < 1000 || i >= 1400));
  }
  const auto again = security::test_line_indices(ta, 800, 555);
  CHECK(again == ia);
  const auto other = security::test_line_indices(ta, 800, 556);
  CHECK(other != ia);

  try {
    security::test_line_indices(ta, 4601, 1);
    FAIL("expected insufficient_lines");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::insufficient_lines);
  }
}

TEST_CASE("intercept-resend collapses the carrier to a conjugate eigenstate") {
  Rng rng(5);
  const security::InterceptResend attack;
  const qsim::Dir2 in{0.0, 1.0};  // +Z carrier
  double sum_x = 0, sum_z = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const qsim::Dir2 out = attack(in, rng);
    // Output is a unit eigenvector of Z or X.
    CHECK(std::abs(out.x * out.x + out.z * out.z - 1.0) < 1e-12);
    CHECK((out.x == 0.0 || out.z == 0.0));
    sum_x += out.x;
    sum_z += out.z;
  }
  // Mean vector shrinks to half the input: Z kept perfectly half the time,
  // X fully random.
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum_z / n - 0.5) < tol);
  CHECK(std::abs(sum_x / n) < tol);
}

TEST_CASE("full intercept-resend drags S to sqrt(2) times visibility") {
  const auto noise = qsim::NoiseModel::bench_s2701();
  auto gen = tabler::generate_tables_channel(60000, noise, 31337, security::InterceptResend{});
  const auto est = security::chsh_from_tables(gen.alice, gen.bob, 40000, 31338);
  const double expected = kRoot2 * noise.visibility;
  CHECK(std::abs(est.s - expected) < 5 * est.sigma);
  CHECK(est.s < 2.0);
}

TEST_CASE("partial interception scales the correlators linearly") {
  const auto noise = qsim::NoiseModel::bench_s2701();
  for (const double f : {0.25, 0.5, 0.75}) {
    auto gen = tabler::generate_tables_channel(60000, noise, 4000 + static_cast<std::uint64_t>(f * 8),
                                               security::PartialInterceptResend{f});
    const auto est = security::chsh_from_tables(gen.alice, gen.bob, 40000, 99);
    const double expected = security::chsh_ideal(noise.visibility) * (1.0 - f / 2.0);
    CHECK(std::abs(est.s - expected) < 5 * est.sigma);
  }
}

TEST_CASE("the 2.5 trip point separates honest noise from interception") {
  const auto noise = qsim::NoiseModel::bench_s2701();
  int honest_pass = 0, attacked_caught = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    const auto honest = estimate_from_fresh_tables(noise, 5000, 4000, 7000 + t);
    if (honest.s >= 2.5) ++honest_pass;
    auto gen =
        tabler::generate_tables_channel(5000, noise, 8000 + t, security::InterceptResend{});
    const auto attacked = security::chsh_from_tables(gen.alice, gen.bob, 4000, 8500 + t);
    if (attacked.s < 2.5) ++attacked_caught;
  }
  // Honest margin is ~4.3 sigma, attack margin ~19 sigma for 4000 lines.
  CHECK(honest_pass == trials);
  CHECK(attacked_caught == trials);
}

TEST_CASE("privacy audit: declined candidates leak only if pads do") {
  const auto noise = qsim::NoiseModel::bench_p831();
  auto gen = tabler::generate_tables(140000, noise, 606);
  engine::AliceEngine alice(std::move(gen.alice), 607, true);
  engine::BobEngine bob(std::move(gen.bob), true);

  Rng rng(608);
  const std::uint64_t requests = 4000;
  std::vector<std::uint8_t> desired(requests);
  for (std::uint64_t id = 0; id < requests; ++id) {
    desired[id] = uniform_bit(rng) ? 1 : 0;
    alice.add_request(id, static_cast<qsim::GateG1>(rng_below(rng, 4)));
    bob.add_request(id, desired[id]);
  }
  const auto result = engine::run_batch(alice, bob, {});
  REQUIRE(result.outputs.size() == requests);

  const auto rep = security::privacy_audit(alice, bob, 609);
  CHECK(rep.requests == requests);
  CHECK(rep.requests_with_declines > 0);
  CHECK(rep.declined_candidates > 0);

  const double n = static_cast<double>(rep.requests);
  const double coin_sigma = 0.5 / std::sqrt(n);
  // Honest protocol: the unqueried output stays a coin flip...
  CHECK(std::abs(rep.unqueried_accuracy_hidden - 0.5) < 5 * coin_sigma);
  // ...and Alice cannot read Bob's input off the decline pattern.
  CHECK(std::abs(rep.alice_input_guess_accuracy - 0.5) < 5 * coin_sigma);

  // Leaked pads hand Bob the declined line's padded output: accuracy p on
  // requests that saw a decline, coin otherwise.
  const double p = qsim::line_success_prob(noise.visibility);
  const double q = static_cast<double>(rep.requests_with_declines) / n;
  const double expected_leak = q * p + (1 - q) * 0.5;
  CHECK(std::abs(rep.unqueried_accuracy_leaked - expected_leak) < 5 * coin_sigma);
  CHECK(rep.unqueried_accuracy_leaked - rep.unqueried_accuracy_hidden > 0.1);
}

TEST_CASE("privacy audit requires audit collection") {
  auto [ta, tb] = testsupport::perfect_tables(4000, 70);
  engine::AliceEngine alice(std::move(ta), 71, false);
  engine::BobEngine bob(std::move(tb), false);
  Rng rng(72);
  for (std::uint64_t id = 0; id < 200; ++id) {
    alice.add_request(id, static_cast<qsim::GateG1>(rng_below(rng, 4)));
    bob.add_request(id, uniform_bit(rng) ? 1 : 0);
  }
  engine::run_batch(alice, bob, {});
  try {
    security::privacy_audit(alice, bob);
    FAIL("expected invalid_state");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_state);
  }
}
