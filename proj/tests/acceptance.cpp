// Acceptance gate: ten scenario checks over the full stack, run as a plain
// binary so the verdicts survive outside any test framework. Each criterion
// prints exactly one [PASS]/[FAIL] line; the exit code is 0 only if every
// selected criterion passed. Invoke with criterion numbers to run a subset.
//
// Tolerances are part of the acceptance contract and are written out
// literally next to each check. Seeds are pinned: every number below is a
// deterministic Monte Carlo outcome, not a flaky sample.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "otp/engine/batch.hpp"
#include "otp/engine/machines.hpp"
#include "otp/qsim/density.hpp"
#include "otp/qsim/gates.hpp"
#include "otp/qsim/noise.hpp"
#include "otp/security/attack.hpp"
#include "otp/security/chsh.hpp"
#include "otp/sig/analysis.hpp"
#include "otp/sig/signature.hpp"
#include "otp/tabler/generate.hpp"
#include "otp/tabler/session.hpp"
#include "otp/tabler/sync.hpp"
#include "otp/tabler/table.hpp"
#include "otp/wire/frame.hpp"
#include "otp/wire/session.hpp"
#include "otp/wire/transport.hpp"

namespace {

namespace qsim = otp::qsim;
namespace tabler = otp::tabler;
namespace engine = otp::engine;
namespace sig = otp::sig;
namespace security = otp::security;
namespace wire = otp::wire;

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return std::string(buf);
}

struct Result {
  bool ok = true;
  std::string detail;
};

// Collects sub-check failures and pass-side measurements; the final line
// shows the measurements on PASS and the violated bounds on FAIL.
struct Checks {
  bool ok = true;
  std::string fails;
  std::string notes;

  void require(bool cond, const std::string& msg) {
    if (cond) return;
    ok = false;
    if (!fails.empty()) fails += "; ";
    fails += msg;
  }
  void note(const std::string& msg) {
    if (!notes.empty()) notes += "; ";
    notes += msg;
  }
  Result result() const { return {ok, ok ? notes : fails}; }
};

double secs_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v, double mean) {
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// 1. Handshake success frequency per (gate, input) cell on an ideal table.

Result c1_gate_success() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;
  const auto gen = tabler::generate_tables(1'000'000, qsim::NoiseModel::ideal(), 0xace001);
  std::array<std::array<std::uint64_t, 2>, 4> total{};
  std::array<std::array<std::uint64_t, 2>, 4> good{};
  for (std::size_t i = 0; i < gen.alice.lines.size(); ++i) {
    const auto& a = gen.alice.lines[i];
    const auto& b = gen.bob.lines[i];
    const int g = static_cast<int>(a.gate);
    total[g][b.input] += 1;
    good[g][b.input] += b.output == qsim::apply_gate(a.gate, b.input) ? 1 : 0;
  }
  double lo = 1.0, hi = 0.0;
  for (int g = 0; g < 4; ++g)
    for (int x = 0; x < 2; ++x) {
      k.require(total[g][x] > 100'000, fmt("cell (%d,%d) undersampled: %llu", g, x,
                                           static_cast<unsigned long long>(total[g][x])));
      const double f = static_cast<double>(good[g][x]) / static_cast<double>(total[g][x]);
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      k.require(std::abs(f - 0.85355) <= 0.002,
                fmt("cell gate=%d input=%d success %.5f outside 0.85355 +/- 0.002", g, x, f));
    }
  const double el = secs_since(t0);
  k.require(el < 10.0, fmt("runtime %.1f s exceeds 10 s", el));
  k.note(fmt("8 cells in %.5f..%.5f, want 0.85355 +/- 0.002 over 1e6 ideal lines", lo, hi));
  return k.result();
}

// ---------------------------------------------------------------------------
// 2. Exact per-evaluation success 1/2 + 2^-(1+k/2) for every k-input truth
//    table, from the carrier density via the Born rule.

Result c2_success_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;
  double worst = 0.0;
  std::uint64_t evals = 0;
  for (int kk = 1; kk <= 3; ++kk) {
    const double want = 0.5 + std::pow(2.0, -1.0 - 0.5 * kk);
    const std::size_t n_inputs = std::size_t{1} << kk;
    const std::size_t n_tables = std::size_t{1} << n_inputs;
    for (std::size_t t = 0; t < n_tables; ++t) {
      std::vector<std::uint8_t> outs(n_inputs);
      for (std::size_t i = 0; i < n_inputs; ++i) outs[i] = (t >> i) & 1;
      const auto g = qsim::GateGk::from_outputs(kk, outs);
      const qsim::CMatrix rho = qsim::gate_density(g);
      for (std::size_t x = 0; x < n_inputs; ++x) {
        const double p = qsim::born_success(rho, g, x);
        worst = std::max(worst, std::abs(p - want));
        ++evals;
      }
    }
  }
  k.require(worst <= 1e-12, fmt("worst |success - expected| = %.3e exceeds 1e-12", worst));
  const double el = secs_since(t0);
  k.require(el < 5.0, fmt("runtime %.1f s exceeds 5 s", el));
  k.note(fmt("%llu evaluations over all k=1..3 truth tables, worst deviation %.2e",
             static_cast<unsigned long long>(evals), worst));
  return k.result();
}

// ---------------------------------------------------------------------------
// 3. k=1 carrier density equals the pure gate-state projector.

Result c3_carrier_consistency() {
  Checks k;
  double worst = 0.0;
  for (qsim::GateG1 g : qsim::kAllGates) {
    const auto tt = qsim::truth_table(g);
    const auto gk = qsim::GateGk::from_outputs(1, {tt[0], tt[1]});
    const double d =
        qsim::trace_distance(qsim::gate_density(gk), qsim::projector(qsim::gate_state(g)));
    worst = std::max(worst, d);
    k.require(d < 1e-12, fmt("gate %d: trace distance %.3e not below 1e-12",
                             static_cast<int>(g), d));
  }
  k.note(fmt("all four gates, worst trace distance %.2e", worst));
  return k.result();
}

// ---------------------------------------------------------------------------
// 4. CHSH monitor: ideal value, bench preset with uncertainty, full
//    intercept-resend signature, and the detection rate of that attack.

Result c4_chsh() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;
  const double s_ideal_want = 2.0 * std::sqrt(2.0);

  {
    auto gen = tabler::generate_tables(1'010'000, qsim::NoiseModel::ideal(), 0xc45a01);
    const auto est = security::chsh_from_tables(gen.alice, gen.bob, 1'000'000, 0xc45a02);
    k.require(std::abs(est.s - s_ideal_want) <= 0.01,
              fmt("ideal S=%.5f outside %.5f +/- 0.01", est.s, s_ideal_want));
    k.note(fmt("ideal S=%.4f", est.s));
  }
  {
    auto gen = tabler::generate_tables(6'000, qsim::NoiseModel::bench_s2701(), 0xc45a03);
    const auto est = security::chsh_from_tables(gen.alice, gen.bob, 5'000, 0xc45a04);
    k.require(est.s >= 2.62 && est.s <= 2.78,
              fmt("bench S=%.4f outside [2.62, 2.78]", est.s));
    k.require(est.sigma >= 0.03 && est.sigma <= 0.055,
              fmt("bench sigma=%.4f not near 0.04", est.sigma));
    k.note(fmt("bench 5000-line S=%.4f +/- %.4f", est.s, est.sigma));
  }
  {
    auto gen = tabler::generate_tables_channel(210'000, qsim::NoiseModel::ideal(), 0xc45a05,
                                               security::InterceptResend{});
    const auto est = security::chsh_from_tables(gen.alice, gen.bob, 200'000, 0xc45a06);
    k.require(std::abs(est.s - std::sqrt(2.0)) <= 0.03,
              fmt("intercept-resend S=%.5f outside %.5f +/- 0.03", est.s, std::sqrt(2.0)));
    k.note(fmt("intercept-resend S=%.4f", est.s));
  }
  {
    int detected = 0;
    double worst_z = 1e300;
    for (int t = 0; t < 100; ++t) {
      auto gen = tabler::generate_tables_channel(
          4'500, qsim::NoiseModel::ideal(), 0xc45b00 + static_cast<std::uint64_t>(t),
          security::InterceptResend{});
      const auto est = security::chsh_from_tables(gen.alice, gen.bob, 4'000,
                                                  0xc45c00 + static_cast<std::uint64_t>(t));
      detected += est.s < 2.5 ? 1 : 0;
      worst_z = std::min(worst_z, (2.5 - est.s) / est.sigma);
    }
    k.require(detected == 100, fmt("only %d/100 attacked runs detected below 2.5", detected));
    // The tightest run sits worst_z standard errors below the abort line;
    // > 3.09 already implies a one-sided miss rate under 1e-3.
    k.require(worst_z > 3.09, fmt("tightest detection margin %.1f sigma too small", worst_z));
    k.note(fmt("attack detected 100/100, tightest margin %.1f sigma", worst_z));
  }
  const double el = secs_since(t0);
  k.require(el < 30.0, fmt("runtime %.1f s exceeds 30 s", el));
  return k.result();
}

// ---------------------------------------------------------------------------
// 5. Signature operating point from the exact binomial analysis.

Result c5_signature_analysis() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;
  sig::AnalysisParams ap;  // replicas 1000, bits 224, threshold 0.776, p 0.831
  const auto base = sig::analyze_threshold(ap);
  k.require(base.accept_count == 776,
            fmt("accept count %lld at tau=0.776, want 776",
                static_cast<long long>(base.accept_count)));
  k.require(std::abs(base.honest_accept - 0.9987) <= 2e-3,
            fmt("honest accept %.6f outside 0.9987 +/- 2e-3", base.honest_accept));
  k.require(std::abs(base.forge_accept - 0.0011) <= 5e-4,
            fmt("forge accept %.6f outside 0.0011 +/- 5e-4", base.forge_accept));

  const auto scan = sig::scan_threshold(ap, 0.740, 0.820, 0.001);
  k.require(std::abs(scan.best_threshold - 0.776) <= 0.005,
            fmt("optimal threshold %.3f outside 0.776 +/- 0.005", scan.best_threshold));
  k.require(std::abs(scan.best_gap - 0.9976) <= 2e-3,
            fmt("best accept gap %.6f outside 0.9976 +/- 2e-3", scan.best_gap));

  // Multi-photon leakage raises the forger's per-evaluation success; the
  // anchor points are 0.00107 -> 0.00112 and the shift they imply.
  sig::AnalysisParams mp = ap;
  mp.multi_photon_fraction = 0.00097;
  const auto leak = sig::analyze_threshold(mp);
  const double shift = leak.forge_accept - base.forge_accept;
  k.require(std::abs(base.forge_accept - 0.00107) <= 5e-4,
            fmt("pre-leak forge accept %.6f not within 5e-4 of 0.00107", base.forge_accept));
  k.require(std::abs(leak.forge_accept - 0.00112) <= 5e-4,
            fmt("leak forge accept %.6f not within 5e-4 of 0.00112", leak.forge_accept));
  k.require(std::abs(shift - (0.00112 - 0.00107)) <= 1e-4,
            fmt("leak shift %.2e not within 1e-4 of 5e-5", shift));

  const double el = secs_since(t0);
  k.require(el < 60.0, fmt("runtime %.1f s exceeds 60 s", el));
  k.note(fmt("honest %.5f, forge %.6f, tau*=%.3f, gap %.5f, leak shift %+.2e",
             base.honest_accept, base.forge_accept, scan.best_threshold, scan.best_gap, shift));
  return k.result();
}

// ---------------------------------------------------------------------------
// 6. Fifty complete signing sessions over the in-process loopback duplex,
//    with slow per-session drift on the line success.

Result c6_end_to_end_signing() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;
  constexpr int kSessions = 50;
  const sig::SigParams sp{1000, 224, 0.776};
  const std::uint64_t lines =
      static_cast<std::uint64_t>(sp.replicas) * sp.bits * 9 + 4096;

  std::mt19937_64 msg_rng(0x6e55a6e5u);
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(kSessions) * sp.bits);
  int accepted = 0, completed = 0;
  for (int r = 0; r < kSessions; ++r) {
    const double phase =
        2.0 * M_PI * std::fmod(0.6180339887498949 * static_cast<double>(r), 1.0);
    auto gen = tabler::generate_tables(lines, qsim::NoiseModel::bench_p831(),
                                       0xbe9c000 + static_cast<std::uint64_t>(r),
                                       tabler::DriftModel::bench(phase));
    std::vector<std::uint8_t> msg(32);
    for (auto& b : msg) b = static_cast<std::uint8_t>(msg_rng());

    auto [aio, bio] = wire::memory_pair();
    wire::AliceConfig ac;
    ac.engine_seed = 0xa11ce000 + static_cast<std::uint64_t>(r);
    ac.key_seed = 0x5ec2e700 + static_cast<std::uint64_t>(r);
    ac.sig_threshold = sp.threshold;
    auto fut = std::async(std::launch::async,
                          [&] { return wire::run_alice_session(*aio, gen.alice, ac); });
    wire::BobConfig bc;
    bc.session_id = static_cast<std::uint64_t>(r) + 1;
    bc.sign = wire::BobSignJob{msg, sp};
    const auto bo = wire::run_bob_session(*bio, gen.bob, bc);
    const auto ao = fut.get();

    completed += (ao.completed && bo.completed) ? 1 : 0;
    accepted += (bo.verify && bo.verify->accepted != 0) ? 1 : 0;
    if (ao.verify)
      for (double f : ao.verify->per_bit_fraction) pooled.push_back(f);
  }
  k.require(completed == kSessions, fmt("only %d/%d sessions completed", completed, kSessions));
  k.require(accepted == kSessions,
            fmt("only %d/%d signatures accepted at tau=0.776", accepted, kSessions));
  k.require(pooled.size() == static_cast<std::size_t>(kSessions) * sp.bits,
            fmt("pooled %zu per-bit fractions, want %d", pooled.size(), kSessions * sp.bits));
  const double mean = mean_of(pooled);
  const double sd = stddev_of(pooled, mean);
  k.require(std::abs(mean - 0.831) <= 0.004,
            fmt("per-bit success mean %.4f outside 0.831 +/- 0.004", mean));
  k.require(sd >= 0.012 && sd <= 0.014,
            fmt("per-bit success spread %.4f outside [0.012, 0.014]", sd));
  const double el = secs_since(t0);
  k.require(el < 600.0, fmt("runtime %.1f s exceeds 600 s", el));
  k.note(fmt("%d/%d accepted, per-bit mean %.4f, drift spread %.4f", accepted, kSessions, mean,
             sd));
  return k.result();
}

// ---------------------------------------------------------------------------
// 7. Round counts of the batch handshake at signature scale.

Result c7_batch_rounds() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;
  constexpr std::uint64_t kRequests = 224'000;

  std::vector<double> rounds;
  rounds.reserve(100);
  for (int t = 0; t < 100; ++t) {
    auto gen = tabler::generate_tables(kRequests * 9 + 32'768, qsim::NoiseModel::bench_p831(),
                                       0x70a1500 + static_cast<std::uint64_t>(t));
    engine::AliceEngine alice(std::move(gen.alice), 0xa5eed00 + static_cast<std::uint64_t>(t));
    engine::BobEngine bob(std::move(gen.bob));
    std::mt19937_64 rq(0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(t));
    for (std::uint64_t i = 0; i < kRequests; ++i) {
      alice.add_request(i, qsim::kAllGates[rq() & 3]);
      bob.add_request(i, static_cast<int>(rq() & 1));
    }
    const auto res = engine::run_batch(alice, bob);
    rounds.push_back(static_cast<double>(res.rounds));
  }
  std::sort(rounds.begin(), rounds.end());
  const double median = 0.5 * (rounds[49] + rounds[50]);
  k.require(median >= 16.0 && median <= 20.0,
            fmt("median rounds %.1f outside 18 +/- 2", median));
  k.note(fmt("median %.1f rounds over 100 trials (range %.0f..%.0f)", median, rounds.front(),
             rounds.back()));

  // Constant-round mode: nine candidates per request leave an expected
  // 224000 * 2^-27 = 0.0017 stragglers after three rounds.
  int within3 = 0;
  for (int t = 0; t < 10; ++t) {
    auto gen = tabler::generate_tables(8'600'000, qsim::NoiseModel::bench_p831(),
                                       0xc045700 + static_cast<std::uint64_t>(t));
    engine::AliceEngine alice(std::move(gen.alice), 0xbeef00 + static_cast<std::uint64_t>(t));
    engine::BobEngine bob(std::move(gen.bob));
    std::mt19937_64 rq(0xda3779b97f4a7c15ull ^ static_cast<std::uint64_t>(t));
    for (std::uint64_t i = 0; i < kRequests; ++i) {
      alice.add_request(i, qsim::kAllGates[rq() & 3]);
      bob.add_request(i, static_cast<int>(rq() & 1));
    }
    engine::BatchOptions opt;
    opt.candidates_per_request = 9;
    const auto res = engine::run_batch(alice, bob, opt);
    within3 += res.rounds <= 3 ? 1 : 0;
  }
  k.require(within3 == 10, fmt("constant-round mode finished <=3 rounds in %d/10 trials", within3));
  k.note(fmt("9-candidate mode <=3 rounds in %d/10 trials", within3));
  const double el = secs_since(t0);
  k.require(el < 600.0, fmt("runtime %.1f s exceeds 600 s", el));
  return k.result();
}

// ---------------------------------------------------------------------------
// 8. Clock recovery under large offsets, loss robustness of the reconciled
//    statistics, and coincidence-matcher throughput.

Result c8_sync_and_loss() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;

  double worst_err = 0.0;
  for (const std::int64_t off :
       {std::int64_t{1'000'000'000'000}, std::int64_t{-1'000'000'000'000}, std::int64_t{0}}) {
    tabler::SessionParams sp;
    sp.pair_rate_hz = 10'000.0;
    sp.duration_s = 10.0;
    sp.clock_offset_ps = off;
    sp.noise = qsim::NoiseModel::bench_p831();
    sp.seed = 0x0ff5e700 + static_cast<std::uint64_t>(off & 0xff);
    const auto cap = tabler::simulate_session(sp);
    const auto rec = tabler::reconcile(cap.alice, cap.bob, sp.coincidence_window_ps, sp.seed);
    const double err = std::abs(rec.report.offset_start_ps - static_cast<double>(off));
    worst_err = std::max(worst_err, err);
    k.require(err < 6000.0,
              fmt("offset %+.0f s recovered with error %.0f ps, bound 6 ns",
                  static_cast<double>(off) * 1e-12, err));
  }
  k.note(fmt("offset recovery worst error %.0f ps over +/-1 s injections", worst_err));

  {
    tabler::SessionParams lossy;
    lossy.pair_rate_hz = 10'000.0;
    lossy.duration_s = 10.0;
    lossy.clock_offset_ps = 2'500'000;
    lossy.noise = qsim::NoiseModel::bench_p831();  // 13% loss
    lossy.seed = 0x105500;
    tabler::SessionParams clean = lossy;
    clean.noise.loss_prob = 0.0;
    clean.seed = 0x105501;
    const auto capl = tabler::simulate_session(lossy);
    const auto recl = tabler::reconcile(capl.alice, capl.bob, lossy.coincidence_window_ps, 1);
    const auto capc = tabler::simulate_session(clean);
    const auto recc = tabler::reconcile(capc.alice, capc.bob, clean.coincidence_window_ps, 2);
    const double diff = std::abs(recl.report.success_fraction - recc.report.success_fraction);
    k.require(diff < 0.003,
              fmt("success fraction gap %.4f between 13%% loss (%.4f) and lossless (%.4f)",
                  diff, recl.report.success_fraction, recc.report.success_fraction));
    k.note(fmt("13%% loss success %.4f vs lossless %.4f", recl.report.success_fraction,
               recc.report.success_fraction));
  }

  {
    constexpr std::size_t kEvents = 2'000'000;
    std::vector<tabler::DetectionEvent> a(kEvents), b(kEvents);
    std::mt19937_64 rng(0x7a0b1c2d);
    std::normal_distribution<double> jitter(0.0, 100.0);
    for (std::size_t i = 0; i < kEvents; ++i) {
      const std::int64_t t = 110'000'000'000 + static_cast<std::int64_t>(i) * 500'000;
      a[i] = {t, static_cast<std::uint8_t>(rng() & 3)};
      b[i] = {t + static_cast<std::int64_t>(jitter(rng)), static_cast<std::uint8_t>(rng() & 3)};
    }
    tabler::OffsetTrack track;
    track.knot_t = {a.front().time_ps, a.back().time_ps};
    track.knot_offset = {0.0, 0.0};
    const auto m0 = std::chrono::steady_clock::now();
    const auto pairs = tabler::match_coincidences(a, b, 6'000, track);
    const double dt = secs_since(m0);
    const double rate = static_cast<double>(kEvents) / dt;
    k.require(pairs.size() > kEvents * 99 / 100,
              fmt("matcher paired only %zu of %zu events", pairs.size(), kEvents));
    k.require(rate >= 1e6, fmt("matcher throughput %.2e events/s below 1e6", rate));
    k.note(fmt("matcher %.1fM events/s", rate / 1e6));
  }

  const double el = secs_since(t0);
  k.require(el < 600.0, fmt("runtime %.1f s exceeds 600 s", el));
  return k.result();
}

// ---------------------------------------------------------------------------
// 9. Privacy of declines: declined lines carry no signal about the target
//    gate, and decline counts are independent of Bob's input.

Result c9_decline_privacy() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;
  constexpr std::uint64_t kRequests = 120'000;
  auto gen = tabler::generate_tables(kRequests * 9 + 16'384, qsim::NoiseModel::bench_p831(),
                                     0x921e700);
  engine::AliceEngine alice(std::move(gen.alice), 0x921e701, /*collect_audit=*/true);
  engine::BobEngine bob(std::move(gen.bob), /*collect_audit=*/true);
  std::mt19937_64 rq(0x921e702);
  for (std::uint64_t i = 0; i < kRequests; ++i) {
    alice.add_request(i, qsim::kAllGates[rq() & 3]);
    bob.add_request(i, static_cast<int>(rq() & 1));
  }
  engine::run_batch(alice, bob);

  // Join both audit views of the declined candidates on line id.
  std::unordered_map<std::uint64_t, const engine::DeclinedCandidate*> by_line;
  by_line.reserve(alice.declined_audit().size());
  for (const auto& d : alice.declined_audit()) by_line[d.line_id] = &d;
  std::uint64_t joined = 0, match = 0;
  for (const auto& d : bob.decline_audit()) {
    const auto it = by_line.find(d.line_id);
    if (it == by_line.end()) continue;
    ++joined;
    const int truth = qsim::apply_gate(it->second->target, d.line_input);
    match += d.line_output == truth ? 1 : 0;
  }
  k.require(joined >= 100'000,
            fmt("only %llu declined candidates, need 1e5",
                static_cast<unsigned long long>(joined)));
  const double corr = static_cast<double>(match) / static_cast<double>(joined);
  k.require(std::abs(corr - 0.5) <= 0.005,
            fmt("declined-line correlation %.4f outside 0.5 +/- 0.005", corr));
  k.note(fmt("declined-line correlation %.4f over %llu declines", corr,
             static_cast<unsigned long long>(joined)));

  // Two-sample KS on decline counts split by Bob's desired input.
  const auto desired = bob.desired_inputs();
  std::unordered_map<std::uint64_t, std::uint8_t> want;
  want.reserve(desired.size());
  for (const auto& [id, d] : desired) want[id] = d;
  std::vector<int> c0, c1;
  for (const auto& [id, n] : bob.decline_counts())
    (want[id] ? c1 : c0).push_back(n);
  const int maxc =
      std::max(*std::max_element(c0.begin(), c0.end()), *std::max_element(c1.begin(), c1.end()));
  double d_stat = 0.0;
  double f0 = 0.0, f1 = 0.0;
  for (int v = 0; v <= maxc; ++v) {
    f0 += static_cast<double>(std::count(c0.begin(), c0.end(), v)) / c0.size();
    f1 += static_cast<double>(std::count(c1.begin(), c1.end(), v)) / c1.size();
    d_stat = std::max(d_stat, std::abs(f0 - f1));
  }
  const double n0 = static_cast<double>(c0.size()), n1 = static_cast<double>(c1.size());
  const double crit = 1.6276 * std::sqrt((n0 + n1) / (n0 * n1));  // alpha = 0.01
  k.require(d_stat < crit,
            fmt("decline-count KS statistic %.5f exceeds 1%% critical value %.5f", d_stat, crit));
  k.note(fmt("decline-count KS %.5f vs critical %.5f", d_stat, crit));
  const double el = secs_since(t0);
  k.require(el < 600.0, fmt("runtime %.1f s exceeds 600 s", el));
  return k.result();
}

// ---------------------------------------------------------------------------
// 10. Wire formats: frame fuzzing, byte-identical table files, transcript
//     replay reproducing session outputs.

Result c10_wire_formats() {
  const auto t0 = std::chrono::steady_clock::now();
  Checks k;

  {
    std::mt19937_64 rng(0xf0220001);
    std::uint64_t roundtrips = 0;
    for (int i = 0; i < 1'000'000; ++i) {
      wire::Frame f;
      f.type = static_cast<wire::MsgType>(1 + (rng() % 11));
      f.session_id = rng();
      f.payload.resize(rng() % 65);
      for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
      const auto bytes = wire::encode_frame(f);
      const auto [back, used] = wire::decode_frame(bytes);
      const bool same = back.type == f.type && back.session_id == f.session_id &&
                        back.payload == f.payload && used == bytes.size();
      if (!same) {
        k.require(false, fmt("frame round trip diverged at iteration %d", i));
        break;
      }
      ++roundtrips;
    }
    std::uint64_t rejected = 0, survived = 0;
    for (int i = 0; i < 200'000; ++i) {
      std::vector<std::uint8_t> buf;
      const int mode = i % 3;
      if (mode == 0) {
        buf.resize(rng() % 64);
        for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
      } else if (mode == 1) {
        buf = {'O', 'T', 'P', '1'};
        const std::size_t extra = rng() % 40;
        for (std::size_t j = 0; j < extra; ++j) buf.push_back(static_cast<std::uint8_t>(rng()));
      } else {
        wire::Frame f;
        f.type = wire::MsgType::propose_batch;
        f.session_id = rng();
        f.payload.resize(16 + rng() % 32);
        for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
        buf = wire::encode_frame(f);
        const int flips = 1 + static_cast<int>(rng() % 3);
        for (int j = 0; j < flips; ++j) buf[rng() % buf.size()] ^= 1u << (rng() % 8);
        if (rng() % 4 == 0) buf.resize(rng() % buf.size());
      }
      try {
        (void)wire::decode_frame(buf);
        ++survived;  // a mutation that still checksums is a valid frame
      } catch (const otp::Error&) {
        ++rejected;
      }
    }
    k.note(fmt("1e6 frame round trips, %llu/%llu garbage inputs rejected cleanly",
               static_cast<unsigned long long>(rejected),
               static_cast<unsigned long long>(rejected + survived)));
    (void)roundtrips;
  }

  {
    auto gen = tabler::generate_tables(5'000, qsim::NoiseModel::bench_p831(), 0xf0220002);
    gen.alice.lines[7].status = tabler::LineStatus::Consumed;
    gen.bob.lines[7].status = tabler::LineStatus::Consumed;
    gen.alice.lines[19].status = tabler::LineStatus::Deleted;
    gen.bob.lines[19].status = tabler::LineStatus::Deleted;
    const auto a1 = tabler::serialize(gen.alice);
    const auto a2 = tabler::serialize(tabler::parse_alice_table(a1));
    k.require(a1 == a2, "alice table serialize/parse/serialize not byte-identical");
    const auto b1 = tabler::serialize(gen.bob);
    const auto b2 = tabler::serialize(tabler::parse_bob_table(b1));
    k.require(b1 == b2, "bob table serialize/parse/serialize not byte-identical");

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         fmt("otp-acceptance-%d", static_cast<int>(::getpid()));
    fs::create_directories(dir);
    const auto p1 = (dir / "t1.otpt").string();
    const auto p2 = (dir / "t2.otpt").string();
    tabler::save_table(gen.alice, p1);
    tabler::save_table(tabler::load_alice_table(p1), p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    k.require(!s1.empty() && s1 == s2, "table file round trip not byte-identical");
    fs::remove_all(dir);
    k.note("table round trips byte-identical (memory and file)");
  }

  {
    auto gen = tabler::generate_tables(20'000, qsim::NoiseModel::bench_p831(), 0xf0220003);
    const tabler::SharedTableBob pristine = gen.bob;
    wire::BobExecJob job;
    std::vector<std::pair<std::uint64_t, std::uint8_t>> desired;
    std::mt19937_64 rng(0xf0220004);
    for (std::uint64_t i = 0; i < 1'200; ++i) {
      const int bit = static_cast<int>(rng() & 1);
      job.inputs.emplace_back(i, bit);
      desired.emplace_back(i, static_cast<std::uint8_t>(bit));
    }
    auto [aio, bio] = wire::memory_pair();
    wire::AliceConfig ac;
    ac.engine_seed = 0xf0220005;
    ac.key_seed = 0xf0220006;
    auto fut = std::async(std::launch::async,
                          [&] { return wire::run_alice_session(*aio, gen.alice, ac); });
    wire::BobConfig bc;
    bc.session_id = 99;
    bc.exec = job;
    wire::Transcript transcript;
    const auto bo = wire::run_bob_session(*bio, gen.bob, bc, &transcript);
    const auto ao = fut.get();
    k.require(ao.completed && bo.completed, "transcript session did not complete");

    const auto replayed = wire::replay_transcript(transcript, pristine, desired);
    std::unordered_map<std::uint64_t, int> live;
    for (const auto& [id, out] : bo.outputs) live[id] = out;
    k.require(replayed.size() == bo.outputs.size(),
              fmt("replay produced %zu outputs, session %zu", replayed.size(),
                  bo.outputs.size()));
    bool all_match = replayed.size() == bo.outputs.size();
    for (const auto& [id, out] : replayed) {
      const auto it = live.find(id);
      if (it == live.end() || it->second != out) {
        all_match = false;
        break;
      }
    }
    k.require(all_match, "transcript replay outputs diverge from the live session");
    k.note(fmt("transcript replay reproduced %zu outputs bit-for-bit", replayed.size()));
  }

  const double el = secs_since(t0);
  k.require(el < 600.0, fmt("runtime %.1f s exceeds 600 s", el));
  return k.result();
}

struct Criterion {
  int num;
  const char* name;
  Result (*fn)();
};

constexpr Criterion kCriteria[] = {
    {1, "gate handshake success", c1_gate_success},
    {2, "k-input success exactness", c2_success_exactness},
    {3, "single-input carrier consistency", c3_carrier_consistency},
    {4, "chsh monitor", c4_chsh},
    {5, "signature operating point", c5_signature_analysis},
    {6, "end-to-end signing", c6_end_to_end_signing},
    {7, "batch round counts", c7_batch_rounds},
    {8, "clock sync and loss", c8_sync_and_loss},
    {9, "decline privacy", c9_decline_privacy},
    {10, "wire formats", c10_wire_formats},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (const auto& c : kCriteria) which.push_back(c.num);

  bool all_ok = true;
  for (const int n : which) {
    const auto it = std::find_if(std::begin(kCriteria), std::end(kCriteria),
                                 [n](const Criterion& c) { return c.num == n; });
    if (it == std::end(kCriteria)) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 64;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = it->fn();
    } catch (const std::exception& e) {
      r = {false, fmt("unhandled exception: %s", e.what())};
    }
    std::printf("[%s] %2d %s: %s (%.1f s)\n", r.ok ? "PASS" : "FAIL", it->num, it->name,
                r.detail.c_str(), secs_since(t0));
    std::fflush(stdout);
    all_ok = all_ok && r.ok;
  }
  std::fprintf(stderr, all_ok ? "acceptance: all selected criteria passed\n"
                              : "acceptance: FAILED criteria present\n");
  return all_ok ? 0 : 1;
}
