// otp: operator entry points for the one-time-program toolkit.
// Machine-readable JSON on stdout ("schema": 1), human summary on stderr.
// Exit codes: 0 success/accept, 2 protocol abort, 3 verification reject,
// 64 usage error, 74 I/O or format error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "otp/cli/config.hpp"
#include "otp/cli/format.hpp"
#include "otp/common.hpp"
#include "otp/engine/batch.hpp"
#include "otp/engine/circuit.hpp"
#include "otp/engine/gk.hpp"
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
#include "otp/wire/session.hpp"
#include "otp/wire/transport.hpp"

using json = nlohmann::ordered_json;
using otp::cli::sig_digits;
namespace qsim = otp::qsim;

namespace {

int exit_for(otp::Errc c) {
  switch (c) {
    case otp::Errc::invalid_argument:
      return 64;
    case otp::Errc::io:
    case otp::Errc::bad_magic:
    case otp::Errc::version_mismatch:
    case otp::Errc::truncated:
    case otp::Errc::checksum_mismatch:
    case otp::Errc::malformed:
    case otp::Errc::oversize:
      return 74;
    default:
      return 2;
  }
}

void emit(const json& report, const std::string& summary) {
  std::cout << report.dump(2) << "\n";
  std::cerr << summary << "\n";
}

std::string hex_encode(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const std::uint8_t b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 0xF];
  }
  return out;
}

std::vector<std::uint8_t> hex_decode(const std::string& hex) {
  if (hex.size() % 2 != 0) otp::fail(otp::Errc::malformed, "odd hex length");
  const auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    otp::fail(otp::Errc::malformed, "bad hex digit");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

qsim::NoiseModel noise_of(const std::string& name) {
  const auto m = otp::qsim::noise_preset(name);
  if (!m) otp::fail(otp::Errc::invalid_argument, "unknown noise preset: " + name);
  return *m;
}

json chsh_json(const otp::security::ChshEstimate& e) {
  json j;
  j["s"] = sig_digits(e.s);
  j["sigma"] = sig_digits(e.sigma);
  json corr = json::array();
  json counts = json::array();
  for (int a = 0; a < 2; ++a) {
    json crow = json::array();
    json nrow = json::array();
    for (int b = 0; b < 2; ++b) {
      crow.push_back(sig_digits(e.correlators[a][b]));
      nrow.push_back(e.counts[a][b]);
    }
    corr.push_back(crow);
    counts.push_back(nrow);
  }
  j["correlators"] = corr;
  j["counts"] = counts;
  return j;
}

json verify_json(const otp::sig::VerifyReport& r) {
  json j;
  j["accepted"] = r.accepted;
  j["min_fraction"] = sig_digits(r.min_fraction);
  j["rejected_bits"] = r.rejected_bits;
  return j;
}

// Table pair either loaded from <prefix>.{alice,bob}.otpt (persisted back
// after use to keep one-time semantics) or generated in memory.
struct TableSet {
  otp::tabler::SharedTableAlice alice;
  otp::tabler::SharedTableBob bob;
  std::string apath, bpath;

  bool from_files() const { return !apath.empty(); }
};

TableSet acquire_tables(const std::string& prefix, std::uint64_t gen_lines,
                        const qsim::NoiseModel& noise, std::uint64_t seed) {
  TableSet t;
  if (!prefix.empty()) {
    t.apath = prefix + ".alice.otpt";
    t.bpath = prefix + ".bob.otpt";
    t.alice = otp::tabler::load_alice_table(t.apath);
    t.bob = otp::tabler::load_bob_table(t.bpath);
  } else {
    auto g = otp::tabler::generate_tables(gen_lines, noise, seed);
    t.alice = std::move(g.alice);
    t.bob = std::move(g.bob);
  }
  return t;
}

void persist_tables(const TableSet& t) {
  if (!t.from_files()) return;
  otp::tabler::save_table(t.alice, t.apath);
  otp::tabler::save_table(t.bob, t.bpath);
}

std::uint64_t available_lines(const otp::tabler::SharedTableBob& t) {
  std::uint64_t n = 0;
  for (const auto& l : t.lines)
    if (l.status == otp::tabler::LineStatus::Available) ++n;
  return n;
}

std::uint64_t available_lines(const otp::tabler::SharedTableAlice& t) {
  std::uint64_t n = 0;
  for (const auto& l : t.lines)
    if (l.status == otp::tabler::LineStatus::Available) ++n;
  return n;
}

double table_success_fraction(const otp::tabler::SharedTableAlice& a,
                              const otp::tabler::SharedTableBob& b) {
  std::uint64_t ok = 0;
  for (std::size_t i = 0; i < a.lines.size(); ++i)
    if (b.lines[i].output == qsim::apply_gate(a.lines[i].gate, b.lines[i].input)) ++ok;
  return a.lines.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(a.lines.size());
}

json sig_doc_to_json(const otp::sig::SignatureDoc& doc) {
  json j;
  j["schema"] = 1;
  j["type"] = "signature";
  j["replicas"] = doc.replicas;
  j["bits"] = doc.bits;
  j["hash_algo"] = doc.hash_algo;
  j["message_hex"] = hex_encode(doc.message);
  j["sig_bits_hex"] = hex_encode(doc.sig_bits);
  return j;
}

otp::sig::SignatureDoc sig_doc_from_json(const json& j) {
  if (!j.is_object() || j.value("type", "") != "signature")
    otp::fail(otp::Errc::malformed, "not a signature document");
  otp::sig::SignatureDoc doc;
  doc.replicas = j.at("replicas").get<std::uint32_t>();
  doc.bits = j.at("bits").get<std::uint16_t>();
  doc.hash_algo = j.at("hash_algo").get<std::uint8_t>();
  doc.message = hex_decode(j.at("message_hex").get<std::string>());
  doc.sig_bits = hex_decode(j.at("sig_bits_hex").get<std::string>());
  const std::uint64_t want =
      (static_cast<std::uint64_t>(doc.replicas) * doc.bits + 7) / 8;
  if (doc.sig_bits.size() != want)
    otp::fail(otp::Errc::malformed, "signature bit array has wrong length");
  return doc;
}

std::string read_text(const std::string& path) {
  const auto bytes = otp::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

std::vector<int> parse_bit_list(const std::string& s) {
  std::vector<int> bits;
  for (const char c : s) {
    if (c == ',' || c == ' ') continue;
    if (c != '0' && c != '1')
      otp::fail(otp::Errc::invalid_argument, "inputs must be 0/1 bits");
    bits.push_back(c - '0');
  }
  if (bits.empty()) otp::fail(otp::Errc::invalid_argument, "empty input bit list");
  return bits;
}

json session_stats_json(const otp::wire::SessionStats& st) {
  json j;
  j["rounds"] = st.rounds;
  j["frames_sent"] = st.frames_sent;
  j["frames_received"] = st.frames_received;
  j["bytes_sent"] = st.bytes_sent;
  j["bytes_received"] = st.bytes_received;
  return j;
}

json abort_json(const std::optional<otp::wire::Abort>& a) {
  if (!a) return nullptr;
  json j;
  j["reason"] = otp::wire::abort_reason_name(a->reason);
  j["detail"] = a->detail;
  return j;
}

// table generate / table reconcile ------------------------------------------

struct SimOpts {
  double duration = 10.0;
  double rate = 10000.0;
  std::int64_t offset_ps = 0;
  double skew_ppm = 0.0;
  double jitter_ps = 100.0;
};

otp::tabler::SessionParams session_params(const SimOpts& so, const otp::cli::Config& cfg) {
  otp::tabler::SessionParams sp;
  sp.pair_rate_hz = so.rate;
  sp.duration_s = so.duration;
  sp.coincidence_window_ps = cfg.window_ps;
  sp.clock_offset_ps = so.offset_ps;
  sp.clock_skew_ppm = so.skew_ppm;
  sp.timestamp_jitter_ps = so.jitter_ps;
  sp.noise = noise_of(cfg.noise);
  sp.seed = cfg.seed;
  return sp;
}

json reconcile_json(const otp::tabler::ReconcileReport& rep, const SimOpts& so,
                    const otp::tabler::SessionCapture& cap) {
  json j;
  j["injected_offset_ps"] = so.offset_ps;
  j["injected_skew_ppm"] = sig_digits(so.skew_ppm);
  j["estimated_offset_ps"] = sig_digits(rep.offset_start_ps);
  j["estimated_skew_ppm"] = sig_digits(rep.skew_ppm);
  j["offset_error_ps"] =
      sig_digits(rep.offset_start_ps - static_cast<double>(so.offset_ps));
  j["alice_events"] = rep.alice_events;
  j["bob_events"] = rep.bob_events;
  j["matched_events"] = rep.matched_events;
  j["table_lines"] = rep.table_lines;
  const std::uint64_t matchable = cap.data_pairs - cap.bob_lost;
  j["matchable_pairs"] = matchable;
  j["matched_fraction"] =
      sig_digits(matchable ? static_cast<double>(rep.table_lines) / matchable : 0.0);
  j["multi_photon_fraction"] = sig_digits(rep.multi_photon_fraction);
  j["success_fraction"] = sig_digits(rep.success_fraction);
  return j;
}

int cmd_table_generate(const otp::cli::Config& cfg, const SimOpts& so, std::uint64_t lines,
                       bool drift, const std::string& out) {
  const std::string prefix = out.empty() ? (cfg.table.empty() ? "otp-tables" : cfg.table) : out;
  const std::string apath = prefix + ".alice.otpt";
  const std::string bpath = prefix + ".bob.otpt";
  json j;
  j["schema"] = 1;
  j["command"] = "table-generate";
  j["noise"] = cfg.noise;
  j["seed"] = cfg.seed;
  if (lines > 0) {
    const otp::tabler::DriftModel dm =
        drift ? otp::tabler::DriftModel::bench() : otp::tabler::DriftModel{};
    const auto g = otp::tabler::generate_tables(lines, noise_of(cfg.noise), cfg.seed, dm);
    otp::tabler::save_table(g.alice, apath);
    otp::tabler::save_table(g.bob, bpath);
    j["mode"] = "lines";
    j["lines"] = lines;
    j["drift"] = drift;
    j["multi_photon_lines"] = g.multi_photon_lines;
    j["success_fraction"] = sig_digits(table_success_fraction(g.alice, g.bob));
  } else {
    const auto cap = otp::tabler::simulate_session(session_params(so, cfg));
    const auto res = otp::tabler::reconcile(cap.alice, cap.bob, cfg.window_ps, cfg.seed);
    otp::tabler::save_table(res.alice, apath);
    otp::tabler::save_table(res.bob, bpath);
    j["mode"] = "session";
    j["duration_s"] = sig_digits(so.duration);
    j["pair_rate_hz"] = sig_digits(so.rate);
    j["window_ps"] = cfg.window_ps;
    j["reconcile"] = reconcile_json(res.report, so, cap);
    j["lines"] = res.report.table_lines;
  }
  j["alice_table"] = apath;
  j["bob_table"] = bpath;
  emit(j, "table-generate: " + std::to_string(j["lines"].get<std::uint64_t>()) +
              " lines -> " + apath + ", " + bpath);
  return 0;
}

int cmd_table_reconcile(const otp::cli::Config& cfg, const SimOpts& so, const std::string& out) {
  const auto cap = otp::tabler::simulate_session(session_params(so, cfg));
  const auto res = otp::tabler::reconcile(cap.alice, cap.bob, cfg.window_ps, cfg.seed);
  json j;
  j["schema"] = 1;
  j["command"] = "table-reconcile";
  j["noise"] = cfg.noise;
  j["seed"] = cfg.seed;
  j["duration_s"] = sig_digits(so.duration);
  j["pair_rate_hz"] = sig_digits(so.rate);
  j["window_ps"] = cfg.window_ps;
  j["reconcile"] = reconcile_json(res.report, so, cap);
  if (!out.empty()) {
    const std::string apath = out + ".alice.otpt";
    const std::string bpath = out + ".bob.otpt";
    otp::tabler::save_table(res.alice, apath);
    otp::tabler::save_table(res.bob, bpath);
    j["alice_table"] = apath;
    j["bob_table"] = bpath;
  }
  emit(j, "table-reconcile: " + std::to_string(res.report.table_lines) +
              " lines, offset error " +
              std::to_string(res.report.offset_start_ps - static_cast<double>(so.offset_ps)) +
              " ps");
  return 0;
}

// exec -----------------------------------------------------------------------

int cmd_exec_gate(const otp::cli::Config& cfg, const std::string& gate_str, int input,
                  int repeat, const std::string& tables, std::uint64_t gen_lines) {
  const auto gate = otp::qsim::parse_gate(gate_str);
  if (!gate) otp::fail(otp::Errc::invalid_argument, "unknown gate: " + gate_str);
  if (input != 0 && input != 1) otp::fail(otp::Errc::invalid_argument, "input must be 0 or 1");
  if (repeat < 1) otp::fail(otp::Errc::invalid_argument, "repeat must be positive");

  const std::uint64_t need =
      gen_lines ? gen_lines : 32ull * static_cast<std::uint64_t>(repeat) + 4096;
  const auto noise = noise_of(cfg.noise);
  TableSet ts = acquire_tables(tables, need, noise, cfg.seed);

  otp::engine::AliceEngine alice(std::move(ts.alice), cfg.seed ^ 0x616c696365ull);
  otp::engine::BobEngine bob(std::move(ts.bob));
  for (int r = 0; r < repeat; ++r) {
    alice.add_request(static_cast<std::uint64_t>(r), *gate);
    bob.add_request(static_cast<std::uint64_t>(r), input);
  }
  const auto res = otp::engine::run_batch(alice, bob);

  const int expected = otp::qsim::apply_gate(*gate, input);
  std::array<std::uint64_t, 2> counts{0, 0};
  for (const auto& [id, out] : res.outputs) counts[out & 1]++;
  const double freq =
      static_cast<double>(counts[expected]) / static_cast<double>(res.outputs.size());

  ts.alice = alice.table();
  ts.bob = bob.table();
  persist_tables(ts);

  json j;
  j["schema"] = 1;
  j["command"] = "exec-gate";
  j["gate"] = std::string(otp::qsim::gate_name(*gate));
  j["input"] = input;
  j["repeat"] = repeat;
  j["expected_output"] = expected;
  j["outputs"] = {{"0", counts[0]}, {"1", counts[1]}};
  j["frequency"] = sig_digits(freq);
  if (!ts.from_files()) {
    j["noise"] = cfg.noise;
    j["expected_frequency"] = sig_digits(otp::qsim::line_success_prob(noise.visibility));
  }
  j["rounds"] = res.rounds;
  j["source"] = ts.from_files() ? "files" : "generated";
  emit(j, "exec-gate: " + gate_str + "(" + std::to_string(input) + ") -> " +
              std::to_string(expected) + " with frequency " + std::to_string(freq));
  return 0;
}

int cmd_exec_circuit(const otp::cli::Config& cfg, const std::string& file,
                     const std::string& inputs, const std::string& tables,
                     std::uint64_t gen_lines) {
  const json cj = json::parse(read_text(file));
  otp::engine::Circuit c;
  c.width = cj.at("width").get<std::size_t>();
  if (c.width == 0) otp::fail(otp::Errc::invalid_argument, "circuit width must be positive");
  for (const auto& level : cj.at("gates")) {
    std::vector<qsim::GateG1> row;
    for (const auto& g : level) {
      const auto gate = otp::qsim::parse_gate(g.get<std::string>());
      if (!gate)
        otp::fail(otp::Errc::invalid_argument, "unknown gate: " + g.get<std::string>());
      row.push_back(*gate);
    }
    if (row.size() != c.width)
      otp::fail(otp::Errc::invalid_argument, "circuit level width mismatch");
    c.gates.push_back(std::move(row));
  }
  const std::vector<int> bits = parse_bit_list(inputs);
  if (bits.size() != c.width)
    otp::fail(otp::Errc::invalid_argument, "inputs must match circuit width");

  const std::uint64_t requests = c.width * c.depth();
  const std::uint64_t need = gen_lines ? gen_lines : 32 * requests + 4096;
  TableSet ts = acquire_tables(tables, need, noise_of(cfg.noise), cfg.seed);

  otp::engine::AliceEngine alice(std::move(ts.alice), cfg.seed ^ 0x616c696365ull);
  otp::engine::BobEngine bob(std::move(ts.bob));
  const auto run = otp::engine::run_circuit(alice, bob, c, bits);
  const auto ref = otp::engine::evaluate_reference(c, bits);

  ts.alice = alice.table();
  ts.bob = bob.table();
  persist_tables(ts);

  const auto bit_string = [](const std::vector<int>& v) {
    std::string s;
    for (const int b : v) s += static_cast<char>('0' + b);
    return s;
  };
  json j;
  j["schema"] = 1;
  j["command"] = "exec-circuit";
  j["file"] = file;
  j["width"] = c.width;
  j["depth"] = c.depth();
  j["inputs"] = bit_string(bits);
  j["outputs"] = bit_string(run.outputs);
  j["reference"] = bit_string(ref);
  j["match"] = run.outputs == ref;
  j["rounds"] = run.rounds;
  j["source"] = ts.from_files() ? "files" : "generated";
  emit(j, "exec-circuit: " + bit_string(bits) + " -> " + bit_string(run.outputs) +
              (run.outputs == ref ? " (matches reference)" : " (DIVERGES from reference)"));
  return 0;
}

int cmd_exec_gk(const otp::cli::Config& cfg, int k, const std::string& truth_table,
                std::size_t input, int repeat, const std::string& tables,
                std::uint64_t gen_lines) {
  if (k < 1 || k > 8) otp::fail(otp::Errc::invalid_argument, "k must be in [1, 8]");
  const std::size_t rows = std::size_t{1} << k;
  if (truth_table.size() != rows)
    otp::fail(otp::Errc::invalid_argument, "truth table must have 2^k bits");
  std::vector<std::uint8_t> outs;
  for (const char c : truth_table) {
    if (c != '0' && c != '1')
      otp::fail(otp::Errc::invalid_argument, "truth table must be 0/1 bits");
    outs.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  if (input >= rows) otp::fail(otp::Errc::invalid_argument, "input index out of range");
  if (repeat < 1) otp::fail(otp::Errc::invalid_argument, "repeat must be positive");

  const auto plan = otp::engine::make_gk_plan(qsim::GateGk::from_outputs(k, outs));
  const std::uint64_t ids_per_run = otp::qsim::gk_qubits(k);
  const std::uint64_t need = gen_lines
                                 ? gen_lines
                                 : 32ull * ids_per_run * static_cast<std::uint64_t>(repeat) + 4096;
  TableSet ts = acquire_tables(tables, need, noise_of(cfg.noise), cfg.seed);

  otp::engine::AliceEngine alice(std::move(ts.alice), cfg.seed ^ 0x616c696365ull);
  otp::engine::BobEngine bob(std::move(ts.bob));
  otp::Rng arng(cfg.seed ^ 0x676bull);

  const int expected = outs[input];
  std::uint64_t hits = 0;
  std::int64_t rounds = 0, handshakes = 0;
  for (int r = 0; r < repeat; ++r) {
    const auto res = otp::engine::run_gk(alice, bob, plan, input, arng,
                                         static_cast<std::uint64_t>(r) * ids_per_run);
    if (res.output == expected) ++hits;
    rounds += res.rounds;
    handshakes += res.handshakes;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(repeat);

  ts.alice = alice.table();
  ts.bob = bob.table();
  persist_tables(ts);

  json j;
  j["schema"] = 1;
  j["command"] = "exec-gk";
  j["k"] = k;
  j["truth_table"] = truth_table;
  j["input"] = input;
  j["repeat"] = repeat;
  j["expected_output"] = expected;
  j["success_frequency"] = sig_digits(freq);
  j["expected_frequency"] = sig_digits(otp::qsim::gk_success_prob(k));
  j["rounds_mean"] = sig_digits(static_cast<double>(rounds) / repeat);
  j["handshakes_mean"] = sig_digits(static_cast<double>(handshakes) / repeat);
  j["source"] = ts.from_files() ? "files" : "generated";
  emit(j, "exec-gk: k=" + std::to_string(k) + " input " + std::to_string(input) +
              " success frequency " + std::to_string(freq));
  return 0;
}

// sign / verify ---------------------------------------------------------------

int cmd_sign(const otp::cli::Config& cfg, const std::string& message_file,
             std::uint64_t key_seed, const std::string& tables, std::uint64_t gen_lines,
             const std::string& out) {
  const auto message = otp::read_file(message_file);
  otp::sig::SigParams params{cfg.sig_n, cfg.sig_m, cfg.sig_tau};
  otp::sig::validate_params(params);

  const std::uint64_t requests =
      static_cast<std::uint64_t>(params.replicas) * params.bits;
  const std::uint64_t need = gen_lines ? gen_lines : requests * 9 + 4096;
  TableSet ts = acquire_tables(tables, need, noise_of(cfg.noise), cfg.seed);
  const std::uint64_t before = available_lines(ts.bob);

  otp::engine::AliceEngine alice(std::move(ts.alice), cfg.seed ^ 0x616c696365ull);
  otp::engine::BobEngine bob(std::move(ts.bob));
  const auto res = otp::sig::sign_message(alice, bob, key_seed, params, message);
  const auto verify = otp::sig::verify_signature(res.doc, key_seed, params.threshold);

  ts.alice = alice.table();
  ts.bob = bob.table();
  persist_tables(ts);

  otp::write_file(out, [&] {
    const std::string text = sig_doc_to_json(res.doc).dump(2) + "\n";
    return std::vector<std::uint8_t>(text.begin(), text.end());
  }());

  json j;
  j["schema"] = 1;
  j["command"] = "sign";
  j["message_file"] = message_file;
  j["message_bytes"] = message.size();
  j["replicas"] = params.replicas;
  j["bits"] = params.bits;
  j["threshold"] = sig_digits(params.threshold);
  j["rounds"] = res.rounds;
  j["lines_consumed"] = before - available_lines(bob.table());
  j["verify"] = verify_json(verify);
  j["signature_file"] = out;
  emit(j, std::string("sign: ") + (verify.accepted ? "accepted" : "REJECTED") +
              ", min fraction " + std::to_string(verify.min_fraction) + " -> " + out);
  return verify.accepted ? 0 : 3;
}

int cmd_verify(const std::string& signature_file, std::uint64_t key_seed, double tau) {
  const auto doc = sig_doc_from_json(json::parse(read_text(signature_file)));
  const auto verify = otp::sig::verify_signature(doc, key_seed, tau);
  json j;
  j["schema"] = 1;
  j["command"] = "verify";
  j["signature_file"] = signature_file;
  j["replicas"] = doc.replicas;
  j["bits"] = doc.bits;
  j["threshold"] = sig_digits(tau);
  j["verify"] = verify_json(verify);
  emit(j, std::string("verify: ") + (verify.accepted ? "accepted" : "REJECTED") +
              ", min fraction " + std::to_string(verify.min_fraction));
  return verify.accepted ? 0 : 3;
}

// bell-test / eavesdrop --------------------------------------------------------

int cmd_bell_test(const otp::cli::Config& cfg, std::uint64_t lines, const std::string& tables) {
  TableSet ts = acquire_tables(tables, lines * 2 + 1000, noise_of(cfg.noise), cfg.seed);
  const auto est = otp::security::chsh_from_tables(ts.alice, ts.bob, lines, cfg.seed);
  persist_tables(ts);

  const bool passed = est.s >= cfg.chsh_threshold;
  json j;
  j["schema"] = 1;
  j["command"] = "bell-test";
  j["test_lines"] = lines;
  j["chsh"] = chsh_json(est);
  j["threshold"] = sig_digits(cfg.chsh_threshold);
  j["passed"] = passed;
  j["source"] = ts.from_files() ? "files" : "generated";
  if (!ts.from_files()) j["noise"] = cfg.noise;
  emit(j, "bell-test: S = " + std::to_string(est.s) + " +- " + std::to_string(est.sigma) +
              (passed ? " (pass)" : " (BELOW THRESHOLD)"));
  return passed ? 0 : 2;
}

int cmd_eavesdrop(const otp::cli::Config& cfg, const std::string& attack, double fraction,
                  std::uint64_t lines) {
  if (attack != "intercept-zx")
    otp::fail(otp::Errc::invalid_argument, "unknown attack: " + attack);
  if (fraction < 0.0 || fraction > 1.0)
    otp::fail(otp::Errc::invalid_argument, "fraction must be in [0, 1]");
  const auto noise = noise_of(cfg.noise);

  auto g = otp::tabler::generate_tables_channel(
      lines * 2 + 1000, noise, cfg.seed,
      otp::security::PartialInterceptResend{fraction});
  const auto est = otp::security::chsh_from_tables(g.alice, g.bob, lines, cfg.seed);

  const double expected =
      otp::security::chsh_ideal(noise.visibility) * (1.0 - fraction / 2.0);
  const bool detected = est.s < cfg.chsh_threshold;
  json j;
  j["schema"] = 1;
  j["command"] = "eavesdrop";
  j["attack"] = attack;
  j["fraction"] = sig_digits(fraction);
  j["test_lines"] = lines;
  j["noise"] = cfg.noise;
  j["chsh"] = chsh_json(est);
  j["expected_s"] = sig_digits(expected);
  j["threshold"] = sig_digits(cfg.chsh_threshold);
  j["detected"] = detected;
  emit(j, "eavesdrop: S = " + std::to_string(est.s) +
              (detected ? " (attack detected)" : " (attack NOT detected)"));
  return 0;
}

// analyze ----------------------------------------------------------------------

int cmd_analyze_threshold(const otp::cli::Config& cfg, double p, double tau, bool tau_given,
                          double lo, double hi, double step, double mp_fraction,
                          int changed_bits) {
  otp::sig::AnalysisParams ap;
  ap.replicas = cfg.sig_n;
  ap.bits = cfg.sig_m;
  ap.p_honest = p;
  ap.multi_photon_fraction = mp_fraction;
  ap.changed_bits = static_cast<std::uint16_t>(changed_bits);

  const auto scan = otp::sig::scan_threshold(ap, lo, hi, step);
  ap.threshold = tau_given ? tau : scan.best_threshold;
  const auto rep = otp::sig::analyze_threshold(ap);

  json j;
  j["schema"] = 1;
  j["command"] = "analyze-threshold";
  j["replicas"] = ap.replicas;
  j["bits"] = ap.bits;
  j["p"] = sig_digits(p);
  j["forge_p"] = sig_digits(ap.p_forge);
  j["multi_photon_fraction"] = sig_digits(mp_fraction);
  j["changed_bits"] = changed_bits;
  j["tau_star"] = sig_digits(scan.best_threshold);
  j["tau"] = sig_digits(ap.threshold);
  j["accept_count"] = rep.accept_count;
  j["honest"] = sig_digits(rep.honest_accept);
  j["cheat"] = sig_digits(rep.forge_accept);
  j["gap"] = sig_digits(rep.honest_accept - rep.forge_accept);
  j["per_bit_honest"] = sig_digits(rep.per_bit_honest);
  j["per_bit_forge"] = sig_digits(rep.per_bit_forge);
  j["honest_normal"] = sig_digits(rep.honest_normal);
  j["forge_normal"] = sig_digits(rep.forge_normal);
  json points = json::array();
  for (const auto& pt : scan.points)
    points.push_back({{"tau", sig_digits(pt.threshold)},
                      {"honest", sig_digits(pt.honest_accept)},
                      {"cheat", sig_digits(pt.forge_accept)}});
  j["scan"] = {{"lo", sig_digits(lo)}, {"hi", sig_digits(hi)}, {"step", sig_digits(step)},
               {"best_gap", sig_digits(scan.best_gap)}, {"points", points}};
  emit(j, "analyze-threshold: tau* = " + std::to_string(scan.best_threshold) + ", honest " +
              std::to_string(rep.honest_accept) + ", cheat " +
              std::to_string(rep.forge_accept));
  return 0;
}

int cmd_analyze_histogram(const otp::cli::Config& cfg, int runs, double p, bool drift,
                          std::size_t bins, double lo, double hi) {
  if (runs < 1) otp::fail(otp::Errc::invalid_argument, "runs must be positive");
  const otp::tabler::DriftModel dm = otp::tabler::DriftModel::bench();
  otp::Rng rng(cfg.seed);
  std::vector<double> fractions;
  fractions.reserve(static_cast<std::size_t>(runs) * cfg.sig_m);
  // ~8 table lines back one evaluation; the drift phase advances with the
  // line index so consecutive digest bits see correlated success rates.
  const double lines_per_request = 8.0;
  for (int r = 0; r < runs; ++r) {
    const double phase = 2.0 * std::numbers::pi * 0.6180339887498949 * r;
    for (std::uint16_t b = 0; b < cfg.sig_m; ++b) {
      double pb = p;
      if (drift) {
        const double mid = (b + 0.5) * cfg.sig_n * lines_per_request;
        pb += dm.amplitude_v / (2.0 * std::numbers::sqrt2) *
              std::sin(2.0 * std::numbers::pi * mid / dm.period_lines + phase);
      }
      pb = std::clamp(pb, 0.0, 1.0);
      std::binomial_distribution<std::uint32_t> bin(cfg.sig_n, pb);
      fractions.push_back(static_cast<double>(bin(rng)) / cfg.sig_n);
    }
  }
  const auto rep = otp::sig::fraction_histogram(fractions, cfg.sig_n, bins, lo, hi);
  json j;
  j["schema"] = 1;
  j["command"] = "analyze-histogram";
  j["runs"] = runs;
  j["replicas"] = cfg.sig_n;
  j["bits"] = cfg.sig_m;
  j["p"] = sig_digits(p);
  j["drift"] = drift;
  j["seed"] = cfg.seed;
  j["lo"] = sig_digits(rep.lo);
  j["hi"] = sig_digits(rep.hi);
  j["counts"] = rep.counts;
  j["mean"] = sig_digits(rep.mean);
  j["stddev"] = sig_digits(rep.stddev);
  j["sigma_binomial"] = sig_digits(rep.sigma_binomial);
  emit(j, "analyze-histogram: mean " + std::to_string(rep.mean) + ", stddev " +
              std::to_string(rep.stddev) + " (binomial " +
              std::to_string(rep.sigma_binomial) + ")");
  return 0;
}

// daemon ------------------------------------------------------------------------

int cmd_daemon_alice(const otp::cli::Config& cfg, std::uint64_t key_seed, int sessions) {
  if (cfg.table.empty())
    otp::fail(otp::Errc::invalid_argument, "daemon requires a table path (table=...)");
  const std::string apath = cfg.table + ".alice.otpt";
  auto table = otp::tabler::load_alice_table(apath);

  const auto [host, port] = otp::cli::split_endpoint(cfg.listen);
  otp::wire::TcpListener listener(port);
  std::cerr << "daemon: alice listening on " << host << ":" << listener.port() << "\n";

  otp::wire::AliceConfig acfg;
  acfg.engine_seed = cfg.seed;
  acfg.key_seed = key_seed;
  acfg.chsh_abort_threshold = cfg.chsh_threshold;
  acfg.sig_threshold = cfg.sig_tau;

  json sess = json::array();
  bool all_completed = true;
  for (int s = 0; s < sessions; ++s) {
    auto conn = listener.accept();
    const auto out = otp::wire::run_alice_session(*conn, table, acfg);
    otp::tabler::save_table(table, apath);
    json js;
    js["completed"] = out.completed;
    js["aborted"] = abort_json(out.aborted);
    if (out.chsh) js["chsh"] = chsh_json(*out.chsh);
    if (out.verify) js["verify"] = verify_json(*out.verify);
    js["stats"] = session_stats_json(out.stats);
    sess.push_back(js);
    all_completed = all_completed && out.completed;
  }

  json j;
  j["schema"] = 1;
  j["command"] = "daemon";
  j["role"] = "alice";
  j["sessions"] = sess;
  j["table_lines_remaining"] = available_lines(table);
  emit(j, "daemon: served " + std::to_string(sessions) + " session(s), " +
              std::to_string(available_lines(table)) + " lines remaining");
  return all_completed ? 0 : 2;
}

int cmd_daemon_bob(const otp::cli::Config& cfg, const std::string& inputs,
                   const std::string& message_file, std::uint64_t session_id,
                   std::uint32_t chsh_lines, std::uint64_t chsh_seed) {
  if (cfg.table.empty())
    otp::fail(otp::Errc::invalid_argument, "daemon requires a table path (table=...)");
  if (inputs.empty() == message_file.empty())
    otp::fail(otp::Errc::invalid_argument, "bob needs exactly one of --inputs, --message-file");
  const std::string bpath = cfg.table + ".bob.otpt";
  auto table = otp::tabler::load_bob_table(bpath);

  otp::wire::BobConfig bcfg;
  bcfg.session_id = session_id;
  bcfg.chsh_abort_threshold = cfg.chsh_threshold;
  if (chsh_lines > 0) {
    bcfg.run_chsh = true;
    bcfg.chsh_lines = chsh_lines;
    bcfg.chsh_seed = chsh_seed;
  }
  if (!inputs.empty()) {
    otp::wire::BobExecJob job;
    const auto bits = parse_bit_list(inputs);
    for (std::size_t i = 0; i < bits.size(); ++i) job.inputs.push_back({i, bits[i]});
    bcfg.exec = std::move(job);
  } else {
    otp::wire::BobSignJob job;
    job.message = otp::read_file(message_file);
    job.params = {cfg.sig_n, cfg.sig_m, cfg.sig_tau};
    otp::sig::validate_params(job.params);
    bcfg.sign = std::move(job);
  }

  const auto [host, port] = otp::cli::split_endpoint(cfg.connect);
  auto conn = otp::wire::tcp_connect(host, port);
  const auto out = otp::wire::run_bob_session(*conn, table, bcfg);
  otp::tabler::save_table(table, bpath);

  json j;
  j["schema"] = 1;
  j["command"] = "daemon";
  j["role"] = "bob";
  j["mode"] = inputs.empty() ? "sign" : "exec";
  j["completed"] = out.completed;
  j["aborted"] = abort_json(out.aborted);
  if (out.chsh) j["chsh"] = chsh_json(*out.chsh);
  if (!inputs.empty()) {
    auto sorted = out.outputs;
    std::sort(sorted.begin(), sorted.end());
    json arr = json::array();
    for (const auto& [id, bit] : sorted) {
      json row;
      row["request"] = id;
      row["output"] = bit;
      arr.push_back(row);
    }
    j["outputs"] = arr;
  }
  if (out.verify) {
    json v;
    v["accepted"] = out.verify->accepted != 0;
    v["min_fraction"] = sig_digits(out.verify->min_fraction);
    v["rejected_bits"] = out.verify->rejected_bits;
    j["verify"] = v;
  }
  j["stats"] = session_stats_json(out.stats);
  j["table_lines_remaining"] = available_lines(table);
  emit(j, std::string("daemon: bob session ") +
              (out.completed ? "completed" : "aborted"));
  if (!out.completed) return 2;
  if (out.verify && out.verify->accepted == 0) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  otp::cli::Config cfg;

  // Precedence: flags > environment > config file > defaults. The config
  // file is located by a pre-scan so later layers can override it.
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" && i + 1 < argc) {
        otp::cli::load_config_file(cfg, argv[i + 1]);
        break;
      }
      if (a.rfind("--config=", 0) == 0) {
        otp::cli::load_config_file(cfg, a.substr(9));
        break;
      }
    }
    otp::cli::apply_env(cfg);
  } catch (const otp::Error& e) {
    std::cerr << "otp: " << e.what() << "\n";
    return exit_for(e.code());
  }

  CLI::App app{"one-time-program toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file");

  std::function<int()> run;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "deterministic RNG seed");
    sub->add_option("--noise", cfg.noise, "noise preset")
        ->check(CLI::IsMember({"ideal", "bench-p0.831", "bench-s2.701"}));
  };

  // table ----------------------------------------------------------------
  auto* table = app.add_subcommand("table", "generate and reconcile shared tables");
  table->require_subcommand(1);

  SimOpts tg_sim;
  std::uint64_t tg_lines = 0;
  bool tg_drift = false;
  std::string tg_out;
  auto* tgen = table->add_subcommand("generate", "simulate a session and write both tables");
  add_common(tgen);
  tgen->add_option("--duration", tg_sim.duration, "data segment seconds");
  tgen->add_option("--rate", tg_sim.rate, "pair rate in Hz");
  tgen->add_option("--offset-ps", tg_sim.offset_ps, "injected clock offset");
  tgen->add_option("--skew-ppm", tg_sim.skew_ppm, "injected clock skew");
  tgen->add_option("--jitter-ps", tg_sim.jitter_ps, "timestamp jitter");
  tgen->add_option("--window", cfg.window_ps, "coincidence window in ps");
  tgen->add_option("--lines", tg_lines, "skip the session simulation, emit N lines directly");
  tgen->add_flag("--drift", tg_drift, "slow visibility drift (lines mode)");
  tgen->add_option("--out", tg_out, "output table prefix");
  tgen->callback([&] {
    run = [&] { return cmd_table_generate(cfg, tg_sim, tg_lines, tg_drift, tg_out); };
  });

  SimOpts rc_sim;
  std::string rc_out;
  auto* trec = table->add_subcommand("reconcile", "clock recovery + coincidence report");
  add_common(trec);
  trec->add_option("--duration", rc_sim.duration, "data segment seconds");
  trec->add_option("--rate", rc_sim.rate, "pair rate in Hz");
  trec->add_option("--offset-ps", rc_sim.offset_ps, "injected clock offset");
  trec->add_option("--skew-ppm", rc_sim.skew_ppm, "injected clock skew");
  trec->add_option("--jitter-ps", rc_sim.jitter_ps, "timestamp jitter");
  trec->add_option("--window", cfg.window_ps, "coincidence window in ps");
  trec->add_option("--out", rc_out, "also write tables to this prefix");
  trec->callback([&] { run = [&] { return cmd_table_reconcile(cfg, rc_sim, rc_out); }; });

  // exec -----------------------------------------------------------------
  auto* exec = app.add_subcommand("exec", "run one-time programs over tables");
  exec->require_subcommand(1);

  std::string eg_gate;
  int eg_input = 0, eg_repeat = 1;
  std::string eg_tables;
  std::uint64_t eg_lines = 0;
  auto* egate = exec->add_subcommand("gate", "evaluate a 1-bit gate");
  add_common(egate);
  egate->add_option("--gate", eg_gate, "const0|const1|id|not")->required();
  egate->add_option("--input", eg_input, "input bit")->required();
  egate->add_option("--repeat", eg_repeat, "independent evaluations");
  egate->add_option("--tables", eg_tables, "table prefix (persisted back)");
  egate->add_option("--lines", eg_lines, "ephemeral table size override");
  egate->callback([&] {
    run = [&] { return cmd_exec_gate(cfg, eg_gate, eg_input, eg_repeat, eg_tables, eg_lines); };
  });

  std::string ec_file, ec_inputs, ec_tables;
  std::uint64_t ec_lines = 0;
  auto* ecirc = exec->add_subcommand("circuit", "evaluate a layered gate circuit");
  add_common(ecirc);
  ecirc->add_option("--file", ec_file, "circuit JSON {width, gates[][]}")->required();
  ecirc->add_option("--inputs", ec_inputs, "input bit string")->required();
  ecirc->add_option("--tables", ec_tables, "table prefix (persisted back)");
  ecirc->add_option("--lines", ec_lines, "ephemeral table size override");
  ecirc->callback([&] {
    run = [&] { return cmd_exec_circuit(cfg, ec_file, ec_inputs, ec_tables, ec_lines); };
  });

  int gk_k = 2;
  std::string gk_tt, gk_tables;
  std::size_t gk_input = 0;
  int gk_repeat = 1;
  std::uint64_t gk_lines = 0;
  auto* egk = exec->add_subcommand("gk", "evaluate a k-input gate");
  add_common(egk);
  egk->add_option("--k", gk_k, "input bits")->required();
  egk->add_option("--truth-table", gk_tt, "2^k output bits, row order")->required();
  egk->add_option("--input", gk_input, "input row index")->required();
  egk->add_option("--repeat", gk_repeat, "independent evaluations");
  egk->add_option("--tables", gk_tables, "table prefix (persisted back)");
  egk->add_option("--lines", gk_lines, "ephemeral table size override");
  egk->callback([&] {
    run = [&] { return cmd_exec_gk(cfg, gk_k, gk_tt, gk_input, gk_repeat, gk_tables, gk_lines); };
  });

  // sign / verify ----------------------------------------------------------
  std::string sg_message, sg_tables, sg_out = "signature.json";
  std::uint64_t sg_key = 0, sg_lines = 0;
  auto* sign = app.add_subcommand("sign", "one-time delegated signature");
  add_common(sign);
  sign->add_option("--message-file", sg_message, "message to sign")->required();
  sign->add_option("--key-seed", sg_key, "signer key seed");
  sign->add_option("--n", cfg.sig_n, "replicas per digest bit");
  sign->add_option("--m", cfg.sig_m, "digest bits");
  sign->add_option("--tau", cfg.sig_tau, "per-bit accept fraction");
  sign->add_option("--tables", sg_tables, "table prefix (persisted back)");
  sign->add_option("--lines", sg_lines, "ephemeral table size override");
  sign->add_option("--out", sg_out, "signature document path");
  sign->callback([&] {
    run = [&] { return cmd_sign(cfg, sg_message, sg_key, sg_tables, sg_lines, sg_out); };
  });

  std::string vf_file;
  std::uint64_t vf_key = 0;
  auto* verify = app.add_subcommand("verify", "check a signature document");
  verify->add_option("--signature-file", vf_file, "signature document path")->required();
  verify->add_option("--key-seed", vf_key, "signer key seed");
  verify->add_option("--tau", cfg.sig_tau, "per-bit accept fraction");
  verify->callback([&] { run = [&] { return cmd_verify(vf_file, vf_key, cfg.sig_tau); }; });

  // bell-test / eavesdrop ----------------------------------------------------
  std::uint64_t bt_lines = 5000;
  std::string bt_tables;
  auto* bell = app.add_subcommand("bell-test", "CHSH estimate over table lines");
  add_common(bell);
  bell->add_option("--lines", bt_lines, "test lines to consume");
  bell->add_option("--tables", bt_tables, "table prefix (persisted back)");
  bell->add_option("--threshold", cfg.chsh_threshold, "pass threshold on S");
  bell->callback([&] { run = [&] { return cmd_bell_test(cfg, bt_lines, bt_tables); }; });

  std::string ev_attack = "intercept-zx";
  double ev_fraction = 1.0;
  std::uint64_t ev_lines = 5000;
  auto* eave = app.add_subcommand("eavesdrop", "attack simulation and detection");
  add_common(eave);
  eave->add_option("--attack", ev_attack, "intercept-zx");
  eave->add_option("--fraction", ev_fraction, "fraction of pairs attacked");
  eave->add_option("--lines", ev_lines, "test lines to consume");
  eave->add_option("--threshold", cfg.chsh_threshold, "detection threshold on S");
  eave->callback([&] { run = [&] { return cmd_eavesdrop(cfg, ev_attack, ev_fraction, ev_lines); }; });

  // analyze -------------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "signature statistics");
  analyze->require_subcommand(1);

  double at_p = 0.831, at_tau = 0.776, at_lo = 0.740, at_hi = 0.820, at_step = 0.001;
  double at_mp = 0.0;
  int at_changed = 2;
  auto* athr = analyze->add_subcommand("threshold", "acceptance threshold scan");
  add_common(athr);
  athr->add_option("--N", cfg.sig_n, "replicas per digest bit");
  athr->add_option("--m", cfg.sig_m, "digest bits");
  athr->add_option("--p", at_p, "honest per-evaluation success");
  auto* at_tau_opt = athr->add_option("--tau", at_tau, "report at this threshold");
  athr->add_option("--tau-min", at_lo, "scan start");
  athr->add_option("--tau-max", at_hi, "scan end");
  athr->add_option("--tau-step", at_step, "scan step");
  athr->add_option("--mp-fraction", at_mp, "multi-photon line fraction");
  athr->add_option("--changed-bits", at_changed, "digest bits a forgery flips");
  athr->callback([&] {
    run = [&] {
      return cmd_analyze_threshold(cfg, at_p, at_tau, !at_tau_opt->empty(), at_lo, at_hi,
                                   at_step, at_mp, at_changed);
    };
  });

  int ah_runs = 50;
  double ah_p = 0.831, ah_lo = 0.78, ah_hi = 0.88;
  std::size_t ah_bins = 25;
  bool ah_drift = false;
  auto* ahist = analyze->add_subcommand("histogram", "per-bit success fraction histogram");
  add_common(ahist);
  ahist->add_option("--runs", ah_runs, "independent signing runs");
  ahist->add_option("--N", cfg.sig_n, "replicas per digest bit");
  ahist->add_option("--m", cfg.sig_m, "digest bits");
  ahist->add_option("--p", ah_p, "per-evaluation success");
  ahist->add_flag("--drift", ah_drift, "slow success-rate drift across the table");
  ahist->add_option("--bins", ah_bins, "histogram bins");
  ahist->add_option("--lo", ah_lo, "histogram lower edge");
  ahist->add_option("--hi", ah_hi, "histogram upper edge");
  ahist->callback([&] {
    run = [&] { return cmd_analyze_histogram(cfg, ah_runs, ah_p, ah_drift, ah_bins, ah_lo, ah_hi); };
  });

  // daemon -----------------------------------------------------------------------
  std::string dm_role, dm_inputs, dm_message;
  std::uint64_t dm_key = 0, dm_session = 1, dm_chsh_seed = 1;
  std::uint32_t dm_chsh_lines = 0;
  int dm_sessions = 1;
  auto* daemon = app.add_subcommand("daemon", "serve or drive wire sessions over TCP");
  add_common(daemon);
  daemon->add_option("--role", dm_role, "alice|bob")->check(CLI::IsMember({"alice", "bob"}));
  daemon->add_option("--listen", cfg.listen, "alice bind host:port");
  daemon->add_option("--connect", cfg.connect, "bob peer host:port");
  daemon->add_option("--tables", cfg.table, "table prefix (role side persisted)");
  daemon->add_option("--key-seed", dm_key, "alice signer key seed");
  daemon->add_option("--sessions", dm_sessions, "alice: sessions to serve");
  daemon->add_option("--session-id", dm_session, "bob: session id");
  daemon->add_option("--inputs", dm_inputs, "bob: execute these input bits");
  daemon->add_option("--message-file", dm_message, "bob: sign this message");
  daemon->add_option("--n", cfg.sig_n, "replicas per digest bit");
  daemon->add_option("--m", cfg.sig_m, "digest bits");
  daemon->add_option("--tau", cfg.sig_tau, "per-bit accept fraction");
  daemon->add_option("--chsh-lines", dm_chsh_lines, "bob: test lines before execution");
  daemon->add_option("--chsh-seed", dm_chsh_seed, "bob: test line selection seed");
  daemon->add_option("--chsh-threshold", cfg.chsh_threshold, "abort below this S");
  daemon->callback([&] {
    run = [&] {
      const std::string role = dm_role.empty() ? cfg.role : dm_role;
      if (role == "alice") return cmd_daemon_alice(cfg, dm_key, dm_sessions);
      if (role == "bob")
        return cmd_daemon_bob(cfg, dm_inputs, dm_message, dm_session, dm_chsh_lines,
                              dm_chsh_seed);
      otp::fail(otp::Errc::invalid_argument, "daemon requires --role alice or --role bob");
    };
  });

  // --config may appear after the subcommand name; let it fall through.
  const std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* a) {
    for (CLI::App* s : a->get_subcommands([](CLI::App*) { return true; })) {
      s->fallthrough();
      enable_fallthrough(s);
    }
  };
  enable_fallthrough(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  if (!run) {
    std::cerr << app.help();
    return 64;
  }
  try {
    return run();
  } catch (const otp::Error& e) {
    std::cerr << "otp: " << e.what() << "\n";
    return exit_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "otp: " << e.what() << "\n";
    return 74;
  } catch (const std::exception& e) {
    std::cerr << "otp: " << e.what() << "\n";
    return 74;
  }
}
