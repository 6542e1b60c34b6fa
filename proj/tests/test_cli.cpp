// End-to-end checks of the otp binary: JSON schema, exit codes, config
// precedence, determinism under --seed, and the documented example flows.
// The binary path comes from the build via OTP_CLI_PATH.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + OTP_CLI_PATH + " " + args +
                          " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

json run_json(const std::string& args, const std::string& env = "") {
  const RunResult res = run(args, env);
  INFO("command: " << args);
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  REQUIRE(j.at("schema") == 1);
  return j;
}

// Scratch directory per test run; removed on destruction.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("otp-cli-" + std::to_string(::getpid()) + "-" +
           std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  REQUIRE(out.good());
}

}  // namespace

TEST_CASE("analyze threshold reproduces the bench operating point") {
  const json j = run_json("analyze threshold --N 1000 --m 224 --p 0.831");
  CHECK(j.at("command") == "analyze-threshold");
  CHECK(j.at("tau_star").get<double>() == Catch::Approx(0.776).margin(0.005));
  CHECK(j.at("honest").get<double>() == Catch::Approx(0.9987).margin(2e-3));
  CHECK(j.at("cheat").get<double>() == Catch::Approx(0.0011).margin(5e-4));
  CHECK(j.at("gap").get<double>() == Catch::Approx(0.9976).margin(2e-3));
  CHECK(j.at("accept_count") == 776);

  // The scan grid brackets the optimum and carries both curves.
  const auto& scan = j.at("scan");
  CHECK(scan.at("points").size() == 81);
  CHECK(scan.at("points").front().at("tau").get<double>() == Catch::Approx(0.740));
  CHECK(scan.at("points").back().at("tau").get<double>() == Catch::Approx(0.820));

  // Explicit --tau reports at that threshold but keeps tau_star.
  const json j2 = run_json("analyze threshold --N 1000 --m 224 --p 0.831 --tau 0.800");
  CHECK(j2.at("tau").get<double>() == Catch::Approx(0.800));
  CHECK(j2.at("tau_star").get<double>() == Catch::Approx(0.776).margin(0.005));
  CHECK(j2.at("honest").get<double>() < j.at("honest").get<double>());
  CHECK(j2.at("cheat").get<double>() < j.at("cheat").get<double>());

  // Multi-photon leakage raises the cheat probability.
  const json j3 =
      run_json("analyze threshold --N 1000 --m 224 --p 0.831 --mp-fraction 0.00097");
  CHECK(j3.at("cheat").get<double>() > j.at("cheat").get<double>());
  CHECK(j3.at("cheat").get<double>() - j.at("cheat").get<double>() ==
        Catch::Approx(3.035e-5).margin(1e-5));
}

TEST_CASE("analyze histogram spreads match the binomial and drift models") {
  const json plain = run_json("analyze histogram --runs 40 --N 1000 --m 224 --p 0.831 --seed 2");
  CHECK(plain.at("command") == "analyze-histogram");
  CHECK(plain.at("mean").get<double>() == Catch::Approx(0.831).margin(0.004));
  const double sb = plain.at("sigma_binomial").get<double>();
  CHECK(sb == Catch::Approx(0.01185).margin(5e-4));
  CHECK(plain.at("stddev").get<double>() == Catch::Approx(sb).margin(0.002));

  const json drift =
      run_json("analyze histogram --runs 40 --N 1000 --m 224 --p 0.831 --seed 2 --drift");
  CHECK(drift.at("stddev").get<double>() > plain.at("stddev").get<double>());
  CHECK(drift.at("stddev").get<double>() == Catch::Approx(0.013).margin(0.0015));

  std::int64_t total = 0;
  for (const auto& c : plain.at("counts")) total += c.get<std::int64_t>();
  CHECK(total == 40 * 224);
}

TEST_CASE("exec gate matches the ideal success probability") {
  const json j = run_json("exec gate --gate not --input 0 --noise ideal --repeat 4000 --seed 5");
  CHECK(j.at("expected_output") == 1);
  CHECK(j.at("expected_frequency").get<double>() == Catch::Approx(0.853553).margin(1e-6));
  // 5 sigma at 4000 draws.
  CHECK(j.at("frequency").get<double>() == Catch::Approx(0.853553).margin(0.028));
  CHECK(j.at("outputs").at("0").get<int>() + j.at("outputs").at("1").get<int>() == 4000);
  CHECK(j.at("source") == "generated");

  const json id0 = run_json("exec gate --gate id --input 1 --noise ideal --repeat 1 --seed 3");
  CHECK(id0.at("expected_output") == 1);
}

TEST_CASE("exec circuit runs and reports the reference evaluation") {
  Scratch tmp;
  write_text(tmp.path("circ.json"),
             R"({"width": 3, "gates": [["not", "id", "const1"], ["id", "not", "not"]]})");
  const json j = run_json("exec circuit --file " + tmp.path("circ.json") +
                          " --inputs 010 --noise ideal --seed 4");
  CHECK(j.at("width") == 3);
  CHECK(j.at("depth") == 2);
  CHECK(j.at("inputs") == "010");
  CHECK(j.at("reference") == "100");
  CHECK(j.at("outputs").get<std::string>().size() == 3);
  CHECK(j.at("match").is_boolean());
  CHECK(j.at("rounds").get<int>() >= 2);
}

TEST_CASE("exec gk tracks the k-input success probability") {
  const json j = run_json(
      "exec gk --k 2 --truth-table 0110 --input 2 --repeat 400 --noise ideal --seed 6");
  CHECK(j.at("expected_output") == 1);
  // 1/2 + 2^-(1 + k/2) at k = 2.
  CHECK(j.at("expected_frequency").get<double>() == Catch::Approx(0.75).margin(1e-6));
  // 5 sigma at 400 draws.
  CHECK(j.at("success_frequency").get<double>() == Catch::Approx(0.75).margin(0.11));
  CHECK(j.at("handshakes_mean").get<double>() > 0.9);
}

TEST_CASE("table generate then bell-test reproduces the bench CHSH value") {
  Scratch tmp;
  const std::string prefix = tmp.path("bench");
  const json gen = run_json("table generate --duration 6 --rate 10000 --noise bench-s2.701"
                            " --seed 3 --out " + prefix);
  CHECK(gen.at("mode") == "session");
  CHECK(gen.at("lines").get<std::uint64_t>() > 40000);
  // p = 1/2 + v/(2 sqrt 2) at v = 2.701/(2 sqrt 2).
  CHECK(gen.at("reconcile").at("success_fraction").get<double>() ==
        Catch::Approx(0.8377).margin(0.01));
  REQUIRE(fs::exists(prefix + ".alice.otpt"));
  REQUIRE(fs::exists(prefix + ".bob.otpt"));

  const RunResult bt = run("bell-test --lines 5000 --tables " + prefix + " --seed 11");
  REQUIRE(bt.exit_code == 0);
  const json j = json::parse(bt.out);
  CHECK(j.at("chsh").at("s").get<double>() == Catch::Approx(2.701).margin(0.21));
  CHECK(j.at("chsh").at("sigma").get<double>() == Catch::Approx(0.042).margin(0.01));
  CHECK(j.at("passed") == true);

  // One-time semantics across invocations: the next test draws fresh lines.
  const RunResult bt2 = run("bell-test --lines 5000 --tables " + prefix + " --seed 11");
  REQUIRE(bt2.exit_code == 0);
  const json j2 = json::parse(bt2.out);
  CHECK(j2.at("chsh").at("s").get<double>() != j.at("chsh").at("s").get<double>());
}

TEST_CASE("bell-test below threshold exits with the abort code") {
  // Ideal tables give S near 2.83; a 2.9 bar is ~3.5 sigma above at 4000 lines.
  const RunResult res = run("bell-test --lines 4000 --noise ideal --seed 9 --threshold 2.9");
  CHECK(res.exit_code == 2);
  const json j = json::parse(res.out);
  CHECK(j.at("passed") == false);
  CHECK(j.at("chsh").at("s").get<double>() == Catch::Approx(2.828).margin(0.1));
}

TEST_CASE("eavesdrop simulation reports detection") {
  const json full = run_json("eavesdrop --attack intercept-zx --lines 4000 --seed 5");
  CHECK(full.at("detected") == true);
  const double v = 0.331 * 2.0 * std::sqrt(2.0);
  CHECK(full.at("expected_s").get<double>() ==
        Catch::Approx(2.0 * std::sqrt(2.0) * v * 0.5).margin(1e-3));
  CHECK(full.at("chsh").at("s").get<double>() ==
        Catch::Approx(full.at("expected_s").get<double>()).margin(0.12));

  const json half =
      run_json("eavesdrop --attack intercept-zx --fraction 0.5 --lines 4000 --seed 5");
  CHECK(half.at("chsh").at("s").get<double>() > full.at("chsh").at("s").get<double>());
  CHECK(half.at("detected") == true);

  const RunResult bad = run("eavesdrop --attack mirror");
  CHECK(bad.exit_code == 64);
}

TEST_CASE("sign and verify round-trip through the document file") {
  Scratch tmp;
  write_text(tmp.path("msg.txt"), "delegate exactly one signature\n");
  const std::string sig = tmp.path("sig.json");

  const RunResult sr = run("sign --message-file " + tmp.path("msg.txt") +
                           " --key-seed 77 --n 400 --m 24 --tau 0.72 --noise ideal --seed 13"
                           " --out " + sig);
  REQUIRE(sr.exit_code == 0);
  const json sj = json::parse(sr.out);
  CHECK(sj.at("verify").at("accepted") == true);
  CHECK(sj.at("verify").at("min_fraction").get<double>() > 0.72);
  CHECK(sj.at("rounds").get<int>() >= 8);
  CHECK(sj.at("lines_consumed").get<std::uint64_t>() > 400 * 24);

  const RunResult vr = run("verify --signature-file " + sig + " --key-seed 77 --tau 0.72");
  CHECK(vr.exit_code == 0);
  const json vj = json::parse(vr.out);
  CHECK(vj.at("verify").at("accepted") == true);
  CHECK(vj.at("verify").at("min_fraction").get<double>() ==
        sj.at("verify").at("min_fraction").get<double>());

  // Wrong key lands near chance and rejects.
  const RunResult wrong = run("verify --signature-file " + sig + " --key-seed 78 --tau 0.72");
  CHECK(wrong.exit_code == 3);
  const json wj = json::parse(wrong.out);
  CHECK(wj.at("verify").at("accepted") == false);
  CHECK(wj.at("verify").at("min_fraction").get<double>() < 0.6);

  // A tampered document is a format error, not a reject.
  write_text(tmp.path("trunc.json"), "{\"type\": \"signature\"");
  CHECK(run("verify --signature-file " + tmp.path("trunc.json")).exit_code == 74);
}

TEST_CASE("table reconcile recovers injected clock parameters") {
  const json j = run_json("table reconcile --duration 2 --rate 8000 --offset-ps 2500000"
                          " --seed 7");
  const auto& rec = j.at("reconcile");
  CHECK(std::abs(rec.at("offset_error_ps").get<double>()) < 1e5);
  CHECK(rec.at("estimated_skew_ppm").get<double>() == Catch::Approx(0.0).margin(0.5));
  CHECK(rec.at("matched_fraction").get<double>() > 0.98);
  CHECK(rec.at("table_lines").get<std::uint64_t>() > 10000);
  CHECK(rec.at("success_fraction").get<double>() == Catch::Approx(0.831).margin(0.02));
}

TEST_CASE("fixed seeds give byte-identical reports") {
  const std::string cmd = "table reconcile --duration 1 --rate 6000 --offset-ps 40000 --seed 7";
  CHECK(run(cmd).out == run(cmd).out);
  const std::string hist = "analyze histogram --runs 10 --seed 4 --drift";
  CHECK(run(hist).out == run(hist).out);
  const std::string gate = "exec gate --gate not --input 1 --repeat 500 --seed 8";
  CHECK(run(gate).out == run(gate).out);
}

TEST_CASE("config file, environment, and flags layer in order") {
  Scratch tmp;
  write_text(tmp.path("otp.conf"), "# comment\nseed = 42\nnoise = ideal\n");
  const std::string base = "analyze histogram --runs 2 --config " + tmp.path("otp.conf");

  CHECK(run_json(base).at("seed") == 42);
  CHECK(run_json(base, "OTP_SEED=99").at("seed") == 99);
  CHECK(run_json(base + " --seed 7", "OTP_SEED=99").at("seed") == 7);

  write_text(tmp.path("bad.conf"), "mystery = 1\n");
  CHECK(run("analyze histogram --config " + tmp.path("bad.conf")).exit_code == 64);
  write_text(tmp.path("junk.conf"), "seed fourty\n");
  CHECK(run("analyze histogram --config " + tmp.path("junk.conf")).exit_code == 64);
  CHECK(run("analyze histogram --runs 2", "OTP_NOISE=warp").exit_code == 64);
  CHECK(run("analyze histogram --config " + tmp.path("absent.conf")).exit_code == 74);
}

TEST_CASE("usage and I/O failures use the documented exit codes") {
  CHECK(run("").exit_code == 64);
  CHECK(run("frobnicate").exit_code == 64);
  CHECK(run("exec gate --gate bogus --input 0").exit_code == 64);
  CHECK(run("exec gate --gate not").exit_code == 64);  // missing required --input
  CHECK(run("exec gk --k 2 --truth-table 01 --input 0").exit_code == 64);
  CHECK(run("verify --signature-file /nonexistent/sig.json").exit_code == 74);
  CHECK(run("exec circuit --file /nonexistent/c.json --inputs 0").exit_code == 74);
  CHECK(run("--help").exit_code == 0);
}

TEST_CASE("daemon pair executes and signs over TCP") {
  Scratch tmp;
  const std::string prefix = tmp.path("dmn");
  run_json("table generate --lines 30000 --noise bench-p0.831 --seed 31 --out " + prefix);

  SECTION("exec session with a CHSH phase") {
    const std::string alice_json = tmp.path("alice.json");
    const std::string cmd = std::string(OTP_CLI_PATH) +
                            " daemon --role alice --listen 127.0.0.1:7421 --tables " + prefix +
                            " --key-seed 5 --seed 8 > " + alice_json + " 2>/dev/null &";
    REQUIRE(std::system(cmd.c_str()) == 0);

    RunResult bob;
    for (int attempt = 0; attempt < 20; ++attempt) {
      std::this_thread::sleep_for(std::chrono::milliseconds(250));
      bob = run("daemon --role bob --connect 127.0.0.1:7421 --tables " + prefix +
                " --inputs 0,1,1,0 --chsh-lines 2500 --chsh-seed 4");
      if (bob.exit_code != 74) break;  // 74: listener not up yet
    }
    REQUIRE(bob.exit_code == 0);
    const json bj = json::parse(bob.out);
    CHECK(bj.at("completed") == true);
    CHECK(bj.at("outputs").size() == 4);
    CHECK(bj.at("chsh").at("s").get<double>() > 2.5);

    // Alice's report lands once her process exits.
    json aj;
    for (int i = 0; i < 100; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      std::ifstream in(alice_json);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (!text.empty() && text.back() == '\n') {
        aj = json::parse(text, nullptr, false);
        if (!aj.is_discarded()) break;
      }
    }
    REQUIRE(aj.is_object());
    CHECK(aj.at("sessions").at(0).at("completed") == true);
    CHECK(aj.at("table_lines_remaining") == bj.at("table_lines_remaining"));
  }

  SECTION("sign session") {
    write_text(tmp.path("msg.txt"), "signed once over the wire\n");
    const std::string alice_json = tmp.path("alice.json");
    const std::string cmd = std::string(OTP_CLI_PATH) +
                            " daemon --role alice --listen 127.0.0.1:7422 --tables " + prefix +
                            " --key-seed 5 --seed 9 --tau 0.72 > " + alice_json +
                            " 2>/dev/null &";
    REQUIRE(std::system(cmd.c_str()) == 0);

    RunResult bob;
    for (int attempt = 0; attempt < 20; ++attempt) {
      std::this_thread::sleep_for(std::chrono::milliseconds(250));
      bob = run("daemon --role bob --connect 127.0.0.1:7422 --tables " + prefix +
                " --message-file " + tmp.path("msg.txt") + " --n 120 --m 16 --tau 0.72");
      if (bob.exit_code != 74) break;
    }
    REQUIRE(bob.exit_code == 0);
    const json bj = json::parse(bob.out);
    CHECK(bj.at("mode") == "sign");
    CHECK(bj.at("completed") == true);
    CHECK(bj.at("verify").at("accepted") == true);
  }
}
