#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "otp/common.hpp"
#include "otp/qsim/noise.hpp"

namespace otp::cli {

// Operator configuration: key=value file, overridden by OTP_* environment
// variables, overridden again by command-line flags. Unknown keys are
// rejected so typos fail loudly instead of silently using a default.
struct Config {
  std::string role;                        // alice | bob (daemon only)
  std::string listen = "127.0.0.1:7345";   // daemon alice bind address
  std::string connect = "127.0.0.1:7345";  // daemon bob peer address
  std::string table;                       // table file path
  std::uint64_t seed = 1;
  std::string noise = "bench-p0.831";      // ideal | bench-p0.831 | bench-s2.701
  std::int64_t window_ps = 6000;           // coincidence window
  std::uint32_t sig_n = 1000;              // signature replicas per digest bit
  std::uint16_t sig_m = 224;               // digest bits
  double sig_tau = 0.776;                  // per-bit accept fraction
  double chsh_threshold = 2.5;             // abort below this S
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::uint64_t out = std::stoull(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(Errc::invalid_argument, "config key " + key + ": not an integer: " + v);
  }
}

inline std::int64_t parse_i64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::int64_t out = std::stoll(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(Errc::invalid_argument, "config key " + key + ": not an integer: " + v);
  }
}

inline double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(Errc::invalid_argument, "config key " + key + ": not a number: " + v);
  }
}

}  // namespace detail

// Applies one key=value pair; throws invalid_argument on unknown keys or
// unparsable values.
inline void config_set(Config& cfg, const std::string& key, const std::string& value) {
  if (key == "role") {
    if (value != "alice" && value != "bob")
      fail(Errc::invalid_argument, "config key role: must be alice or bob");
    cfg.role = value;
  } else if (key == "listen") {
    cfg.listen = value;
  } else if (key == "connect") {
    cfg.connect = value;
  } else if (key == "table") {
    cfg.table = value;
  } else if (key == "seed") {
    cfg.seed = detail::parse_u64(key, value);
  } else if (key == "noise") {
    if (!qsim::noise_preset(value))
      fail(Errc::invalid_argument, "config key noise: unknown preset: " + value);
    cfg.noise = value;
  } else if (key == "window") {
    cfg.window_ps = detail::parse_i64(key, value);
    if (cfg.window_ps <= 0) fail(Errc::invalid_argument, "config key window: must be positive");
  } else if (key == "sig_n") {
    const std::uint64_t n = detail::parse_u64(key, value);
    if (n == 0 || n > 0xFFFFFFFFull)
      fail(Errc::invalid_argument, "config key sig_n: out of range");
    cfg.sig_n = static_cast<std::uint32_t>(n);
  } else if (key == "sig_m") {
    const std::uint64_t m = detail::parse_u64(key, value);
    if (m == 0 || m > 224) fail(Errc::invalid_argument, "config key sig_m: out of range");
    cfg.sig_m = static_cast<std::uint16_t>(m);
  } else if (key == "sig_tau") {
    cfg.sig_tau = detail::parse_f64(key, value);
    if (!(cfg.sig_tau > 0.5) || !(cfg.sig_tau <= 1.0))
      fail(Errc::invalid_argument, "config key sig_tau: must be in (0.5, 1]");
  } else if (key == "chsh_threshold") {
    cfg.chsh_threshold = detail::parse_f64(key, value);
  } else {
    fail(Errc::invalid_argument, "unknown config key: " + key);
  }
}

// Parses a key=value file. Blank lines and #-comments are skipped.
inline void load_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(Errc::invalid_argument,
           path + ":" + std::to_string(lineno) + ": expected key=value");
    config_set(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
}

// Environment overrides: OTP_<UPPERCASE KEY>, e.g. OTP_SEED, OTP_SIG_TAU.
inline void apply_env(Config& cfg) {
  static constexpr const char* kKeys[] = {"role",  "listen", "connect", "table",
                                          "seed",  "noise",  "window",  "sig_n",
                                          "sig_m", "sig_tau", "chsh_threshold"};
  for (const char* key : kKeys) {
    std::string env = "OTP_";
    for (const char* p = key; *p; ++p)
      env += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (const char* v = std::getenv(env.c_str())) config_set(cfg, key, v);
  }
}

// host:port for the TCP daemon endpoints.
inline std::pair<std::string, std::uint16_t> split_endpoint(const std::string& ep) {
  const std::size_t colon = ep.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == ep.size())
    fail(Errc::invalid_argument, "endpoint must be host:port: " + ep);
  const std::uint64_t port = detail::parse_u64("port", ep.substr(colon + 1));
  if (port == 0 || port > 0xFFFF) fail(Errc::invalid_argument, "port out of range: " + ep);
  return {ep.substr(0, colon), static_cast<std::uint16_t>(port)};
}

}  // namespace otp::cli
