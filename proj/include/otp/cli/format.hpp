#pragma once

#include <cstdio>
#include <cstdlib>

namespace otp::cli {

// Rounds to six significant digits through a %g round trip so JSON output
// carries stable, human-scale probabilities instead of 17-digit doubles.
inline double sig_digits(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

}  // namespace otp::cli
