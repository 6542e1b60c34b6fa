#pragma once

#include <cmath>
#include <cstdint>

#include "otp/common.hpp"

namespace otp::sig {

namespace detail {

// Lentz's algorithm for the incomplete beta continued fraction.
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1;
  const double qam = a - 1;
  double c = 1;
  double d = 1 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) return h;
  }
  fail(Errc::invalid_state, "incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double reg_inc_beta(double a, double b, double x) {
  if (a <= 0 || b <= 0) fail(Errc::invalid_argument, "beta parameters must be positive");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                       b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1) / (a + b + 2)) return bt * detail::beta_cf(a, b, x) / a;
  return 1 - bt * detail::beta_cf(b, a, 1 - x) / b;
}

// P(X >= c) for X ~ Binomial(n, p), via the tail identity
// P(X >= c) = I_p(c, n - c + 1).
inline double binom_tail_geq(std::int64_t c, std::int64_t n, double p) {
  if (n < 0 || p < 0 || p > 1) fail(Errc::invalid_argument, "bad binomial parameters");
  if (c <= 0) return 1;
  if (c > n) return 0;
  return reg_inc_beta(static_cast<double>(c), static_cast<double>(n - c + 1), p);
}

inline double binom_sigma(std::int64_t n, double p) {
  if (n <= 0) fail(Errc::invalid_argument, "n must be positive");
  return std::sqrt(p * (1 - p) / static_cast<double>(n));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Continuity-corrected normal approximation of P(X >= c).
inline double normal_tail_geq(std::int64_t c, std::int64_t n, double p) {
  if (c <= 0) return 1;
  if (c > n) return 0;
  const double mu = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1 - p));
  if (sd == 0) return mu >= static_cast<double>(c) ? 1.0 : 0.0;
  return 1 - normal_cdf((static_cast<double>(c) - 0.5 - mu) / sd);
}

}  // namespace otp::sig
