#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "otp/common.hpp"
#include "otp/sig/binomial.hpp"
#include "otp/sig/signature.hpp"

namespace otp::sig {

// Success probability of the optimal single-copy forgery per evaluation:
// identify the hidden gate (unambiguous four-state discrimination succeeds
// half the time for this ensemble), guess otherwise.
inline constexpr double kForgeSuccess = 0.75;

// Noiseless per-evaluation success; multi-photon lines leak a second copy
// and lift the forger to this rate on those lines.
inline constexpr double kIdealSuccess = 0.8535533905932737;

struct AnalysisParams {
  std::uint32_t replicas = 1000;
  std::uint16_t bits = 224;
  double threshold = 0.776;
  double p_honest = 0.831;             // measured per-evaluation success
  double p_forge = kForgeSuccess;
  double p_ideal = kIdealSuccess;
  double multi_photon_fraction = 0.0;
  std::uint16_t changed_bits = 2;      // digest bits the forged message flips
};

struct ThresholdReport {
  std::int64_t accept_count = 0;
  double per_bit_honest = 0;   // P(one bit passes) for the honest signer
  double honest_accept = 0;    // all bits pass
  double forge_success = 0;    // per-evaluation success on a flipped bit
  double per_bit_forge = 0;    // P(one flipped bit passes)
  double forge_accept = 0;     // changed bits forged, the rest replayed
  double honest_normal = 0;    // continuity-corrected approximations
  double forge_normal = 0;
};

inline ThresholdReport analyze_threshold(const AnalysisParams& ap) {
  if (ap.changed_bits > ap.bits) fail(Errc::invalid_argument, "changed_bits exceeds bits");
  SigParams sp{ap.replicas, ap.bits, ap.threshold};
  validate_params(sp);
  ThresholdReport rep;
  rep.accept_count = accept_count(sp);
  const std::int64_t c = rep.accept_count;
  const std::int64_t n = ap.replicas;
  rep.per_bit_honest = binom_tail_geq(c, n, ap.p_honest);
  rep.honest_accept = std::pow(rep.per_bit_honest, ap.bits);
  rep.forge_success =
      (1 - ap.multi_photon_fraction) * ap.p_forge + ap.multi_photon_fraction * ap.p_ideal;
  rep.per_bit_forge = binom_tail_geq(c, n, rep.forge_success);
  // The forger replays the intercepted signature on unchanged bits, so those
  // bits pass at the honest rate.
  rep.forge_accept = std::pow(rep.per_bit_forge, ap.changed_bits) *
                     std::pow(rep.per_bit_honest, ap.bits - ap.changed_bits);
  rep.honest_normal = std::pow(normal_tail_geq(c, n, ap.p_honest), ap.bits);
  rep.forge_normal = std::pow(normal_tail_geq(c, n, rep.forge_success), ap.changed_bits) *
                     std::pow(normal_tail_geq(c, n, ap.p_honest), ap.bits - ap.changed_bits);
  return rep;
}

struct ThresholdScanPoint {
  double threshold = 0;
  double honest_accept = 0;
  double forge_accept = 0;
};

struct ThresholdScan {
  std::vector<ThresholdScanPoint> points;
  double best_threshold = 0;
  double best_gap = 0;  // honest_accept - forge_accept at the optimum
};

inline ThresholdScan scan_threshold(AnalysisParams ap, double lo, double hi, double step) {
  if (!(lo < hi) || !(step > 0)) fail(Errc::invalid_argument, "bad scan range");
  ThresholdScan scan;
  scan.best_gap = -1;
  const int steps = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= steps; ++i) {
    ap.threshold = lo + i * step;
    const ThresholdReport rep = analyze_threshold(ap);
    scan.points.push_back({ap.threshold, rep.honest_accept, rep.forge_accept});
    const double gap = rep.honest_accept - rep.forge_accept;
    if (gap > scan.best_gap) {
      scan.best_gap = gap;
      scan.best_threshold = ap.threshold;
    }
  }
  return scan;
}

struct HistogramReport {
  double lo = 0;
  double hi = 0;
  std::vector<std::int64_t> counts;
  double mean = 0;
  double stddev = 0;          // observed across per-bit fractions
  double sigma_binomial = 0;  // sqrt(mean(1-mean)/N): sampling noise alone
};

// Per-bit fraction histogram; spread beyond sigma_binomial indicates a
// drifting success rate across the table.
inline HistogramReport fraction_histogram(const std::vector<double>& fractions,
                                          std::uint32_t replicas, std::size_t bins, double lo,
                                          double hi) {
  if (fractions.empty()) fail(Errc::sample_too_small, "no fractions");
  if (bins == 0 || !(lo < hi)) fail(Errc::invalid_argument, "bad histogram shape");
  HistogramReport rep;
  rep.lo = lo;
  rep.hi = hi;
  rep.counts.assign(bins, 0);
  double sum = 0;
  for (double f : fractions) {
    sum += f;
    const double t = (f - lo) / (hi - lo);
    const std::int64_t raw = static_cast<std::int64_t>(std::floor(t * static_cast<double>(bins)));
    const std::int64_t idx =
        raw < 0 ? 0 : (raw >= static_cast<std::int64_t>(bins) ? static_cast<std::int64_t>(bins) - 1
                                                              : raw);
    ++rep.counts[static_cast<std::size_t>(idx)];
  }
  rep.mean = sum / static_cast<double>(fractions.size());
  double ss = 0;
  for (double f : fractions) ss += (f - rep.mean) * (f - rep.mean);
  rep.stddev = fractions.size() > 1
                   ? std::sqrt(ss / static_cast<double>(fractions.size() - 1))
                   : 0.0;
  rep.sigma_binomial = binom_sigma(replicas, rep.mean);
  return rep;
}

}  // namespace otp::sig
