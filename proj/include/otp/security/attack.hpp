#pragma once

#include <cmath>

#include "otp/common.hpp"
#include "otp/qsim/noise.hpp"

namespace otp::security {

// Intercept-resend eavesdropper on the channel to Bob: measures each carrier
// in a random conjugate basis and forwards the collapsed eigenstate. Each
// correlator halves, pulling S down to sqrt(2) * visibility.
struct InterceptResend {
  qsim::Dir2 operator()(qsim::Dir2 bloch, Rng& rng) const {
    const bool use_x = uniform_bit(rng);
    const double axis_x = use_x ? 1.0 : 0.0;
    const double axis_z = use_x ? 0.0 : 1.0;
    const double proj = bloch.x * axis_x + bloch.z * axis_z;
    const double p_plus = 0.5 * (1 + proj);
    const double sign = uniform_real(rng) < p_plus ? 1.0 : -1.0;
    return {sign * axis_x, sign * axis_z};
  }
};

// Partial eavesdropping: intercepts each pair independently with the given
// probability, otherwise passes the state through untouched.
struct PartialInterceptResend {
  double fraction = 1.0;

  qsim::Dir2 operator()(qsim::Dir2 bloch, Rng& rng) const {
    if (uniform_real(rng) >= fraction) return bloch;
    return InterceptResend{}(bloch, rng);
  }
};

}  // namespace otp::security
