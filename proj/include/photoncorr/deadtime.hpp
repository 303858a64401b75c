// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "photoncorr/timetag.hpp"

namespace photoncorr {

/// A (virtual) photodetector: nonparalyzable dead time plus Bernoulli
/// detection efficiency.
struct DetectorSpec {
    double dead_time_s = 0.0;
    double efficiency = 1.0; ///< in (0, 1]
    std::uint16_t channel = 0;
};

/// Dead time in whole ticks, rounded up so the dead period is never
/// under-enforced. A small relative slack absorbs binary representation
/// error in tau_s so that e.g. 20 ns at 1 ps resolution maps to 20000.
std::uint64_t dead_time_ticks(double tau_s, std::int64_t resolution_ps);

/// Greedy nonparalyzable filter: accept the first event, then accept each
/// event iff it is at least tau after the last accepted one. Blocked events
/// do not retrigger the dead period. tau_s = 0 is the identity.
TimeTagStream apply_dead_time(const TimeTagStream& stream, double tau_s);

/// Bernoulli(efficiency) thinning followed by apply_dead_time. With
/// efficiency == 1 no random draws are made and the result equals
/// apply_dead_time exactly.
TimeTagStream detect(const TimeTagStream& stream, const DetectorSpec& spec, std::uint64_t seed);

/// Invert the first-order dead-time flux distortion:
/// phi = phi_obs / (1 - phi_obs * tau * g2_zero).
/// g2_zero = 1 is the standard nonparalyzable (coherent-light) correction.
/// Throws regime_error when the denominator is not positive.
double flux_correct(double observed_flux_cps, double tau_s, double g2_zero);

} // namespace photoncorr
