// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "photoncorr/deadtime.hpp"

#include <cmath>
#include <string>

#include "photoncorr/errors.hpp"
#include "photoncorr/rng.hpp"

namespace photoncorr {

std::uint64_t dead_time_ticks(double tau_s, std::int64_t resolution_ps) {
    if (tau_s < 0.0) throw config_error("dead time must be >= 0");
    if (tau_s == 0.0) return 0;
    const double ticks = tau_s * 1e12 / static_cast<double>(resolution_ps);
    return static_cast<std::uint64_t>(std::ceil(ticks * (1.0 - 1e-12)));
}

TimeTagStream apply_dead_time(const TimeTagStream& stream, double tau_s) {
    const std::uint64_t tau_ticks = dead_time_ticks(tau_s, stream.resolution_ps);
    if (tau_ticks == 0) return stream;

    TimeTagStream out;
    out.resolution_ps = stream.resolution_ps;
    out.channel = stream.channel;
    out.span_ticks = stream.span_ticks;
    out.ticks.reserve(stream.ticks.size());

    bool armed = true;
    std::uint64_t open_at = 0; // earliest acceptable tick
    for (const auto t : stream.ticks) {
        if (armed || t >= open_at) {
            out.ticks.push_back(t);
            armed = false;
            open_at = t + tau_ticks;
        }
    }
    return out;
}

TimeTagStream detect(const TimeTagStream& stream, const DetectorSpec& spec, std::uint64_t seed) {
    if (spec.efficiency <= 0.0 || spec.efficiency > 1.0)
        throw config_error("detector efficiency must be in (0, 1]");

    if (spec.efficiency == 1.0) {
        TimeTagStream out = apply_dead_time(stream, spec.dead_time_s);
        out.channel = spec.channel;
        return out;
    }

    TimeTagStream thinned;
    thinned.resolution_ps = stream.resolution_ps;
    thinned.channel = spec.channel;
    thinned.span_ticks = stream.span_ticks;
    thinned.ticks.reserve(static_cast<std::size_t>(
        static_cast<double>(stream.ticks.size()) * spec.efficiency * 1.1) + 16);
    Rng rng(seed);
    for (const auto t : stream.ticks)
        if (rng.next_bernoulli(spec.efficiency)) thinned.ticks.push_back(t);

    TimeTagStream out = apply_dead_time(thinned, spec.dead_time_s);
    out.channel = spec.channel;
    return out;
}

double flux_correct(double observed_flux_cps, double tau_s, double g2_zero) {
    if (observed_flux_cps < 0.0) throw config_error("flux must be >= 0");
    if (tau_s < 0.0) throw config_error("dead time must be >= 0");
    const double denom = 1.0 - observed_flux_cps * tau_s * g2_zero;
    if (denom <= 0.0)
        throw regime_error("flux correction beyond linear regime: phi*tau*g2 = " +
                           std::to_string(observed_flux_cps * tau_s * g2_zero));
    return observed_flux_cps / denom;
}

} // namespace photoncorr
