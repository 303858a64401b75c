// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "photoncorr/extract.hpp"
#include "photoncorr/timetag.hpp"

namespace photoncorr::test {

inline TimeTagStream make_stream(std::vector<std::uint64_t> ticks, std::uint64_t span_ticks,
                                 std::int64_t resolution_ps = 1) {
    TimeTagStream s;
    s.resolution_ps = resolution_ps;
    s.span_ticks = span_ticks;
    s.ticks = std::move(ticks);
    s.validate();
    return s;
}

/// Quadratic-time oracle for pair counting within |delay| <= half_width.
inline std::uint64_t brute_force_pairs(const std::vector<std::uint64_t>& a,
                                       const std::vector<std::uint64_t>& b,
                                       std::uint64_t half_width) {
    std::uint64_t count = 0;
    for (const auto ta : a)
        for (const auto tb : b) {
            const std::uint64_t d = ta > tb ? ta - tb : tb - ta;
            if (d <= half_width) ++count;
        }
    return count;
}

/// Cubic-time oracle for triples with both delays within the window of s1.
inline std::uint64_t brute_force_triples(const std::vector<std::uint64_t>& s1,
                                         const std::vector<std::uint64_t>& s2,
                                         const std::vector<std::uint64_t>& s3,
                                         std::uint64_t half_width) {
    std::uint64_t count = 0;
    for (const auto t1 : s1)
        for (const auto t2 : s2) {
            const std::uint64_t d12 = t1 > t2 ? t1 - t2 : t2 - t1;
            if (d12 > half_width) continue;
            for (const auto t3 : s3) {
                const std::uint64_t d13 = t1 > t3 ? t1 - t3 : t3 - t1;
                if (d13 <= half_width) ++count;
            }
        }
    return count;
}

/// Noise-free scan following the linear dead-time distortion law with the
/// stated dead-time-free fluxes; observed fluxes are made consistent so the
/// g2-aware correction recovers the free fluxes exactly.
inline DeadTimeScan synthesize_scan(double g2, double g3, double flux_st_free,
                                    double flux_sp_free, const std::vector<double>& tau_grid_s,
                                    double point_sigma = 0.0) {
    DeadTimeScan scan;
    scan.tau_s = tau_grid_s;
    scan.physical_tau_s = tau_grid_s.front();
    for (const double tau : tau_grid_s) {
        const double x = (flux_st_free + flux_sp_free) * tau;
        CorrelationEstimate est;
        est.value = g2 + (g2 * g2 - g3) * x;
        est.std_error = point_sigma;
        scan.g2_obs.push_back(est);
        scan.flux_st_obs.push_back(flux_st_free / (1.0 + flux_st_free * tau * g2));
        scan.flux_sp_obs.push_back(flux_sp_free / (1.0 + flux_sp_free * tau * g2));
        scan.flux_st_free.push_back(flux_st_free);
        scan.flux_sp_free.push_back(flux_sp_free);
    }
    return scan;
}

} // namespace photoncorr::test
