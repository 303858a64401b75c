// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "photoncorr/timetag.hpp"

namespace photoncorr {

/// Homogeneous Poisson stream; the g(N) == 1 reference case.
struct PoissonSource {
    double rate_cps = 0.0;
};

enum class IntensityLaw {
    constant,    ///< fixed rate; reduces to Poisson
    exponential, ///< rate ~ Exp(mean); pseudo-thermal, g2(0)=2, g3(0,0)=6
    two_state,   ///< Markov switching between two levels
};

/// Doubly stochastic (Cox) source with piecewise-constant intensity. For the
/// constant/exponential laws the intensity is redrawn independently every
/// dwell_time_s; zero-delay correlations are then exactly the intensity
/// moment ratios <lambda^k>/<lambda>^k for delays well below the dwell time.
struct CoxSource {
    double mean_rate_cps = 0.0;
    IntensityLaw law = IntensityLaw::exponential;
    double dwell_time_s = 0.0;
    // two_state only: levels and switching rates (1 -> 2 and 2 -> 1)
    double level1_cps = 0.0;
    double level2_cps = 0.0;
    double rate12_hz = 0.0;
    double rate21_hz = 0.0;
};

/// Stationary intensity moment <lambda^k> of a CoxSource, k = 1..3. The
/// analytic oracle for the zero-delay correlations of generated streams.
double cox_intensity_moment(const CoxSource& src, int k);

/// Cavity-QED microlaser modeled as a birth-death process with gain
/// r*sin^2(g*t_int*sqrt(n+1)) and loss kappa*n, kappa = 2*pi*linewidth.
/// Every loss event emits one timestamp, thinned by detection_efficiency.
struct MicromaserSource {
    double coupling_g_rad_s = 2.0 * 3.14159265358979323846 * 190e3;
    double t_int_s = 0.1e-6;
    double cavity_linewidth_hz = 138e3;
    double atom_rate_cps = 0.0;
    double detection_efficiency = 1.0;
    std::optional<std::uint32_t> n_initial; ///< default: steady-state mode
};

TimeTagStream generate_poisson(const PoissonSource& src, double span_s, std::uint64_t seed,
                               std::int64_t resolution_ps = 1);

TimeTagStream generate_cox(const CoxSource& src, double span_s, std::uint64_t seed,
                           std::int64_t resolution_ps = 1);

TimeTagStream generate_micromaser(const MicromaserSource& src, double span_s, std::uint64_t seed,
                                  std::int64_t resolution_ps = 1);

/// Micromaser run keeping the photon-number trajectory sampled on a fixed
/// stride, for checks against the theoretical steady state.
struct MicromaserRun {
    TimeTagStream stream;
    std::vector<std::uint32_t> n_samples;
    double sample_dt_s = 0.0;
};

MicromaserRun run_micromaser(const MicromaserSource& src, double span_s, std::uint64_t seed,
                             std::int64_t resolution_ps = 1, double sample_dt_s = 0.0);

/// Route each event independently to the first output with probability p.
/// The outputs partition the input; normalized correlations are preserved.
std::pair<TimeTagStream, TimeTagStream> beamsplit(const TimeTagStream& stream, double p,
                                                  std::uint64_t seed);

} // namespace photoncorr
