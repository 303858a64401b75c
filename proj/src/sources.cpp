// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "photoncorr/sources.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "photoncorr/errors.hpp"
#include "photoncorr/qmt.hpp"
#include "photoncorr/rng.hpp"

namespace photoncorr {

namespace {

constexpr double kPi = 3.14159265358979323846;

TimeTagStream make_stream(double span_s, std::int64_t resolution_ps) {
    if (span_s <= 0.0) throw config_error("span must be positive");
    if (resolution_ps <= 0) throw config_error("resolution_ps must be positive");
    TimeTagStream s;
    s.resolution_ps = resolution_ps;
    s.span_ticks = static_cast<std::uint64_t>(std::llround(span_s * 1e12 /
                                                           static_cast<double>(resolution_ps)));
    if (s.span_ticks == 0) throw config_error("span below one tick");
    return s;
}

// Poisson arrivals at fixed rate on [t_ticks, end_ticks), appended to out.
void fill_poisson_block(double rate_cps, double& t_ticks, double end_ticks,
                        double ticks_per_second, Rng& rng, std::vector<std::uint64_t>& out) {
    if (rate_cps <= 0.0) {
        t_ticks = end_ticks;
        return;
    }
    const double gap_scale = ticks_per_second / rate_cps;
    for (;;) {
        t_ticks += rng.next_exp() * gap_scale;
        if (t_ticks >= end_ticks) return;
        out.push_back(static_cast<std::uint64_t>(t_ticks));
    }
}

} // namespace

TimeTagStream generate_poisson(const PoissonSource& src, double span_s, std::uint64_t seed,
                               std::int64_t resolution_ps) {
    if (src.rate_cps <= 0.0) throw config_error("poisson rate must be positive");
    TimeTagStream s = make_stream(span_s, resolution_ps);
    s.ticks.reserve(static_cast<std::size_t>(src.rate_cps * span_s * 1.05) + 16);
    Rng rng(seed);
    double t = 0.0;
    fill_poisson_block(src.rate_cps, t, static_cast<double>(s.span_ticks),
                       s.ticks_per_second(), rng, s.ticks);
    return s;
}

double cox_intensity_moment(const CoxSource& src, int k) {
    if (k < 1 || k > 3) throw config_error("cox_intensity_moment: k must be 1..3");
    switch (src.law) {
    case IntensityLaw::constant:
        return std::pow(src.mean_rate_cps, k);
    case IntensityLaw::exponential: {
        // <lambda^k> = k! * mean^k for an exponential intensity
        static const double factorial[4] = {1, 1, 2, 6};
        return factorial[k] * std::pow(src.mean_rate_cps, k);
    }
    case IntensityLaw::two_state: {
        const double total = src.rate12_hz + src.rate21_hz;
        const double p1 = src.rate21_hz / total;
        const double p2 = src.rate12_hz / total;
        return p1 * std::pow(src.level1_cps, k) + p2 * std::pow(src.level2_cps, k);
    }
    }
    throw config_error("cox_intensity_moment: unknown intensity law");
}

TimeTagStream generate_cox(const CoxSource& src, double span_s, std::uint64_t seed,
                           std::int64_t resolution_ps) {
    TimeTagStream s = make_stream(span_s, resolution_ps);
    Rng rng(seed);
    const double tps = s.ticks_per_second();
    const double span_ticks = static_cast<double>(s.span_ticks);

    switch (src.law) {
    case IntensityLaw::constant: {
        if (src.mean_rate_cps <= 0.0) throw config_error("cox mean rate must be positive");
        s.ticks.reserve(static_cast<std::size_t>(src.mean_rate_cps * span_s * 1.05) + 16);
        double t = 0.0;
        fill_poisson_block(src.mean_rate_cps, t, span_ticks, tps, rng, s.ticks);
        return s;
    }
    case IntensityLaw::exponential: {
        if (src.mean_rate_cps <= 0.0) throw config_error("cox mean rate must be positive");
        if (src.dwell_time_s <= 0.0) throw config_error("cox dwell time must be positive");
        s.ticks.reserve(static_cast<std::size_t>(src.mean_rate_cps * span_s * 1.2) + 16);
        const double dwell_ticks = src.dwell_time_s * tps;
        double block_start = 0.0;
        while (block_start < span_ticks) {
            const double block_end = std::min(block_start + dwell_ticks, span_ticks);
            const double rate = src.mean_rate_cps * rng.next_exp();
            double t = block_start;
            fill_poisson_block(rate, t, block_end, tps, rng, s.ticks);
            block_start = block_end;
        }
        return s;
    }
    case IntensityLaw::two_state: {
        if (src.level1_cps < 0.0 || src.level2_cps < 0.0)
            throw config_error("two_state levels must be non-negative");
        if (src.rate12_hz <= 0.0 || src.rate21_hz <= 0.0)
            throw config_error("two_state switching rates must be positive");
        const double mean = cox_intensity_moment(src, 1);
        s.ticks.reserve(static_cast<std::size_t>(mean * span_s * 1.2) + 16);
        // start from the stationary state occupation
        bool in_state1 = rng.next_bernoulli(src.rate21_hz / (src.rate12_hz + src.rate21_hz));
        double block_start = 0.0;
        while (block_start < span_ticks) {
            const double hold_rate = in_state1 ? src.rate12_hz : src.rate21_hz;
            const double level = in_state1 ? src.level1_cps : src.level2_cps;
            const double block_end =
                std::min(block_start + rng.next_exp() / hold_rate * tps, span_ticks);
            double t = block_start;
            fill_poisson_block(level, t, block_end, tps, rng, s.ticks);
            block_start = block_end;
            in_state1 = !in_state1;
        }
        return s;
    }
    }
    throw config_error("generate_cox: unknown intensity law");
}

MicromaserRun run_micromaser(const MicromaserSource& src, double span_s, std::uint64_t seed,
                             std::int64_t resolution_ps, double sample_dt_s) {
    if (src.coupling_g_rad_s < 0.0) throw config_error("coupling must be >= 0");
    if (src.t_int_s <= 0.0) throw config_error("interaction time must be positive");
    if (src.cavity_linewidth_hz <= 0.0) throw config_error("cavity linewidth must be positive");
    if (src.atom_rate_cps < 0.0) throw config_error("atom rate must be >= 0");
    if (src.detection_efficiency <= 0.0 || src.detection_efficiency > 1.0)
        throw config_error("detection efficiency must be in (0, 1]");

    MicromaserRun run;
    run.stream = make_stream(span_s, resolution_ps);
    run.sample_dt_s = sample_dt_s;

    const double kappa = 2.0 * kPi * src.cavity_linewidth_hz;
    const double theta = src.coupling_g_rad_s * src.t_int_s;

    std::uint32_t n0 = src.n_initial.value_or(0);
    std::uint32_t n_cap = 64;
    if (src.atom_rate_cps > 0.0 && src.coupling_g_rad_s > 0.0) {
        const PhotonDistribution ss = steady_state_auto(src.coupling_g_rad_s, src.t_int_s,
                                                        kappa, src.atom_rate_cps);
        const auto mode = std::max_element(ss.p.begin(), ss.p.end()) - ss.p.begin();
        if (!src.n_initial) n0 = static_cast<std::uint32_t>(mode);
        n_cap = static_cast<std::uint32_t>(2 * ss.p.size() + 64);
    } else if (src.n_initial) {
        n_cap = 2 * *src.n_initial + 64;
    }

    // rate tables: one branch probability and one inverse total rate per n
    const double tps = run.stream.ticks_per_second();
    std::vector<double> p_birth(n_cap + 1), inv_rate_ticks(n_cap + 1);
    for (std::uint32_t n = 0; n <= n_cap; ++n) {
        const double sine = std::sin(theta * std::sqrt(static_cast<double>(n) + 1.0));
        const double birth = src.atom_rate_cps * sine * sine;
        const double death = kappa * static_cast<double>(n);
        const double total = birth + death;
        p_birth[n] = total > 0.0 ? birth / total : 0.0;
        inv_rate_ticks[n] = total > 0.0 ? tps / total : 0.0;
    }

    Rng rng(seed);
    const double span_ticks = static_cast<double>(run.stream.span_ticks);
    // an explicit initial state is taken literally; otherwise relax to the
    // steady state before recording
    const double burn_ticks = src.n_initial ? 0.0 : 100.0 / kappa * tps;
    const double sample_dt_ticks = sample_dt_s > 0.0 ? sample_dt_s * tps : 0.0;

    std::uint32_t n = n0;
    double t = -burn_ticks;
    double next_sample = 0.0;
    std::uint64_t skip = rng.next_geometric(src.detection_efficiency);
    run.stream.ticks.reserve(static_cast<std::size_t>(
        kappa * 600.0 * src.detection_efficiency * span_s * 0.01) + 1024);

    for (;;) {
        const double inv_rate = inv_rate_ticks[n];
        if (inv_rate == 0.0) break; // n = 0 with no gain: dark forever
        t += rng.next_exp() * inv_rate;
        if (sample_dt_ticks > 0.0) {
            while (next_sample <= t && next_sample < span_ticks) {
                run.n_samples.push_back(n); // state held until this jump
                next_sample += sample_dt_ticks;
            }
        }
        if (t >= span_ticks) break;
        if (rng.next_double() < p_birth[n]) {
            if (++n > n_cap)
                throw regime_error("micromaser trajectory hit truncation bound n=" +
                                   std::to_string(n_cap));
        } else {
            --n;
            if (--skip == 0) {
                skip = rng.next_geometric(src.detection_efficiency);
                if (t >= 0.0) run.stream.ticks.push_back(static_cast<std::uint64_t>(t));
            }
        }
    }
    if (sample_dt_ticks > 0.0) { // trajectory holds its last state to the end
        while (next_sample < span_ticks) {
            run.n_samples.push_back(n);
            next_sample += sample_dt_ticks;
        }
    }
    return run;
}

TimeTagStream generate_micromaser(const MicromaserSource& src, double span_s, std::uint64_t seed,
                                  std::int64_t resolution_ps) {
    return run_micromaser(src, span_s, seed, resolution_ps).stream;
}

std::pair<TimeTagStream, TimeTagStream> beamsplit(const TimeTagStream& stream, double p,
                                                  std::uint64_t seed) {
    if (!(p > 0.0 && p < 1.0)) throw config_error("beamsplit probability must be in (0, 1)");
    TimeTagStream out1, out2;
    out1.resolution_ps = out2.resolution_ps = stream.resolution_ps;
    out1.span_ticks = out2.span_ticks = stream.span_ticks;
    out1.channel = stream.channel;
    out2.channel = static_cast<std::uint16_t>(stream.channel + 1);
    out1.ticks.reserve(static_cast<std::size_t>(static_cast<double>(stream.size()) * p * 1.1) + 16);
    out2.ticks.reserve(static_cast<std::size_t>(
        static_cast<double>(stream.size()) * (1.0 - p) * 1.1) + 16);
    Rng rng(seed);
    for (const auto t : stream.ticks)
        (rng.next_bernoulli(p) ? out1 : out2).ticks.push_back(t);
    return {std::move(out1), std::move(out2)};
}

} // namespace photoncorr
