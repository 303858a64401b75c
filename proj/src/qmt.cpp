// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "photoncorr/qmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "photoncorr/errors.hpp"

namespace photoncorr {

namespace {

constexpr double kTailMassLimit = 1e-12;
constexpr double kPeakMassFloor = 1e-6;

bool detect_multimodal(const std::vector<double>& p) {
    // Count maxima of runs: a run of equal values flanked by strictly smaller
    // neighbours counts once.
    int peaks = 0;
    const std::size_t n = p.size();
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && p[j + 1] == p[i]) ++j;
        const bool rises = (i == 0) || (p[i - 1] < p[i]);
        const bool falls = (j + 1 == n) || (p[j + 1] < p[i]);
        if (rises && falls && p[i] > kPeakMassFloor) ++peaks;
        i = j + 1;
    }
    return peaks > 1;
}

} // namespace

PhotonDistribution distribution_from_probabilities(std::vector<double> p) {
    if (p.empty()) throw config_error("empty probability vector");
    double total = 0.0;
    for (const double v : p) {
        if (!(v >= 0.0)) throw config_error("probabilities must be non-negative");
        total += v;
    }
    if (total <= 0.0) throw config_error("probability vector sums to zero");

    PhotonDistribution d;
    d.p.resize(p.size());
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double pn = p[n] / total;
        d.p[n] = pn;
        const double x = static_cast<double>(n);
        m1 += x * pn;
        m2 += x * x * pn;
        m3 += x * x * x * pn;
    }
    d.mean_n = m1;
    d.mean_n2 = m2;
    d.mean_n3 = m3;

    const double var = m2 - m1 * m1;
    d.q_mandel = m1 > 0 ? var / m1 - 1.0 : 0.0;
    const double mu3 = m3 - 3.0 * m2 * m1 + 2.0 * m1 * m1 * m1;
    d.skewness = var > 0 ? mu3 / std::pow(var, 1.5) : 0.0;
    d.g2_zero = m1 > 0 ? (m2 - m1) / (m1 * m1) : 0.0;
    d.g3_zero = m1 > 0 ? (m3 - 3.0 * m2 + 2.0 * m1) / (m1 * m1 * m1) : 0.0;
    d.multimodal = detect_multimodal(d.p);
    return d;
}

PhotonDistribution steady_state(const QmtParams& params) {
    if (params.coupling_g_rad_s < 0 || params.t_int_s <= 0 || params.kappa_rad_s <= 0 ||
        params.atom_rate_cps < 0 || params.n_max < 1)
        throw config_error("invalid micromaser parameters");

    const int n_max = params.n_max;
    const double theta = params.coupling_g_rad_s * params.t_int_s;
    const double pump = params.atom_rate_cps / params.kappa_rad_s;

    // log p(n) - log p(0) accumulated in log space; the pump ratio can span
    // thousands of orders of magnitude at <n> ~ 600.
    std::vector<double> logw(static_cast<std::size_t>(n_max) + 1);
    logw[0] = 0.0;
    double acc = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double s = std::sin(theta * std::sqrt(static_cast<double>(n)));
        const double gain = pump * s * s;
        if (gain <= 0.0) {
            for (int m = n; m <= n_max; ++m)
                logw[static_cast<std::size_t>(m)] = -std::numeric_limits<double>::infinity();
            break;
        }
        acc += std::log(gain / static_cast<double>(n));
        logw[static_cast<std::size_t>(n)] = acc;
    }

    const double peak = *std::max_element(logw.begin(), logw.end());
    std::vector<double> p(logw.size());
    for (std::size_t n = 0; n < logw.size(); ++n)
        p[n] = std::isinf(logw[n]) ? 0.0 : std::exp(logw[n] - peak);

    PhotonDistribution d = distribution_from_probabilities(std::move(p));
    if (d.p.back() > kTailMassLimit)
        throw regime_error("steady_state: truncation at n_max=" + std::to_string(n_max) +
                           " leaves tail mass " + std::to_string(d.p.back()));
    return d;
}

PhotonDistribution steady_state_auto(double coupling_g_rad_s, double t_int_s,
                                     double kappa_rad_s, double atom_rate_cps, int hard_cap) {
    QmtParams params;
    params.coupling_g_rad_s = coupling_g_rad_s;
    params.t_int_s = t_int_s;
    params.kappa_rad_s = kappa_rad_s;
    params.atom_rate_cps = atom_rate_cps;
    for (params.n_max = 256; params.n_max <= hard_cap; params.n_max *= 2) {
        try {
            return steady_state(params);
        } catch (const regime_error&) {
            if (params.n_max * 2 > hard_cap) throw;
        }
    }
    throw regime_error("steady_state_auto: no adequate truncation below hard cap");
}

double g3_from_moments(const PhotonDistribution& dist) {
    if (dist.mean_n <= 0.0) throw regime_error("g3_from_moments: zero mean photon number");
    return (dist.mean_n3 - 3.0 * dist.mean_n2 + 2.0 * dist.mean_n) /
           (dist.mean_n * dist.mean_n * dist.mean_n);
}

double skewness(const PhotonDistribution& dist) {
    const double var = dist.mean_n2 - dist.mean_n * dist.mean_n;
    if (var <= 0.0) throw regime_error("skewness: zero variance");
    const double mu3 =
        dist.mean_n3 - 3.0 * dist.mean_n2 * dist.mean_n + 2.0 * std::pow(dist.mean_n, 3);
    return mu3 / std::pow(var, 1.5);
}

double skewness_expansion(const PhotonDistribution& dist) {
    if (dist.mean_n <= 0.0) throw regime_error("skewness_expansion: zero mean photon number");
    const double n = dist.mean_n;
    const double q = dist.q_mandel;
    const double var = dist.mean_n2 - n * n;
    const double skew_term =
        var > 0.0 ? std::pow(q + 1.0, 1.5) * skewness(dist) / std::pow(n, 1.5) : 0.0;
    return 1.0 + 3.0 * q / n - (3.0 * q + 1.0) / (n * n) + skew_term;
}

RelationCheck relation_check(const PhotonDistribution& dist) {
    if (dist.multimodal)
        throw regime_error("relation_check: multimodal distribution (quantum-jump region)");
    const double g2 = dist.g2_zero;
    const double g3 = dist.g3_zero;
    if (std::abs(1.0 - g2) < 1e-9)
        throw regime_error("relation_check: g2(0) = 1, ratio undefined (Mandel Q near zero)");
    return {(1.0 - g3) / (1.0 - g2), std::abs(g2 * g2 * g2 - g3)};
}

} // namespace photoncorr
