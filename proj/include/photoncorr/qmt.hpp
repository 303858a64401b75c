// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace photoncorr {

/// Micromaser steady-state parameters. The pump is characterized by the atom
/// injection rate; kappa is the cavity field energy decay rate in rad/s.
struct QmtParams {
    double coupling_g_rad_s = 0.0;
    double t_int_s = 0.0;
    double kappa_rad_s = 0.0;
    double atom_rate_cps = 0.0;
    int n_max = 2048; ///< truncation; tail mass above it must be < 1e-12
};

/// Normalized photon-number distribution with derived moments.
struct PhotonDistribution {
    std::vector<double> p; ///< p[n], n = 0..n_max
    double mean_n = 0.0;
    double mean_n2 = 0.0;
    double mean_n3 = 0.0;
    double q_mandel = 0.0;
    double skewness = 0.0; ///< 0 when the variance vanishes
    double g2_zero = 0.0;
    double g3_zero = 0.0;
    bool multimodal = false; ///< more than one local maximum above 1e-6 mass
};

/// Build a distribution from a (not necessarily normalized) non-negative
/// probability vector, populating all derived moments.
PhotonDistribution distribution_from_probabilities(std::vector<double> p);

/// Detailed-balance steady state of the birth-death model with gain
/// r*sin^2(g*t_int*sqrt(n)) and loss kappa*n, zero thermal photons.
/// Throws regime_error when n_max leaves more than 1e-12 tail mass.
PhotonDistribution steady_state(const QmtParams& params);

/// As steady_state but grows n_max (powers of two, up to hard_cap) until the
/// truncation criterion holds.
PhotonDistribution steady_state_auto(double coupling_g_rad_s, double t_int_s,
                                     double kappa_rad_s, double atom_rate_cps,
                                     int hard_cap = 1 << 16);

/// (<n^3> - 3<n^2> + 2<n>) / <n>^3.
double g3_from_moments(const PhotonDistribution& dist);

/// Third standardized central moment. Throws regime_error on zero variance.
double skewness(const PhotonDistribution& dist);

/// g3 expressed through Q and the skewness:
/// 1 + 3Q/<n> - (3Q+1)/<n>^2 + (Q+1)^{3/2} * gamma / <n>^{3/2}.
/// Algebraically identical to g3_from_moments; the skewness term is taken as
/// zero when the variance vanishes (its prefactor (Q+1)^{3/2} is then zero).
double skewness_expansion(const PhotonDistribution& dist);

struct RelationCheck {
    double ratio = 0.0;    ///< (1 - g3) / (1 - g2)
    double residual = 0.0; ///< |g2^3 - g3|
};

/// Throws regime_error when g2 is too close to 1 (Mandel Q near zero) for the
/// ratio to be meaningful, or when the distribution is multimodal.
RelationCheck relation_check(const PhotonDistribution& dist);

} // namespace photoncorr
