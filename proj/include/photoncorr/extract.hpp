// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "photoncorr/correlator.hpp"
#include "photoncorr/timetag.hpp"

namespace photoncorr {

/// Emulated dead-time scan: per-tau observed g2(0), observed fluxes and
/// dead-time-free corrected fluxes. The grid starts at the physical dead time
/// already burned into the input streams.
struct DeadTimeScan {
    std::vector<double> tau_s;
    std::vector<CorrelationEstimate> g2_obs;
    std::vector<double> flux_st_obs;
    std::vector<double> flux_sp_obs;
    std::vector<double> flux_st_free;
    std::vector<double> flux_sp_free;
    double physical_tau_s = 0.0;
    double bin_time_s = 0.0;
    std::vector<std::string> warnings;
};

/// Accumulates scan statistics over stream segments so that arbitrarily long
/// runs fit in memory. Counts are integers; merging accumulators in a fixed
/// order reproduces the single-pass result bit-exactly.
class ScanAccumulator {
  public:
    ScanAccumulator(std::vector<double> tau_grid_s, double bin_time_s);

    /// Filter both streams at every grid dead time and accumulate zero-bin
    /// coincidences and event counts. Segments must share resolution and span.
    void add_segment(const TimeTagStream& start, const TimeTagStream& stop);
    void merge(const ScanAccumulator& other);
    DeadTimeScan finalize(double physical_tau_s) const;

  private:
    struct PointAccum {
        std::uint64_t coincidences = 0;
        std::uint64_t n_start = 0;
        std::uint64_t n_stop = 0;
    };
    std::vector<double> tau_grid_;
    double bin_time_s_;
    std::vector<PointAccum> points_;
    std::uint64_t span_ticks_total_ = 0;
    std::uint64_t segment_span_ticks_ = 0;
    std::int64_t resolution_ps_ = 0;
};

/// One-shot scan over a single pair of physically filtered streams.
DeadTimeScan run_scan(const TimeTagStream& start, const TimeTagStream& stop,
                      double physical_tau_s, const std::vector<double>& tau_grid_s,
                      double bin_time_s);

/// Where fit_scan takes the dead-time-free fluxes for the fit abscissa.
enum class FluxSource {
    refit_from_observed, ///< correct first-point observed fluxes with the
                         ///< fit's own intercept, iterated once
    stored,              ///< trust the per-point free fluxes in the scan
};

struct ExtractionResult {
    double g2_zero = 0.0, g2_err = 0.0;
    double g3_zero = 0.0, g3_err = 0.0;
    double ratio = 0.0, ratio_err = 0.0; ///< (1 - g3) / (1 - g2)
    bool ratio_defined = false;          ///< false when g2 is consistent with 1
    int fit_order = 0;
    int n_points_used = 0;
    double chi2_reduced = 0.0;
    std::vector<double> coefficients; ///< polynomial in x = (phi_st + phi_sp) tau
    double flux_st_free = 0.0, flux_sp_free = 0.0;
    std::vector<std::string> warnings;
};

/// Weighted least-squares polynomial fit of g2_obs against
/// x = (phi_st + phi_sp) * tau, inverted to g2(0) = c0, g3(0,0) = c0^2 - c1.
/// n_points = 0 uses the whole grid.
ExtractionResult fit_scan(const DeadTimeScan& scan, int fit_order = 2, int n_points = 0,
                          FluxSource flux_source = FluxSource::refit_from_observed);

/// N-detector generalization: fit the observed order-N correlation against
/// x = sum_i phi_i tau_i and return g^{(N+1)}(0) = g2 * gN - c1.
CorrelationEstimate extract_generalized(const std::vector<double>& sum_flux_tau,
                                        const std::vector<CorrelationEstimate>& gN_obs,
                                        double g2_zero, double gN_zero, int fit_order = 2);

struct SecondDerivativeCheck {
    double lhs = 0.0; ///< numerical d^2 phi'/d tau^2 at tau = 0
    double rhs = 0.0; ///< 2 phi^3 g3 + phi^2 dg2/dt|0
};

/// Cross-check of the second-order flux distortion law on a dense small-tau
/// flux scan. Requires at least 6 grid points starting at tau = 0.
SecondDerivativeCheck second_derivative_check(const std::vector<double>& tau_s,
                                              const std::vector<double>& flux_obs_cps,
                                              double g3_zero,
                                              const CorrelationHistogram& g2_hist);

struct SnrPlan {
    double snr = 0.0;
    double time_multiplier = 0.0; ///< extra measurement time per correlation order
};

/// SNR of an order-N correlation measurement over total time T0:
/// sqrt((T0/tau_w) * (t_b/tau_w)^(N-1)); the multiplier tau_w/t_b is the
/// measurement-time factor for order N relative to order N-1.
SnrPlan plan_snr(double total_time_s, double waiting_time_s, double bin_time_s, int order_n);

/// Weighted polynomial least squares with parameter covariance.
struct PolyFitResult {
    std::vector<double> coefficients;
    std::vector<double> covariance; ///< row-major (order+1)^2
    double chi2 = 0.0;
    int dof = 0;
};

/// sigma entries must all be positive for a weighted fit; pass an empty sigma
/// (or any non-positive entry) for an unweighted fit, whose covariance is
/// scaled by the residual variance.
PolyFitResult polyfit_weighted(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& sigma, int order);

} // namespace photoncorr
