// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "photoncorr/extract.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "photoncorr/deadtime.hpp"
#include "photoncorr/errors.hpp"

namespace photoncorr {

namespace {

constexpr double kGuardHardLimit = 0.5;
constexpr double kGuardWarnLimit = 0.1;

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw config_error("dead-time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) throw config_error("dead times must be >= 0");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw config_error("dead-time grid must be strictly increasing");
    }
}

} // namespace

PolyFitResult polyfit_weighted(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& sigma, int order) {
    const int m = static_cast<int>(x.size());
    const int p = order + 1;
    if (order < 0) throw config_error("polyfit: order must be >= 0");
    if (y.size() != x.size()) throw config_error("polyfit: x/y size mismatch");
    if (m < p) throw config_error("polyfit: fewer points than parameters");

    bool weighted = sigma.size() == x.size() && !sigma.empty();
    if (weighted)
        for (const double s : sigma)
            if (!(s > 0.0)) weighted = false;

    double x_scale = 0.0;
    for (const double v : x) x_scale = std::max(x_scale, std::abs(v));
    if (x_scale == 0.0) x_scale = 1.0;

    // normal equations in long double; p is small so a dense solve is fine
    std::vector<long double> nmat(static_cast<std::size_t>(p) * p, 0.0L);
    std::vector<long double> rhs(static_cast<std::size_t>(p), 0.0L);
    for (int i = 0; i < m; ++i) {
        const long double w = weighted ? 1.0L / (static_cast<long double>(sigma[i]) * sigma[i])
                                       : 1.0L;
        long double pow_j = 1.0L;
        std::vector<long double> basis(static_cast<std::size_t>(p));
        const long double xs = static_cast<long double>(x[i]) / x_scale;
        for (int j = 0; j < p; ++j) {
            basis[static_cast<std::size_t>(j)] = pow_j;
            pow_j *= xs;
        }
        for (int j = 0; j < p; ++j) {
            rhs[j] += w * basis[j] * y[i];
            for (int k = 0; k <= j; ++k) nmat[static_cast<std::size_t>(j) * p + k] +=
                w * basis[j] * basis[k];
        }
    }
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k)
            nmat[static_cast<std::size_t>(j) * p + k] = nmat[static_cast<std::size_t>(k) * p + j];

    // invert via Gauss-Jordan with partial pivoting
    std::vector<long double> inv(static_cast<std::size_t>(p) * p, 0.0L);
    for (int j = 0; j < p; ++j) inv[static_cast<std::size_t>(j) * p + j] = 1.0L;
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r = col + 1; r < p; ++r)
            if (std::abs(static_cast<double>(nmat[static_cast<std::size_t>(r) * p + col])) >
                std::abs(static_cast<double>(nmat[static_cast<std::size_t>(pivot) * p + col])))
                pivot = r;
        if (nmat[static_cast<std::size_t>(pivot) * p + col] == 0.0L)
            throw regime_error("polyfit: singular normal equations");
        if (pivot != col)
            for (int c = 0; c < p; ++c) {
                std::swap(nmat[static_cast<std::size_t>(pivot) * p + c],
                          nmat[static_cast<std::size_t>(col) * p + c]);
                std::swap(inv[static_cast<std::size_t>(pivot) * p + c],
                          inv[static_cast<std::size_t>(col) * p + c]);
            }
        const long double diag = nmat[static_cast<std::size_t>(col) * p + col];
        for (int c = 0; c < p; ++c) {
            nmat[static_cast<std::size_t>(col) * p + c] /= diag;
            inv[static_cast<std::size_t>(col) * p + c] /= diag;
        }
        for (int r = 0; r < p; ++r) {
            if (r == col) continue;
            const long double f = nmat[static_cast<std::size_t>(r) * p + col];
            if (f == 0.0L) continue;
            for (int c = 0; c < p; ++c) {
                nmat[static_cast<std::size_t>(r) * p + c] -=
                    f * nmat[static_cast<std::size_t>(col) * p + c];
                inv[static_cast<std::size_t>(r) * p + c] -=
                    f * inv[static_cast<std::size_t>(col) * p + c];
            }
        }
    }

    std::vector<long double> coeff_scaled(static_cast<std::size_t>(p), 0.0L);
    for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k)
            coeff_scaled[j] += inv[static_cast<std::size_t>(j) * p + k] * rhs[k];

    PolyFitResult fit;
    fit.coefficients.resize(static_cast<std::size_t>(p));
    fit.covariance.resize(static_cast<std::size_t>(p) * p);
    fit.dof = m - p;

    long double chi2 = 0.0L;
    for (int i = 0; i < m; ++i) {
        long double value = 0.0L;
        const long double xs = static_cast<long double>(x[i]) / x_scale;
        long double pow_j = 1.0L;
        for (int j = 0; j < p; ++j) {
            value += coeff_scaled[j] * pow_j;
            pow_j *= xs;
        }
        const long double r = static_cast<long double>(y[i]) - value;
        const long double w = weighted ? 1.0L / (static_cast<long double>(sigma[i]) * sigma[i])
                                       : 1.0L;
        chi2 += w * r * r;
    }
    fit.chi2 = static_cast<double>(chi2);

    const long double var_scale =
        weighted ? 1.0L : (fit.dof > 0 ? chi2 / fit.dof : 0.0L);
    long double unscale_j = 1.0L;
    for (int j = 0; j < p; ++j) {
        fit.coefficients[j] = static_cast<double>(coeff_scaled[j] / unscale_j);
        long double unscale_k = 1.0L;
        for (int k = 0; k < p; ++k) {
            fit.covariance[static_cast<std::size_t>(j) * p + k] = static_cast<double>(
                inv[static_cast<std::size_t>(j) * p + k] * var_scale / (unscale_j * unscale_k));
            unscale_k *= x_scale;
        }
        unscale_j *= x_scale;
    }
    return fit;
}

ScanAccumulator::ScanAccumulator(std::vector<double> tau_grid_s, double bin_time_s)
    : tau_grid_(std::move(tau_grid_s)), bin_time_s_(bin_time_s),
      points_(tau_grid_.size()) {
    validate_grid(tau_grid_);
    if (bin_time_s_ <= 0.0) throw config_error("bin time must be positive");
}

void ScanAccumulator::add_segment(const TimeTagStream& start, const TimeTagStream& stop) {
    if (start.resolution_ps != stop.resolution_ps || start.span_ticks != stop.span_ticks)
        throw config_error("scan: streams differ in resolution or span");
    if (resolution_ps_ == 0) {
        resolution_ps_ = start.resolution_ps;
        segment_span_ticks_ = start.span_ticks;
    } else if (resolution_ps_ != start.resolution_ps ||
               segment_span_ticks_ != start.span_ticks) {
        throw config_error("scan: segments differ in resolution or span");
    }
    const std::uint64_t t_b = detail::bin_ticks(bin_time_s_, resolution_ps_);
    const std::uint64_t h = (t_b - 1) / 2;

    for (std::size_t i = 0; i < tau_grid_.size(); ++i) {
        const TimeTagStream f_st = apply_dead_time(start, tau_grid_[i]);
        const TimeTagStream f_sp = apply_dead_time(stop, tau_grid_[i]);
        points_[i].coincidences += detail::count_pairs_within(f_st.ticks, f_sp.ticks, h);
        points_[i].n_start += f_st.ticks.size();
        points_[i].n_stop += f_sp.ticks.size();
    }
    span_ticks_total_ += start.span_ticks;
}

void ScanAccumulator::merge(const ScanAccumulator& other) {
    if (other.tau_grid_ != tau_grid_ || other.bin_time_s_ != bin_time_s_)
        throw config_error("scan merge: incompatible accumulators");
    if (other.resolution_ps_ == 0) return;
    if (resolution_ps_ == 0) {
        resolution_ps_ = other.resolution_ps_;
        segment_span_ticks_ = other.segment_span_ticks_;
    } else if (resolution_ps_ != other.resolution_ps_ ||
               segment_span_ticks_ != other.segment_span_ticks_) {
        throw config_error("scan merge: segments differ in resolution or span");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        points_[i].coincidences += other.points_[i].coincidences;
        points_[i].n_start += other.points_[i].n_start;
        points_[i].n_stop += other.points_[i].n_stop;
    }
    span_ticks_total_ += other.span_ticks_total_;
}

DeadTimeScan ScanAccumulator::finalize(double physical_tau_s) const {
    if (span_ticks_total_ == 0) throw config_error("scan: no data accumulated");
    if (std::abs(tau_grid_.front() - physical_tau_s) >
        1e-9 * std::max(tau_grid_.front(), physical_tau_s))
        throw config_error("scan: grid must start at the physical dead time");

    const std::uint64_t t_b = detail::bin_ticks(bin_time_s_, resolution_ps_);
    const double span_s = static_cast<double>(span_ticks_total_) *
                          static_cast<double>(resolution_ps_) * 1e-12;

    DeadTimeScan scan;
    scan.tau_s = tau_grid_;
    scan.physical_tau_s = physical_tau_s;
    scan.bin_time_s = static_cast<double>(t_b) * static_cast<double>(resolution_ps_) * 1e-12;
    for (std::size_t i = 0; i < tau_grid_.size(); ++i) {
        const PointAccum& pt = points_[i];
        if (pt.n_start == 0 || pt.n_stop == 0)
            throw regime_error("scan: empty filtered stream at tau = " +
                               std::to_string(tau_grid_[i]));
        const double norm = static_cast<double>(span_ticks_total_) /
                            (static_cast<double>(pt.n_start) * static_cast<double>(pt.n_stop) *
                             static_cast<double>(t_b));
        CorrelationEstimate est;
        est.bin_time_s = scan.bin_time_s;
        est.n_pairs_or_triples = pt.coincidences;
        est.value = static_cast<double>(pt.coincidences) * norm;
        est.std_error = std::sqrt(std::max(static_cast<double>(pt.coincidences), 1.0)) * norm;
        scan.g2_obs.push_back(est);

        const double obs_st = static_cast<double>(pt.n_start) / span_s;
        const double obs_sp = static_cast<double>(pt.n_stop) / span_s;
        scan.flux_st_obs.push_back(obs_st);
        scan.flux_sp_obs.push_back(obs_sp);
        const double free_st = flux_correct(obs_st, tau_grid_[i], 1.0);
        const double free_sp = flux_correct(obs_sp, tau_grid_[i], 1.0);
        scan.flux_st_free.push_back(free_st);
        scan.flux_sp_free.push_back(free_sp);

        const double load = std::max(free_st, free_sp) * tau_grid_[i];
        if (load >= kGuardHardLimit)
            throw regime_error("scan: phi*tau = " + std::to_string(load) +
                               " is beyond the linear regime");
        if (load > kGuardWarnLimit)
            scan.warnings.push_back("phi*tau = " + std::to_string(load) + " at tau = " +
                                    std::to_string(tau_grid_[i]) +
                                    " strains the linear approximation");
    }
    return scan;
}

DeadTimeScan run_scan(const TimeTagStream& start, const TimeTagStream& stop,
                      double physical_tau_s, const std::vector<double>& tau_grid_s,
                      double bin_time_s) {
    ScanAccumulator acc(tau_grid_s, bin_time_s);
    acc.add_segment(start, stop);
    return acc.finalize(physical_tau_s);
}

ExtractionResult fit_scan(const DeadTimeScan& scan, int fit_order, int n_points,
                          FluxSource flux_source) {
    const int grid_size = static_cast<int>(scan.tau_s.size());
    const int m = n_points == 0 ? grid_size : n_points;
    if (fit_order < 1) throw config_error("fit_scan: fit order must be >= 1");
    if (m < fit_order + 2)
        throw config_error("fit_scan: need at least fit_order + 2 points");
    if (m > grid_size) throw config_error("fit_scan: more points requested than scanned");

    ExtractionResult result;
    result.fit_order = fit_order;
    result.n_points_used = m;
    if (fit_order >= 3)
        result.warnings.push_back(
            "fit order >= 3 with few points tends to give fitting errors larger "
            "than the fitted parameters");

    std::vector<double> y(static_cast<std::size_t>(m)), sigma(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        y[i] = scan.g2_obs[i].value;
        sigma[i] = scan.g2_obs[i].std_error;
    }

    double phi_st = scan.flux_st_free.at(0);
    double phi_sp = scan.flux_sp_free.at(0);
    const bool per_point = flux_source == FluxSource::stored;

    auto build_x = [&](double st, double sp) {
        std::vector<double> x(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            const double sum = per_point ? scan.flux_st_free[i] + scan.flux_sp_free[i] : st + sp;
            x[i] = sum * scan.tau_s[i];
        }
        return x;
    };

    PolyFitResult fit = polyfit_weighted(build_x(phi_st, phi_sp), y, sigma, fit_order);

    if (!per_point) {
        // redo the flux correction with the fitted g2 instead of the coherent
        // approximation, then refit once
        phi_st = flux_correct(scan.flux_st_obs.at(0), scan.tau_s.at(0), fit.coefficients[0]);
        phi_sp = flux_correct(scan.flux_sp_obs.at(0), scan.tau_s.at(0), fit.coefficients[0]);
        fit = polyfit_weighted(build_x(phi_st, phi_sp), y, sigma, fit_order);
    }
    result.flux_st_free = phi_st;
    result.flux_sp_free = phi_sp;
    result.coefficients = fit.coefficients;
    result.chi2_reduced = fit.dof > 0 ? fit.chi2 / fit.dof : 0.0;

    const int p = fit_order + 1;
    const double c0 = fit.coefficients[0];
    const double c1 = fit.coefficients[1];
    const double v00 = fit.covariance[0];
    const double v01 = fit.covariance[1];
    const double v11 = fit.covariance[static_cast<std::size_t>(p) + 1];

    result.g2_zero = c0;
    result.g2_err = std::sqrt(std::max(v00, 0.0));
    result.g3_zero = c0 * c0 - c1;
    result.g3_err =
        std::sqrt(std::max(4.0 * c0 * c0 * v00 + v11 - 4.0 * c0 * v01, 0.0));

    result.ratio_defined = std::abs(1.0 - c0) > 2.0 * result.g2_err;
    if (result.ratio_defined) {
        const double denom = 1.0 - c0;
        result.ratio = (1.0 - result.g3_zero) / denom;
        const double j0 = (-2.0 * c0 * denom + (1.0 - c0 * c0 + c1)) / (denom * denom);
        const double j1 = 1.0 / denom;
        result.ratio_err = std::sqrt(
            std::max(j0 * j0 * v00 + j1 * j1 * v11 + 2.0 * j0 * j1 * v01, 0.0));
    }
    return result;
}

CorrelationEstimate extract_generalized(const std::vector<double>& sum_flux_tau,
                                        const std::vector<CorrelationEstimate>& gN_obs,
                                        double g2_zero, double gN_zero, int fit_order) {
    if (sum_flux_tau.size() != gN_obs.size())
        throw config_error("extract_generalized: size mismatch");
    if (static_cast<int>(sum_flux_tau.size()) < fit_order + 2)
        throw config_error("extract_generalized: need at least fit_order + 2 points");

    std::vector<double> y, sigma;
    y.reserve(gN_obs.size());
    sigma.reserve(gN_obs.size());
    for (const auto& est : gN_obs) {
        y.push_back(est.value);
        sigma.push_back(est.std_error);
    }
    const PolyFitResult fit = polyfit_weighted(sum_flux_tau, y, sigma, fit_order);

    CorrelationEstimate out;
    out.value = g2_zero * gN_zero - fit.coefficients[1];
    out.std_error = std::sqrt(std::max(fit.covariance[static_cast<std::size_t>(fit_order) + 2],
                                       0.0));
    return out;
}

SecondDerivativeCheck second_derivative_check(const std::vector<double>& tau_s,
                                              const std::vector<double>& flux_obs_cps,
                                              double g3_zero,
                                              const CorrelationHistogram& g2_hist) {
    if (tau_s.size() != flux_obs_cps.size())
        throw config_error("second_derivative_check: size mismatch");
    if (tau_s.size() < 6)
        throw config_error("second_derivative_check: grid too coarse for a stable "
                           "second difference (need >= 6 points)");
    validate_grid(tau_s);
    if (tau_s.front() != 0.0)
        throw config_error("second_derivative_check: grid must start at tau = 0");

    // cubic fit absorbs the third-order term; 2*c2 is the curvature at 0
    const PolyFitResult fit = polyfit_weighted(tau_s, flux_obs_cps, {}, 3);
    const double phi = fit.coefficients[0];

    SecondDerivativeCheck check;
    check.lhs = 2.0 * fit.coefficients[2];
    check.rhs = 2.0 * phi * phi * phi * g3_zero +
                phi * phi * g2_slope_at_zero(g2_hist).slope;
    return check;
}

SnrPlan plan_snr(double total_time_s, double waiting_time_s, double bin_time_s, int order_n) {
    if (total_time_s <= 0 || waiting_time_s <= 0 || bin_time_s <= 0)
        throw config_error("plan_snr: times must be positive");
    if (order_n < 2) throw config_error("plan_snr: order must be >= 2");
    SnrPlan plan;
    plan.snr = std::sqrt((total_time_s / waiting_time_s) *
                         std::pow(bin_time_s / waiting_time_s, order_n - 1));
    plan.time_multiplier = waiting_time_s / bin_time_s;
    return plan;
}

} // namespace photoncorr
