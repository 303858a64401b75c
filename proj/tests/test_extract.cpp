// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "photoncorr/correlator.hpp"
#include "photoncorr/deadtime.hpp"
#include "photoncorr/errors.hpp"
#include "photoncorr/extract.hpp"
#include "photoncorr/rng.hpp"
#include "photoncorr/sources.hpp"
#include "testutil.hpp"

using namespace photoncorr;

namespace {

std::vector<double> tau_grid(double start, double stop, int n) {
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] = start + (stop - start) * i / (n - 1);
    return grid;
}

CoxSource pseudo_thermal(double rate) {
    CoxSource src;
    src.mean_rate_cps = rate;
    src.law = IntensityLaw::exponential;
    src.dwell_time_s = 10e-6;
    return src;
}

} // namespace

TEST_CASE("weighted polynomial fit recovers exact data and covariance scales") {
    const std::vector<double> x{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> y;
    for (const double v : x) y.push_back(1.5 - 0.7 * v + 0.2 * v * v);
    const auto fit = polyfit_weighted(x, y, {}, 2);
    CHECK(fit.coefficients[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.coefficients[1] == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(fit.coefficients[2] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(fit.chi2 < 1e-20);

    // weighted fit error of a constant: sigma/sqrt(sum of weights)
    const std::vector<double> ones{1.0, 1.0, 1.0, 1.0};
    const std::vector<double> sigma{0.1, 0.1, 0.1, 0.1};
    const auto cfit = polyfit_weighted({0, 1, 2, 3}, ones, sigma, 0);
    CHECK(std::sqrt(cfit.covariance[0]) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("noise-free synthetic scans invert exactly") {
    const auto grid = tau_grid(28e-9, 128e-9, 14);
    for (const double g2 : {0.9, 1.175, 1.45, 1.725, 2.0}) {
        for (const double g3 : {0.7, 2.025, 3.35, 4.675, 6.0}) {
            const auto scan = test::synthesize_scan(g2, g3, 2.8e6, 3.64e6, grid);
            const auto result = fit_scan(scan, 2, 0, FluxSource::stored);
            REQUIRE(result.g2_zero == doctest::Approx(g2).epsilon(1e-10));
            REQUIRE(result.g3_zero == doctest::Approx(g3).epsilon(1e-10));
        }
    }
}

TEST_CASE("poisson-noise synthetic scans invert within three sigma") {
    const auto grid = tau_grid(28e-9, 128e-9, 14);
    const double g2 = 1.3, g3 = 2.1, sigma_pt = 2e-3;
    Rng rng(404);
    auto scan = test::synthesize_scan(g2, g3, 2.8e6, 3.64e6, grid, sigma_pt);
    for (auto& est : scan.g2_obs) {
        // Box-Muller from two uniforms
        const double u1 = rng.next_double_open(), u2 = rng.next_double();
        est.value += sigma_pt * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    const auto result = fit_scan(scan, 2, 0, FluxSource::stored);
    CHECK(std::abs(result.g2_zero - g2) < 3.0 * result.g2_err);
    CHECK(std::abs(result.g3_zero - g3) < 3.0 * result.g3_err);
}

TEST_CASE("the iterated flux correction removes the coherent-approximation bias") {
    // strongly bunched source: the g2-aware correction matters
    const auto grid = tau_grid(28e-9, 128e-9, 14);
    const auto scan = test::synthesize_scan(2.0, 6.0, 2.8e6, 3.64e6, grid);
    const auto result = fit_scan(scan, 2, 0, FluxSource::refit_from_observed);
    // observed fluxes were synthesized with the true g2, so one iteration
    // lands close to the exact free fluxes
    CHECK(result.flux_st_free == doctest::Approx(2.8e6).epsilon(2e-3));
    CHECK(result.g2_zero == doctest::Approx(2.0).epsilon(2e-3));
    CHECK(result.g3_zero == doctest::Approx(6.0).epsilon(2e-2));
}

TEST_CASE("fit_scan validates its inputs") {
    const auto grid = tau_grid(0.0, 100e-9, 6);
    const auto scan = test::synthesize_scan(1.2, 1.5, 1e6, 1e6, grid);
    CHECK_THROWS_AS(fit_scan(scan, 2, 3), config_error);  // too few points
    CHECK_THROWS_AS(fit_scan(scan, 2, 99), config_error); // beyond the grid
    CHECK_THROWS_AS(fit_scan(scan, 0), config_error);     // no linear term
    const auto warned = fit_scan(scan, 3, 0, FluxSource::stored);
    CHECK_FALSE(warned.warnings.empty());
}

TEST_CASE("run_scan on split poisson is flat and extraction gives unity") {
    PoissonSource src{2e6};
    const auto raw = generate_poisson(src, 5.0, 2025);
    const auto [a, b] = beamsplit(raw, 0.5, 2026);
    const auto scan = run_scan(a, b, 0.0, tau_grid(0.0, 160e-9, 14), 1e-6);

    for (std::size_t i = 1; i < scan.tau_s.size(); ++i)
        CHECK(std::abs(scan.g2_obs[i].value - scan.g2_obs[0].value) <
              3.0 * (scan.g2_obs[i].std_error + scan.g2_obs[0].std_error));

    const auto result = fit_scan(scan);
    CHECK(std::abs(result.g2_zero - 1.0) < 3.0 * result.g2_err);
    CHECK(std::abs(result.g3_zero - 1.0) < 3.0 * result.g3_err);
    CHECK_FALSE(result.ratio_defined); // g2 = 1: the ratio has no meaning
}

TEST_CASE("scan accumulator merge reproduces the single-pass scan") {
    PoissonSource src{2e6};
    const auto raw1 = generate_poisson(src, 1.0, 8);
    const auto raw2 = generate_poisson(src, 1.0, 9);
    const auto [a1, b1] = beamsplit(raw1, 0.5, 10);
    const auto [a2, b2] = beamsplit(raw2, 0.5, 11);
    const auto grid = tau_grid(0.0, 128e-9, 6);

    ScanAccumulator whole(grid, 1e-6);
    whole.add_segment(a1, b1);
    whole.add_segment(a2, b2);

    ScanAccumulator part1(grid, 1e-6), part2(grid, 1e-6);
    part1.add_segment(a1, b1);
    part2.add_segment(a2, b2);
    part1.merge(part2);

    const auto sa = whole.finalize(0.0);
    const auto sb = part1.finalize(0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(sa.g2_obs[i].value == sb.g2_obs[i].value);
        CHECK(sa.g2_obs[i].n_pairs_or_triples == sb.g2_obs[i].n_pairs_or_triples);
    }
}

TEST_CASE("pseudo-thermal scan slope carries the g2^2 - g3 coefficient") {
    const auto raw = generate_cox(pseudo_thermal(3e6), 8.0, 500);
    const auto [a, b] = beamsplit(raw, 0.5, 501);
    const auto scan = run_scan(a, b, 0.0, tau_grid(0.0, 128e-9, 14), 250e-9);
    const auto result = fit_scan(scan);

    // g2 = 2, g3 = 6: slope coefficient g2^2 - g3 = -2 per unit (phi_st+phi_sp)tau
    CHECK(result.coefficients[1] < 0.0);
    CHECK(result.coefficients[1] == doctest::Approx(-2.0).epsilon(0.15));
    CHECK(result.g2_zero == doctest::Approx(2.0).epsilon(0.03));
    CHECK(result.g3_zero == doctest::Approx(6.0).epsilon(0.08));
    CHECK(result.ratio_defined);

    // detector exchange symmetry
    const auto swapped = fit_scan(run_scan(b, a, 0.0, tau_grid(0.0, 128e-9, 14), 250e-9));
    CHECK(std::abs(swapped.g3_zero - result.g3_zero) <
          3.0 * (swapped.g3_err + result.g3_err));

    // intercept agrees with the direct estimator on the unfiltered streams
    const auto direct = g2_zero(a, b, 250e-9);
    CHECK(std::abs(result.g2_zero - direct.value) <
          3.0 * (result.g2_err + direct.std_error) + 0.01);
}

TEST_CASE("generalized extraction reduces to the pairwise inversion at N = 2") {
    const auto grid = tau_grid(28e-9, 128e-9, 14);
    const auto scan = test::synthesize_scan(1.4, 2.2, 2e6, 3e6, grid);
    const auto fitted = fit_scan(scan, 2, 0, FluxSource::stored);

    std::vector<double> x;
    for (std::size_t i = 0; i < grid.size(); ++i)
        x.push_back((scan.flux_st_free[i] + scan.flux_sp_free[i]) * grid[i]);
    const auto g3 = extract_generalized(x, scan.g2_obs, fitted.g2_zero, fitted.g2_zero);
    CHECK(g3.value == doctest::Approx(fitted.g3_zero).epsilon(1e-9));
}

TEST_CASE("generalized extraction is unity for poisson at any order") {
    // synthetic: g'N flat at 1, any flux grid
    std::vector<double> x;
    std::vector<CorrelationEstimate> obs;
    for (int i = 0; i < 10; ++i) {
        x.push_back(0.05 * i);
        obs.push_back({1.0, 1e-3, 1e-7, 1000});
    }
    const auto gN1 = extract_generalized(x, obs, 1.0, 1.0);
    CHECK(gN1.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pseudo-thermal generalized extraction matches the direct triple oracle") {
    const auto raw = generate_cox(pseudo_thermal(3e6), 8.0, 600);
    const auto [first, rest] = beamsplit(raw, 1.0 / 3.0, 601);
    const auto [second, third] = beamsplit(rest, 0.5, 602);

    const auto direct = g3_zero_direct(first, second, third, 250e-9);

    const auto [a, b] = beamsplit(raw, 0.5, 603);
    const auto scan = run_scan(a, b, 0.0, tau_grid(0.0, 128e-9, 14), 250e-9);
    const auto result = fit_scan(scan);
    CHECK(std::abs(result.g3_zero - direct.value) <
          3.0 * (result.g3_err + direct.std_error) + 0.1);
}

TEST_CASE("second derivative check on poisson approaches 2 phi^3") {
    const double phi = 2e6;
    PoissonSource src{phi};
    const auto raw = generate_poisson(src, 6.0, 700);
    const double span = raw.span_seconds();
    const auto grid = tau_grid(0.0, 100e-9, 11);
    std::vector<double> flux;
    for (const double tau : grid)
        flux.push_back(static_cast<double>(apply_dead_time(raw, tau).ticks.size()) / span);

    const auto [a, b] = beamsplit(raw, 0.5, 701);
    const auto hist = g2_histogram(a, b, 200e-9, 4e-6);
    const auto check = second_derivative_check(grid, flux, 1.0, hist);
    CHECK(check.rhs == doctest::Approx(2.0 * phi * phi * phi).epsilon(0.02));
    CHECK(check.lhs == doctest::Approx(check.rhs).epsilon(0.10));
}

TEST_CASE("second derivative check validates the grid") {
    const CorrelationHistogram dummy;
    CHECK_THROWS_AS(second_derivative_check({0.0, 1e-9}, {1.0, 1.0}, 1.0, dummy), config_error);
    CHECK_THROWS_AS(
        second_derivative_check({1e-9, 2e-9, 3e-9, 4e-9, 5e-9, 6e-9},
                               {1.0, 1.0, 1.0, 1.0, 1.0, 1.0}, 1.0, dummy),
        config_error);
}

TEST_CASE("zero flux gives a vanishing second-derivative relation") {
    CorrelationHistogram flat;
    flat.bin_time_s = 1e-9;
    for (int k = -5; k <= 5; ++k) {
        flat.delays_s.push_back(k * 1e-9);
        flat.values.push_back(1.0);
        flat.errors.push_back(0.1);
    }
    const auto grid = tau_grid(0.0, 100e-9, 8);
    const std::vector<double> flux(grid.size(), 0.0);
    const auto check = second_derivative_check(grid, flux, 1.0, flat);
    CHECK(check.lhs == doctest::Approx(0.0));
    CHECK(check.rhs == doctest::Approx(0.0));
}

TEST_CASE("snr planner follows the stated formula") {
    const auto plan2 = plan_snr(1.0, 1e-6, 1e-6, 2);
    CHECK(plan2.snr == doctest::Approx(1000.0));
    CHECK(plan2.time_multiplier == doctest::Approx(1.0));

    const auto plan3 = plan_snr(1.0, 1e-6, 1e-6, 3);
    CHECK(plan3.snr == doctest::Approx(1000.0));

    const auto plan = plan_snr(1.0, 1e-6, 10e-9, 3);
    CHECK(plan.time_multiplier == doctest::Approx(100.0));
    CHECK(plan.snr == doctest::Approx(std::sqrt(1e6 * 1e-2 * 1e-2)));

    CHECK_THROWS_AS(plan_snr(-1.0, 1e-6, 1e-9, 2), config_error);
    CHECK_THROWS_AS(plan_snr(1.0, 1e-6, 1e-9, 1), config_error);
}

TEST_CASE("linear-regime guard fires on an overloaded scan") {
    PoissonSource src{8e6};
    const auto raw = generate_poisson(src, 0.5, 900);
    const auto [a, b] = beamsplit(raw, 0.5, 901);
    // phi ~ 4 Mcps, tau up to 150 ns -> phi*tau ~ 0.6 corrected: hard error
    CHECK_THROWS_AS(run_scan(a, b, 0.0, tau_grid(0.0, 150e-9, 8), 1e-6), regime_error);

    // milder overload only warns
    const auto scan = run_scan(a, b, 0.0, tau_grid(0.0, 40e-9, 8), 1e-6);
    CHECK_FALSE(scan.warnings.empty());
}
