// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "photoncorr/correlator.hpp"
#include "photoncorr/errors.hpp"
#include "photoncorr/qmt.hpp"
#include "photoncorr/rng.hpp"
#include "photoncorr/sources.hpp"
#include "testutil.hpp"

using namespace photoncorr;

TEST_CASE("rng helpers stay in range and are deterministic") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
        const double u = a.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = b.next_double();
        CHECK(u == v);
    }
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("poisson count lands within the CLT band") {
    PoissonSource src{1e6};
    const auto s = generate_poisson(src, 1.0, 7);
    const double n = static_cast<double>(s.ticks.size());
    CHECK(std::abs(n - 1e6) < 5.0 * std::sqrt(1e6));
}

TEST_CASE("near-zero span gives a near-empty stream") {
    PoissonSource src{1e6};
    const auto s = generate_poisson(src, 1e-9, 7);
    CHECK(s.ticks.size() < 10);
    CHECK_THROWS_AS(generate_poisson(src, 0.0, 7), config_error);
}

TEST_CASE("identical seeds reproduce identical streams") {
    PoissonSource src{2e6};
    const auto a = generate_poisson(src, 0.5, 99);
    const auto b = generate_poisson(src, 0.5, 99);
    CHECK(a.ticks == b.ticks);

    CoxSource cox;
    cox.mean_rate_cps = 1e6;
    cox.law = IntensityLaw::exponential;
    cox.dwell_time_s = 10e-6;
    CHECK(generate_cox(cox, 0.5, 5).ticks == generate_cox(cox, 0.5, 5).ticks);

    MicromaserSource mm;
    mm.atom_rate_cps = 5e8;
    mm.detection_efficiency = 0.5;
    CHECK(generate_micromaser(mm, 2e-3, 3).ticks == generate_micromaser(mm, 2e-3, 3).ticks);
}

TEST_CASE("constant intensity law reduces to poisson statistics") {
    CoxSource src;
    src.mean_rate_cps = 2e6;
    src.law = IntensityLaw::constant;
    const auto raw = generate_cox(src, 2.0, 12);
    const auto [a, b] = beamsplit(raw, 0.5, 13);
    const auto est = g2_zero(a, b, 500e-9);
    CHECK(std::abs(est.value - 1.0) < 3.0 * est.std_error);
}

TEST_CASE("cox moment oracle") {
    CoxSource exp_src;
    exp_src.mean_rate_cps = 1e6;
    exp_src.law = IntensityLaw::exponential;
    CHECK(cox_intensity_moment(exp_src, 2) / std::pow(cox_intensity_moment(exp_src, 1), 2) ==
          doctest::Approx(2.0));
    CHECK(cox_intensity_moment(exp_src, 3) / std::pow(cox_intensity_moment(exp_src, 1), 3) ==
          doctest::Approx(6.0));

    CoxSource two;
    two.law = IntensityLaw::two_state;
    two.level1_cps = 0.0;
    two.level2_cps = 2e6;
    two.rate12_hz = 1e5;
    two.rate21_hz = 1e5;
    CHECK(cox_intensity_moment(two, 1) == doctest::Approx(1e6));
    CHECK(cox_intensity_moment(two, 2) / 1e12 == doctest::Approx(2.0));
    CHECK(cox_intensity_moment(two, 3) / 1e18 == doctest::Approx(4.0));
}

TEST_CASE("exponential-intensity correlations converge to the moment ratios") {
    CoxSource src;
    src.mean_rate_cps = 3e6;
    src.law = IntensityLaw::exponential;
    src.dwell_time_s = 10e-6;
    const auto raw = generate_cox(src, 6.0, 21);
    const auto [first, rest] = beamsplit(raw, 1.0 / 3.0, 22);
    const auto [second, third] = beamsplit(rest, 0.5, 23);

    const auto g2 = g2_zero(first, second, 200e-9);
    CHECK(std::abs(g2.value - 2.0) < std::max(3.0 * g2.std_error, 0.05));
    const auto g3 = g3_zero_direct(first, second, third, 200e-9);
    CHECK(std::abs(g3.value - 6.0) < std::max(3.0 * g3.std_error, 0.3));
}

TEST_CASE("beamsplit partitions the input") {
    PoissonSource src{1e7};
    const auto raw = generate_poisson(src, 0.1, 31);
    const auto [a, b] = beamsplit(raw, 0.3, 32);
    CHECK(a.ticks.size() + b.ticks.size() == raw.ticks.size());
    std::vector<std::uint64_t> merged;
    merged.reserve(raw.ticks.size());
    std::merge(a.ticks.begin(), a.ticks.end(), b.ticks.begin(), b.ticks.end(),
               std::back_inserter(merged));
    CHECK(merged == raw.ticks);

    const double n = static_cast<double>(raw.ticks.size());
    const double sigma = std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(static_cast<double>(a.ticks.size()) - 0.3 * n) < 5.0 * sigma);
    CHECK_THROWS_AS(beamsplit(raw, 0.0, 1), config_error);
    CHECK_THROWS_AS(beamsplit(raw, 1.0, 1), config_error);
}

TEST_CASE("beamsplitting preserves the normalized correlation") {
    CoxSource src;
    src.mean_rate_cps = 2e6;
    src.law = IntensityLaw::exponential;
    src.dwell_time_s = 10e-6;
    const auto raw = generate_cox(src, 4.0, 41);
    for (const double p : {0.5, 0.44}) {
        const auto [a, b] = beamsplit(raw, p, 43);
        const auto est = g2_zero(a, b, 200e-9);
        CHECK(std::abs(est.value - 2.0) < std::max(3.0 * est.std_error, 0.06));
    }
}

TEST_CASE("micromaser with zero coupling decays to silence") {
    MicromaserSource src;
    src.coupling_g_rad_s = 0.0;
    src.atom_rate_cps = 1e9;
    src.n_initial = 50;
    const auto s = generate_micromaser(src, 1.0, 17);
    // every stored photon leaves within a few cavity lifetimes; nothing after
    CHECK(s.ticks.size() <= 50);
    if (!s.ticks.empty())
        CHECK(s.ticks.back() < s.span_ticks / 100);
}

TEST_CASE("micromaser occupation histogram matches the steady state") {
    MicromaserSource src;
    src.atom_rate_cps = 1.5e9; // a moderately pumped point
    src.detection_efficiency = 1.0;
    const double kappa = 2.0 * 3.14159265358979323846 * src.cavity_linewidth_hz;
    const auto dist = steady_state_auto(src.coupling_g_rad_s, src.t_int_s, kappa,
                                        src.atom_rate_cps);

    // sample well apart so the draws are effectively independent
    const auto run = run_micromaser(src, 0.3, 19, 1, 30e-6);
    REQUIRE(run.n_samples.size() == 10000);

    // fixed-width bins around the mean, tails merged
    const double sd = std::sqrt((dist.g2_zero - 1.0) * dist.mean_n * dist.mean_n + dist.mean_n);
    const int lo = static_cast<int>(dist.mean_n - 2.5 * sd);
    const int hi = static_cast<int>(dist.mean_n + 2.5 * sd);
    const int n_bins = 12;
    const double width = static_cast<double>(hi - lo) / n_bins;
    std::vector<double> expected(n_bins + 2, 0.0), observed(n_bins + 2, 0.0);
    for (std::size_t n = 0; n < dist.p.size(); ++n) {
        const int bin = n < static_cast<std::size_t>(lo)
                            ? 0
                            : (n >= static_cast<std::size_t>(hi)
                                   ? n_bins + 1
                                   : 1 + static_cast<int>((static_cast<double>(n) - lo) / width));
        expected[static_cast<std::size_t>(bin)] += dist.p[n];
    }
    for (const auto n : run.n_samples) {
        const int bin = n < static_cast<std::uint32_t>(lo)
                            ? 0
                            : (n >= static_cast<std::uint32_t>(hi)
                                   ? n_bins + 1
                                   : 1 + static_cast<int>((static_cast<double>(n) - lo) / width));
        observed[static_cast<std::size_t>(bin)] += 1.0;
    }
    const double total = static_cast<double>(run.n_samples.size());
    double chi2 = 0.0;
    int dof = 0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        const double e = expected[k] * total;
        if (e < 5.0) continue;
        chi2 += (observed[k] - e) * (observed[k] - e) / e;
        ++dof;
    }
    --dof;
    REQUIRE(dof >= 10);
    // 1% critical values for chi-square, dof 10..15
    const double critical[] = {23.209, 24.725, 26.217, 27.688, 29.141, 30.578};
    REQUIRE(dof <= 15);
    CHECK(chi2 < critical[dof - 10]);
}

TEST_CASE("micromaser stream is sub-poissonian where theory says so") {
    // pumped onto the falling edge of the first gain lobe
    MicromaserSource src;
    src.atom_rate_cps = 2.0e9;
    src.detection_efficiency = 0.05;
    const double kappa = 2.0 * 3.14159265358979323846 * src.cavity_linewidth_hz;
    const auto dist = steady_state_auto(src.coupling_g_rad_s, src.t_int_s, kappa,
                                        src.atom_rate_cps);
    REQUIRE(dist.q_mandel < -0.1);

    const auto stream = generate_micromaser(src, 1.0, 23);
    const auto [a, b] = beamsplit(stream, 0.5, 24);
    const auto est = g2_zero(a, b, 50e-9);
    const double expected = 1.0 + dist.q_mandel / dist.mean_n;
    CHECK(est.value < 1.0);
    CHECK(std::abs(est.value - expected) < 3.0 * est.std_error);
}
