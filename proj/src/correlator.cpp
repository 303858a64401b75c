// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "photoncorr/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "photoncorr/errors.hpp"

namespace photoncorr {

namespace detail {

std::uint64_t bin_ticks(double bin_time_s, std::int64_t resolution_ps) {
    if (bin_time_s <= 0.0) throw config_error("bin time must be positive");
    const double ticks = bin_time_s * 1e12 / static_cast<double>(resolution_ps);
    const std::uint64_t t = static_cast<std::uint64_t>(std::llround(ticks));
    if (t == 0) throw config_error("bin time below one tick");
    return t;
}

std::uint64_t count_pairs_within(const std::vector<std::uint64_t>& a,
                                 const std::vector<std::uint64_t>& b,
                                 std::uint64_t half_width_ticks) {
    std::uint64_t count = 0;
    std::size_t lo = 0, hi = 0;
    for (const auto t : a) {
        const std::uint64_t lo_t = t > half_width_ticks ? t - half_width_ticks : 0;
        const std::uint64_t hi_t = t + half_width_ticks;
        while (lo < b.size() && b[lo] < lo_t) ++lo;
        if (hi < lo) hi = lo;
        while (hi < b.size() && b[hi] <= hi_t) ++hi;
        count += hi - lo;
    }
    return count;
}

} // namespace detail

namespace {

void check_compatible(const TimeTagStream& a, const TimeTagStream& b, const char* what) {
    if (a.resolution_ps != b.resolution_ps)
        throw config_error(std::string(what) + ": streams differ in resolution");
    if (a.span_ticks != b.span_ticks)
        throw config_error(std::string(what) + ": streams differ in span");
    if (a.ticks.empty() || b.ticks.empty())
        throw config_error(std::string(what) + ": empty stream");
}

// Centered zero-delay window |d| <= h. Compared to the nominal bin width this
// under-covers by at most one tick, a relative bias of 1/t_b_ticks.
std::uint64_t half_width(std::uint64_t t_b_ticks) { return (t_b_ticks - 1) / 2; }

void histogram_chunk(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                     std::size_t i0, std::size_t i1, std::uint64_t t_b_ticks, std::int64_t n_side,
                     std::vector<std::uint64_t>& bins) {
    const std::uint64_t reach =
        static_cast<std::uint64_t>(n_side) * t_b_ticks + t_b_ticks / 2 + 1;
    const double inv_tb = 1.0 / static_cast<double>(t_b_ticks);
    std::size_t lo = 0;
    if (i0 > 0) {
        const std::uint64_t first = a[i0];
        lo = static_cast<std::size_t>(
            std::lower_bound(b.begin(), b.end(), first > reach ? first - reach : 0) - b.begin());
    }
    for (std::size_t i = i0; i < i1; ++i) {
        const std::uint64_t t = a[i];
        const std::uint64_t lo_t = t > reach ? t - reach : 0;
        while (lo < b.size() && b[lo] < lo_t) ++lo;
        for (std::size_t j = lo; j < b.size() && b[j] <= t + reach; ++j) {
            const double d = static_cast<double>(static_cast<std::int64_t>(b[j]) -
                                                 static_cast<std::int64_t>(t));
            const std::int64_t k = std::llround(d * inv_tb);
            if (k >= -n_side && k <= n_side) ++bins[static_cast<std::size_t>(k + n_side)];
        }
    }
}

} // namespace

CorrelationHistogram g2_histogram(const TimeTagStream& start, const TimeTagStream& stop,
                                  double bin_time_s, double max_delay_s, unsigned n_threads) {
    check_compatible(start, stop, "g2_histogram");
    const std::uint64_t t_b = detail::bin_ticks(bin_time_s, start.resolution_ps);
    const std::uint64_t max_delay_ticks =
        static_cast<std::uint64_t>(std::llround(max_delay_s * 1e12 /
                                                static_cast<double>(start.resolution_ps)));
    const std::int64_t n_side = static_cast<std::int64_t>(max_delay_ticks / t_b);
    if (n_side < 1) throw config_error("g2_histogram: max_delay below one bin");

    const std::size_t n_bins = static_cast<std::size_t>(2 * n_side + 1);
    std::vector<std::uint64_t> bins(n_bins, 0);

    const std::size_t n = start.ticks.size();
    if (n_threads <= 1 || n < 4096) {
        histogram_chunk(start.ticks, stop.ticks, 0, n, t_b, n_side, bins);
    } else {
        const std::size_t chunks = n_threads;
        std::vector<std::vector<std::uint64_t>> partial(chunks,
                                                        std::vector<std::uint64_t>(n_bins, 0));
        std::vector<std::thread> workers;
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t i0 = n * c / chunks;
            const std::size_t i1 = n * (c + 1) / chunks;
            workers.emplace_back([&, c, i0, i1] {
                histogram_chunk(start.ticks, stop.ticks, i0, i1, t_b, n_side, partial[c]);
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& p : partial)
            for (std::size_t k = 0; k < n_bins; ++k) bins[k] += p[k];
    }

    const double span = static_cast<double>(start.span_ticks);
    const double norm = span / (static_cast<double>(start.ticks.size()) *
                                static_cast<double>(stop.ticks.size()) *
                                static_cast<double>(t_b));
    CorrelationHistogram hist;
    hist.bin_time_s = static_cast<double>(t_b) * static_cast<double>(start.resolution_ps) * 1e-12;
    hist.delays_s.resize(n_bins);
    hist.values.resize(n_bins);
    hist.errors.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        const double c = static_cast<double>(bins[k]);
        hist.delays_s[k] = static_cast<double>(static_cast<std::int64_t>(k) - n_side) *
                           hist.bin_time_s;
        hist.values[k] = c * norm;
        hist.errors[k] = std::sqrt(std::max(c, 1.0)) * norm;
    }
    return hist;
}

CorrelationEstimate g2_zero(const TimeTagStream& start, const TimeTagStream& stop,
                            double bin_time_s) {
    check_compatible(start, stop, "g2_zero");
    const std::uint64_t t_b = detail::bin_ticks(bin_time_s, start.resolution_ps);
    const std::uint64_t c = detail::count_pairs_within(start.ticks, stop.ticks, half_width(t_b));

    const double norm = static_cast<double>(start.span_ticks) /
                        (static_cast<double>(start.ticks.size()) *
                         static_cast<double>(stop.ticks.size()) * static_cast<double>(t_b));
    CorrelationEstimate est;
    est.bin_time_s = static_cast<double>(t_b) * static_cast<double>(start.resolution_ps) * 1e-12;
    est.n_pairs_or_triples = c;
    est.value = static_cast<double>(c) * norm;
    est.std_error = std::sqrt(std::max(static_cast<double>(c), 1.0)) * norm;
    return est;
}

CorrelationEstimate g3_zero_direct(const TimeTagStream& s1, const TimeTagStream& s2,
                                   const TimeTagStream& s3, double bin_time_s) {
    check_compatible(s1, s2, "g3_zero_direct");
    check_compatible(s1, s3, "g3_zero_direct");
    const std::uint64_t t_b = detail::bin_ticks(bin_time_s, s1.resolution_ps);
    const std::uint64_t h = half_width(t_b);

    std::uint64_t count = 0;
    std::size_t lo2 = 0, hi2 = 0, lo3 = 0, hi3 = 0;
    const auto& b = s2.ticks;
    const auto& c = s3.ticks;
    for (const auto t : s1.ticks) {
        const std::uint64_t lo_t = t > h ? t - h : 0;
        const std::uint64_t hi_t = t + h;
        while (lo2 < b.size() && b[lo2] < lo_t) ++lo2;
        if (hi2 < lo2) hi2 = lo2;
        while (hi2 < b.size() && b[hi2] <= hi_t) ++hi2;
        while (lo3 < c.size() && c[lo3] < lo_t) ++lo3;
        if (hi3 < lo3) hi3 = lo3;
        while (hi3 < c.size() && c[hi3] <= hi_t) ++hi3;
        count += static_cast<std::uint64_t>(hi2 - lo2) * static_cast<std::uint64_t>(hi3 - lo3);
    }

    const double span = static_cast<double>(s1.span_ticks);
    const double norm = span * span /
                        (static_cast<double>(s1.ticks.size()) *
                         static_cast<double>(s2.ticks.size()) *
                         static_cast<double>(s3.ticks.size()) *
                         static_cast<double>(t_b) * static_cast<double>(t_b));
    CorrelationEstimate est;
    est.bin_time_s = static_cast<double>(t_b) * static_cast<double>(s1.resolution_ps) * 1e-12;
    est.n_pairs_or_triples = count;
    est.value = static_cast<double>(count) * norm;
    est.std_error = std::sqrt(std::max(static_cast<double>(count), 1.0)) * norm;
    return est;
}

SlopeEstimate g2_slope_at_zero(const CorrelationHistogram& hist, int n_bins) {
    if (n_bins < 2) throw config_error("g2_slope_at_zero: need at least 2 fit bins");
    // positive-delay bins start one past the center
    const std::size_t center = hist.delays_s.size() / 2;
    if (hist.delays_s.size() < center + 1 + static_cast<std::size_t>(n_bins))
        throw config_error("g2_slope_at_zero: insufficient bins");

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (int i = 1; i <= n_bins; ++i) {
        const std::size_t k = center + static_cast<std::size_t>(i);
        const double x = hist.delays_s[k];
        const double y = hist.values[k];
        const double sigma = hist.errors[k];
        const double w = sigma > 0 ? 1.0 / (sigma * sigma) : 1.0;
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
    }
    const double delta = sw * swxx - swx * swx;
    if (delta <= 0) throw config_error("g2_slope_at_zero: degenerate fit");
    SlopeEstimate s;
    s.slope = (sw * swxy - swx * swy) / delta;
    s.std_error = std::sqrt(sw / delta);
    return s;
}

} // namespace photoncorr
