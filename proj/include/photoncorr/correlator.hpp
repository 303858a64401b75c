// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "photoncorr/timetag.hpp"

namespace photoncorr {

/// A correlation value with its Poisson-propagated standard error.
struct CorrelationEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double bin_time_s = 0.0; ///< realized bin width (whole ticks)
    std::uint64_t n_pairs_or_triples = 0;
};

struct CorrelationHistogram {
    std::vector<double> delays_s; ///< bin centers, symmetric around zero
    std::vector<double> values;
    std::vector<double> errors;
    double bin_time_s = 0.0;
};

/// Normalized two-photon cross-correlation vs delay (stop minus start).
/// All start-stop pairs within max_delay are counted; bin k holds
/// C(k) * T / (N_start * N_stop * t_b). Streams must share resolution and
/// span. Partitioned across threads when n_threads > 1; counts are integer
/// sums, so results are identical to the sequential scan.
CorrelationHistogram g2_histogram(const TimeTagStream& start, const TimeTagStream& stop,
                                  double bin_time_s, double max_delay_s,
                                  unsigned n_threads = 1);

/// The zero-delay bin alone: pairs with |delay| < t_b/2.
CorrelationEstimate g2_zero(const TimeTagStream& start, const TimeTagStream& stop,
                            double bin_time_s);

/// Brute-force three-detector zero-delay correlation: triples where both the
/// s2 and s3 events fall within |delay| < t_b/2 of an s1 event, normalized as
/// C * T^2 / (N1 N2 N3 t_b^2).
CorrelationEstimate g3_zero_direct(const TimeTagStream& s1, const TimeTagStream& s2,
                                   const TimeTagStream& s3, double bin_time_s);

struct SlopeEstimate {
    double slope = 0.0; ///< d g2 / dt toward zero delay, per second
    double std_error = 0.0;
};

/// Slope of g2(t) at t -> 0+ from a weighted linear fit through the first
/// n_bins positive-delay bins. The zero bin is excluded: it averages |t| and
/// would bias a one-sided slope.
SlopeEstimate g2_slope_at_zero(const CorrelationHistogram& hist, int n_bins = 3);

namespace detail {
/// Pairs (i, j) with |b[j] - a[i]| <= half_width_ticks; merge scan, O(N + M).
std::uint64_t count_pairs_within(const std::vector<std::uint64_t>& a,
                                 const std::vector<std::uint64_t>& b,
                                 std::uint64_t half_width_ticks);
std::uint64_t bin_ticks(double bin_time_s, std::int64_t resolution_ps);
} // namespace detail

} // namespace photoncorr
