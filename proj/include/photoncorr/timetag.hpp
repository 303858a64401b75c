// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace photoncorr {

enum class StreamFormat { binary, csv };

/// One channel of photon arrival times, quantized to integer ticks.
///
/// Ticks are sorted non-decreasing and lie in [0, span_ticks). Streams are
/// immutable after construction and safe to share across threads read-only.
struct TimeTagStream {
    std::int64_t resolution_ps = 1; ///< picoseconds per tick
    std::uint16_t channel = 0;
    std::uint64_t span_ticks = 0; ///< observation window [0, span_ticks)
    std::vector<std::uint64_t> ticks;

    std::size_t size() const { return ticks.size(); }
    double span_seconds() const {
        return static_cast<double>(span_ticks) * static_cast<double>(resolution_ps) * 1e-12;
    }
    double ticks_per_second() const { return 1e12 / static_cast<double>(resolution_ps); }

    /// Throws config_error if any invariant is violated.
    void validate() const;
};

struct StreamStats {
    std::uint64_t count = 0;
    double flux_cps = 0.0;
    std::optional<double> mean_waiting_time_s; ///< absent when count == 0
};

StreamStats stats(const TimeTagStream& stream);

TimeTagStream read_stream(const std::filesystem::path& path, StreamFormat format);
void write_stream(const TimeTagStream& stream, const std::filesystem::path& path,
                  StreamFormat format);

} // namespace photoncorr
