// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace photoncorr::cli {

struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr; ///< optional, empty for none
    std::string color = "#1f77b4";
    bool line = false;
    bool points = true;
    std::string label;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    std::optional<double> reference_y; ///< dashed horizontal reference line
    std::string provenance;            ///< config hash comment
};

/// Static SVG scatter/line plot. No timestamps or other varying content:
/// identical inputs give byte-identical files.
void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec);

} // namespace photoncorr::cli
