// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "photoncorr/errors.hpp"

namespace photoncorr::cli {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 78, kRight = 24, kTop = 40, kBottom = 56;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Axis {
    double lo = 0, hi = 1;
    double to_px(double v, double px_lo, double px_hi) const {
        const double f = (v - lo) / (hi - lo);
        return px_lo + f * (px_hi - px_lo);
    }
};

Axis make_axis(double lo, double hi) {
    if (!(lo < hi)) {
        const double pad = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 1.0;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.08;
    return {lo - pad, hi + pad};
}

std::vector<double> ticks(const Axis& axis, int target = 5) {
    const double span = axis.hi - axis.lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (const double m : {1.0, 2.0, 5.0, 10.0})
        if (raw / mag <= m) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double v = std::ceil(axis.lo / step) * step; v <= axis.hi + step * 1e-9; v += step)
        out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    return out;
}

} // namespace

void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            const double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
            y_min = std::min(y_min, s.y[i] - e);
            y_max = std::max(y_max, s.y[i] + e);
        }
    if (!std::isfinite(x_min)) throw config_error("svg plot: no data");
    if (spec.reference_y) {
        y_min = std::min(y_min, *spec.reference_y);
        y_max = std::max(y_max, *spec.reference_y);
    }
    const Axis ax = make_axis(x_min, x_max);
    const Axis ay = make_axis(y_min, y_max);

    auto px = [&](double v) { return ax.to_px(v, kLeft, kWidth - kRight); };
    auto py = [&](double v) { return ay.to_px(v, kHeight - kBottom, kTop); };

    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    if (!spec.provenance.empty()) out << "<!-- config_hash=" << spec.provenance << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    out << "<g font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\">\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << spec.title << "</text>\n";
    out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 14
        << "\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
    out << "<text x=\"20\" y=\"" << (kTop + kHeight - kBottom) / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << (kTop + kHeight - kBottom) / 2 << ")\">" << spec.y_label << "</text>\n";

    for (const double t : ticks(ax)) {
        const double x = px(t);
        out << "<line x1=\"" << x << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << x
            << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"#222\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << kHeight - kBottom + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(t) << "</text>\n";
        out << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\""
            << kHeight - kBottom << "\" stroke=\"#eee\"/>\n";
    }
    for (const double t : ticks(ay)) {
        const double y = py(t);
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft
            << "\" y2=\"" << y << "\" stroke=\"#222\"/>\n";
        out << "<text x=\"" << kLeft - 9 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(t) << "</text>\n";
        out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kWidth - kRight
            << "\" y2=\"" << y << "\" stroke=\"#eee\"/>\n";
    }
    out << "</g>\n";

    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
        << kWidth - kLeft - kRight << "\" height=\"" << kHeight - kTop - kBottom
        << "\" fill=\"none\" stroke=\"#222\"/>\n";

    if (spec.reference_y) {
        const double y = py(*spec.reference_y);
        out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kWidth - kRight
            << "\" y2=\"" << y << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
    }

    double legend_y = kTop + 14;
    for (const auto& s : spec.series) {
        if (s.line && s.x.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            out << "\"/>\n";
        }
        if (!s.yerr.empty()) {
            for (std::size_t i = 0; i < s.x.size() && i < s.yerr.size(); ++i) {
                const double x = px(s.x[i]);
                out << "<line x1=\"" << x << "\" y1=\"" << py(s.y[i] - s.yerr[i]) << "\" x2=\""
                    << x << "\" y2=\"" << py(s.y[i] + s.yerr[i]) << "\" stroke=\"" << s.color
                    << "\"/>\n";
            }
        }
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                    << "\" r=\"2.6\" fill=\"" << s.color << "\"/>\n";
        }
        if (!s.label.empty()) {
            out << "<circle cx=\"" << kWidth - kRight - 150 << "\" cy=\"" << legend_y - 4
                << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            out << "<text x=\"" << kWidth - kRight - 140 << "\" y=\"" << legend_y
                << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">" << s.label
                << "</text>\n";
            legend_y += 16;
        }
    }
    out << "</svg>\n";
    out.flush();
    if (!out) throw config_error(path.string() + ": write failed");
}

} // namespace photoncorr::cli
