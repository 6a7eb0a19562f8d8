/**
 * @file chart.hpp
 * @brief Static single-file SVG summary of a sweep: mean NG and mean E
 * against the swept axis, with +-1 std bars.
 *
 * Every data marker carries its raw values in data-x / data-y attributes
 * so the plotted points can be checked against the aggregate CSV.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sonfis/sweep.hpp"

namespace sonfis {

struct ChartFrame {
    double left = 70, top = 40, width = 560, height = 220;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

    double px(double x) const { return left + (x - xmin) / (xmax - xmin) * width; }
    double py(double y) const { return top + height - (y - ymin) / (ymax - ymin) * height; }
};

namespace detail {

inline void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double c = std::isfinite(lo) ? lo : 0.0;
        lo = c - 0.5;
        hi = c + 0.5;
        return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

inline const char* series_color(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    return colors[i % 7];
}

}  // namespace detail

/**
 * Two stacked panels (NG on top, E below). When the other axis has several
 * values, one series per value is drawn.
 */
inline std::string render_chart(const std::vector<SweepAggregate>& aggregates, Axis axis,
                                const std::string& title = "sweep summary") {
    std::map<double, std::vector<const SweepAggregate*>> series;
    for (const auto& a : aggregates) series[axis == Axis::Alpha ? a.beta : a.alpha].push_back(&a);
    auto xval = [&](const SweepAggregate& a) { return axis == Axis::Alpha ? a.alpha : a.beta; };
    const char* xname = axis == Axis::Alpha ? "alpha" : "beta";
    const char* other = axis == Axis::Alpha ? "beta" : "alpha";

    double xmin = INFINITY, xmax = -INFINITY;
    for (const auto& a : aggregates) {
        xmin = std::min(xmin, xval(a));
        xmax = std::max(xmax, xval(a));
    }
    detail::pad_range(xmin, xmax);

    std::ostringstream svg;
    const double total_h = 2 * 220 + 3 * 40 + 40;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"760\" height=\"" << total_h
        << "\" viewBox=\"0 0 760 " << total_h << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"760\" height=\"" << total_h << "\" fill=\"white\"/>\n"
        << "<text x=\"380\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";

    struct Panel {
        const char* name;
        const char* label;
        double SweepAggregate::*mean;
        double SweepAggregate::*sd;
    };
    const Panel panels[] = {{"ng", "mean NG", &SweepAggregate::mean_ng, &SweepAggregate::std_ng},
                            {"e", "mean E", &SweepAggregate::mean_e, &SweepAggregate::std_e}};

    for (std::size_t p = 0; p < 2; ++p) {
        const auto& panel = panels[p];
        ChartFrame f;
        f.top = 50 + p * 260.0;
        f.xmin = xmin;
        f.xmax = xmax;
        double ymin = INFINITY, ymax = -INFINITY;
        for (const auto& a : aggregates) {
            const double m = a.*panel.mean, s = std::isfinite(a.*panel.sd) ? a.*panel.sd : 0.0;
            if (!std::isfinite(m)) continue;
            ymin = std::min(ymin, m - s);
            ymax = std::max(ymax, m + s);
        }
        if (!std::isfinite(ymin)) ymin = ymax = 0.0;
        detail::pad_range(ymin, ymax);
        f.ymin = ymin;
        f.ymax = ymax;

        svg << "<g class=\"panel\" id=\"panel-" << panel.name << "\" data-xmin=\"" << format_number(f.xmin)
            << "\" data-xmax=\"" << format_number(f.xmax) << "\" data-ymin=\"" << format_number(f.ymin)
            << "\" data-ymax=\"" << format_number(f.ymax) << "\" data-left=\"" << f.left << "\" data-top=\"" << f.top
            << "\" data-width=\"" << f.width << "\" data-height=\"" << f.height << "\">\n";
        svg << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width << "\" height=\"" << f.height
            << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double xv = f.xmin + (f.xmax - f.xmin) * i / 4.0;
            const double yv = f.ymin + (f.ymax - f.ymin) * i / 4.0;
            svg << "<text x=\"" << format_number(f.px(xv)) << "\" y=\"" << f.top + f.height + 16
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(std::round(xv * 1e4) / 1e4)
                << "</text>\n";
            svg << "<text x=\"" << f.left - 6 << "\" y=\"" << format_number(f.py(yv) + 3)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
                << format_number(std::round(yv * 1e3) / 1e3) << "</text>\n";
        }
        svg << "<text x=\"" << f.left + f.width / 2 << "\" y=\"" << f.top + f.height + 34
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xname << "</text>\n";
        svg << "<text x=\"18\" y=\"" << f.top + f.height / 2 << "\" transform=\"rotate(-90 18 " << f.top + f.height / 2
            << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << panel.label << "</text>\n";

        std::size_t si = 0;
        for (const auto& [key, points] : series) {
            const char* color = detail::series_color(si++);
            auto sorted = points;
            std::sort(sorted.begin(), sorted.end(), [&](auto* a, auto* b) { return xval(*a) < xval(*b); });
            svg << "<polyline class=\"line-" << panel.name << "\" fill=\"none\" stroke=\"" << color << "\" points=\"";
            bool first = true;
            for (const auto* a : sorted) {
                if (!std::isfinite(a->*panel.mean)) continue;
                svg << (first ? "" : " ") << format_number(f.px(xval(*a))) << ',' << format_number(f.py(a->*panel.mean));
                first = false;
            }
            svg << "\"/>\n";
            for (const auto* a : sorted) {
                const double m = a->*panel.mean, s = a->*panel.sd;
                if (!std::isfinite(m)) continue;
                const double cx = f.px(xval(*a));
                if (std::isfinite(s) && s > 0)
                    svg << "<line class=\"bar-" << panel.name << "\" x1=\"" << format_number(cx) << "\" x2=\""
                        << format_number(cx) << "\" y1=\"" << format_number(f.py(m - s)) << "\" y2=\""
                        << format_number(f.py(m + s)) << "\" stroke=\"" << color << "\" stroke-opacity=\"0.5\"/>\n";
                svg << "<circle class=\"point-" << panel.name << "\" cx=\"" << format_number(cx) << "\" cy=\""
                    << format_number(f.py(m)) << "\" r=\"3\" fill=\"" << color << "\" data-x=\""
                    << format_number(xval(*a)) << "\" data-y=\"" << format_number(m) << "\" data-sd=\""
                    << format_number(s) << "\"/>\n";
            }
            if (series.size() > 1)
                svg << "<text x=\"" << f.left + f.width + 8 << "\" y=\"" << f.top + 14 * si
                    << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << color << "\">" << other << '='
                    << format_number(key) << "</text>\n";
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace sonfis
