#pragma once

// Small deterministic SVG chart emitter for belief trajectories (line
// charts) and payoff comparisons (bar charts). All numeric formatting is
// fixed-width printf, so identical inputs produce identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace platsim {

struct SeriesPoint {
    double x = 0.0, y = 0.0;
};

/// One polyline; series sharing a label share a color and one legend entry.
struct Series {
    std::string label;
    std::vector<SeriesPoint> points;
};

namespace detail {

inline const std::vector<std::string>& chart_palette() {
    static const std::vector<std::string> p = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                               "#17becf", "#bcbd22"};
    return p;
}

inline std::string fmt2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

inline std::string fmt6g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct ChartFrame {
    double w = 720, h = 440;
    double left = 70, right = 170, top = 46, bottom = 54;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

    double px(double x) const {
        return left + (x - x_lo) / (x_hi - x_lo) * (w - left - right);
    }
    double py(double y) const {
        return h - bottom - (y - y_lo) / (y_hi - y_lo) * (h - top - bottom);
    }
};

inline void open_svg(std::ostringstream& out, const ChartFrame& f, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(f.w) << "\" height=\""
        << fmt2(f.h) << "\" viewBox=\"0 0 " << fmt2(f.w) << " " << fmt2(f.h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt2(f.w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(title) << "</text>\n";
}

inline void draw_axes(std::ostringstream& out, const ChartFrame& f, const std::string& x_label,
                      const std::string& y_label) {
    out << "<g stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">\n";
    out << "<line x1=\"" << fmt2(f.left) << "\" y1=\"" << fmt2(f.h - f.bottom) << "\" x2=\""
        << fmt2(f.w - f.right) << "\" y2=\"" << fmt2(f.h - f.bottom) << "\"/>\n";
    out << "<line x1=\"" << fmt2(f.left) << "\" y1=\"" << fmt2(f.top) << "\" x2=\""
        << fmt2(f.left) << "\" y2=\"" << fmt2(f.h - f.bottom) << "\"/>\n";
    out << "</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
        const double fy = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
        out << "<text x=\"" << fmt2(f.px(fx)) << "\" y=\"" << fmt2(f.h - f.bottom + 16)
            << "\" text-anchor=\"middle\">" << fmt6g(fx) << "</text>\n";
        out << "<text x=\"" << fmt2(f.left - 6) << "\" y=\"" << fmt2(f.py(fy) + 4)
            << "\" text-anchor=\"end\">" << fmt6g(fy) << "</text>\n";
    }
    out << "<text x=\"" << fmt2((f.left + f.w - f.right) / 2) << "\" y=\"" << fmt2(f.h - 12)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(x_label) << "</text>\n";
    out << "<text x=\"18\" y=\"" << fmt2((f.top + f.h - f.bottom) / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << fmt2((f.top + f.h - f.bottom) / 2) << ")\">" << xml_escape(y_label) << "</text>\n";
    out << "</g>\n";
}

} // namespace detail

/// Line chart over the given series. Colors are assigned per distinct label
/// in order of first appearance; the legend lists each label once.
inline std::string line_chart_svg(const std::string& title, const std::string& x_label,
                                  const std::string& y_label, const std::vector<Series>& series) {
    using namespace detail;
    if (series.empty()) throw ValidationError("chart: no series to draw");

    ChartFrame f;
    bool any = false;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (!any) {
                f.x_lo = f.x_hi = p.x;
                f.y_lo = f.y_hi = p.y;
                any = true;
            }
            f.x_lo = std::min(f.x_lo, p.x);
            f.x_hi = std::max(f.x_hi, p.x);
            f.y_lo = std::min(f.y_lo, p.y);
            f.y_hi = std::max(f.y_hi, p.y);
        }
    if (!any) throw ValidationError("chart: series contain no points");
    if (f.x_hi == f.x_lo) f.x_hi = f.x_lo + 1.0;
    if (f.y_hi == f.y_lo) f.y_hi = f.y_lo + 1.0;

    std::map<std::string, size_t> color_of;
    std::vector<std::string> legend_order;
    for (const auto& s : series)
        if (color_of.emplace(s.label, color_of.size()).second) legend_order.push_back(s.label);

    std::ostringstream out;
    open_svg(out, f, title);
    draw_axes(out, f, x_label, y_label);
    for (const auto& s : series) {
        const auto& color = chart_palette()[color_of[s.label] % chart_palette().size()];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.2\" stroke-opacity=\"0.85\" points=\"";
        for (size_t i = 0; i < s.points.size(); ++i) {
            if (i) out << " ";
            out << fmt2(f.px(s.points[i].x)) << "," << fmt2(f.py(s.points[i].y));
        }
        out << "\"/>\n";
    }
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (size_t i = 0; i < legend_order.size(); ++i) {
        const double y = f.top + 14 + 18 * static_cast<double>(i);
        const auto& color = chart_palette()[color_of[legend_order[i]] % chart_palette().size()];
        out << "<line x1=\"" << fmt2(f.w - f.right + 12) << "\" y1=\"" << fmt2(y - 4)
            << "\" x2=\"" << fmt2(f.w - f.right + 34) << "\" y2=\"" << fmt2(y - 4)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt2(f.w - f.right + 40) << "\" y=\"" << fmt2(y) << "\">"
            << xml_escape(legend_order[i]) << "</text>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

/// Bar chart of labeled values; value text sits above each bar.
inline std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                                 const std::vector<std::string>& labels, const Vec& values) {
    using namespace detail;
    if (labels.size() != values.size() || labels.empty())
        throw ValidationError("chart: bar labels and values must align and be non-empty");

    ChartFrame f;
    f.right = 40;
    f.x_lo = 0;
    f.x_hi = static_cast<double>(labels.size());
    f.y_lo = 0.0;
    f.y_hi = *std::max_element(values.begin(), values.end());
    for (double v : values) f.y_lo = std::min(f.y_lo, v);
    if (f.y_hi <= f.y_lo) f.y_hi = f.y_lo + 1.0;

    std::ostringstream out;
    open_svg(out, f, title);
    draw_axes(out, f, "", y_label);
    const double slot = (f.w - f.left - f.right) / static_cast<double>(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        const auto& color = chart_palette()[i % chart_palette().size()];
        const double x0 = f.left + slot * (static_cast<double>(i) + 0.2);
        const double y_val = f.py(values[i]);
        const double y_zero = f.py(std::max(0.0, f.y_lo));
        out << "<rect x=\"" << fmt2(x0) << "\" y=\"" << fmt2(std::min(y_val, y_zero))
            << "\" width=\"" << fmt2(slot * 0.6) << "\" height=\""
            << fmt2(std::abs(y_zero - y_val)) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.85\"/>\n";
        out << "<text x=\"" << fmt2(x0 + slot * 0.3) << "\" y=\"" << fmt2(y_val - 6)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << fmt6g(values[i]) << "</text>\n";
        out << "<text x=\"" << fmt2(x0 + slot * 0.3) << "\" y=\"" << fmt2(f.h - f.bottom + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << xml_escape(labels[i]) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace platsim
