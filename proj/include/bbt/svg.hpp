#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "bbt/freq.hpp"
#include "bbt/summary.hpp"

namespace bbt {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
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

inline std::string line(double x1, double y1, double x2, double y2, const char* style) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" style=\"" + style + "\"/>\n";
}

inline std::string text(double x, double y, const std::string& s, const char* anchor, int size = 12) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape_xml(s) + "</text>\n";
}

inline std::string svg_open(double w, double h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

} // namespace detail

// One row per pair: dot at the median, thick bar over the HDI, thin bar over
// the full range, dashed vertical lines at the ROPE bounds.
inline std::string forest_plot_svg(const ComparisonSummary& s) {
    const double label_w = 160, plot_w = 400, margin = 20, row_h = 26, top = 30;
    const double width = label_w + plot_w + 2 * margin;
    const double height = top + row_h * static_cast<double>(s.rows.size()) + 50;
    const double x0 = label_w + margin;
    auto xpos = [&](double p) { return x0 + p * plot_w; };
    const double bottom = top + row_h * static_cast<double>(s.rows.size());

    std::string out = detail::svg_open(width, height);
    for (double r : {s.rope.low, s.rope.high})
        out += detail::line(xpos(r), top - 10, xpos(r), bottom, "stroke:#999;stroke-dasharray:4,3");
    out += detail::line(x0, bottom + 5, x0 + plot_w, bottom + 5, "stroke:black");
    for (int t = 0; t <= 10; t += 2) {
        const double p = t / 10.0;
        out += detail::line(xpos(p), bottom + 5, xpos(p), bottom + 10, "stroke:black");
        out += detail::text(xpos(p), bottom + 24, detail::num(p).substr(0, 3), "middle", 11);
    }
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto& r = s.rows[i];
        const double y = top + row_h * (static_cast<double>(i) + 0.5);
        out += detail::text(label_w, y + 4, r.first_name + " > " + r.second_name, "end");
        out += detail::line(xpos(r.min), y, xpos(r.max), y, "stroke:#4a6fa5;stroke-width:1");
        out += detail::line(xpos(r.hdi_low), y, xpos(r.hdi_high), y, "stroke:#4a6fa5;stroke-width:5");
        out += "<circle cx=\"" + detail::num(xpos(r.median)) + "\" cy=\"" + detail::num(y) +
               "\" r=\"4\" fill=\"#1d3557\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

// Critical difference diagram: mean ranks on an axis (best on the left) and
// bars joining groups whose rank gap does not exceed the critical difference.
inline std::string cd_diagram_svg(const FreqReport& report) {
    const std::size_t k = report.ordering.size();
    const double width = 600, margin = 120, axis_y = 60;
    const double span = width - 2 * margin;
    const double kd = static_cast<double>(k);
    // Ranks run from K (best) at the left to 1 at the right.
    auto xpos = [&](double rank) { return margin + (kd - rank) / std::max(1.0, kd - 1.0) * span; };
    const double half = std::ceil(kd / 2.0);
    const double height = axis_y + 40 + 22 * half + 20;

    std::string out = detail::svg_open(width, height);
    out += detail::line(margin, axis_y, margin + span, axis_y, "stroke:black");
    for (std::size_t r = 1; r <= k; ++r) {
        const double x = xpos(static_cast<double>(r));
        out += detail::line(x, axis_y - 5, x, axis_y, "stroke:black");
        out += detail::text(x, axis_y - 9, std::to_string(r), "middle", 11);
    }
    if (report.critical_difference) {
        const double cd = *report.critical_difference;
        const double x1 = xpos(kd), x2 = xpos(kd - cd);
        out += detail::line(x1, 18, x2, 18, "stroke:black;stroke-width:2");
        out += detail::text((x1 + x2) / 2, 13, "CD = " + detail::num(cd), "middle", 11);
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double x = xpos(report.ordering_values[i]);
        const bool left = static_cast<double>(i) < half;
        const double y = axis_y + 30 + 22 * static_cast<double>(left ? i : k - 1 - i);
        const double tx = left ? margin - 10 : margin + span + 10;
        out += detail::line(x, axis_y, x, y, "stroke:black");
        out += detail::line(x, y, tx, y, "stroke:black");
        out += detail::text(left ? tx - 4 : tx + 4, y + 4,
                            report.ordering[i] + " (" + detail::num(report.ordering_values[i]) + ")",
                            left ? "end" : "start", 11);
    }
    if (report.critical_difference) {
        // Maximal runs of consecutive algorithms within one CD.
        const double cd = *report.critical_difference;
        double y = axis_y + 8;
        std::size_t last_end = 0;
        for (std::size_t a = 0; a < k; ++a) {
            std::size_t b = a;
            while (b + 1 < k && report.ordering_values[a] - report.ordering_values[b + 1] <= cd) ++b;
            if (b > a && (a == 0 || b > last_end)) {
                out += detail::line(xpos(report.ordering_values[a]) - 3, y, xpos(report.ordering_values[b]) + 3, y,
                                    "stroke:#c1121f;stroke-width:4");
                y += 7;
                last_end = b;
            }
        }
    }
    out += "</svg>\n";
    return out;
}

} // namespace bbt
