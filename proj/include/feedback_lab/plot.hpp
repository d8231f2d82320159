#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "feedback_lab/error.hpp"
#include "feedback_lab/trials.hpp"

namespace feedback_lab {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#d95f02", "#1b9e77", "#17869e",
                                    "#7570b3", "#e7298a", "#66a61e"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

}  // namespace detail

// Self-contained SVG line chart: x = stage index, y = mean micro-F1 with
// +/- standard-error bars, one series per scheme. Byte-deterministic for a
// fixed AggregateResult.
inline std::string render_plot_svg(const AggregateResult& agg) {
    if (agg.schemes.empty() || agg.n_stages == 0)
        throw DataError("render_plot_svg: empty aggregate");

    const double width = 760.0, height = 520.0;
    const double left = 64.0, right = 24.0, top = 24.0, bottom = 48.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    const auto x_of = [&](double stage) {
        return agg.n_stages == 1
                   ? left + plot_w / 2.0
                   : left + plot_w * stage / static_cast<double>(agg.n_stages - 1);
    };
    const auto y_of = [&](double f1) { return top + plot_h * (1.0 - f1); };

    using detail::svg_num;
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) +
           "\" height=\"" + svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) + " " +
           svg_num(height) + "\">\n";
    svg += "<rect width=\"" + svg_num(width) + "\" height=\"" + svg_num(height) +
           "\" fill=\"white\"/>\n";

    // horizontal grid every 0.1
    for (int g = 0; g <= 10; ++g) {
        const double y = y_of(g / 10.0);
        svg += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(y) + "\" x2=\"" +
               svg_num(left + plot_w) + "\" y2=\"" + svg_num(y) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        char label[16];
        std::snprintf(label, sizeof label, "%.1f", g / 10.0);
        svg += "<text x=\"" + svg_num(left - 8.0) + "\" y=\"" + svg_num(y + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" + label +
               "</text>\n";
    }
    for (std::uint32_t t = 0; t < agg.n_stages; ++t) {
        const double x = x_of(t);
        svg += "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(top + plot_h + 20.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
               std::to_string(t) + "</text>\n";
    }
    svg += "<text x=\"" + svg_num(left + plot_w / 2.0) + "\" y=\"" + svg_num(height - 10.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">stage</text>\n";
    svg += "<text x=\"16\" y=\"" + svg_num(top + plot_h / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 " +
           svg_num(top + plot_h / 2.0) + ")\">micro F1</text>\n";
    svg += "<rect x=\"" + svg_num(left) + "\" y=\"" + svg_num(top) + "\" width=\"" +
           svg_num(plot_w) + "\" height=\"" + svg_num(plot_h) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (std::size_t s = 0; s < agg.schemes.size(); ++s) {
        const char* color = detail::series_color(s);
        std::string points;
        for (std::uint32_t t = 0; t < agg.n_stages; ++t) {
            const AggregateCell& cell = agg.cells[s][t];
            const double x = x_of(t), y = y_of(cell.mean_f1);
            points += (t == 0 ? "" : " ") + svg_num(x) + "," + svg_num(y);
            const double y_lo = y_of(cell.mean_f1 - cell.stderr_f1);
            const double y_hi = y_of(cell.mean_f1 + cell.stderr_f1);
            svg += "<line x1=\"" + svg_num(x) + "\" y1=\"" + svg_num(y_lo) + "\" x2=\"" +
                   svg_num(x) + "\" y2=\"" + svg_num(y_hi) + "\" stroke=\"" + color +
                   "\" stroke-width=\"1\"/>\n";
            for (const double y_cap : {y_lo, y_hi})
                svg += "<line x1=\"" + svg_num(x - 3.0) + "\" y1=\"" + svg_num(y_cap) +
                       "\" x2=\"" + svg_num(x + 3.0) + "\" y2=\"" + svg_num(y_cap) +
                       "\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
            svg += "<circle cx=\"" + svg_num(x) + "\" cy=\"" + svg_num(y) +
                   "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        }
        svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
    }

    const double legend_x = left + plot_w - 180.0;
    double legend_y = top + 14.0;
    for (std::size_t s = 0; s < agg.schemes.size(); ++s) {
        const char* color = detail::series_color(s);
        svg += "<line x1=\"" + svg_num(legend_x) + "\" y1=\"" + svg_num(legend_y - 4.0) +
               "\" x2=\"" + svg_num(legend_x + 24.0) + "\" y2=\"" + svg_num(legend_y - 4.0) +
               "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + svg_num(legend_x + 30.0) + "\" y=\"" + svg_num(legend_y) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + agg.schemes[s] +
               "</text>\n";
        legend_y += 16.0;
    }
    svg += "</svg>\n";
    return svg;
}

inline void emit_plot(const AggregateResult& agg, const std::filesystem::path& path) {
    const std::string svg = render_plot_svg(agg);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write plot file: " + path.string());
    out << svg;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace feedback_lab
