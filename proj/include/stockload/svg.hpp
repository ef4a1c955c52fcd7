#pragma once

// Minimal SVG chart emitter: line and scatter plots with linear axes. Every
// plot is also available as CSV from the reporting commands; the SVG exists
// so results are viewable without extra tooling.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "stockload/core.hpp"

namespace stockload::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 960;
    int height = 540;
    bool scatter = false;  // circles instead of a polyline
};

namespace detail {

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
inline constexpr int kPaletteSize = 8;

struct Range {
    double lo = 0.0, hi = 1.0;
};

inline Range span(const std::vector<Series>& series, bool use_x) {
    bool seen = false;
    Range r;
    for (const auto& s : series) {
        for (double v : use_x ? s.x : s.y) {
            if (!std::isfinite(v)) continue;
            if (!seen) {
                r.lo = r.hi = v;
                seen = true;
            } else {
                r.lo = std::min(r.lo, v);
                r.hi = std::max(r.hi, v);
            }
        }
    }
    if (!seen) return r;
    if (r.lo == r.hi) {  // pad degenerate ranges so the scale stays finite
        const double pad = r.lo == 0.0 ? 1.0 : std::abs(r.lo) * 0.1;
        r.lo -= pad;
        r.hi += pad;
    }
    return r;
}

inline std::string trim_number(double v) {
    // Axis labels: shortest round-trip is fine, just cap silly precision.
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace detail

inline void write_plot(const std::filesystem::path& path, const std::vector<Series>& series,
                       const PlotOptions& opt) {
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) {
            throw DataError("svg series '" + s.label + "' has misaligned x/y");
        }
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path.string());

    const double ml = 70, mr = 20, mt = 40, mb = 50;  // margins
    const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;
    const auto xr = detail::span(series, true);
    const auto yr = detail::span(series, false);
    const auto sx = [&](double v) { return ml + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto sy = [&](double v) { return mt + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
        << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width << " "
        << opt.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << detail::escape(opt.title)
        << "</text>\n";

    // Axes, ticks, grid lines.
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / ticks;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / ticks;
        const double px = sx(fx), py = sy(fy);
        out << "<line x1=\"" << px << "\" y1=\"" << mt << "\" x2=\"" << px << "\" y2=\""
            << mt + ph << "\" stroke=\"#ddd\"/>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << py << "\" x2=\"" << ml + pw
            << "\" y2=\"" << py << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << mt + ph + 16
            << "\" text-anchor=\"middle\">" << detail::trim_number(fx) << "</text>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\">" << detail::trim_number(fy) << "</text>\n";
    }
    out << "</g>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
        << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << detail::escape(opt.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">"
        << detail::escape(opt.y_label) << "</text>\n";

    // Data.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = detail::kPalette[si % detail::kPaletteSize];
        const auto& s = series[si];
        if (opt.scatter) {
            out << "<g fill=\"" << color << "\" fill-opacity=\"0.5\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i])
                    << "\" r=\"2\"/>\n";
            }
            out << "</g>\n";
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
            }
            out << "\"/>\n";
        }
    }

    // Legend.
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double ly = mt + 8 + 16.0 * double(si);
        out << "<rect x=\"" << ml + 8 << "\" y=\"" << ly - 9
            << "\" width=\"10\" height=\"10\" fill=\""
            << detail::kPalette[si % detail::kPaletteSize] << "\"/>\n";
        out << "<text x=\"" << ml + 22 << "\" y=\"" << ly << "\">"
            << detail::escape(series[si].label) << "</text>\n";
    }
    out << "</g>\n</svg>\n";
}

}  // namespace stockload::svg
