#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dephasim/csv.hpp"
#include "dephasim/errors.hpp"

namespace dephasim {
namespace svg {

inline constexpr int kWidth = 960;
inline constexpr int kHeight = 600;
inline constexpr double kLeft = 70.0, kRight = 20.0, kTop = 30.0, kBottom = 50.0;

inline const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

namespace detail {

inline std::string fmt2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string fmt_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

struct Range {
    double lo = 0.0, hi = 1.0;

    void expand(double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    static Range of(const std::vector<double>& xs) {
        Range r{xs.front(), xs.front()};
        for (double x : xs) r.expand(x);
        return r;
    }
    void pad() {
        if (hi == lo) {
            const double d = (hi == 0.0) ? 1.0 : 0.1 * std::abs(hi);
            lo -= d;
            hi += d;
        } else {
            const double d = 0.03 * (hi - lo);
            lo -= d;
            hi += d;
        }
    }
};

inline double nice_step(double span, int target_ticks = 6) {
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

struct Frame {
    Range xr, yr;

    double px(double x) const {
        return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom);
    }
};

inline void draw_axes(std::ostringstream& o, const Frame& f, const std::string& xlabel) {
    o << "<rect x='" << fmt2(kLeft) << "' y='" << fmt2(kTop) << "' width='"
      << fmt2(kWidth - kLeft - kRight) << "' height='" << fmt2(kHeight - kTop - kBottom)
      << "' fill='none' stroke='#333333' stroke-width='1'/>\n";
    const double xstep = nice_step(f.xr.hi - f.xr.lo);
    for (double t = std::ceil(f.xr.lo / xstep) * xstep; t <= f.xr.hi + 1e-12 * xstep; t += xstep) {
        const double x = f.px(t);
        o << "<line x1='" << fmt2(x) << "' y1='" << fmt2(kHeight - kBottom) << "' x2='" << fmt2(x)
          << "' y2='" << fmt2(kHeight - kBottom + 5) << "' stroke='#333333' stroke-width='1'/>\n";
        o << "<text x='" << fmt2(x) << "' y='" << fmt2(kHeight - kBottom + 18)
          << "' font-family='monospace' font-size='11' text-anchor='middle'>" << fmt_label(t)
          << "</text>\n";
    }
    const double ystep = nice_step(f.yr.hi - f.yr.lo);
    for (double t = std::ceil(f.yr.lo / ystep) * ystep; t <= f.yr.hi + 1e-12 * ystep; t += ystep) {
        const double y = f.py(t);
        o << "<line x1='" << fmt2(kLeft - 5) << "' y1='" << fmt2(y) << "' x2='" << fmt2(kLeft)
          << "' y2='" << fmt2(y) << "' stroke='#333333' stroke-width='1'/>\n";
        o << "<text x='" << fmt2(kLeft - 8) << "' y='" << fmt2(y + 4)
          << "' font-family='monospace' font-size='11' text-anchor='end'>" << fmt_label(t)
          << "</text>\n";
    }
    if (f.yr.lo < 0.0 && f.yr.hi > 0.0) {
        const double y0 = f.py(0.0);
        o << "<line x1='" << fmt2(kLeft) << "' y1='" << fmt2(y0) << "' x2='" << fmt2(kWidth - kRight)
          << "' y2='" << fmt2(y0) << "' stroke='#999999' stroke-width='1' stroke-dasharray='4,3'/>\n";
    }
    o << "<text x='" << fmt2(0.5 * (kLeft + kWidth - kRight)) << "' y='" << fmt2(kHeight - 12)
      << "' font-family='monospace' font-size='12' text-anchor='middle'>" << xlabel << "</text>\n";
}

inline void draw_polyline(std::ostringstream& o, const Frame& f, const std::vector<double>& xs,
                          const std::vector<double>& ys, const char* color) {
    o << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) o << ' ';
        o << fmt2(f.px(xs[i])) << ',' << fmt2(f.py(ys[i]));
    }
    o << "'/>\n";
}

inline void draw_legend(std::ostringstream& o, const std::vector<std::string>& names) {
    const double x0 = kWidth - kRight - 170.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = kTop + 16.0 + 16.0 * static_cast<double>(i);
        o << "<rect x='" << fmt2(x0) << "' y='" << fmt2(y - 9) << "' width='10' height='10' fill='"
          << kPalette[i % 6] << "'/>\n";
        o << "<text x='" << fmt2(x0 + 15) << "' y='" << fmt2(y)
          << "' font-family='monospace' font-size='12'>" << names[i] << "</text>\n";
    }
}

inline std::string document(const std::string& body) {
    std::ostringstream o;
    o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' viewBox='0 0 " << kWidth << ' ' << kHeight << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << body << "</svg>\n";
    return o.str();
}

/// Shared line-chart renderer: x column + one polyline per y column.
inline std::string line_chart(const CsvFile& csv, const std::string& xcol,
                              const std::vector<std::string>& ycols) {
    if (csv.rows.empty()) throw SchemaMismatch("empty data section");
    const auto xs = csv.numeric_column(xcol);
    std::vector<std::vector<double>> series;
    for (const auto& c : ycols) series.push_back(csv.numeric_column(c));

    Frame f;
    f.xr = Range::of(xs);
    f.yr = Range{series[0][0], series[0][0]};
    for (const auto& ys : series)
        for (double y : ys) f.yr.expand(y);
    f.xr.pad();
    f.yr.pad();

    std::ostringstream body;
    draw_axes(body, f, xcol);
    for (std::size_t i = 0; i < series.size(); ++i)
        draw_polyline(body, f, xs, series[i], kPalette[i % 6]);
    draw_legend(body, ycols);
    return document(body.str());
}

} // namespace detail

inline std::string plot_rates(const CsvFile& csv) {
    return detail::line_chart(csv, "tau", {"gamma1", "gamma2", "gamma_sum", "gamma_diff"});
}

inline std::string plot_scan(const CsvFile& csv) {
    return detail::line_chart(csv, "param", {"N_phi", "N_psi", "N_blp", "N1", "twoN1"});
}

inline std::string plot_additivity(const CsvFile& csv) {
    return detail::line_chart(csv, "param", {"N_blp", "twoN1"});
}

/// Scatter of per-pair BLP values, color-coded by category.
inline std::string plot_pairs(const CsvFile& csv) {
    if (csv.rows.empty()) throw SchemaMismatch("empty data section");
    const auto xs = csv.numeric_column("index");
    const auto ns = csv.numeric_column("N");
    const std::size_t ccol = csv.column_index("category");

    static const char* cats[5] = {"separable", "mixed", "pure_and_mixed", "pure", "maximally_entangled"};
    detail::Frame f;
    f.xr = detail::Range::of(xs);
    f.yr = detail::Range::of(ns);
    f.yr.expand(0.0);
    f.xr.pad();
    f.yr.pad();

    std::ostringstream body;
    detail::draw_axes(body, f, "index");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::string& cat = csv.rows[i].at(ccol);
        int ci = 0;
        for (int k = 0; k < 5; ++k)
            if (cat == cats[k]) ci = k;
        body << "<circle cx='" << detail::fmt2(f.px(xs[i])) << "' cy='" << detail::fmt2(f.py(ns[i]))
             << "' r='2' fill='" << kPalette[ci] << "'/>\n";
    }
    detail::draw_legend(body, {cats[0], cats[1], cats[2], cats[3], cats[4]});
    return detail::document(body.str());
}

/// Dispatch by plot kind: rates | scan | pairs | additivity.
inline std::string render(const CsvFile& csv, const std::string& kind) {
    if (kind == "rates") return plot_rates(csv);
    if (kind == "scan") return plot_scan(csv);
    if (kind == "pairs") return plot_pairs(csv);
    if (kind == "additivity") return plot_additivity(csv);
    throw SchemaMismatch("unknown plot kind: " + kind);
}

} // namespace svg
} // namespace dephasim
