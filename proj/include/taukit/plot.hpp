#pragma once

// Hand-emitted SVG output: no plotting stack, nothing non-deterministic.
// Coordinates are rounded to 1/100 px before formatting so byte-identical
// reruns do not depend on printf quirks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "taukit/csv.hpp"
#include "taukit/estimators.hpp"
#include "taukit/inference.hpp"

namespace taukit {

namespace svg {

inline std::string num(double v) {
    return csv::format_double(std::round(v * 100) / 100);
}

inline std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '&') o += "&amp;";
        else if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else o += c;
    }
    return o;
}

// 1-2-5 tick progression covering [lo, hi]
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
    std::vector<double> t;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    const double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + step * 1e-9; v += step)
        t.push_back(std::abs(v) < step * 1e-9 ? 0 : v);
    return t;
}

} // namespace svg

struct plot_options {
    int width = 720;
    int panel_height = 400;
    bool log_tau = false;
    std::size_t envelope_R = 0;   // < 40 draws whiskers instead of a ribbon
    std::string x_label = "distance (m)";
    std::string caption;          // estimator / R / level / window line
    std::string metadata;         // JSON text embedded in <metadata>
};

struct plot_series {
    std::string label;
    const tau_curve* curve = nullptr;
};

namespace detail {

struct axis_map {
    double x0, x1, y0, y1;       // data ranges (y in transformed units)
    double px0, px1, py0, py1;   // pixel box, py0 = bottom
    double x(double v) const { return px0 + (v - x0) / (x1 - x0) * (px1 - px0); }
    double y(double v) const { return py0 - (v - y0) / (y1 - y0) * (py0 - py1); }
};

inline double tvalue(double v, bool log_scale, double floor_v) {
    if (!log_scale) return v;
    return std::log10(std::max(v, floor_v));
}

} // namespace detail

// Multi-curve line plot with optional envelope around the first curve.
// Curves must share one band axis; at most three lines per panel, more
// curves stack extra panels below.
inline std::string curve_svg(const std::vector<plot_series>& series,
                             const pointwise_envelope_result* envelope,
                             const plot_options& opt = {}) {
    if (series.empty()) raise(errc::nothing_to_plot, "no curves given");
    const std::size_t B = series[0].curve->size();
    bool any_defined = false;
    for (const auto& s : series) {
        if (s.curve->size() != B) raise(errc::invalid_argument, "curves have different band axes");
        for (const auto& v : s.curve->values) any_defined = any_defined || v.defined;
    }
    if (!any_defined) raise(errc::nothing_to_plot, "every band of every curve is undefined");
    if (envelope && envelope->bands.size() != B)
        raise(errc::invalid_argument, "envelope band axis differs from the curve");

    std::vector<double> xs(B);
    for (std::size_t b = 0; b < B; ++b) xs[b] = series[0].curve->plot_x(b);

    double vmax = 1, vmin_pos = 1;
    auto see = [&](double v) {
        if (std::isnan(v) || std::isinf(v)) return;
        vmax = std::max(vmax, v);
        if (v > 0) vmin_pos = std::min(vmin_pos, v);
    };
    for (const auto& s : series)
        for (const auto& v : s.curve->values)
            if (v.defined) see(v.value);
    if (envelope)
        for (const auto& b : envelope->bands) {
            see(b.lo);
            see(b.hi);
        }

    const bool logs = opt.log_tau;
    const double floor_v = vmin_pos / 2;
    const double y_lo = logs ? std::log10(floor_v) : 0.0;
    const double y_hi = logs ? std::log10(vmax) + 0.08 * (std::log10(vmax) - std::log10(floor_v) + 0.1)
                             : vmax * 1.06;
    const double x_hi = std::max(*std::max_element(xs.begin(), xs.end()), 1e-9);

    const std::size_t panels = (series.size() + 2) / 3;
    const int W = opt.width, PH = opt.panel_height;
    const int H = static_cast<int>(panels) * PH + 26;
    const double ml = 64, mr = 20, mt = 40, mb = 48;

    static const char* colors[] = {"#1b6ca8", "#d1495b", "#2e933c"};

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) + "\" height=\"" +
         std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) + " " + std::to_string(H) +
         "\" font-family=\"sans-serif\">\n";
    if (!opt.metadata.empty()) s += "<metadata>" + svg::esc(opt.metadata) + "</metadata>\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.caption.empty())
        s += "<text x=\"" + svg::num(W / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"13\">" +
             svg::esc(opt.caption) + "</text>\n";

    for (std::size_t p = 0; p < panels; ++p) {
        const double top = 26 + static_cast<double>(p) * PH;
        detail::axis_map ax{0,    x_hi, y_lo, y_hi, ml, W - mr, top + PH - mb, top + mt};

        // frame and reference line
        s += "<line x1=\"" + svg::num(ax.px0) + "\" y1=\"" + svg::num(ax.py0) + "\" x2=\"" +
             svg::num(ax.px1) + "\" y2=\"" + svg::num(ax.py0) + "\" stroke=\"black\"/>\n";
        s += "<line x1=\"" + svg::num(ax.px0) + "\" y1=\"" + svg::num(ax.py0) + "\" x2=\"" +
             svg::num(ax.px0) + "\" y2=\"" + svg::num(ax.py1) + "\" stroke=\"black\"/>\n";
        const double yref = ax.y(detail::tvalue(1, logs, floor_v));
        s += "<line x1=\"" + svg::num(ax.px0) + "\" y1=\"" + svg::num(yref) + "\" x2=\"" +
             svg::num(ax.px1) + "\" y2=\"" + svg::num(yref) +
             "\" stroke=\"#777\" stroke-dasharray=\"6,4\"/>\n";

        // ticks
        for (double tx : svg::nice_ticks(0, x_hi)) {
            const double px = ax.x(tx);
            s += "<line x1=\"" + svg::num(px) + "\" y1=\"" + svg::num(ax.py0) + "\" x2=\"" +
                 svg::num(px) + "\" y2=\"" + svg::num(ax.py0 + 5) + "\" stroke=\"black\"/>\n";
            s += "<text x=\"" + svg::num(px) + "\" y=\"" + svg::num(ax.py0 + 19) +
                 "\" text-anchor=\"middle\" font-size=\"11\">" + csv::format_double(tx) + "</text>\n";
        }
        if (logs) {
            for (int k = static_cast<int>(std::floor(y_lo)); k <= static_cast<int>(std::ceil(y_hi)); ++k) {
                if (k < y_lo || k > y_hi) continue;
                const double py = ax.y(k);
                s += "<line x1=\"" + svg::num(ax.px0 - 5) + "\" y1=\"" + svg::num(py) + "\" x2=\"" +
                     svg::num(ax.px0) + "\" y2=\"" + svg::num(py) + "\" stroke=\"black\"/>\n";
                s += "<text x=\"" + svg::num(ax.px0 - 9) + "\" y=\"" + svg::num(py + 4) +
                     "\" text-anchor=\"end\" font-size=\"11\">" + csv::format_double(std::pow(10, k)) +
                     "</text>\n";
            }
        } else {
            for (double ty : svg::nice_ticks(0, y_hi)) {
                const double py = ax.y(ty);
                s += "<line x1=\"" + svg::num(ax.px0 - 5) + "\" y1=\"" + svg::num(py) + "\" x2=\"" +
                     svg::num(ax.px0) + "\" y2=\"" + svg::num(py) + "\" stroke=\"black\"/>\n";
                s += "<text x=\"" + svg::num(ax.px0 - 9) + "\" y=\"" + svg::num(py + 4) +
                     "\" text-anchor=\"end\" font-size=\"11\">" + csv::format_double(ty) + "</text>\n";
            }
        }
        s += "<text x=\"" + svg::num((ax.px0 + ax.px1) / 2) + "\" y=\"" + svg::num(ax.py0 + 38) +
             "\" text-anchor=\"middle\" font-size=\"12\">" + svg::esc(opt.x_label) + "</text>\n";
        s += "<text x=\"16\" y=\"" + svg::num((ax.py0 + ax.py1) / 2) +
             "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
             svg::num((ax.py0 + ax.py1) / 2) + ")\">tau</text>\n";

        // envelope behind the lines (first panel only: it belongs to curve 0)
        if (envelope && p == 0) {
            const bool whiskers = opt.envelope_R > 0 && opt.envelope_R < 40;
            if (whiskers) {
                for (std::size_t b = 0; b < B; ++b) {
                    const auto& eb = envelope->bands[b];
                    if (std::isnan(eb.lo) || std::isnan(eb.hi)) continue;
                    const double px = ax.x(xs[b]);
                    const double ylo = ax.y(detail::tvalue(eb.lo, logs, floor_v));
                    const double yhi = ax.y(detail::tvalue(eb.hi, logs, floor_v));
                    s += "<line x1=\"" + svg::num(px) + "\" y1=\"" + svg::num(ylo) + "\" x2=\"" +
                         svg::num(px) + "\" y2=\"" + svg::num(yhi) + "\" stroke=\"#555\"/>\n";
                    for (double yy : {ylo, yhi})
                        s += "<line x1=\"" + svg::num(px - 4) + "\" y1=\"" + svg::num(yy) +
                             "\" x2=\"" + svg::num(px + 4) + "\" y2=\"" + svg::num(yy) +
                             "\" stroke=\"#555\"/>\n";
                }
            } else {
                // ribbon, split at undefined bands
                std::size_t b = 0;
                while (b < B) {
                    std::size_t e = b;
                    while (e < B && !std::isnan(envelope->bands[e].lo) &&
                           !std::isnan(envelope->bands[e].hi))
                        ++e;
                    if (e > b) {
                        std::string pts;
                        for (std::size_t q = b; q < e; ++q)
                            pts += svg::num(ax.x(xs[q])) + "," +
                                   svg::num(ax.y(detail::tvalue(envelope->bands[q].hi, logs, floor_v))) + " ";
                        for (std::size_t q = e; q-- > b;)
                            pts += svg::num(ax.x(xs[q])) + "," +
                                   svg::num(ax.y(detail::tvalue(envelope->bands[q].lo, logs, floor_v))) + " ";
                        s += "<polygon points=\"" + pts + "\" fill=\"#1b6ca8\" fill-opacity=\"0.16\" stroke=\"none\"/>\n";
                        b = e;
                    }
                    ++b;
                }
            }
        }

        // curves: polyline per run of consecutive defined bands
        for (std::size_t ci = p * 3; ci < std::min(series.size(), p * 3 + 3); ++ci) {
            const auto& curve = *series[ci].curve;
            const char* color = colors[ci % 3];
            std::size_t b = 0;
            while (b < B) {
                std::size_t e = b;
                while (e < B && curve.values[e].defined) ++e;
                if (e > b) {
                    std::string pts;
                    for (std::size_t q = b; q < e; ++q)
                        pts += svg::num(ax.x(xs[q])) + "," +
                               svg::num(ax.y(detail::tvalue(curve.values[q].value, logs, floor_v))) + " ";
                    if (e - b == 1) {
                        s += "<circle cx=\"" + svg::num(ax.x(xs[b])) + "\" cy=\"" +
                             svg::num(ax.y(detail::tvalue(curve.values[b].value, logs, floor_v))) +
                             "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
                    } else {
                        s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                             "\" stroke-width=\"1.8\"/>\n";
                    }
                    b = e;
                }
                ++b;
            }
            if (!series[ci].label.empty())
                s += "<text x=\"" + svg::num(ax.px1 - 6) + "\" y=\"" +
                     svg::num(ax.py1 + 16 + 15 * static_cast<double>(ci - p * 3)) +
                     "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color + "\">" +
                     svg::esc(series[ci].label) + "</text>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

// Plot data next to the figure so users can replot: x, one tau column per
// curve, envelope bounds when present.
inline std::string plot_data_csv(const std::vector<plot_series>& series,
                                 const pointwise_envelope_result* envelope) {
    if (series.empty()) raise(errc::nothing_to_plot, "no curves given");
    const std::size_t B = series[0].curve->size();
    std::string s = "x";
    for (const auto& sr : series)
        s += ",tau" + (sr.label.empty() ? std::string() : ("_" + sr.label));
    if (envelope) s += ",env_lo,env_hi";
    s += '\n';
    for (std::size_t b = 0; b < B; ++b) {
        s += csv::format_double(series[0].curve->plot_x(b));
        for (const auto& sr : series) {
            s += ',';
            if (sr.curve->values[b].defined) s += csv::format_double(sr.curve->values[b].value);
        }
        if (envelope) {
            const auto& eb = envelope->bands[b];
            s += ',';
            if (!std::isnan(eb.lo)) s += csv::format_double(eb.lo);
            s += ',';
            if (!std::isnan(eb.hi)) s += csv::format_double(eb.hi);
        }
        s += '\n';
    }
    return s;
}

// Heatmap of a distance by time-lag map. Undefined cells are gray, cells
// below the support threshold get a dashed outline. Color is symmetric in
// log2(tau) around 1.
inline std::string map_svg(const tau_map& m, const plot_options& opt = {}) {
    const std::size_t D = m.dbands.size(), T = m.tbands.size();
    bool any = false;
    double amax = 1e-9;
    for (const auto& c : m.cells)
        if (c.v.defined) {
            any = true;
            if (c.v.value > 0) amax = std::max(amax, std::abs(std::log2(c.v.value)));
            else amax = std::max(amax, 6.0); // tau = 0 saturates the scale
        }
    if (!any) raise(errc::nothing_to_plot, "every map cell is undefined");
    amax = std::max(1.0, std::min(amax, 6.0));

    auto color = [&](double tau) {
        double t;
        if (tau <= 0) t = 0;
        else {
            const double z = std::clamp(std::log2(tau), -amax, amax);
            t = (z + amax) / (2 * amax);
        }
        // blue -> white -> red
        auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
        double r, g, bl;
        if (t < 0.5) {
            const double u = t / 0.5;
            r = lerp(43, 247, u); g = lerp(131, 247, u); bl = lerp(186, 247, u);
        } else {
            const double u = (t - 0.5) / 0.5;
            r = lerp(247, 215, u); g = lerp(247, 25, u); bl = lerp(247, 28, u);
        }
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r)),
                      static_cast<int>(std::lround(g)), static_cast<int>(std::lround(bl)));
        return std::string(buf);
    };

    const double ml = 70, mr = 30, mt = 42, mb = 86;
    const int W = opt.width;
    const double cw = (W - ml - mr) / static_cast<double>(D);
    const double ch = std::min(34.0, 300.0 / static_cast<double>(T));
    const int H = static_cast<int>(mt + ch * static_cast<double>(T) + mb);

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) + "\" height=\"" +
         std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) + " " + std::to_string(H) +
         "\" font-family=\"sans-serif\">\n";
    if (!opt.metadata.empty()) s += "<metadata>" + svg::esc(opt.metadata) + "</metadata>\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.caption.empty())
        s += "<text x=\"" + svg::num(W / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"13\">" +
             svg::esc(opt.caption) + "</text>\n";

    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t t = 0; t < T; ++t) {
            const auto& c = m.at(d, t);
            const double x = ml + cw * static_cast<double>(d);
            const double y = mt + ch * static_cast<double>(T - 1 - t); // lag grows upward
            s += "<rect x=\"" + svg::num(x) + "\" y=\"" + svg::num(y) + "\" width=\"" +
                 svg::num(cw) + "\" height=\"" + svg::num(ch) + "\" fill=\"" +
                 (c.v.defined ? color(c.v.value) : std::string("#cccccc")) + "\"";
            if (c.low_support && c.v.defined)
                s += " stroke=\"#333\" stroke-dasharray=\"3,2\" stroke-width=\"1.2\"";
            else
                s += " stroke=\"white\" stroke-width=\"0.5\"";
            s += "/>\n";
        }

    // axis labels: band edges
    for (std::size_t d = 0; d <= D; ++d) {
        const double x = ml + cw * static_cast<double>(d);
        const double v = d < D ? m.dbands.bands[d].lo : m.dbands.bands[D - 1].hi;
        s += "<text x=\"" + svg::num(x) + "\" y=\"" + svg::num(mt + ch * static_cast<double>(T) + 16) +
             "\" text-anchor=\"middle\" font-size=\"10\">" +
             (std::isinf(v) ? std::string("inf") : csv::format_double(v)) + "</text>\n";
    }
    for (std::size_t t = 0; t <= T; ++t) {
        const double y = mt + ch * static_cast<double>(T - t);
        const double v = t < T ? m.tbands.bands[t].lo : m.tbands.bands[T - 1].hi;
        s += "<text x=\"" + svg::num(ml - 6) + "\" y=\"" + svg::num(y + 3) +
             "\" text-anchor=\"end\" font-size=\"10\">" +
             (std::isinf(v) ? std::string("inf") : csv::format_double(v)) + "</text>\n";
    }
    s += "<text x=\"" + svg::num(ml + (W - ml - mr) / 2.0) + "\" y=\"" +
         svg::num(mt + ch * static_cast<double>(T) + 36) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + svg::esc(opt.x_label) + "</text>\n";
    s += "<text x=\"16\" y=\"" + svg::num(mt + ch * static_cast<double>(T) / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
         svg::num(mt + ch * static_cast<double>(T) / 2) + ")\">onset lag</text>\n";

    // legend gradient
    const double lx = ml, ly = mt + ch * static_cast<double>(T) + 48, lw = 220, lh = 10;
    for (int i = 0; i < 40; ++i) {
        const double u = (i + 0.5) / 40;
        s += "<rect x=\"" + svg::num(lx + lw * i / 40) + "\" y=\"" + svg::num(ly) + "\" width=\"" +
             svg::num(lw / 40 + 0.5) + "\" height=\"" + svg::num(lh) + "\" fill=\"" +
             color(std::exp2((u * 2 - 1) * amax)) + "\"/>\n";
    }
    for (double u : {0.0, 0.5, 1.0}) {
        s += "<text x=\"" + svg::num(lx + lw * u) + "\" y=\"" + svg::num(ly + 24) +
             "\" text-anchor=\"middle\" font-size=\"10\">" +
             csv::format_double(std::round(std::exp2((u * 2 - 1) * amax) * 100) / 100) + "</text>\n";
    }
    s += "<rect x=\"" + svg::num(lx + lw + 28) + "\" y=\"" + svg::num(ly) +
         "\" width=\"14\" height=\"10\" fill=\"#cccccc\"/>\n";
    s += "<text x=\"" + svg::num(lx + lw + 48) + "\" y=\"" + svg::num(ly + 9) +
         "\" font-size=\"10\">undefined</text>\n";
    s += "<rect x=\"" + svg::num(lx + lw + 118) + "\" y=\"" + svg::num(ly) +
         "\" width=\"14\" height=\"10\" fill=\"white\" stroke=\"#333\" stroke-dasharray=\"3,2\"/>\n";
    s += "<text x=\"" + svg::num(lx + lw + 138) + "\" y=\"" + svg::num(ly + 9) +
         "\" font-size=\"10\">low support</text>\n";
    s += "</svg>\n";
    return s;
}

} // namespace taukit
