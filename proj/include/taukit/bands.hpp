#pragma once

// Distance/time bands. Every band is half-open [lo, hi): lo is a member,
// hi is not, so annuli tile an interval with no gaps or double counting.
// hi may be +infinity.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "taukit/csv.hpp"
#include "taukit/error.hpp"
#include "taukit/model.hpp"

namespace taukit {

enum class band_axis { distance, time };
enum class band_style { annuli, discs, equal_count, overlapping, custom };

struct band {
    double lo = 0, hi = 0;
    bool contains(double v) const { return v >= lo && v < hi; }
    bool is_global() const { return lo == 0 && std::isinf(hi); }
};

struct band_set {
    std::vector<band> bands;
    band_axis axis = band_axis::distance;
    band_style style = band_style::custom;

    std::size_t size() const { return bands.size(); }
    const band& operator[](std::size_t i) const { return bands[i]; }

    // Plot abscissa under the end-of-band convention (midpoint optional).
    double plot_x(std::size_t i, bool midpoint = false) const {
        const auto& b = bands[i];
        if (midpoint) return std::isinf(b.hi) ? b.lo : 0.5 * (b.lo + b.hi);
        return std::isinf(b.hi) ? b.lo : b.hi;
    }
};

inline void sort_bands(band_set& s) {
    std::sort(s.bands.begin(), s.bands.end(), [](const band& a, const band& b) {
        return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
    });
}

// k annuli of equal width tiling [0, d_max).
inline band_set equal_width_bands(double d_max, int k) {
    if (!(d_max > 0) || k < 1)
        raise(errc::non_positive_arguments, "equal_width_bands(d_max > 0, k >= 1)");
    band_set s;
    s.style = band_style::annuli;
    std::vector<double> edges(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) edges[static_cast<std::size_t>(i)] = d_max * i / k;
    for (int i = 0; i < k; ++i)
        s.bands.push_back({edges[static_cast<std::size_t>(i)], edges[static_cast<std::size_t>(i) + 1]});
    return s;
}

// Nested discs [0, c) for strictly increasing positive cutpoints.
inline band_set expanding_discs(const std::vector<double>& cutpoints) {
    if (cutpoints.empty()) raise(errc::non_positive_arguments, "expanding_discs: no cutpoints");
    band_set s;
    s.style = band_style::discs;
    double prev = 0;
    for (double c : cutpoints) {
        if (!(c > prev))
            raise(errc::non_increasing_cutpoints, "cutpoints must be positive and strictly increasing");
        s.bands.push_back({0, c});
        prev = c;
    }
    return s;
}

// Overlapping sliding windows [c-h, c+h), clamped at zero.
inline band_set overlapping_bands(const std::vector<double>& centers, double half_width) {
    if (!(half_width > 0)) raise(errc::non_positive_arguments, "half_width must be positive");
    band_set s;
    s.style = band_style::overlapping;
    for (double c : centers) s.bands.push_back({std::max(0.0, c - half_width), c + half_width});
    sort_bands(s);
    return s;
}

enum class pair_scope { cases_only, all_individuals };

namespace detail {
// Sorted pairwise axis values: distances, or |dt| over pairs with onsets.
inline std::vector<double> sorted_pair_values(const case_dataset& ds, pair_scope scope,
                                              band_axis axis) {
    std::vector<std::size_t> units;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (scope == pair_scope::cases_only && !ds.individuals[i].is_case()) continue;
        if (axis == band_axis::time && !ds.individuals[i].onset) continue;
        units.push_back(i);
    }
    std::vector<double> d;
    d.reserve(units.size() * (units.size() - 1) / 2);
    for (std::size_t a = 0; a < units.size(); ++a)
        for (std::size_t b = a + 1; b < units.size(); ++b)
            d.push_back(axis == band_axis::time
                            ? std::abs(*ds.individuals[units[a]].onset - *ds.individuals[units[b]].onset)
                            : ds.dist(units[a], units[b]));
    std::sort(d.begin(), d.end());
    return d;
}
} // namespace detail

// k annuli holding near-equal pair counts; boundaries sit at midpoints between
// adjacent order statistics so no boundary coincides with a data distance
// (guaranteed when distances are distinct). The last band's hi is nudged just
// past the maximum distance so the farthest pair stays a member.
inline band_set equal_count_bands(const case_dataset& ds, int k,
                                  pair_scope scope = pair_scope::cases_only,
                                  band_axis axis = band_axis::distance) {
    if (k < 1) raise(errc::non_positive_arguments, "equal_count_bands(k >= 1)");
    const auto d = detail::sorted_pair_values(ds, scope, axis);
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (i == 0 || d[i] != d[i - 1]) ++distinct;
    if (distinct < static_cast<std::size_t>(k))
        raise(errc::too_few_pairs, std::to_string(distinct) + " distinct pair distances < k = " + std::to_string(k));

    band_set s;
    s.style = band_style::equal_count;
    const std::size_t m = d.size();
    std::vector<double> edges;
    edges.push_back(0);
    for (int b = 1; b < k; ++b) {
        const auto cut = static_cast<std::size_t>(std::llround(static_cast<double>(b) * static_cast<double>(m) / k));
        edges.push_back(0.5 * (d[cut - 1] + d[cut]));
    }
    edges.push_back(std::nextafter(d.back(), std::numeric_limits<double>::infinity()));
    for (int b = 0; b < k; ++b)
        s.bands.push_back({edges[static_cast<std::size_t>(b)], edges[static_cast<std::size_t>(b) + 1]});
    return s;
}

inline band_set global_only_band() {
    band_set s;
    s.style = band_style::discs;
    s.bands.push_back({0, std::numeric_limits<double>::infinity()});
    return s;
}

// ---------------------------------------------------------------------------
// boundary grid
//
// All distinct finite band edges cut [0, inf) into elementary half-open cells;
// a value is binned once and every band folds a contiguous cell range. This
// serves annuli, discs, overlapping and equal-count sets with one exact path.

struct band_grid {
    std::vector<double> edges;                               // ascending, edges[0] == 0
    std::vector<std::pair<std::uint32_t, std::uint32_t>> spans; // per band: [first, last) cell

    std::uint32_t cell_count() const { return static_cast<std::uint32_t>(edges.size()); }

    // cell c covers [edges[c], edges[c+1]) with an implicit +inf tail.
    std::uint32_t cell_of(double v) const {
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        return static_cast<std::uint32_t>(it - edges.begin()) - 1;
    }
};

inline band_grid make_band_grid(const band_set& s) {
    band_grid g;
    g.edges.push_back(0);
    for (const auto& b : s.bands) {
        g.edges.push_back(b.lo);
        if (std::isfinite(b.hi)) g.edges.push_back(b.hi);
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    auto at = [&g](double v) {
        return static_cast<std::uint32_t>(
            std::lower_bound(g.edges.begin(), g.edges.end(), v) - g.edges.begin());
    };
    for (const auto& b : s.bands)
        g.spans.emplace_back(at(b.lo), std::isfinite(b.hi) ? at(b.hi) : g.cell_count());
    return g;
}

// ---------------------------------------------------------------------------
// band spec mini-grammar
//
//   width:D:K     K equal annuli over [0, D);  D may be "auto"
//   width:auto:K  D = half the maximum pairwise distance
//   discs:A,B,C   expanding discs
//   eqcount:K     K equal-count annuli (needs data to resolve)
//   overlap:A,B:H overlapping bands centered at A,B with half-width H

struct band_spec {
    enum class kind { width, discs, eqcount, overlap } k = kind::width;
    double d_max = 0;       // width; 0 means auto
    int count = 0;          // width, eqcount
    std::vector<double> values; // discs cutpoints / overlap centers
    double half_width = 0;  // overlap
};

namespace detail {
inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) { parts.push_back(cur); cur.clear(); }
        else cur += c;
    }
    parts.push_back(cur);
    return parts;
}
inline double spec_number(const std::string& s, const std::string& what) {
    auto v = csv::parse_double(s);
    if (!v) raise(errc::invalid_argument, "band spec: bad " + what + " '" + s + "'");
    return *v;
}
} // namespace detail

inline band_spec parse_band_spec(const std::string& text) {
    const auto parts = detail::split(text, ':');
    band_spec spec;
    if (parts[0] == "width" && parts.size() == 3) {
        spec.k = band_spec::kind::width;
        spec.d_max = parts[1] == "auto" ? 0 : detail::spec_number(parts[1], "d_max");
        spec.count = static_cast<int>(detail::spec_number(parts[2], "count"));
        if (parts[1] != "auto" && !(spec.d_max > 0))
            raise(errc::non_positive_arguments, "band spec: d_max must be positive");
        if (spec.count < 1) raise(errc::non_positive_arguments, "band spec: count must be >= 1");
        return spec;
    }
    if (parts[0] == "discs" && parts.size() == 2) {
        spec.k = band_spec::kind::discs;
        for (const auto& v : detail::split(parts[1], ','))
            spec.values.push_back(detail::spec_number(v, "cutpoint"));
        return spec;
    }
    if (parts[0] == "eqcount" && parts.size() == 2) {
        spec.k = band_spec::kind::eqcount;
        spec.count = static_cast<int>(detail::spec_number(parts[1], "count"));
        if (spec.count < 1) raise(errc::non_positive_arguments, "band spec: count must be >= 1");
        return spec;
    }
    if (parts[0] == "overlap" && parts.size() == 3) {
        spec.k = band_spec::kind::overlap;
        for (const auto& v : detail::split(parts[1], ','))
            spec.values.push_back(detail::spec_number(v, "center"));
        spec.half_width = detail::spec_number(parts[2], "half-width");
        return spec;
    }
    raise(errc::invalid_argument, "unrecognized band spec '" + text + "'");
}

inline band_set resolve_band_spec(const band_spec& spec, const case_dataset& ds,
                                  pair_scope scope = pair_scope::cases_only,
                                  band_axis axis = band_axis::distance) {
    band_set s;
    switch (spec.k) {
        case band_spec::kind::width: {
            double d = spec.d_max;
            if (d == 0) {
                const auto dist = detail::sorted_pair_values(ds, scope, axis);
                if (dist.empty() || !(dist.back() > 0))
                    raise(errc::too_few_pairs, "cannot derive d_max from data");
                d = dist.back() / 2;
            }
            s = equal_width_bands(d, spec.count);
            break;
        }
        case band_spec::kind::discs:
            s = expanding_discs(spec.values);
            break;
        case band_spec::kind::eqcount:
            s = equal_count_bands(ds, spec.count, scope, axis);
            break;
        case band_spec::kind::overlap:
            s = overlapping_bands(spec.values, spec.half_width);
            break;
    }
    s.axis = axis;
    return s;
}

} // namespace taukit
