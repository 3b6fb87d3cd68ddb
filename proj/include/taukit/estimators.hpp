#pragma once

// Tau statistic family. Every estimator is a ratio of a within-band
// concentration to its any-distance analogue, so tau == 1 marks "no more
// related than background". Undefined cells are explicit tagged values with
// a reason, never silent NaNs.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "taukit/bands.hpp"
#include "taukit/error.hpp"
#include "taukit/model.hpp"
#include "taukit/pairing.hpp"
#include "taukit/parallel.hpp"

namespace taukit {

enum class estimator_kind { odds, prev, rate };

inline const char* estimator_name(estimator_kind k) {
    switch (k) {
        case estimator_kind::odds: return "odds";
        case estimator_kind::prev: return "prev";
        case estimator_kind::rate: return "rate";
    }
    return "?";
}

enum class undef_reason {
    none,
    zero_unrelated_in_band,
    empty_band,
    zero_pair_time,
    zero_time_with_events,
    global_undefined,
};

inline const char* undef_reason_name(undef_reason r) {
    switch (r) {
        case undef_reason::none: return "none";
        case undef_reason::zero_unrelated_in_band: return "zero_unrelated_in_band";
        case undef_reason::empty_band: return "empty_band";
        case undef_reason::zero_pair_time: return "zero_pair_time";
        case undef_reason::zero_time_with_events: return "zero_time_with_events";
        case undef_reason::global_undefined: return "global_undefined";
    }
    return "?";
}

struct tau_value {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
    undef_reason reason = undef_reason::none;
    double n_related = 0; // numerator support
    double denom = 0;     // unrelated count, total count, or pair time

    static tau_value ok(double v, double rel, double den) { return {v, true, undef_reason::none, rel, den}; }
    static tau_value undefined(undef_reason r, double rel = 0, double den = 0) {
        return {std::numeric_limits<double>::quiet_NaN(), false, r, rel, den};
    }
};

struct tau_curve {
    estimator_kind estimator = estimator_kind::odds;
    band_set bands;
    std::vector<tau_value> values;
    bool midpoint_convention = false; // plot x defaults to end of band
    std::vector<std::string> warnings;

    std::size_t size() const { return values.size(); }
    double plot_x(std::size_t i) const { return bands.plot_x(i, midpoint_convention); }
};

// ---------------------------------------------------------------------------
// odds and prevalence from pair tallies

namespace detail {

// false: the dataset supports no global odds at all
inline bool tau_odds_core(const pair_tally& t, const band_set& bands, tau_curve& out) {
    if (t.global.related == 0 || t.global.unrelated == 0) return false;
    const double theta_g = static_cast<double>(t.global.related) / static_cast<double>(t.global.unrelated);
    out = {};
    out.estimator = estimator_kind::odds;
    out.bands = bands;
    for (const auto& bc : t.per_band) {
        if (bc.total == 0)
            out.values.push_back(tau_value::undefined(undef_reason::empty_band));
        else if (bc.unrelated == 0)
            out.values.push_back(tau_value::undefined(undef_reason::zero_unrelated_in_band,
                                                      static_cast<double>(bc.related), 0));
        else {
            const double theta = static_cast<double>(bc.related) / static_cast<double>(bc.unrelated);
            out.values.push_back(tau_value::ok(theta / theta_g, static_cast<double>(bc.related),
                                               static_cast<double>(bc.unrelated)));
        }
    }
    return true;
}

inline bool tau_prev_core(const pair_tally& t, const band_set& bands, tau_curve& out) {
    if (t.global.related == 0 || t.global.total == 0) return false;
    const double pi_g = static_cast<double>(t.global.related) / static_cast<double>(t.global.total);
    out = {};
    out.estimator = estimator_kind::prev;
    out.bands = bands;
    for (const auto& bc : t.per_band) {
        if (bc.total == 0)
            out.values.push_back(tau_value::undefined(undef_reason::empty_band));
        else {
            const double pi = static_cast<double>(bc.related) / static_cast<double>(bc.total);
            out.values.push_back(tau_value::ok(pi / pi_g, static_cast<double>(bc.related),
                                               static_cast<double>(bc.total)));
        }
    }
    return true;
}

inline bool tau_rate_core(const rate_tally& t, const band_set& bands, tau_curve& out) {
    if (t.global.pair_time == 0 || t.global.related == 0) return false;
    const double lambda_g = static_cast<double>(t.global.related) / t.global.pair_time;
    out = {};
    out.estimator = estimator_kind::rate;
    out.bands = bands;
    out.warnings = t.warnings;
    for (const auto& rb : t.per_band) {
        if (rb.pair_time == 0) {
            out.values.push_back(tau_value::undefined(rb.related > 0
                                                          ? undef_reason::zero_time_with_events
                                                          : undef_reason::zero_pair_time,
                                                      static_cast<double>(rb.related), 0));
        } else {
            const double lambda = static_cast<double>(rb.related) / rb.pair_time;
            out.values.push_back(tau_value::ok(lambda / lambda_g, static_cast<double>(rb.related),
                                               rb.pair_time));
        }
    }
    return true;
}

} // namespace detail

inline tau_curve tau_odds(const pair_tally& t, const band_set& bands) {
    tau_curve c;
    if (!detail::tau_odds_core(t, bands, c))
        raise(errc::global_odds_undefined,
              "dataset has no " + std::string(t.global.related == 0 ? "related" : "unrelated") +
                  " pairs at any distance");
    return c;
}

inline tau_curve tau_odds(const case_dataset& ds, const band_set& bands, const relatedness_rule& rule,
                          inapplicable_policy policy = inapplicable_policy::treat_as_unrelated,
                          int workers = 1) {
    return tau_odds(tally_pairs(ds, bands, rule, pair_scope::cases_only, policy, workers), bands);
}

inline tau_curve tau_prev(const pair_tally& t, const band_set& bands) {
    tau_curve c;
    if (!detail::tau_prev_core(t, bands, c))
        raise(errc::global_prevalence_undefined, "dataset has no related pairs at any distance");
    return c;
}

inline tau_curve tau_prev(const case_dataset& ds, const band_set& bands, const relatedness_rule& rule,
                          inapplicable_policy policy = inapplicable_policy::treat_as_unrelated,
                          int workers = 1) {
    return tau_prev(tally_pairs(ds, bands, rule, pair_scope::all_individuals, policy, workers), bands);
}

inline tau_curve tau_rate(const rate_tally& t, const band_set& bands) {
    tau_curve c;
    if (!detail::tau_rate_core(t, bands, c))
        raise(errc::global_rate_undefined,
              t.global.pair_time == 0 ? "no pair time at risk accrued"
                                      : "no related episode pairs at any distance");
    return c;
}

inline tau_curve tau_rate(const episode_panel& p, const band_set& bands,
                          const relatedness_rule& rule, int workers = 1) {
    return tau_rate(tally_rate(p, bands, rule, workers), bands);
}

// ---------------------------------------------------------------------------
// time form: bands on |dt|, relatedness = spatial proximity (d < window).
// Pairs lacking an onset have no time coordinate and are excluded.

inline tau_curve tau_time_form(const case_dataset& ds, const band_set& time_bands,
                               double distance_window, int workers = 1) {
    if (!(distance_window > 0))
        raise(errc::non_positive_arguments, "distance window must be positive");
    std::vector<std::uint32_t> units;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.individuals[i].is_case() && ds.individuals[i].onset)
            units.push_back(static_cast<std::uint32_t>(i));
    const auto grid = make_band_grid(time_bands);
    const std::size_t n = units.size();
    const int w = resolve_workers(workers);
    std::vector<detail::cell_counts> partial(static_cast<std::size_t>(w), detail::zero_counts(grid));
    parallel_chunks(static_cast<std::int64_t>(n), w, [&](std::int64_t lo, std::int64_t hi, int chunk) {
        auto& local = partial[static_cast<std::size_t>(chunk)];
        for (std::int64_t i = lo; i < hi; ++i) {
            const auto& ai = ds.individuals[units[static_cast<std::size_t>(i)]];
            for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
                const auto& aj = ds.individuals[units[j]];
                const auto cell = grid.cell_of(std::abs(*ai.onset - *aj.onset));
                const bool near = ds.dist(units[static_cast<std::size_t>(i)], units[j]) < distance_window;
                local[cell * 3u + (near ? 0u : 1u)] += 1;
            }
        }
    });
    auto counts = detail::zero_counts(grid);
    for (const auto& part : partial)
        for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += part[c];
    const auto tally = detail::fold_counts(counts, grid, pair_scope::cases_only,
                                           inapplicable_policy::treat_as_unrelated);
    return tau_odds(tally, time_bands);
}

// ---------------------------------------------------------------------------
// space-time surface: one odds curve per onset-lag band. Lag membership uses
// half-open band semantics. Cases without onsets are excluded.

struct map_cell {
    tau_value v;
    std::uint64_t n_pairs = 0; // pairs in (distance band, lag band)
    bool low_support = false;
};

struct tau_map {
    band_set dbands, tbands;
    std::vector<map_cell> cells; // row-major: [d * tbands.size() + t]
    std::uint64_t min_pairs = 10;

    const map_cell& at(std::size_t d, std::size_t t) const { return cells[d * tbands.size() + t]; }
};

inline tau_map tau_spacetime_map(const case_dataset& ds, const band_set& dbands,
                                 const band_set& tbands, std::uint64_t min_pairs = 10,
                                 int workers = 1) {
    std::vector<std::uint32_t> units;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.individuals[i].is_case() && ds.individuals[i].onset)
            units.push_back(static_cast<std::uint32_t>(i));
    const auto dg = make_band_grid(dbands);
    const auto tg = make_band_grid(tbands);
    const std::size_t dc = dg.cell_count(), tc = tg.cell_count();
    const std::size_t n = units.size();

    const int w = resolve_workers(workers);
    std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(w),
                                                    std::vector<std::uint64_t>(dc * tc, 0));
    parallel_chunks(static_cast<std::int64_t>(n), w, [&](std::int64_t lo, std::int64_t hi, int chunk) {
        auto& local = partial[static_cast<std::size_t>(chunk)];
        for (std::int64_t i = lo; i < hi; ++i) {
            const auto& ai = ds.individuals[units[static_cast<std::size_t>(i)]];
            for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
                const auto& aj = ds.individuals[units[j]];
                const auto dcell = dg.cell_of(ds.dist(units[static_cast<std::size_t>(i)], units[j]));
                const auto tcell = tg.cell_of(std::abs(*ai.onset - *aj.onset));
                local[dcell * tc + tcell] += 1;
            }
        }
    });
    std::vector<std::uint64_t> joint(dc * tc, 0);
    for (const auto& part : partial)
        for (std::size_t c = 0; c < joint.size(); ++c) joint[c] += part[c];

    std::uint64_t total = 0;
    for (auto v : joint) total += v;

    auto span_sum = [&](std::pair<std::uint32_t, std::uint32_t> ds_, std::pair<std::uint32_t, std::uint32_t> ts_) {
        std::uint64_t s = 0;
        for (std::uint32_t a = ds_.first; a < ds_.second; ++a)
            for (std::uint32_t b = ts_.first; b < ts_.second; ++b) s += joint[a * tc + b];
        return s;
    };
    const std::pair<std::uint32_t, std::uint32_t> all_d{0, static_cast<std::uint32_t>(dc)};

    tau_map m;
    m.dbands = dbands;
    m.tbands = tbands;
    m.min_pairs = min_pairs;
    m.cells.reserve(dbands.size() * tbands.size());
    for (std::size_t a = 0; a < dbands.size(); ++a) {
        const std::uint64_t row = span_sum(dg.spans[a], {0, static_cast<std::uint32_t>(tc)});
        for (std::size_t b = 0; b < tbands.size(); ++b) {
            const std::uint64_t col_rel = span_sum(all_d, tg.spans[b]);
            const std::uint64_t jr = span_sum(dg.spans[a], tg.spans[b]);
            map_cell cell;
            cell.n_pairs = jr;
            cell.low_support = jr < min_pairs;
            if (col_rel == 0 || col_rel == total)
                cell.v = tau_value::undefined(undef_reason::global_undefined);
            else if (row == 0)
                cell.v = tau_value::undefined(undef_reason::empty_band);
            else if (row == jr)
                cell.v = tau_value::undefined(undef_reason::zero_unrelated_in_band,
                                              static_cast<double>(jr), 0);
            else {
                const double theta = static_cast<double>(jr) / static_cast<double>(row - jr);
                const double theta_g =
                    static_cast<double>(col_rel) / static_cast<double>(total - col_rel);
                cell.v = tau_value::ok(theta / theta_g, static_cast<double>(jr),
                                       static_cast<double>(row - jr));
            }
            m.cells.push_back(cell);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// nearest-neighbour case count: for every case, how many of its k nearest
// neighbours (among all individuals, ties at the cut broken by smaller id)
// are themselves cases.

inline std::int64_t cuzick_edwards_tk(const case_dataset& ds, int k) {
    const std::size_t n = ds.size();
    if (k < 1) raise(errc::non_positive_arguments, "k must be >= 1");
    if (static_cast<std::size_t>(k) >= n)
        raise(errc::k_too_large, "k = " + std::to_string(k) + " with " + std::to_string(n) + " individuals");
    std::int64_t sum = 0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!ds.individuals[i].is_case()) continue;
        order.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::vector<double> d(n, 0);
        for (auto j : order) d[j] = ds.dist(i, j);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (d[a] != d[b]) return d[a] < d[b];
            return ds.individuals[a].id < ds.individuals[b].id;
        });
        for (int r = 0; r < k; ++r)
            sum += ds.individuals[order[static_cast<std::size_t>(r)]].is_case();
    }
    return sum;
}

} // namespace taukit
