#pragma once

// Pair enumeration and tallying. The hot path bins every unordered pair once
// into the elementary cells of a band_grid; replicate loops then reweight the
// same pairs (bootstrap multiplicities, permuted onset times) without
// re-deriving geometry. All counts are integers, so parallel partial tallies
// merge exactly and results cannot depend on worker count or input order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "taukit/bands.hpp"
#include "taukit/error.hpp"
#include "taukit/model.hpp"
#include "taukit/parallel.hpp"

namespace taukit {

enum class relatedness { related, unrelated, inapplicable };

// Pairs the rule cannot judge (missing onset or mark): either count them as
// unrelated (default; conservative for odds) or drop them from both sides.
// Totals always count every pair in the band.
enum class inapplicable_policy { treat_as_unrelated, exclude };

// Symmetric rule evaluation on two individuals. Case status is not consulted
// here; tallies gate on status before asking the rule.
inline relatedness evaluate_relatedness(const relatedness_rule& rule, const individual& a,
                                        const individual& b) {
    switch (rule.k) {
        case relatedness_rule::kind::temporal_interval: {
            if (!a.onset || !b.onset) return relatedness::inapplicable;
            const double dt = std::abs(*a.onset - *b.onset);
            return (dt >= rule.t1 && dt <= rule.t2) ? relatedness::related : relatedness::unrelated;
        }
        case relatedness_rule::kind::mark_equality: {
            auto ia = a.marks.find(rule.mark), ib = b.marks.find(rule.mark);
            if (ia == a.marks.end() || ib == b.marks.end()) return relatedness::inapplicable;
            return ia->second == ib->second ? relatedness::related : relatedness::unrelated;
        }
        case relatedness_rule::kind::prevalent_incident:
            return is_prevalent(a) != is_prevalent(b) ? relatedness::related : relatedness::unrelated;
        case relatedness_rule::kind::conjunction: {
            bool any_inapplicable = false;
            for (const auto& p : rule.parts) {
                switch (evaluate_relatedness(p, a, b)) {
                    case relatedness::unrelated: return relatedness::unrelated;
                    case relatedness::inapplicable: any_inapplicable = true; break;
                    case relatedness::related: break;
                }
            }
            return any_inapplicable ? relatedness::inapplicable : relatedness::related;
        }
    }
    return relatedness::inapplicable;
}

// ---------------------------------------------------------------------------
// tallies over a case_dataset

struct band_counts {
    std::uint64_t related = 0, unrelated = 0, total = 0;
};

struct pair_tally {
    std::vector<band_counts> per_band;
    band_counts global; // every pair, any separation
    pair_scope scope = pair_scope::cases_only;
    inapplicable_policy policy = inapplicable_policy::treat_as_unrelated;
};

namespace detail {

// Flattened rule: temporal components intersect into one closed window,
// everything else stays for static evaluation.
struct rule_parts {
    bool has_temporal = false;
    double t1 = 0, t2 = 0;
    std::vector<relatedness_rule> statics;

    void absorb(const relatedness_rule& r) {
        if (r.k == relatedness_rule::kind::conjunction) {
            for (const auto& p : r.parts) absorb(p);
        } else if (r.k == relatedness_rule::kind::temporal_interval) {
            if (!has_temporal) { has_temporal = true; t1 = r.t1; t2 = r.t2; }
            else { t1 = std::max(t1, r.t1); t2 = std::min(t2, r.t2); }
        } else {
            statics.push_back(r);
        }
    }
};

inline rule_parts flatten_rule(const relatedness_rule& r) {
    rule_parts rp;
    rp.absorb(r);
    return rp;
}

} // namespace detail

// Per-pair codes: 0 related, 1 unrelated, 2 inapplicable,
// 3 pending (related iff |dt| in window), 4 pending with an inapplicable
// static part (inapplicable iff |dt| in window, else unrelated).
struct prepared_pairs {
    std::vector<std::uint32_t> units; // dataset indices
    band_grid grid;
    std::vector<std::uint16_t> cell;
    std::vector<std::uint8_t> code;
    std::vector<double> onset; // per unit; NaN when absent
    double t1 = 0, t2 = 0;     // window for pending codes

    std::size_t n() const { return units.size(); }
    std::size_t pair_count() const { return units.size() * (units.size() - 1) / 2; }
    std::size_t row_offset(std::size_t i) const { return i * (2 * units.size() - i - 1) / 2; }
};

// defer_temporal keeps the temporal window out of the static code so permuted
// onsets can be applied per replicate.
inline prepared_pairs prepare_pairs(const case_dataset& ds, const band_set& bands,
                                    const relatedness_rule& rule, pair_scope scope,
                                    bool defer_temporal = false, int workers = 1) {
    prepared_pairs pp;
    pp.grid = make_band_grid(bands);
    if (pp.grid.cell_count() > std::numeric_limits<std::uint16_t>::max())
        raise(errc::invalid_argument, "band set too large");
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (scope == pair_scope::all_individuals || ds.individuals[i].is_case())
            pp.units.push_back(static_cast<std::uint32_t>(i));

    const auto rp = detail::flatten_rule(rule);
    pp.t1 = rp.t1;
    pp.t2 = rp.t2;
    const auto statics = rp.statics.empty() ? relatedness_rule::temporal(0, 0) // unused
                                            : relatedness_rule::all_of(rp.statics);

    const std::size_t n = pp.units.size();
    pp.cell.resize(pp.pair_count());
    pp.code.resize(pp.pair_count());
    pp.onset.resize(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t u = 0; u < n; ++u)
        if (const auto& o = ds.individuals[pp.units[u]].onset) pp.onset[u] = *o;

    const bool time_axis = bands.axis == band_axis::time;
    parallel_chunks(static_cast<std::int64_t>(n), workers, [&](std::int64_t lo, std::int64_t hi, int) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const auto ui = pp.units[static_cast<std::size_t>(i)];
            const auto& ai = ds.individuals[ui];
            std::size_t p = pp.row_offset(static_cast<std::size_t>(i));
            for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j, ++p) {
                const auto uj = pp.units[j];
                const auto& aj = ds.individuals[uj];
                const double axis_value =
                    time_axis ? std::abs(pp.onset[static_cast<std::size_t>(i)] - pp.onset[j])
                              : ds.dist(ui, uj);
                pp.cell[p] = static_cast<std::uint16_t>(pp.grid.cell_of(axis_value));

                std::uint8_t c;
                if (!ai.is_case() || !aj.is_case()) {
                    c = 1; // pairs with a noncase are never related
                } else if (!defer_temporal) {
                    switch (evaluate_relatedness(rule, ai, aj)) {
                        case relatedness::related: c = 0; break;
                        case relatedness::unrelated: c = 1; break;
                        default: c = 2; break;
                    }
                } else {
                    relatedness st = rp.statics.empty() ? relatedness::related
                                                         : evaluate_relatedness(statics, ai, aj);
                    if (st == relatedness::unrelated) c = 1;
                    else if (!rp.has_temporal) c = (st == relatedness::related) ? 0 : 2;
                    else c = (st == relatedness::related) ? 3 : 4;
                }
                pp.code[p] = c;
            }
        }
    });
    return pp;
}

namespace detail {

// counts layout: [cell * 3 + rel], rel in {related, unrelated, inapplicable}
using cell_counts = std::vector<std::uint64_t>;

inline cell_counts zero_counts(const band_grid& g) { return cell_counts(g.cell_count() * 3, 0); }

// Unit multiplicities (bootstrap resample); pairs of copies of one original
// unit are self pairs and never counted.
inline void accumulate_weighted(const prepared_pairs& pp, const std::vector<std::uint32_t>& mult,
                                cell_counts& counts) {
    const std::size_t n = pp.n();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::uint64_t mi = mult[i];
        if (!mi) continue;
        std::size_t p = pp.row_offset(i);
        for (std::size_t j = i + 1; j < n; ++j, ++p) {
            const std::uint64_t w = mi * mult[j];
            if (w) counts[pp.cell[p] * 3u + pp.code[p]] += w;
        }
    }
}

// Replicate-permuted onsets; only meaningful for pending codes.
inline void accumulate_permuted(const prepared_pairs& pp, const std::vector<double>& onset,
                                cell_counts& counts) {
    const std::size_t n = pp.n();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double ti = onset[i];
        std::size_t p = pp.row_offset(i);
        for (std::size_t j = i + 1; j < n; ++j, ++p) {
            std::uint8_t c = pp.code[p];
            if (c >= 3) {
                const double dt = std::abs(ti - onset[j]);
                const bool in = dt >= pp.t1 && dt <= pp.t2;
                c = (c == 3) ? (in ? 0 : 1) : (in ? 2 : 1);
            }
            counts[pp.cell[p] * 3u + c] += 1;
        }
    }
}

inline void accumulate_plain(const prepared_pairs& pp, cell_counts& counts, int workers) {
    const std::size_t n = pp.n();
    const int w = resolve_workers(workers);
    std::vector<cell_counts> partial(static_cast<std::size_t>(std::max(1, w)), zero_counts(pp.grid));
    parallel_chunks(static_cast<std::int64_t>(n), w, [&](std::int64_t lo, std::int64_t hi, int chunk) {
        auto& local = partial[static_cast<std::size_t>(chunk)];
        for (std::int64_t i = lo; i < hi; ++i) {
            std::size_t p = pp.row_offset(static_cast<std::size_t>(i));
            for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j, ++p)
                local[pp.cell[p] * 3u + pp.code[p]] += 1;
        }
    });
    for (const auto& part : partial)
        for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += part[c];
}

inline pair_tally fold_counts(const cell_counts& counts, const band_grid& grid,
                              pair_scope scope, inapplicable_policy policy) {
    pair_tally t;
    t.scope = scope;
    t.policy = policy;
    auto fold_span = [&](std::uint32_t first, std::uint32_t last) {
        band_counts bc;
        std::uint64_t inappl = 0;
        for (std::uint32_t c = first; c < last; ++c) {
            bc.related += counts[c * 3u];
            bc.unrelated += counts[c * 3u + 1];
            inappl += counts[c * 3u + 2];
        }
        bc.total = bc.related + bc.unrelated + inappl;
        if (policy == inapplicable_policy::treat_as_unrelated) bc.unrelated += inappl;
        return bc;
    };
    for (const auto& [first, last] : grid.spans) t.per_band.push_back(fold_span(first, last));
    t.global = fold_span(0, grid.cell_count());
    return t;
}

} // namespace detail

// One-shot tally over all unordered pairs in scope.
inline pair_tally tally_pairs(const case_dataset& ds, const band_set& bands,
                              const relatedness_rule& rule,
                              pair_scope scope = pair_scope::cases_only,
                              inapplicable_policy policy = inapplicable_policy::treat_as_unrelated,
                              int workers = 1) {
    const auto pp = prepare_pairs(ds, bands, rule, scope, false, workers);
    auto counts = detail::zero_counts(pp.grid);
    detail::accumulate_plain(pp, counts, workers);
    return detail::fold_counts(counts, pp.grid, scope, policy);
}

// ---------------------------------------------------------------------------
// interval algebra (half-open, sorted, disjoint)

struct interval {
    double a = 0, b = 0;
};
using interval_list = std::vector<interval>;

inline double total_length(const interval_list& v) {
    double s = 0;
    for (const auto& iv : v) s += iv.b - iv.a;
    return s;
}

inline interval_list intersect(const interval_list& x, const interval_list& y) {
    interval_list out;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const double a = std::max(x[i].a, y[j].a);
        const double b = std::min(x[i].b, y[j].b);
        if (a < b) out.push_back({a, b});
        (x[i].b < y[j].b ? i : j) += 1;
    }
    return out;
}

// base minus blocked; both sorted, base disjoint.
inline interval_list subtract(const interval_list& base, interval_list blocked) {
    std::sort(blocked.begin(), blocked.end(),
              [](const interval& p, const interval& q) { return p.a < q.a; });
    interval_list out;
    for (auto iv : base) {
        double cur = iv.a;
        for (const auto& bl : blocked) {
            if (bl.b <= cur) continue;
            if (bl.a >= iv.b) break;
            if (bl.a > cur) out.push_back({cur, bl.a});
            cur = std::max(cur, bl.b);
            if (cur >= iv.b) break;
        }
        if (cur < iv.b) out.push_back({cur, iv.b});
    }
    return out;
}

namespace detail {

inline std::vector<const episode*> episodes_of(const episode_panel& p, std::size_t i) {
    std::vector<const episode*> v;
    for (const auto& e : p.episodes)
        if (e.person_index == i) v.push_back(&e);
    return v;
}

// Windows are clipped to enrollment: band membership needs a location, and
// locations are only observed while the person is on study.
inline interval_list infectious_intervals(const episode_panel& p, std::size_t i) {
    const auto& q = p.persons[i];
    interval_list v;
    for (const auto* e : episodes_of(p, i)) {
        const double end = p.window == infectious_window::fixed_duration
                               ? e->onset + p.fixed_duration
                               : e->recovery;
        const double a = std::max(e->onset, q.entry);
        const double b = std::min(end, q.exit);
        if (a < b) v.push_back({a, b});
    }
    std::sort(v.begin(), v.end(), [](const interval& a, const interval& b) { return a.a < b.a; });
    return v;
}

inline interval_list susceptible_intervals(const episode_panel& p, std::size_t j) {
    const auto& q = p.persons[j];
    if (!(q.entry < q.exit)) return {};
    interval_list blocked;
    constexpr double inf = std::numeric_limits<double>::infinity();
    bool first = true;
    for (const auto* e : episodes_of(p, j)) {
        if (p.immunizing && first) {
            blocked.push_back({e->onset, inf});
            break;
        }
        const double until = e->recovery + p.susceptibility_delay;
        if (e->onset < until) blocked.push_back({e->onset, until});
        first = false;
    }
    return subtract({{q.entry, q.exit}}, std::move(blocked));
}

} // namespace detail

// Time (in study units) during which i is infectious, j is susceptible, and
// their separation lies in the band. Directed: (i, j) and (j, i) differ.
inline double pair_time_at_risk(const episode_panel& p, std::size_t i, std::size_t j,
                                const band& b) {
    const auto w = intersect(detail::infectious_intervals(p, i), detail::susceptible_intervals(p, j));
    if (w.empty()) return 0;
    const auto& pi = p.persons[i];
    const auto& pj = p.persons[j];
    double sum = 0;
    for (const auto& iv : w) {
        // split by both movement histories; distance is constant per segment
        std::vector<double> cuts{iv.a, iv.b};
        for (const auto& tp : pi.track)
            if (tp.from_t > iv.a && tp.from_t < iv.b) cuts.push_back(tp.from_t);
        for (const auto& tp : pj.track)
            if (tp.from_t > iv.a && tp.from_t < iv.b) cuts.push_back(tp.from_t);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            if (!(cuts[s] < cuts[s + 1])) continue;
            double xi, yi, xj, yj;
            pi.locate(cuts[s], xi, yi);
            pj.locate(cuts[s], xj, yj);
            if (b.contains(distance(xi, yi, xj, yj, p.crs))) sum += cuts[s + 1] - cuts[s];
        }
    }
    return sum;
}

// ---------------------------------------------------------------------------
// rate tallies over an episode_panel

struct rate_band {
    std::uint64_t related = 0; // directed episode pairs
    double pair_time = 0;      // directed person pair time at risk
};

struct rate_tally {
    std::vector<rate_band> per_band;
    rate_band global;
    std::size_t n_persons = 0, n_episodes = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// Directed relatedness for episode pairs: temporal window applies to the
// signed onset difference t_m - t_l. Rules with non-temporal parts are
// inapplicable on panels (persons carry no marks) and never relate.
inline bool episode_pair_related(const rule_parts& rp, double t_l, double t_m) {
    if (!rp.statics.empty() || !rp.has_temporal) return false;
    const double dt = t_m - t_l;
    return dt >= rp.t1 && dt <= rp.t2;
}

} // namespace detail

inline rate_tally tally_rate(const episode_panel& p, const band_set& bands,
                             const relatedness_rule& rule, int workers = 1) {
    const auto grid = make_band_grid(bands);
    const auto rp = detail::flatten_rule(rule);
    const std::size_t n = p.persons.size();

    // numerator: directed episode pairs across distinct persons
    std::vector<std::uint64_t> rel_cells(grid.cell_count(), 0);
    std::vector<double> ex(p.episodes.size()), ey(p.episodes.size());
    for (std::size_t e = 0; e < p.episodes.size(); ++e)
        p.persons[p.episodes[e].person_index].locate(p.episodes[e].onset, ex[e], ey[e]);
    for (std::size_t l = 0; l < p.episodes.size(); ++l)
        for (std::size_t m = 0; m < p.episodes.size(); ++m) {
            if (l == m || p.episodes[l].person_index == p.episodes[m].person_index) continue;
            if (!detail::episode_pair_related(rp, p.episodes[l].onset, p.episodes[m].onset)) continue;
            rel_cells[grid.cell_of(distance(ex[l], ey[l], ex[m], ey[m], p.crs))] += 1;
        }

    // denominator: per-row sums reduced in person order so worker count
    // cannot change the floating point result
    std::vector<std::vector<double>> row_time(n, std::vector<double>(grid.cell_count(), 0));
    parallel_chunks(static_cast<std::int64_t>(n), workers, [&](std::int64_t lo, std::int64_t hi, int) {
        for (std::int64_t i = lo; i < hi; ++i) {
            auto& row = row_time[static_cast<std::size_t>(i)];
            const auto inf_i = detail::infectious_intervals(p, static_cast<std::size_t>(i));
            if (inf_i.empty()) continue;
            const auto& pi = p.persons[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < n; ++j) {
                if (static_cast<std::size_t>(i) == j) continue;
                const auto w = intersect(inf_i, detail::susceptible_intervals(p, j));
                const auto& pj = p.persons[j];
                for (const auto& iv : w) {
                    std::vector<double> cuts{iv.a, iv.b};
                    for (const auto& tp : pi.track)
                        if (tp.from_t > iv.a && tp.from_t < iv.b) cuts.push_back(tp.from_t);
                    for (const auto& tp : pj.track)
                        if (tp.from_t > iv.a && tp.from_t < iv.b) cuts.push_back(tp.from_t);
                    std::sort(cuts.begin(), cuts.end());
                    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
                        if (!(cuts[s] < cuts[s + 1])) continue;
                        double xi, yi, xj, yj;
                        pi.locate(cuts[s], xi, yi);
                        pj.locate(cuts[s], xj, yj);
                        row[grid.cell_of(distance(xi, yi, xj, yj, p.crs))] += cuts[s + 1] - cuts[s];
                    }
                }
            }
        }
    });

    std::vector<double> time_cells(grid.cell_count(), 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t c = 0; c < grid.cell_count(); ++c) time_cells[c] += row_time[i][c];

    rate_tally t;
    t.n_persons = n;
    t.n_episodes = p.episodes.size();
    auto fold = [&](std::uint32_t first, std::uint32_t last) {
        rate_band rb;
        for (std::uint32_t c = first; c < last; ++c) {
            rb.related += rel_cells[c];
            rb.pair_time += time_cells[c];
        }
        return rb;
    };
    for (const auto& [first, last] : grid.spans) t.per_band.push_back(fold(first, last));
    t.global = fold(0, grid.cell_count());
    for (std::size_t b = 0; b < t.per_band.size(); ++b)
        if (t.per_band[b].pair_time == 0 && t.per_band[b].related > 0)
            t.warnings.push_back("band " + std::to_string(b) +
                                 ": related episode pairs but zero pair time at risk");
    return t;
}

} // namespace taukit
