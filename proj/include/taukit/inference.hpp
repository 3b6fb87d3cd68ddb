#pragma once

// Resampling inference. Replicate r always draws from the counter-based
// stream (seed, r), so a bundle is reproducible bit for bit regardless of
// how replicates are scheduled across workers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "taukit/estimators.hpp"
#include "taukit/pairing.hpp"
#include "taukit/parallel.hpp"
#include "taukit/rng.hpp"
#include "taukit/version.hpp"

namespace taukit {

enum class bundle_kind { bootstrap, permutation_null };

struct replicate_matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;        // NaN when undefined
    std::vector<std::uint8_t> defined; // 1 when defined

    void resize(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        values.assign(r * c, std::numeric_limits<double>::quiet_NaN());
        defined.assign(r * c, 0);
    }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    bool is_defined(std::size_t r, std::size_t c) const { return defined[r * cols + c] != 0; }
    void set(std::size_t r, std::size_t c, double v) {
        values[r * cols + c] = v;
        defined[r * cols + c] = 1;
    }
};

struct curve_bundle {
    bundle_kind kind = bundle_kind::bootstrap;
    tau_curve point;
    replicate_matrix reps;
    std::uint64_t seed = 0;
    std::size_t R = 0;
    std::string rng = rng_name;
};

namespace detail {

inline void store_row(replicate_matrix& m, std::size_t r, const tau_curve& c, bool ok) {
    if (!ok) return; // whole row undefined
    for (std::size_t b = 0; b < c.values.size(); ++b)
        if (c.values[b].defined) m.set(r, b, c.values[b].value);
}

inline pair_tally tally_from_counts(const cell_counts& counts, const band_grid& grid,
                                    pair_scope scope, inapplicable_policy policy) {
    return fold_counts(counts, grid, scope, policy);
}

} // namespace detail

// ---------------------------------------------------------------------------
// bootstrap over sampling units (cases for odds, individuals for prev)

inline curve_bundle bootstrap_curves(const case_dataset& ds, const band_set& bands,
                                     const relatedness_rule& rule, estimator_kind estimator,
                                     std::size_t R, std::uint64_t seed,
                                     inapplicable_policy policy = inapplicable_policy::treat_as_unrelated,
                                     int workers = 1) {
    if (R < 1) raise(errc::invalid_argument, "R must be >= 1");
    if (estimator == estimator_kind::rate)
        raise(errc::invalid_argument, "rate bootstrap takes an episode panel");
    const auto scope =
        estimator == estimator_kind::odds ? pair_scope::cases_only : pair_scope::all_individuals;
    const auto pp = prepare_pairs(ds, bands, rule, scope, false, workers);
    const std::size_t n = pp.n();
    if (n < 2) raise(errc::fewer_than_two_cases, "need at least two sampling units");

    curve_bundle out;
    out.kind = bundle_kind::bootstrap;
    out.seed = seed;
    out.R = R;

    {
        auto counts = detail::zero_counts(pp.grid);
        detail::accumulate_plain(pp, counts, workers);
        const auto tally = detail::fold_counts(counts, pp.grid, scope, policy);
        out.point = estimator == estimator_kind::odds ? tau_odds(tally, bands) : tau_prev(tally, bands);
    }

    out.reps.resize(R, bands.size());
    parallel_chunks(static_cast<std::int64_t>(R), workers, [&](std::int64_t lo, std::int64_t hi, int) {
        std::vector<std::uint32_t> mult(n);
        for (std::int64_t r = lo; r < hi; ++r) {
            rng_stream rng(seed, static_cast<std::uint64_t>(r));
            std::fill(mult.begin(), mult.end(), 0);
            for (std::size_t k = 0; k < n; ++k) mult[rng.below(n)] += 1;
            auto counts = detail::zero_counts(pp.grid);
            detail::accumulate_weighted(pp, mult, counts);
            const auto tally = detail::fold_counts(counts, pp.grid, scope, policy);
            tau_curve c;
            const bool ok = estimator == estimator_kind::odds
                                ? detail::tau_odds_core(tally, bands, c)
                                : detail::tau_prev_core(tally, bands, c);
            detail::store_row(out.reps, static_cast<std::size_t>(r), c, ok);
        }
    });
    return out;
}

// Rate bootstrap resamples persons together with their episodes. Pair time
// is precomputed per ordered person pair per grid cell, so a replicate is a
// weighted fold.
inline curve_bundle bootstrap_curves(const episode_panel& panel, const band_set& bands,
                                     const relatedness_rule& rule, std::size_t R,
                                     std::uint64_t seed, int workers = 1) {
    if (R < 1) raise(errc::invalid_argument, "R must be >= 1");
    const auto grid = make_band_grid(bands);
    const auto rp = detail::flatten_rule(rule);
    const std::size_t n = panel.persons.size();
    if (n < 2) raise(errc::fewer_than_two_cases, "need at least two persons");
    const std::size_t nc = grid.cell_count();

    // per ordered pair (i, j): time by cell
    std::vector<double> T(n * n * nc, 0);
    parallel_chunks(static_cast<std::int64_t>(n), workers, [&](std::int64_t lo, std::int64_t hi, int) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const auto inf_i = detail::infectious_intervals(panel, static_cast<std::size_t>(i));
            if (inf_i.empty()) continue;
            const auto& pi = panel.persons[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < n; ++j) {
                if (static_cast<std::size_t>(i) == j) continue;
                double* row = T.data() + (static_cast<std::size_t>(i) * n + j) * nc;
                const auto w = intersect(inf_i, detail::susceptible_intervals(panel, j));
                const auto& pj = panel.persons[j];
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
                        row[grid.cell_of(distance(xi, yi, xj, yj, panel.crs))] += cuts[s + 1] - cuts[s];
                    }
                }
            }
        }
    });

    // related directed episode pairs: (cell, infector person, infectee person)
    struct ep_pair { std::uint32_t cell, kl, km; };
    std::vector<ep_pair> rel_pairs;
    {
        std::vector<double> ex(panel.episodes.size()), ey(panel.episodes.size());
        for (std::size_t e = 0; e < panel.episodes.size(); ++e)
            panel.persons[panel.episodes[e].person_index].locate(panel.episodes[e].onset, ex[e], ey[e]);
        for (std::size_t l = 0; l < panel.episodes.size(); ++l)
            for (std::size_t m = 0; m < panel.episodes.size(); ++m) {
                if (l == m || panel.episodes[l].person_index == panel.episodes[m].person_index) continue;
                if (!detail::episode_pair_related(rp, panel.episodes[l].onset, panel.episodes[m].onset))
                    continue;
                rel_pairs.push_back({grid.cell_of(distance(ex[l], ey[l], ex[m], ey[m], panel.crs)),
                                     static_cast<std::uint32_t>(panel.episodes[l].person_index),
                                     static_cast<std::uint32_t>(panel.episodes[m].person_index)});
            }
    }

    auto fold_replicate = [&](const std::vector<std::uint32_t>& mult, rate_tally& t) {
        std::vector<std::uint64_t> rel_cells(nc, 0);
        for (const auto& e : rel_pairs)
            rel_cells[e.cell] += static_cast<std::uint64_t>(mult[e.kl]) * mult[e.km];
        std::vector<double> time_cells(nc, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!mult[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || !mult[j]) continue;
                const double w = static_cast<double>(mult[i]) * mult[j];
                const double* row = T.data() + (i * n + j) * nc;
                for (std::size_t c = 0; c < nc; ++c) time_cells[c] += w * row[c];
            }
        }
        t = {};
        t.n_persons = n;
        t.n_episodes = panel.episodes.size();
        auto fold = [&](std::uint32_t first, std::uint32_t last) {
            rate_band rb;
            for (std::uint32_t c = first; c < last; ++c) {
                rb.related += rel_cells[c];
                rb.pair_time += time_cells[c];
            }
            return rb;
        };
        for (const auto& [first, last] : grid.spans) t.per_band.push_back(fold(first, last));
        t.global = fold(0, static_cast<std::uint32_t>(nc));
    };

    curve_bundle out;
    out.kind = bundle_kind::bootstrap;
    out.seed = seed;
    out.R = R;
    {
        std::vector<std::uint32_t> ones(n, 1);
        rate_tally t;
        fold_replicate(ones, t);
        out.point = tau_rate(t, bands);
    }
    out.reps.resize(R, bands.size());
    parallel_chunks(static_cast<std::int64_t>(R), workers, [&](std::int64_t lo, std::int64_t hi, int) {
        std::vector<std::uint32_t> mult(n);
        rate_tally t;
        for (std::int64_t r = lo; r < hi; ++r) {
            rng_stream rng(seed, static_cast<std::uint64_t>(r));
            std::fill(mult.begin(), mult.end(), 0);
            for (std::size_t k = 0; k < n; ++k) mult[rng.below(n)] += 1;
            fold_replicate(mult, t);
            tau_curve c;
            detail::store_row(out.reps, static_cast<std::size_t>(r), c,
                              detail::tau_rate_core(t, bands, c));
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// pointwise percentile envelope (type-7 interpolation between order statistics)

inline double quantile_type7(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const auto i = static_cast<std::size_t>(h);
    if (i + 1 >= n) return sorted[n - 1];
    return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

struct envelope_band {
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_defined = 0;
    bool unreliable = false; // more than half the replicates undefined here
};

struct pointwise_envelope_result {
    double level = 0.95;
    std::vector<envelope_band> bands;
};

// level 1.0 is allowed and spans the replicate min and max.
inline pointwise_envelope_result pointwise_envelope(const curve_bundle& bundle, double level = 0.95) {
    if (!(level > 0 && level <= 1)) raise(errc::invalid_argument, "level must be in (0, 1]");
    if (bundle.R < 20)
        raise(errc::too_few_replicates, "R = " + std::to_string(bundle.R) + " < 20");
    pointwise_envelope_result out;
    out.level = level;
    std::vector<double> v;
    for (std::size_t b = 0; b < bundle.reps.cols; ++b) {
        v.clear();
        for (std::size_t r = 0; r < bundle.reps.rows; ++r)
            if (bundle.reps.is_defined(r, b)) v.push_back(bundle.reps.at(r, b));
        envelope_band eb;
        eb.n_defined = v.size();
        eb.unreliable = v.size() * 2 < bundle.R;
        if (!v.empty()) {
            std::sort(v.begin(), v.end());
            eb.lo = quantile_type7(v, (1 - level) / 2);
            eb.hi = quantile_type7(v, 1 - (1 - level) / 2);
        }
        out.bands.push_back(eb);
    }
    return out;
}

// ---------------------------------------------------------------------------
// permutation null: onset times shuffled among cases, locations fixed

inline curve_bundle permutation_null_curves(const case_dataset& ds, const band_set& bands,
                                            const relatedness_rule& rule, estimator_kind estimator,
                                            std::size_t R, std::uint64_t seed,
                                            inapplicable_policy policy = inapplicable_policy::treat_as_unrelated,
                                            int workers = 1) {
    if (R < 1) raise(errc::invalid_argument, "R must be >= 1");
    if (estimator == estimator_kind::rate)
        raise(errc::invalid_argument, "permutation null is defined for odds and prev only");
    if (!rule.reads_onsets())
        raise(errc::rule_not_permutable, "rule has no temporal component");
    for (const auto& a : ds.individuals)
        if (a.is_case() && !a.onset)
            raise(errc::rule_not_permutable, "case " + a.id + " has no onset time to permute");

    const auto scope =
        estimator == estimator_kind::odds ? pair_scope::cases_only : pair_scope::all_individuals;
    const auto pp = prepare_pairs(ds, bands, rule, scope, true, workers);
    const std::size_t n = pp.n();

    std::vector<std::size_t> case_pos; // unit positions holding permutable onsets
    for (std::size_t u = 0; u < n; ++u)
        if (ds.individuals[pp.units[u]].is_case()) case_pos.push_back(u);

    curve_bundle out;
    out.kind = bundle_kind::permutation_null;
    out.seed = seed;
    out.R = R;
    {
        auto counts = detail::zero_counts(pp.grid);
        detail::accumulate_permuted(pp, pp.onset, counts);
        const auto tally = detail::fold_counts(counts, pp.grid, scope, policy);
        out.point = estimator == estimator_kind::odds ? tau_odds(tally, bands) : tau_prev(tally, bands);
    }
    out.reps.resize(R, bands.size());
    parallel_chunks(static_cast<std::int64_t>(R), workers, [&](std::int64_t lo, std::int64_t hi, int) {
        std::vector<double> onset(n);
        std::vector<double> pool(case_pos.size());
        for (std::int64_t r = lo; r < hi; ++r) {
            rng_stream rng(seed, static_cast<std::uint64_t>(r));
            onset = pp.onset;
            for (std::size_t k = 0; k < case_pos.size(); ++k) pool[k] = pp.onset[case_pos[k]];
            rng.shuffle(pool);
            for (std::size_t k = 0; k < case_pos.size(); ++k) onset[case_pos[k]] = pool[k];
            auto counts = detail::zero_counts(pp.grid);
            detail::accumulate_permuted(pp, onset, counts);
            const auto tally = detail::fold_counts(counts, pp.grid, scope, policy);
            tau_curve c;
            const bool ok = estimator == estimator_kind::odds
                                ? detail::tau_odds_core(tally, bands, c)
                                : detail::tau_prev_core(tally, bands, c);
            detail::store_row(out.reps, static_cast<std::size_t>(r), c, ok);
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// extreme-rank global envelope test

struct global_test_result {
    double p = 1;
    double alpha = 0.05;
    std::vector<double> lo, hi; // alpha-level global envelope per band
    std::size_t R = 0;
};

// Pointwise two-sided mid-ranks; a curve's extreme rank is its most extreme
// (smallest) pointwise rank anywhere. p = (1 + #{null at least as extreme})
// / (R + 1). Bands where a curve is undefined contribute no rank for it.
inline global_test_result global_envelope_test(const tau_curve& observed,
                                               const curve_bundle& nulls, double alpha = 0.05) {
    if (nulls.kind != bundle_kind::permutation_null)
        raise(errc::invalid_argument, "global envelope test needs permutation null curves");
    if (!(alpha > 0 && alpha < 1)) raise(errc::invalid_argument, "alpha must be in (0, 1)");
    const std::size_t R = nulls.R;
    const auto needed = static_cast<std::size_t>(std::ceil(2.0 / alpha)) - 1;
    if (R < needed)
        raise(errc::insufficient_replicates,
              "R = " + std::to_string(R) + " < " + std::to_string(needed) + " for alpha = " +
                  std::to_string(alpha));
    const std::size_t B = observed.size();
    if (nulls.reps.cols != B) raise(errc::invalid_argument, "band axes differ");

    const std::size_t curves = R + 1;
    auto value_of = [&](std::size_t k, std::size_t b, double& v) {
        if (k == 0) {
            if (!observed.values[b].defined) return false;
            v = observed.values[b].value;
            return true;
        }
        if (!nulls.reps.is_defined(k - 1, b)) return false;
        v = nulls.reps.at(k - 1, b);
        return true;
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> extreme_rank(curves, inf);
    std::vector<std::pair<double, std::size_t>> col;
    for (std::size_t b = 0; b < B; ++b) {
        col.clear();
        double v;
        for (std::size_t k = 0; k < curves; ++k)
            if (value_of(k, b, v)) col.emplace_back(v, k);
        if (col.empty()) continue;
        std::sort(col.begin(), col.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        const std::size_t m = col.size();
        std::size_t s = 0;
        while (s < m) {
            std::size_t e = s;
            while (e + 1 < m && col[e + 1].first == col[s].first) ++e;
            const double rank_low = static_cast<double>(s) + (static_cast<double>(e - s + 1) + 1) / 2;
            const double rank_high =
                static_cast<double>(m - 1 - e) + (static_cast<double>(e - s + 1) + 1) / 2;
            const double two_sided = std::min(rank_low, rank_high);
            for (std::size_t q = s; q <= e; ++q)
                extreme_rank[col[q].second] = std::min(extreme_rank[col[q].second], two_sided);
            s = e + 1;
        }
    }
    if (std::isinf(extreme_rank[0]))
        raise(errc::invalid_argument, "observed curve has no defined bands");

    std::size_t as_extreme = 0;
    for (std::size_t k = 1; k < curves; ++k)
        if (extreme_rank[k] <= extreme_rank[0]) ++as_extreme;

    global_test_result res;
    res.alpha = alpha;
    res.R = R;
    res.p = static_cast<double>(1 + as_extreme) / static_cast<double>(R + 1);

    // alpha-level envelope: drop the floor(alpha (R+1)) most extreme curves
    auto sorted_er = extreme_rank;
    std::sort(sorted_er.begin(), sorted_er.end());
    const auto m_out = static_cast<std::size_t>(alpha * static_cast<double>(R + 1));
    const double threshold = m_out >= 1 ? sorted_er[m_out - 1] : -inf;
    res.lo.assign(B, std::numeric_limits<double>::quiet_NaN());
    res.hi.assign(B, std::numeric_limits<double>::quiet_NaN());
    bool any_kept = false;
    for (std::size_t k = 0; k < curves && !any_kept; ++k) any_kept = extreme_rank[k] > threshold;
    for (std::size_t b = 0; b < B; ++b) {
        double lo = inf, hi = -inf;
        double v;
        for (std::size_t k = 0; k < curves; ++k) {
            if (any_kept && extreme_rank[k] <= threshold) continue;
            if (!value_of(k, b, v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo <= hi) {
            res.lo[b] = lo;
            res.hi[b] = hi;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// clustering range: where bootstrap replicate curves first fall back to 1

enum class crossing_mode { first, last };

struct range_estimate {
    double point = std::numeric_limits<double>::quiet_NaN();
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
    double censored_fraction = 0;
    double level = 0.95;
    crossing_mode crossing = crossing_mode::first;
    std::vector<double> replicate_d;      // crossing distance, or censor distance
    std::vector<std::uint8_t> censored;   // 1 when the curve never came back to 1
};

// Interpolates on the end-of-band abscissa between consecutive defined plot
// points. Replicates starting at or below 1 cross at distance 0; replicates
// that never come back down are right-censored at the last defined point.
inline range_estimate clustering_range(const curve_bundle& bundle, double level = 0.95,
                                       crossing_mode mode = crossing_mode::first) {
    if (bundle.kind != bundle_kind::bootstrap)
        raise(errc::invalid_argument, "clustering range needs bootstrap replicates");
    if (!(level > 0 && level <= 1)) raise(errc::invalid_argument, "level must be in (0, 1]");
    const std::size_t B = bundle.reps.cols;
    std::vector<double> xs(B);
    for (std::size_t b = 0; b < B; ++b) xs[b] = bundle.point.bands.plot_x(b, false);

    range_estimate out;
    out.level = level;
    out.crossing = mode;
    for (std::size_t r = 0; r < bundle.reps.rows; ++r) {
        double prev_x = 0, prev_y = 0, last_x = 0;
        bool have_prev = false, have_any = false, crossed = false;
        double d = 0;
        for (std::size_t b = 0; b < B; ++b) {
            if (!bundle.reps.is_defined(r, b)) continue;
            const double y = bundle.reps.at(r, b);
            const double x = xs[b];
            last_x = x;
            if (!have_any) {
                have_any = true;
                if (y <= 1) { d = 0; crossed = true; }
            } else if (have_prev && prev_y > 1 && y <= 1 && (!crossed || mode == crossing_mode::last)) {
                d = prev_x + (x - prev_x) * (prev_y - 1) / (prev_y - y);
                crossed = true;
            }
            prev_x = x;
            prev_y = y;
            have_prev = true;
            if (crossed && mode == crossing_mode::first && d == 0) break;
        }
        out.replicate_d.push_back(crossed ? d : last_x);
        out.censored.push_back(crossed ? 0 : 1);
    }

    std::vector<double> unc;
    for (std::size_t r = 0; r < out.replicate_d.size(); ++r)
        if (!out.censored[r]) unc.push_back(out.replicate_d[r]);
    out.censored_fraction = out.replicate_d.empty()
                                ? 0.0
                                : 1.0 - static_cast<double>(unc.size()) /
                                            static_cast<double>(out.replicate_d.size());
    if (unc.empty()) raise(errc::all_censored, "no replicate curve returned to 1");
    std::sort(unc.begin(), unc.end());
    out.point = quantile_type7(unc, 0.5);
    out.lo = quantile_type7(unc, (1 - level) / 2);
    out.hi = quantile_type7(unc, 1 - (1 - level) / 2);
    return out;
}

// ---------------------------------------------------------------------------
// superseded field heuristic, reported for comparison only

struct legacy_range {
    double d = std::numeric_limits<double>::quiet_NaN();
    const char* rule = ""; // "envelope" or "median"
    const char* label = "legacy";
};

// Two trigger rules: lower envelope bound at or below 1 on two consecutive
// bands (range = end of the first of them), or replicate median below 1.2
// (range = that band's end). When both fire, the smaller distance wins.
inline legacy_range legacy_range_azman(const tau_curve& point, const pointwise_envelope_result& env,
                                       const replicate_matrix& reps) {
    const std::size_t B = point.size();
    double d_env = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b + 1 < B; ++b) {
        if (std::isnan(env.bands[b].lo) || std::isnan(env.bands[b + 1].lo)) continue;
        if (env.bands[b].lo <= 1 && env.bands[b + 1].lo <= 1) {
            d_env = point.bands.plot_x(b, false);
            break;
        }
    }
    double d_med = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> v;
    for (std::size_t b = 0; b < B; ++b) {
        v.clear();
        for (std::size_t r = 0; r < reps.rows; ++r)
            if (reps.is_defined(r, b)) v.push_back(reps.at(r, b));
        if (v.empty()) continue;
        std::sort(v.begin(), v.end());
        if (quantile_type7(v, 0.5) < 1.2) {
            d_med = point.bands.plot_x(b, false);
            break;
        }
    }
    legacy_range out;
    if (std::isnan(d_env) && std::isnan(d_med))
        raise(errc::no_crossing, "neither legacy trigger fired");
    if (std::isnan(d_med) || (!std::isnan(d_env) && d_env <= d_med)) {
        out.d = d_env;
        out.rule = "envelope";
    } else {
        out.d = d_med;
        out.rule = "median";
    }
    return out;
}

} // namespace taukit
