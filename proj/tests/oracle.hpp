#pragma once

// Naive reference implementations used by the unit and acceptance tests.
// Everything here is a direct transcription of the defining formulas: one
// pair at a time, every band checked independently, no binning or caching.
// Deliberately kept separate from the library code so the two can disagree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "taukit/bands.hpp"
#include "taukit/estimators.hpp"
#include "taukit/model.hpp"
#include "taukit/pairing.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// distances

inline double planar_dist(double x1, double y1, double x2, double y2) {
    return std::hypot(x2 - x1, y2 - y1);
}

inline double sphere_dist(double lon1, double lat1, double lon2, double lat2) {
    const double rad = std::acos(-1.0) / 180.0;
    const double sdlat = std::sin((lat2 - lat1) * rad / 2);
    const double sdlon = std::sin((lon2 - lon1) * rad / 2);
    double a = sdlat * sdlat + std::cos(lat1 * rad) * std::cos(lat2 * rad) * sdlon * sdlon;
    if (a < 0) a = 0;
    if (a > 1) a = 1;
    return 2.0 * 6371008.8 * std::asin(std::sqrt(a));
}

inline double dist(const taukit::case_dataset& ds, std::size_t i, std::size_t j) {
    const auto& a = ds.individuals[i];
    const auto& b = ds.individuals[j];
    if (ds.crs == taukit::crs_mode::geographic) return sphere_dist(a.x, a.y, b.x, b.y);
    return planar_dist(a.x, a.y, b.x, b.y);
}

// ---------------------------------------------------------------------------
// pair relatedness, re-derived from the rule definition

enum class rel3 { related, unrelated, inapplicable };

inline rel3 relate(const taukit::relatedness_rule& r, const taukit::individual& a,
                   const taukit::individual& b) {
    using kind = taukit::relatedness_rule::kind;
    switch (r.k) {
        case kind::temporal_interval: {
            if (!a.onset.has_value() || !b.onset.has_value()) return rel3::inapplicable;
            const double dt = std::fabs(*a.onset - *b.onset);
            if (dt >= r.t1 && dt <= r.t2) return rel3::related;
            return rel3::unrelated;
        }
        case kind::mark_equality: {
            const auto ma = a.marks.find(r.mark);
            const auto mb = b.marks.find(r.mark);
            if (ma == a.marks.end() || mb == b.marks.end()) return rel3::inapplicable;
            return ma->second == mb->second ? rel3::related : rel3::unrelated;
        }
        case kind::prevalent_incident:
            return taukit::is_prevalent(a) != taukit::is_prevalent(b) ? rel3::related
                                                                      : rel3::unrelated;
        case kind::conjunction: {
            bool pending = false;
            for (const auto& part : r.parts) {
                const rel3 v = relate(part, a, b);
                if (v == rel3::unrelated) return rel3::unrelated;
                if (v == rel3::inapplicable) pending = true;
            }
            return pending ? rel3::inapplicable : rel3::related;
        }
    }
    return rel3::inapplicable;
}

// ---------------------------------------------------------------------------
// pair tallies: every band tested independently, so overlapping bands work

// Noncase-involved pairs can never be judged related: the rules describe
// transmission links between cases.
inline rel3 pair_relation(const taukit::case_dataset& ds, const taukit::relatedness_rule& rule,
                          std::size_t i, std::size_t j) {
    const auto& a = ds.individuals[i];
    const auto& b = ds.individuals[j];
    if (!a.is_case() || !b.is_case()) return rel3::unrelated;
    return relate(rule, a, b);
}

struct counts {
    std::uint64_t related = 0, unrelated = 0, inapplicable = 0;
    std::uint64_t total() const { return related + unrelated + inapplicable; }
    // what the tally reports after folding the inapplicable pairs
    std::uint64_t folded_unrelated(taukit::inapplicable_policy p) const {
        return p == taukit::inapplicable_policy::treat_as_unrelated ? unrelated + inapplicable
                                                                    : unrelated;
    }
};

struct tally_result {
    std::vector<counts> per_band;
    counts global;
};

inline tally_result tally(const taukit::case_dataset& ds, const taukit::band_set& bands,
                          const taukit::relatedness_rule& rule, taukit::pair_scope scope,
                          bool ordered = false) {
    std::vector<std::size_t> units;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (scope == taukit::pair_scope::all_individuals || ds.individuals[i].is_case())
            units.push_back(i);

    tally_result out;
    out.per_band.resize(bands.size());
    auto add = [](counts& c, rel3 v) {
        if (v == rel3::related) c.related += 1;
        else if (v == rel3::unrelated) c.unrelated += 1;
        else c.inapplicable += 1;
    };
    for (std::size_t ui = 0; ui < units.size(); ++ui)
        for (std::size_t uj = ordered ? 0 : ui + 1; uj < units.size(); ++uj) {
            if (ui == uj) continue;
            const double d = dist(ds, units[ui], units[uj]);
            const rel3 v = pair_relation(ds, rule, units[ui], units[uj]);
            add(out.global, v);
            for (std::size_t b = 0; b < bands.size(); ++b)
                if (d >= bands.bands[b].lo && d < bands.bands[b].hi) add(out.per_band[b], v);
        }
    return out;
}

// ---------------------------------------------------------------------------
// tau from a tally; NaN marks an undefined value

constexpr double undef = std::numeric_limits<double>::quiet_NaN();

struct tau_row {
    std::vector<double> per_band;
    bool global_ok = true;
};

inline tau_row tau_odds(const tally_result& t, taukit::inapplicable_policy policy) {
    tau_row out;
    const double gr = static_cast<double>(t.global.related);
    const double gu = static_cast<double>(t.global.folded_unrelated(policy));
    if (gr == 0 || gu == 0) {
        out.global_ok = false;
        return out;
    }
    for (const auto& c : t.per_band) {
        const double u = static_cast<double>(c.folded_unrelated(policy));
        if (c.total() == 0 || u == 0) {
            out.per_band.push_back(undef);
            continue;
        }
        out.per_band.push_back((static_cast<double>(c.related) / u) / (gr / gu));
    }
    return out;
}

inline tau_row tau_prev(const tally_result& t) {
    tau_row out;
    const double gr = static_cast<double>(t.global.related);
    const double gt = static_cast<double>(t.global.total());
    if (gr == 0 || gt == 0) {
        out.global_ok = false;
        return out;
    }
    for (const auto& c : t.per_band) {
        if (c.total() == 0) {
            out.per_band.push_back(undef);
            continue;
        }
        out.per_band.push_back((static_cast<double>(c.related) / static_cast<double>(c.total())) /
                               (gr / gt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// episode panels: discretized time scan, the dumbest possible denominator

inline bool infectious_at(const taukit::episode_panel& p, std::size_t person, double t) {
    const auto& pe = p.persons[person];
    if (t < pe.entry || t > pe.exit) return false;
    for (const auto& ep : p.episodes) {
        if (ep.person_index != person) continue;
        const double end = p.window == taukit::infectious_window::fixed_duration
                               ? ep.onset + p.fixed_duration
                               : ep.recovery;
        if (t >= ep.onset && t <= end) return true;
    }
    return false;
}

inline bool susceptible_at(const taukit::episode_panel& p, std::size_t person, double t) {
    const auto& pe = p.persons[person];
    if (t < pe.entry || t > pe.exit) return false;
    for (const auto& ep : p.episodes) {
        if (ep.person_index != person) continue;
        if (p.immunizing) {
            if (t >= ep.onset) return false;
        } else {
            // blocking runs on the recorded recovery even when infectiousness
            // is overridden by a fixed duration
            if (t >= ep.onset && t < ep.recovery + p.susceptibility_delay) return false;
        }
    }
    return true;
}

// Midpoint-sampled scan. Accurate to about dt times the number of interval
// endpoints, which is the tolerance the tests use.
inline double pair_time_scan(const taukit::episode_panel& p, std::size_t i, std::size_t j,
                             const taukit::band& b, double dt = 1e-3) {
    if (i == j) return 0;
    double lo = std::min(p.persons[i].entry, p.persons[j].entry);
    double hi = std::max(p.persons[i].exit, p.persons[j].exit);
    double acc = 0;
    for (double t = lo + dt / 2; t < hi; t += dt) {
        if (!infectious_at(p, i, t) || !susceptible_at(p, j, t)) continue;
        double xi, yi, xj, yj;
        p.persons[i].locate(t, xi, yi);
        p.persons[j].locate(t, xj, yj);
        double d = p.crs == taukit::crs_mode::geographic ? sphere_dist(xi, yi, xj, yj)
                                                         : planar_dist(xi, yi, xj, yj);
        if (d >= b.lo && d < b.hi) acc += dt;
    }
    return acc;
}

// Directed episode-pair numerator: infectee onset minus infector onset must
// land in the closed window, distance taken at each one's own onset.
inline std::uint64_t related_episode_pairs(const taukit::episode_panel& p, double t1, double t2,
                                           const taukit::band& b) {
    std::uint64_t n = 0;
    for (std::size_t l = 0; l < p.episodes.size(); ++l)
        for (std::size_t m = 0; m < p.episodes.size(); ++m) {
            if (l == m) continue;
            const auto& el = p.episodes[l];
            const auto& em = p.episodes[m];
            if (el.person_index == em.person_index) continue;
            const double dt = em.onset - el.onset;
            if (dt < t1 || dt > t2) continue;
            double xl, yl, xm, ym;
            p.persons[el.person_index].locate(el.onset, xl, yl);
            p.persons[em.person_index].locate(em.onset, xm, ym);
            double d = p.crs == taukit::crs_mode::geographic ? sphere_dist(xl, yl, xm, ym)
                                                             : planar_dist(xl, yl, xm, ym);
            if (d >= b.lo && d < b.hi) ++n;
        }
    return n;
}

// ---------------------------------------------------------------------------
// brute-force nearest-neighbour case count

inline long long tk(const taukit::case_dataset& ds, int k) {
    long long total = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!ds.individuals[i].is_case()) continue;
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t j = 0; j < ds.size(); ++j)
            if (j != i) order.emplace_back(dist(ds, i, j), j);
        std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return ds.individuals[a.second].id < ds.individuals[b.second].id;
        });
        for (int q = 0; q < k && q < static_cast<int>(order.size()); ++q)
            if (ds.individuals[order[static_cast<std::size_t>(q)].second].is_case()) ++total;
    }
    return total;
}

// ---------------------------------------------------------------------------
// random fixtures for property sweeps (plain std RNG; nothing from the library)

struct fixture_options {
    std::size_t n_min = 4, n_max = 40;
    double noncase_fraction = 0.25;  // 0 disables noncases
    double missing_mark_fraction = 0; // > 0 creates inapplicable pairs
    bool geographic = false;
    bool marks = false;
};

inline taukit::case_dataset random_dataset(std::mt19937_64& g, const fixture_options& o = {}) {
    std::uniform_int_distribution<std::size_t> nd(o.n_min, o.n_max);
    std::uniform_real_distribution<double> u01(0, 1);
    const std::size_t n = nd(g);
    taukit::case_dataset ds;
    ds.crs = o.geographic ? taukit::crs_mode::geographic : taukit::crs_mode::planar;
    for (std::size_t i = 0; i < n; ++i) {
        taukit::individual a;
        a.id = "p" + std::to_string(i);
        if (o.geographic) {
            a.x = -0.5 + u01(g);           // lon
            a.y = 51.0 + 0.5 * u01(g);     // lat
        } else {
            a.x = 100.0 * u01(g);
            a.y = 100.0 * u01(g);
        }
        const bool noncase = u01(g) < o.noncase_fraction;
        a.status = noncase ? taukit::case_status::noncase : taukit::case_status::case_;
        if (!noncase) a.onset = 60.0 * u01(g);
        if (o.marks && !(u01(g) < o.missing_mark_fraction))
            a.marks["serotype"] = u01(g) < 0.5 ? "A" : "B";
        ds.individuals.push_back(std::move(a));
    }
    // guarantee at least two cases so the dataset is valid
    ds.individuals[0].status = taukit::case_status::case_;
    ds.individuals[0].onset = 1.0;
    ds.individuals[1].status = taukit::case_status::case_;
    ds.individuals[1].onset = 2.0;
    return ds;
}

// Random small panel: a few persons, optional relocation, zero to two
// episodes each, all invariants honored by construction.
inline taukit::episode_panel random_panel(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u01(0, 1);
    std::uniform_int_distribution<std::size_t> nd(3, 6);
    taukit::episode_panel p;
    const std::size_t n = nd(g);
    for (std::size_t i = 0; i < n; ++i) {
        taukit::person q;
        q.id = "q" + std::to_string(i);
        q.entry = 5.0 * u01(g);
        q.exit = q.entry + 8.0 + 12.0 * u01(g);
        q.track.push_back({q.entry, 10.0 * u01(g), 10.0 * u01(g)});
        if (u01(g) < 0.4)
            q.track.push_back({q.entry + (q.exit - q.entry) * (0.2 + 0.6 * u01(g)),
                               10.0 * u01(g), 10.0 * u01(g)});
        p.persons.push_back(std::move(q));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& q = p.persons[i];
        const double span = q.exit - q.entry;
        if (u01(g) < 0.2) continue; // some persons never fall ill
        const double o1 = q.entry + span * 0.4 * u01(g);
        const double r1 = o1 + std::min(span * 0.25 * u01(g), q.exit - o1);
        p.episodes.push_back({i, o1, r1});
        if (u01(g) < 0.3 && r1 + 1 < q.exit) {
            const double o2 = r1 + (q.exit - r1) * 0.5 * u01(g) + 1e-6;
            const double r2 = o2 + std::min((q.exit - o2) * 0.5 * u01(g), q.exit - o2);
            if (o2 > r1 && r2 <= q.exit) p.episodes.push_back({i, o2, r2});
        }
    }
    std::sort(p.episodes.begin(), p.episodes.end(),
              [](const taukit::episode& a, const taukit::episode& b) {
                  return a.person_index != b.person_index ? a.person_index < b.person_index
                                                          : a.onset < b.onset;
              });
    return p;
}

} // namespace oracle
