#pragma once

// Study data model. Two representations coexist:
//   case_dataset  - point pattern of individuals (x, y, onset, status, marks)
//   episode_panel - longitudinal cohort (enrollment, movement, episodes)
// Times are plain doubles in study time units (days unless stated otherwise);
// calendar handling stops at ingestion.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "taukit/error.hpp"
#include "taukit/geometry.hpp"

namespace taukit {

enum class case_status { case_, noncase };

struct individual {
    std::string id;
    double x = 0, y = 0;
    std::optional<double> onset; // required for cases unless relatedness is implicit
    case_status status = case_status::case_;
    std::map<std::string, std::string> marks;

    bool is_case() const { return status == case_status::case_; }
};

// Truthy mark "prevalent" flags an individual as a prevalent (pre-study) case.
inline bool is_prevalent(const individual& a) {
    auto it = a.marks.find("prevalent");
    if (it == a.marks.end()) return false;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    return v == "1" || v == "true" || v == "yes" || v == "y";
}

struct case_dataset {
    std::vector<individual> individuals;
    crs_mode crs = crs_mode::planar;
    std::string time_unit = "days";
    // When relatedness is implicit (e.g. prevalent/incident), cases may lack onsets.
    bool implicit_relatedness = false;
    // Mark columns in file order, kept so serialization round-trips.
    std::vector<std::string> mark_columns;

    std::size_t size() const { return individuals.size(); }

    std::size_t case_count() const {
        std::size_t n = 0;
        for (const auto& a : individuals) n += a.is_case();
        return n;
    }

    std::vector<std::size_t> case_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < individuals.size(); ++i)
            if (individuals[i].is_case()) idx.push_back(i);
        return idx;
    }

    double dist(std::size_t i, std::size_t j) const {
        return distance(individuals[i].x, individuals[i].y,
                        individuals[j].x, individuals[j].y, crs);
    }
};

// Enforces the construction invariants; loaders call this, tests may build
// exempt fixtures directly.
inline void validate(const case_dataset& ds) {
    std::unordered_set<std::string> seen;
    std::size_t cases = 0;
    for (std::size_t i = 0; i < ds.individuals.size(); ++i) {
        const auto& a = ds.individuals[i];
        const std::string where = "row " + std::to_string(i + 1) + " (id " + a.id + ")";
        if (!std::isfinite(a.x) || !std::isfinite(a.y))
            raise(errc::non_finite_coordinate, where);
        if (ds.crs == crs_mode::geographic &&
            (a.x < -180 || a.x > 180 || a.y < -90 || a.y > 90))
            raise(errc::non_finite_coordinate, where + ": lon/lat out of range");
        if (!seen.insert(a.id).second)
            raise(errc::duplicate_id, where);
        if (a.onset && !std::isfinite(*a.onset))
            raise(errc::parse_error, where + ": non-finite onset");
        if (a.is_case()) {
            ++cases;
            if (!a.onset && !ds.implicit_relatedness)
                raise(errc::parse_error, where + ": case without onset time");
        }
    }
    if (cases < 2)
        raise(errc::fewer_than_two_cases, "dataset has " + std::to_string(cases) + " case(s)");
}

// ---------------------------------------------------------------------------
// relatedness rules

struct relatedness_rule {
    enum class kind { temporal_interval, mark_equality, prevalent_incident, conjunction };

    kind k = kind::temporal_interval;
    double t1 = 0, t2 = 0;    // temporal_interval, closed [t1, t2] on |dt|
    std::string mark;         // mark_equality
    std::vector<relatedness_rule> parts; // conjunction, non-empty

    static relatedness_rule temporal(double t1, double t2) {
        if (!(t1 <= t2)) raise(errc::invalid_argument, "temporal interval requires t1 <= t2");
        relatedness_rule r;
        r.k = kind::temporal_interval;
        r.t1 = t1;
        r.t2 = t2;
        return r;
    }
    static relatedness_rule mark_equal(std::string name) {
        relatedness_rule r;
        r.k = kind::mark_equality;
        r.mark = std::move(name);
        return r;
    }
    static relatedness_rule prevalent_incident() {
        relatedness_rule r;
        r.k = kind::prevalent_incident;
        return r;
    }
    static relatedness_rule all_of(std::vector<relatedness_rule> parts) {
        if (parts.empty()) raise(errc::invalid_argument, "conjunction needs at least one part");
        if (parts.size() == 1) return parts.front();
        relatedness_rule r;
        r.k = kind::conjunction;
        r.parts = std::move(parts);
        return r;
    }

    bool reads_onsets() const {
        if (k == kind::temporal_interval) return true;
        for (const auto& p : parts)
            if (p.reads_onsets()) return true;
        return false;
    }
};

// ---------------------------------------------------------------------------
// longitudinal panel

struct track_point {
    double from_t = 0; // location holds from here until the next record
    double x = 0, y = 0;
};

struct person {
    std::string id;
    double entry = 0, exit = 0;
    std::vector<track_point> track; // first record at or before entry, strictly increasing

    void locate(double t, double& x, double& y) const {
        std::size_t k = 0;
        while (k + 1 < track.size() && track[k + 1].from_t <= t) ++k;
        x = track[k].x;
        y = track[k].y;
    }
};

struct episode {
    std::size_t person_index = 0;
    double onset = 0, recovery = 0;
};

enum class infectious_window { use_recovery, fixed_duration };

struct episode_panel {
    std::vector<person> persons;
    std::vector<episode> episodes; // sorted by (person_index, onset)
    crs_mode crs = crs_mode::planar;
    bool immunizing = false;
    infectious_window window = infectious_window::use_recovery;
    double fixed_duration = 0;       // used when window == fixed_duration
    double susceptibility_delay = 0; // days after recovery before re-susceptible
};

inline void validate(const episode_panel& p) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < p.persons.size(); ++i) {
        const auto& q = p.persons[i];
        const std::string where = "person row " + std::to_string(i + 1) + " (id " + q.id + ")";
        if (!seen.insert(q.id).second) raise(errc::duplicate_id, where);
        if (!(q.entry <= q.exit)) raise(errc::parse_error, where + ": entry after exit");
        if (q.track.empty() || q.track.front().from_t > q.entry)
            raise(errc::parse_error, where + ": location unknown at entry");
        for (std::size_t k = 0; k + 1 < q.track.size(); ++k)
            if (!(q.track[k].from_t < q.track[k + 1].from_t))
                raise(errc::parse_error, where + ": track days not strictly increasing");
        for (const auto& tp : q.track)
            if (!std::isfinite(tp.x) || !std::isfinite(tp.y))
                raise(errc::non_finite_coordinate, where);
    }
    std::vector<std::vector<const episode*>> per(p.persons.size());
    for (std::size_t e = 0; e < p.episodes.size(); ++e) {
        const auto& ep = p.episodes[e];
        const std::string where = "episode row " + std::to_string(e + 1);
        if (ep.person_index >= p.persons.size())
            raise(errc::unknown_person_id, where);
        if (!(ep.onset <= ep.recovery))
            raise(errc::parse_error, where + ": onset after recovery");
        const auto& q = p.persons[ep.person_index];
        if (ep.onset < q.entry || ep.recovery > q.exit)
            raise(errc::episode_outside_enrollment, where + " (person " + q.id + ")");
        per[ep.person_index].push_back(&ep);
    }
    for (std::size_t i = 0; i < per.size(); ++i) {
        auto& v = per[i];
        std::sort(v.begin(), v.end(),
                  [](const episode* a, const episode* b) { return a->onset < b->onset; });
        for (std::size_t k = 0; k + 1 < v.size(); ++k)
            if (v[k + 1]->onset < v[k]->recovery)
                raise(errc::overlapping_episodes, "person " + p.persons[i].id);
    }
    if (p.window == infectious_window::fixed_duration && !(p.fixed_duration > 0))
        raise(errc::non_positive_arguments, "fixed infectious duration must be positive");
    if (p.susceptibility_delay < 0)
        raise(errc::non_positive_arguments, "susceptibility delay must be nonnegative");
}

} // namespace taukit
