#pragma once

// File outputs. Everything routes through format_double (shortest
// round-trip) and nlohmann's ordered-by-key objects, so a rerun with the
// same inputs produces byte-identical files.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vendor/json.hpp"
#include "taukit/csv.hpp"
#include "taukit/estimators.hpp"
#include "taukit/inference.hpp"

namespace taukit {

using json = nlohmann::json;

inline const char* denominator_column(estimator_kind k) {
    switch (k) {
    case estimator_kind::odds: return "n_unrelated";
    case estimator_kind::prev: return "total";
    case estimator_kind::rate: return "pair_time";
    }
    return "denominator";
}

inline std::string curve_csv(const tau_curve& curve) {
    std::string s = "band_lo,band_hi,tau,n_related,";
    s += denominator_column(curve.estimator);
    s += ",defined_flag\n";
    for (std::size_t b = 0; b < curve.size(); ++b) {
        const auto& band = curve.bands.bands[b];
        const auto& v = curve.values[b];
        s += csv::format_double(band.lo);
        s += ',';
        s += std::isinf(band.hi) ? "inf" : csv::format_double(band.hi);
        s += ',';
        if (v.defined) s += csv::format_double(v.value);
        s += ',';
        s += csv::format_double(v.n_related);
        s += ',';
        s += csv::format_double(v.denom);
        s += ',';
        s += v.defined ? '1' : '0';
        s += '\n';
    }
    return s;
}

inline std::string map_csv(const tau_map& m) {
    std::string s = "d_lo,d_hi,t_lo,t_hi,tau,n_pairs,low_support,defined_flag\n";
    for (std::size_t d = 0; d < m.dbands.size(); ++d)
        for (std::size_t t = 0; t < m.tbands.size(); ++t) {
            const auto& c = m.at(d, t);
            const auto& db = m.dbands.bands[d];
            const auto& tb = m.tbands.bands[t];
            s += csv::format_double(db.lo);
            s += ',';
            s += std::isinf(db.hi) ? "inf" : csv::format_double(db.hi);
            s += ',';
            s += csv::format_double(tb.lo);
            s += ',';
            s += std::isinf(tb.hi) ? "inf" : csv::format_double(tb.hi);
            s += ',';
            if (c.v.defined) s += csv::format_double(c.v.value);
            s += ',';
            s += std::to_string(c.n_pairs);
            s += ',';
            s += c.low_support ? '1' : '0';
            s += ',';
            s += c.v.defined ? '1' : '0';
            s += '\n';
        }
    return s;
}

namespace detail {

inline json number_or_null(double v) {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
}

} // namespace detail

inline json bands_to_json(const band_set& bands) {
    json a = json::array();
    for (const auto& b : bands.bands)
        a.push_back({{"lo", b.lo}, {"hi", detail::number_or_null(b.hi)}});
    return a;
}

struct result_document {
    const tau_curve* curve = nullptr;
    const pointwise_envelope_result* envelope = nullptr;
    const global_test_result* test = nullptr;
    const range_estimate* range = nullptr;
    const legacy_range* legacy = nullptr; // only alongside range
    std::uint64_t seed = 0;
    std::size_t R = 0; // 0 = no resampling ran
    std::vector<std::string> warnings;
};

inline json result_json(const result_document& doc) {
    json j;
    if (doc.curve) {
        j["estimator"] = estimator_name(doc.curve->estimator);
        j["bands"] = bands_to_json(doc.curve->bands);
        json tau = json::array();
        for (const auto& v : doc.curve->values)
            tau.push_back(v.defined ? json(v.value) : json(nullptr));
        j["tau"] = tau;
    } else {
        j["estimator"] = nullptr;
        j["bands"] = nullptr;
        j["tau"] = nullptr;
    }
    if (doc.envelope) {
        json lo = json::array(), hi = json::array();
        for (const auto& b : doc.envelope->bands) {
            lo.push_back(detail::number_or_null(b.lo));
            hi.push_back(detail::number_or_null(b.hi));
        }
        j["envelope"] = {{"level", doc.envelope->level}, {"lo", lo}, {"hi", hi}};
    } else {
        j["envelope"] = nullptr;
    }
    if (doc.test) {
        json lo = json::array(), hi = json::array();
        for (double v : doc.test->lo) lo.push_back(detail::number_or_null(v));
        for (double v : doc.test->hi) hi.push_back(detail::number_or_null(v));
        j["global_test"] = {{"p", doc.test->p},
                            {"alpha", doc.test->alpha},
                            {"bounds", {{"lo", lo}, {"hi", hi}}}};
    } else {
        j["global_test"] = nullptr;
    }
    if (doc.range) {
        json r = {{"point", detail::number_or_null(doc.range->point)},
                  {"lo", detail::number_or_null(doc.range->lo)},
                  {"hi", detail::number_or_null(doc.range->hi)},
                  {"censored_fraction", doc.range->censored_fraction},
                  {"crossing", doc.range->crossing == crossing_mode::first ? "first" : "last"}};
        if (doc.legacy) {
            r["legacy"] = {{"d", detail::number_or_null(doc.legacy->d)},
                           {"rule", doc.legacy->rule},
                           {"label", doc.legacy->label}};
        } else {
            r["legacy"] = nullptr;
        }
        j["range"] = r;
    } else {
        j["range"] = nullptr;
    }
    j["meta"] = {{"seed", doc.seed},
                 {"R", doc.R ? json(doc.R) : json(nullptr)},
                 {"rng", rng_name},
                 {"version", version_string}};
    if (!doc.warnings.empty()) j["meta"]["warnings"] = doc.warnings;
    return j;
}

inline json tallies_json(const pair_tally& t, const band_set& bands) {
    json per = json::array();
    auto one = [](const band& b, const band_counts& c) {
        return json{{"lo", b.lo},
                    {"hi", detail::number_or_null(b.hi)},
                    {"related", c.related},
                    {"unrelated", c.unrelated},
                    {"total", c.total}};
    };
    json j;
    j["scope"] = t.scope == pair_scope::cases_only ? "cases_only" : "all_individuals";
    j["policy"] = t.policy == inapplicable_policy::treat_as_unrelated ? "treat_as_unrelated"
                                                                      : "exclude";
    j["global"] = one(band{0, std::numeric_limits<double>::infinity()}, t.global);
    for (std::size_t b = 0; b < t.per_band.size(); ++b)
        per.push_back(one(bands.bands[b], t.per_band[b]));
    j["per_band"] = per;
    return j;
}

inline json tallies_json(const rate_tally& t, const band_set& bands) {
    json per = json::array();
    auto one = [](const band& b, const rate_band& c) {
        return json{{"lo", b.lo},
                    {"hi", detail::number_or_null(b.hi)},
                    {"related", c.related},
                    {"pair_time", c.pair_time}};
    };
    json j;
    j["n_persons"] = t.n_persons;
    j["n_episodes"] = t.n_episodes;
    j["global"] = one(band{0, std::numeric_limits<double>::infinity()}, t.global);
    for (std::size_t b = 0; b < t.per_band.size(); ++b)
        per.push_back(one(bands.bands[b], t.per_band[b]));
    j["per_band"] = per;
    if (!t.warnings.empty()) j["warnings"] = t.warnings;
    return j;
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

} // namespace taukit
