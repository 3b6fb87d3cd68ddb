#pragma once

// Command line front end. Thin single-threaded orchestrator: parsing and
// file emission live here, every computation lives in the library headers.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vendor/CLI11.hpp"

#include "taukit/bands.hpp"
#include "taukit/estimators.hpp"
#include "taukit/inference.hpp"
#include "taukit/io.hpp"
#include "taukit/model.hpp"
#include "taukit/plot.hpp"
#include "taukit/serialize.hpp"
#include "taukit/synth.hpp"

namespace taukit::cli {

struct analysis_config {
    // inputs
    std::string cases_path, persons_path, episodes_path, relocations_path;
    bool geographic = false;
    // estimator and bands
    std::string estimator = "odds";
    std::string bands_spec, dbands_spec, tbands_spec;
    // relatedness rule
    std::string relate;       // "T1:T2" closed window on |t_i - t_j|
    std::string relate_mark;  // mark column name
    bool relate_prevalent = false;
    // infectious window (rate)
    double fixed_duration = 0; // > 0 switches from the recovery column
    bool immunizing = false;
    double susceptibility_delay = 0;
    // resampling
    std::size_t R = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double level = 0.95;
    double alpha = 0.05;
    std::string crossing = "first";
    // run control and outputs
    int workers = 0; // 0 = all hardware threads
    std::string format = "both";
    std::string out_dir = ".";
    std::string policy = "unrelated"; // pairs the rule cannot judge: unrelated | exclude
    std::string convention = "end";   // plot abscissa: end | mid
    bool log_tau = false;
    std::size_t min_pairs = 10;
    bool dump_tallies = false;
};

namespace detail {

inline std::uint64_t resolve_seed(const analysis_config& cfg) {
    if (cfg.seed_set) return cfg.seed;
    if (const char* env = std::getenv("TAUKIT_SEED")) {
        try {
            std::size_t used = 0;
            const std::string s(env);
            const auto v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            raise(errc::invalid_argument, "TAUKIT_SEED is not an unsigned integer");
        }
    }
    return 0;
}

inline double parse_num(const std::string& s, const std::string& what) {
    const auto v = csv::parse_double(s);
    if (!v) raise(errc::invalid_argument, what + ": '" + s + "' is not a number");
    return *v;
}

inline std::pair<double, double> parse_window(const std::string& s) {
    const auto c = s.find(':');
    if (c == std::string::npos)
        raise(errc::invalid_argument, "--relate expects T1:T2, got '" + s + "'");
    return {parse_num(s.substr(0, c), "--relate T1"), parse_num(s.substr(c + 1), "--relate T2")};
}

inline relatedness_rule build_rule(const analysis_config& cfg) {
    std::vector<relatedness_rule> parts;
    if (!cfg.relate.empty()) {
        const auto [t1, t2] = parse_window(cfg.relate);
        parts.push_back(relatedness_rule::temporal(t1, t2));
    }
    if (!cfg.relate_mark.empty()) parts.push_back(relatedness_rule::mark_equal(cfg.relate_mark));
    if (cfg.relate_prevalent) parts.push_back(relatedness_rule::prevalent_incident());
    if (parts.empty())
        raise(errc::invalid_argument,
              "no relatedness rule: give --relate T1:T2, --relate-mark COL or --relate-prevalent");
    return relatedness_rule::all_of(parts);
}

inline inapplicable_policy parse_policy(const std::string& s) {
    if (s == "unrelated") return inapplicable_policy::treat_as_unrelated;
    if (s == "exclude") return inapplicable_policy::exclude;
    raise(errc::invalid_argument, "--policy must be unrelated or exclude");
}

inline estimator_kind parse_estimator(const std::string& s) {
    if (s == "odds") return estimator_kind::odds;
    if (s == "prev") return estimator_kind::prev;
    if (s == "rate") return estimator_kind::rate;
    raise(errc::invalid_argument, "--estimator must be odds, prev or rate");
}

inline crossing_mode parse_crossing(const std::string& s) {
    if (s == "first") return crossing_mode::first;
    if (s == "last") return crossing_mode::last;
    raise(errc::invalid_argument, "--crossing must be first or last");
}

inline void check_format(const std::string& s) {
    if (s != "csv" && s != "json" && s != "both")
        raise(errc::invalid_argument, "--format must be csv, json or both");
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) raise(errc::invalid_argument, "cannot write " + p.string());
    f << text;
}

// Band specs that need no dataset (explicit width, discs, overlap).
inline std::optional<band_set> materialize_band_spec(const band_spec& spec) {
    switch (spec.k) {
        case band_spec::kind::width:
            if (spec.d_max == 0) return std::nullopt;
            return equal_width_bands(spec.d_max, spec.count);
        case band_spec::kind::discs: return expanding_discs(spec.values);
        case band_spec::kind::eqcount: return std::nullopt;
        case band_spec::kind::overlap: return overlapping_bands(spec.values, spec.half_width);
    }
    return std::nullopt;
}

inline std::string window_text(const analysis_config& cfg) {
    if (!cfg.relate.empty()) {
        const auto [t1, t2] = parse_window(cfg.relate);
        return "[" + csv::format_double(t1) + ", " + csv::format_double(t2) + "] days";
    }
    if (!cfg.relate_mark.empty()) return "mark " + cfg.relate_mark;
    if (cfg.relate_prevalent) return "prevalent/incident";
    return "none";
}

inline std::string figure_caption(const analysis_config& cfg, estimator_kind est,
                                  std::size_t R, double level) {
    std::string s = estimator_name(est);
    s += R ? " | R = " + std::to_string(R) : std::string(" | no resampling");
    if (R) s += " | level = " + csv::format_double(level);
    s += " | relatedness = " + window_text(cfg);
    return s;
}

inline std::string figure_metadata(const analysis_config& cfg, estimator_kind est,
                                   std::size_t R, double level) {
    json j;
    j["estimator"] = estimator_name(est);
    j["R"] = R ? json(R) : json(nullptr);
    j["level"] = R ? json(level) : json(nullptr);
    if (!cfg.relate.empty()) {
        const auto [t1, t2] = parse_window(cfg.relate);
        j["window"] = {t1, t2};
    } else {
        j["window"] = nullptr;
    }
    return j.dump();
}

struct loaded_inputs {
    std::optional<case_dataset> cases;
    std::optional<episode_panel> panel;
    relatedness_rule rule = relatedness_rule::prevalent_incident();
    band_set bands;
    estimator_kind est = estimator_kind::odds;
};

inline loaded_inputs load_analysis_inputs(const analysis_config& cfg) {
    loaded_inputs in;
    in.est = parse_estimator(cfg.estimator);
    in.rule = build_rule(cfg);
    const auto spec = parse_band_spec(cfg.bands_spec);
    if (in.est == estimator_kind::rate) {
        if (cfg.persons_path.empty() || cfg.episodes_path.empty())
            raise(errc::invalid_argument, "estimator=rate requires --persons and --episodes");
        if (!in.rule.reads_onsets())
            raise(errc::invalid_argument, "estimator=rate needs a temporal rule (--relate T1:T2)");
        panel_csv_options opt;
        opt.crs = cfg.geographic ? crs_mode::geographic : crs_mode::planar;
        opt.immunizing = cfg.immunizing;
        opt.susceptibility_delay = cfg.susceptibility_delay;
        if (cfg.fixed_duration > 0) {
            opt.window = infectious_window::fixed_duration;
            opt.fixed_duration = cfg.fixed_duration;
        }
        in.panel = load_episode_panel(cfg.persons_path, cfg.episodes_path, cfg.relocations_path, opt);
        const auto bands = materialize_band_spec(spec);
        if (!bands)
            raise(errc::invalid_argument,
                  "estimator=rate needs a data-free band spec (explicit width, discs or overlap)");
        in.bands = *bands;
    } else {
        if (cfg.cases_path.empty()) raise(errc::invalid_argument, "--cases is required");
        case_csv_options opt;
        opt.crs = cfg.geographic ? crs_mode::geographic : crs_mode::planar;
        opt.implicit_relatedness = !in.rule.reads_onsets();
        in.cases = load_case_data(cfg.cases_path, opt);
        const auto scope = in.est == estimator_kind::odds ? pair_scope::cases_only
                                                          : pair_scope::all_individuals;
        in.bands = resolve_band_spec(spec, *in.cases, scope, band_axis::distance);
    }
    return in;
}

} // namespace detail

// ---------------------------------------------------------------------------
// subcommand runners

inline int run_tau(const analysis_config& cfg) {
    namespace fs = std::filesystem;
    detail::check_format(cfg.format);
    const auto seed = detail::resolve_seed(cfg);
    const auto policy = detail::parse_policy(cfg.policy);
    auto in = detail::load_analysis_inputs(cfg);

    std::vector<std::string> warnings;
    tau_curve curve;
    std::optional<curve_bundle> bundle;
    json tallies;

    if (in.est == estimator_kind::rate) {
        const auto tally = tally_rate(*in.panel, in.bands, in.rule, cfg.workers);
        curve = tau_rate(tally, in.bands);
        if (cfg.dump_tallies) tallies = tallies_json(tally, in.bands);
        const auto g = tally_rate(*in.panel, global_only_band(), in.rule, cfg.workers);
        const auto gc = tau_rate(g, global_only_band());
        if (!gc.values[0].defined || std::abs(gc.values[0].value - 1) > 1e-9)
            warnings.push_back("internal consistency check failed: tau(0, inf) != 1");
        if (cfg.R > 0) bundle = bootstrap_curves(*in.panel, in.bands, in.rule, cfg.R, seed, cfg.workers);
    } else {
        const auto scope = in.est == estimator_kind::odds ? pair_scope::cases_only
                                                          : pair_scope::all_individuals;
        const auto tally = tally_pairs(*in.cases, in.bands, in.rule, scope, policy, cfg.workers);
        curve = in.est == estimator_kind::odds ? tau_odds(tally, in.bands) : tau_prev(tally, in.bands);
        if (cfg.dump_tallies) tallies = tallies_json(tally, in.bands);
        const auto g = tally_pairs(*in.cases, global_only_band(), in.rule, scope, policy, cfg.workers);
        const auto gc = in.est == estimator_kind::odds ? tau_odds(g, global_only_band())
                                                       : tau_prev(g, global_only_band());
        if (!gc.values[0].defined || std::abs(gc.values[0].value - 1) > 1e-9)
            warnings.push_back("internal consistency check failed: tau(0, inf) != 1");
        if (cfg.R > 0)
            bundle = bootstrap_curves(*in.cases, in.bands, in.rule, in.est, cfg.R, seed, policy,
                                      cfg.workers);
    }
    curve.midpoint_convention = cfg.convention == "mid";
    for (const auto& w : curve.warnings) warnings.push_back(w);

    std::optional<pointwise_envelope_result> env;
    if (bundle) env = pointwise_envelope(*bundle, cfg.level);

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    std::vector<std::string> written;

    if (cfg.format != "json") {
        detail::write_text(out / "curve.csv", curve_csv(curve));
        written.push_back((out / "curve.csv").string());
    }
    if (cfg.format != "csv") {
        result_document doc;
        doc.curve = &curve;
        doc.envelope = env ? &*env : nullptr;
        doc.seed = seed;
        doc.R = cfg.R;
        doc.warnings = warnings;
        detail::write_text(out / "result.json", dump_json(result_json(doc)));
        written.push_back((out / "result.json").string());
    }
    if (cfg.dump_tallies) {
        detail::write_text(out / "tallies.json", dump_json(tallies));
        written.push_back((out / "tallies.json").string());
    }
    plot_options popt;
    popt.log_tau = cfg.log_tau;
    popt.envelope_R = cfg.R;
    popt.x_label = cfg.geographic ? "distance (m)" : "distance";
    popt.caption = detail::figure_caption(cfg, in.est, cfg.R, cfg.level);
    popt.metadata = detail::figure_metadata(cfg, in.est, cfg.R, cfg.level);
    const std::vector<plot_series> series{{estimator_name(in.est), &curve}};
    detail::write_text(out / "curve.svg", curve_svg(series, env ? &*env : nullptr, popt));
    written.push_back((out / "curve.svg").string());
    detail::write_text(out / "curve_data.csv", plot_data_csv(series, env ? &*env : nullptr));
    written.push_back((out / "curve_data.csv").string());

    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : written) std::cout << "wrote " << f << "\n";
    return 0;
}

inline int run_map(const analysis_config& cfg) {
    namespace fs = std::filesystem;
    detail::check_format(cfg.format);
    if (cfg.cases_path.empty()) raise(errc::invalid_argument, "--cases is required");
    case_csv_options opt;
    opt.crs = cfg.geographic ? crs_mode::geographic : crs_mode::planar;
    const auto ds = load_case_data(cfg.cases_path, opt);
    const auto dbands = resolve_band_spec(parse_band_spec(cfg.dbands_spec), ds,
                                          pair_scope::cases_only, band_axis::distance);
    const auto tbands = resolve_band_spec(parse_band_spec(cfg.tbands_spec), ds,
                                          pair_scope::cases_only, band_axis::time);
    const auto m = tau_spacetime_map(ds, dbands, tbands, cfg.min_pairs, cfg.workers);

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    std::vector<std::string> written;
    detail::write_text(out / "map.csv", map_csv(m));
    written.push_back((out / "map.csv").string());
    if (cfg.format != "csv") {
        json j;
        j["dbands"] = bands_to_json(dbands);
        j["tbands"] = bands_to_json(tbands);
        json cells = json::array();
        for (std::size_t d = 0; d < dbands.size(); ++d)
            for (std::size_t t = 0; t < tbands.size(); ++t) {
                const auto& c = m.at(d, t);
                cells.push_back({{"d", d},
                                 {"t", t},
                                 {"tau", c.v.defined ? json(c.v.value) : json(nullptr)},
                                 {"n_pairs", c.n_pairs},
                                 {"low_support", c.low_support}});
            }
        j["cells"] = cells;
        j["min_pairs"] = cfg.min_pairs;
        j["meta"] = {{"rng", rng_name}, {"version", version_string}};
        detail::write_text(out / "map.json", dump_json(j));
        written.push_back((out / "map.json").string());
    }
    plot_options popt;
    popt.x_label = "distance";
    popt.caption = "space-time tau map | cells with < " + std::to_string(cfg.min_pairs) +
                   " related pairs flagged";
    popt.metadata = json{{"estimator", "tau_map"}, {"min_pairs", cfg.min_pairs}}.dump();
    detail::write_text(out / "heatmap.svg", map_svg(m, popt));
    written.push_back((out / "heatmap.svg").string());

    for (const auto& f : written) std::cout << "wrote " << f << "\n";
    return 0;
}

inline int run_range(const analysis_config& cfg) {
    namespace fs = std::filesystem;
    detail::check_format(cfg.format);
    const auto seed = detail::resolve_seed(cfg);
    const auto policy = detail::parse_policy(cfg.policy);
    const auto mode = detail::parse_crossing(cfg.crossing);
    auto in = detail::load_analysis_inputs(cfg);
    if (cfg.R < 20) raise(errc::too_few_replicates, "range needs --R >= 20");

    curve_bundle bundle =
        in.est == estimator_kind::rate
            ? bootstrap_curves(*in.panel, in.bands, in.rule, cfg.R, seed, cfg.workers)
            : bootstrap_curves(*in.cases, in.bands, in.rule, in.est, cfg.R, seed, policy, cfg.workers);
    bundle.point.midpoint_convention = cfg.convention == "mid";
    const auto env = pointwise_envelope(bundle, cfg.level);
    const auto range = clustering_range(bundle, cfg.level, mode);

    std::vector<std::string> warnings = bundle.point.warnings;
    std::optional<legacy_range> legacy;
    try {
        legacy = legacy_range_azman(bundle.point, env, bundle.reps);
    } catch (const tau_error& e) {
        if (e.code() != errc::no_crossing) throw;
        warnings.push_back("legacy range: neither trigger fired");
    }

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    std::vector<std::string> written;
    if (cfg.format != "json") {
        detail::write_text(out / "curve.csv", curve_csv(bundle.point));
        written.push_back((out / "curve.csv").string());
    }
    if (cfg.format != "csv") {
        result_document doc;
        doc.curve = &bundle.point;
        doc.envelope = &env;
        doc.range = &range;
        doc.legacy = legacy ? &*legacy : nullptr;
        doc.seed = seed;
        doc.R = cfg.R;
        doc.warnings = warnings;
        detail::write_text(out / "result.json", dump_json(result_json(doc)));
        written.push_back((out / "result.json").string());
    }
    plot_options popt;
    popt.log_tau = cfg.log_tau;
    popt.envelope_R = cfg.R;
    popt.caption = detail::figure_caption(cfg, in.est, cfg.R, cfg.level);
    popt.metadata = detail::figure_metadata(cfg, in.est, cfg.R, cfg.level);
    const std::vector<plot_series> series{{estimator_name(in.est), &bundle.point}};
    detail::write_text(out / "curve.svg", curve_svg(series, &env, popt));
    written.push_back((out / "curve.svg").string());
    detail::write_text(out / "curve_data.csv", plot_data_csv(series, &env));
    written.push_back((out / "curve_data.csv").string());

    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "range = " << csv::format_double(range.point) << " ["
              << csv::format_double(range.lo) << ", " << csv::format_double(range.hi)
              << "], censored fraction " << csv::format_double(range.censored_fraction) << "\n";
    if (legacy)
        std::cout << "legacy range = " << csv::format_double(legacy->d) << " (rule: " << legacy->rule
                  << ", no interval)\n";
    for (const auto& f : written) std::cout << "wrote " << f << "\n";
    return 0;
}

inline int run_test(const analysis_config& cfg) {
    namespace fs = std::filesystem;
    detail::check_format(cfg.format);
    const auto seed = detail::resolve_seed(cfg);
    const auto policy = detail::parse_policy(cfg.policy);
    if (detail::parse_estimator(cfg.estimator) == estimator_kind::rate)
        raise(errc::invalid_argument, "test supports odds and prev");
    auto in = detail::load_analysis_inputs(cfg);

    auto bundle = permutation_null_curves(*in.cases, in.bands, in.rule, in.est, cfg.R, seed,
                                          policy, cfg.workers);
    bundle.point.midpoint_convention = cfg.convention == "mid";
    const auto res = global_envelope_test(bundle.point, bundle, cfg.alpha);

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    std::vector<std::string> written;
    if (cfg.format != "json") {
        detail::write_text(out / "curve.csv", curve_csv(bundle.point));
        written.push_back((out / "curve.csv").string());
    }
    if (cfg.format != "csv") {
        result_document doc;
        doc.curve = &bundle.point;
        doc.test = &res;
        doc.seed = seed;
        doc.R = cfg.R;
        doc.warnings = bundle.point.warnings;
        detail::write_text(out / "result.json", dump_json(result_json(doc)));
        written.push_back((out / "result.json").string());
    }
    // test bounds drawn as the ribbon
    pointwise_envelope_result ribbon;
    ribbon.level = 1 - cfg.alpha;
    for (std::size_t b = 0; b < res.lo.size(); ++b) {
        envelope_band eb;
        eb.lo = res.lo[b];
        eb.hi = res.hi[b];
        ribbon.bands.push_back(eb);
    }
    plot_options popt;
    popt.log_tau = cfg.log_tau;
    popt.envelope_R = cfg.R;
    popt.caption = detail::figure_caption(cfg, in.est, cfg.R, 1 - cfg.alpha) +
                   " | p = " + csv::format_double(res.p);
    popt.metadata = detail::figure_metadata(cfg, in.est, cfg.R, 1 - cfg.alpha);
    const std::vector<plot_series> series{{estimator_name(in.est), &bundle.point}};
    detail::write_text(out / "curve.svg", curve_svg(series, &ribbon, popt));
    written.push_back((out / "curve.svg").string());
    detail::write_text(out / "curve_data.csv", plot_data_csv(series, &ribbon));
    written.push_back((out / "curve_data.csv").string());

    for (const auto& w : bundle.point.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "p = " << csv::format_double(res.p) << " (alpha = " << csv::format_double(cfg.alpha)
              << ", R = " << cfg.R << ")\n";
    for (const auto& f : written) std::cout << "wrote " << f << "\n";
    return 0;
}

struct simulate_config {
    std::string model = "epidemic"; // null | epidemic
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";
    // null
    std::size_t n = 500;
    double width = 2000, height = 2000;
    double horizon = 60;
    // epidemic
    std::size_t population = 2000;
    std::string layout = "uniform";     // uniform | clustered:COUNT:SD
    std::string kernel = "gaussian:100"; // gaussian:SD | exp:RATE | disc:RADIUS
    std::string serial = "5:2";          // MEAN:SD
    std::string preset;                  // cholera | dengue | measles
    double r_e = 2;
    std::size_t initial = 5;
    std::size_t max_cases = 20000;
    std::string observe = "full"; // full | frac:P | bias:CX:CY:R:PIN:POUT
};

namespace detail {

inline std::vector<std::string> split_str(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.push_back(s.substr(start, p - start));
        if (p == std::string::npos) break;
        start = p + 1;
    }
    return out;
}

inline epidemic_config build_epidemic_config(const simulate_config& sc) {
    epidemic_config c;
    c.region = {0, 0, sc.width, sc.height};
    c.population_n = sc.population;
    c.r_e = sc.r_e;
    c.initial_cases = sc.initial;
    c.horizon = sc.horizon;
    c.max_cases = sc.max_cases;

    const auto lay = split_str(sc.layout, ':');
    if (lay[0] == "uniform" && lay.size() == 1) {
        c.layout = layout_kind::uniform;
    } else if (lay[0] == "clustered" && lay.size() == 3) {
        c.layout = layout_kind::clustered;
        c.cluster_count = static_cast<std::size_t>(parse_num(lay[1], "cluster count"));
        c.cluster_sd = parse_num(lay[2], "cluster sd");
    } else {
        raise(errc::invalid_argument, "--layout must be uniform or clustered:COUNT:SD");
    }

    const auto ker = split_str(sc.kernel, ':');
    if (ker.size() != 2) raise(errc::invalid_argument, "--kernel must be NAME:PARAM");
    c.kernel_param = parse_num(ker[1], "kernel parameter");
    if (ker[0] == "gaussian") c.kernel = kernel_kind::gaussian;
    else if (ker[0] == "exp") c.kernel = kernel_kind::exponential;
    else if (ker[0] == "disc") c.kernel = kernel_kind::uniform_disc;
    else raise(errc::invalid_argument, "--kernel must be gaussian, exp or disc");

    if (!sc.preset.empty()) {
        apply_disease_preset(c, sc.preset);
    } else {
        const auto se = split_str(sc.serial, ':');
        if (se.size() != 2) raise(errc::invalid_argument, "--serial must be MEAN:SD");
        c.serial_interval_mean = parse_num(se[0], "serial mean");
        c.serial_interval_sd = parse_num(se[1], "serial sd");
    }

    const auto ob = split_str(sc.observe, ':');
    if (ob[0] == "full" && ob.size() == 1) {
        c.observation = observation_kind::full;
    } else if (ob[0] == "frac" && ob.size() == 2) {
        c.observation = observation_kind::random_fraction;
        c.obs_fraction = parse_num(ob[1], "observation fraction");
    } else if (ob[0] == "bias" && ob.size() == 6) {
        c.observation = observation_kind::spatial_bias;
        c.obs_center_x = parse_num(ob[1], "bias center x");
        c.obs_center_y = parse_num(ob[2], "bias center y");
        c.obs_radius = parse_num(ob[3], "bias radius");
        c.obs_p_in = parse_num(ob[4], "bias p_in");
        c.obs_p_out = parse_num(ob[5], "bias p_out");
    } else {
        raise(errc::invalid_argument, "--observe must be full, frac:P or bias:CX:CY:R:PIN:POUT");
    }
    return c;
}

inline json epidemic_config_json(const epidemic_config& c) {
    json j;
    j["region"] = {{"x0", c.region.x0}, {"y0", c.region.y0}, {"width", c.region.width},
                   {"height", c.region.height}};
    j["population_n"] = c.population_n;
    j["layout"] = c.layout == layout_kind::uniform
                      ? json{{"kind", "uniform"}}
                      : json{{"kind", "clustered"}, {"count", c.cluster_count}, {"sd", c.cluster_sd}};
    const char* kn = c.kernel == kernel_kind::gaussian
                         ? "gaussian"
                         : (c.kernel == kernel_kind::exponential ? "exponential" : "uniform_disc");
    j["kernel"] = {{"kind", kn}, {"param", c.kernel_param}};
    j["serial_interval"] = {{"family", "gamma"},
                            {"mean", c.serial_interval_mean},
                            {"sd", c.serial_interval_sd}};
    j["R_e"] = c.r_e;
    j["initial_cases"] = c.initial_cases;
    j["horizon"] = c.horizon;
    j["max_cases"] = c.max_cases;
    switch (c.observation) {
        case observation_kind::full: j["observation"] = {{"kind", "full"}}; break;
        case observation_kind::random_fraction:
            j["observation"] = {{"kind", "random_fraction"}, {"p", c.obs_fraction}};
            break;
        case observation_kind::spatial_bias:
            j["observation"] = {{"kind", "spatial_bias"},
                                {"center", {c.obs_center_x, c.obs_center_y}},
                                {"radius", c.obs_radius},
                                {"p_in", c.obs_p_in},
                                {"p_out", c.obs_p_out}};
            break;
    }
    return j;
}

} // namespace detail

inline int run_simulate(const simulate_config& sc) {
    namespace fs = std::filesystem;
    std::uint64_t seed = sc.seed;
    if (!sc.seed_set) {
        analysis_config tmp;
        seed = detail::resolve_seed(tmp);
    }
    const fs::path out(sc.out_dir);
    fs::create_directories(out);

    if (sc.model == "null") {
        const auto ds = simulate_null(sc.n, rect{0, 0, sc.width, sc.height}, sc.horizon, seed);
        save_case_data(ds, (out / "cases.csv").string());
        std::cout << "simulated " << ds.individuals.size() << " cases\n";
        std::cout << "wrote " << (out / "cases.csv").string() << "\n";
        return 0;
    }
    if (sc.model != "epidemic") raise(errc::invalid_argument, "--model must be null or epidemic");

    const auto c = detail::build_epidemic_config(sc);
    const auto res = simulate_epidemic(c, seed);
    save_case_data(res.observed, (out / "cases.csv").string());

    json tree;
    tree["seed"] = seed;
    tree["config"] = detail::epidemic_config_json(c);
    json cases = json::array();
    for (std::size_t i = 0; i < res.full.size(); ++i) {
        const auto& cs = res.full[i];
        cases.push_back({{"id", "c" + std::to_string(i + 1)},
                         {"x", cs.x},
                         {"y", cs.y},
                         {"onset", cs.onset},
                         {"parent", cs.parent < 0 ? json(nullptr)
                                                  : json("c" + std::to_string(cs.parent + 1))},
                         {"observed", cs.observed}});
    }
    tree["cases"] = cases;
    if (!res.warnings.empty()) tree["warnings"] = res.warnings;
    detail::write_text(out / "tree.json", dump_json(tree));

    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "simulated " << res.full.size() << " cases (" << res.observed.individuals.size()
              << " observed)\n";
    std::cout << "wrote " << (out / "cases.csv").string() << "\n";
    std::cout << "wrote " << (out / "tree.json").string() << "\n";
    return 0;
}

inline int run_bands(const analysis_config& cfg, const std::string& axis_name,
                     const std::string& scope_name) {
    const auto spec = parse_band_spec(cfg.bands_spec);
    const auto axis = axis_name == "time" ? band_axis::time : band_axis::distance;
    const auto scope = scope_name == "all" ? pair_scope::all_individuals : pair_scope::cases_only;
    band_set bands;
    if (const auto direct = detail::materialize_band_spec(spec); direct && cfg.cases_path.empty()) {
        bands = *direct;
        bands.axis = axis;
    } else {
        if (cfg.cases_path.empty())
            raise(errc::invalid_argument, "this band spec needs --cases to resolve");
        case_csv_options opt;
        opt.crs = cfg.geographic ? crs_mode::geographic : crs_mode::planar;
        opt.implicit_relatedness = axis == band_axis::distance;
        const auto ds = load_case_data(cfg.cases_path, opt);
        bands = resolve_band_spec(spec, ds, scope, axis);
    }
    json j;
    j["axis"] = axis == band_axis::time ? "time" : "distance";
    j["bands"] = bands_to_json(bands);
    std::cout << dump_json(j);
    return 0;
}

// ---------------------------------------------------------------------------
// wiring

inline int run(int argc, const char* const* argv) {
    CLI::App app{"spatiotemporal clustering statistics for case data"};
    app.set_version_flag("--version", std::string(version_string));
    app.require_subcommand(1);

    analysis_config cfg;
    simulate_config sim;
    std::string bands_axis = "distance", bands_scope = "cases";

    auto add_common = [&](CLI::App* sub, bool with_rule) {
        sub->add_option("--cases", cfg.cases_path, "case CSV (id,x,y,t,status[,marks...])");
        sub->add_flag("--geographic", cfg.geographic, "treat x,y as lon,lat degrees");
        sub->add_option("--workers", cfg.workers, "worker threads (0 = all hardware threads)");
        sub->add_option("--format", cfg.format, "tabular outputs: csv, json or both");
        sub->add_option("--out", cfg.out_dir, "output directory");
        if (with_rule) {
            sub->add_option("--relate", cfg.relate, "temporal relatedness window T1:T2 (days, closed)");
            sub->add_option("--relate-mark", cfg.relate_mark, "relate pairs sharing this mark column");
            sub->add_flag("--relate-prevalent", cfg.relate_prevalent,
                          "relate prevalent-incident pairs (prevalent mark)");
            sub->add_option("--policy", cfg.policy,
                            "pairs the rule cannot judge: unrelated (default) or exclude");
        }
    };
    auto add_estimator = [&](CLI::App* sub) {
        sub->add_option("--estimator", cfg.estimator, "odds (default), prev or rate");
        sub->add_option("--persons", cfg.persons_path, "persons CSV (rate)");
        sub->add_option("--episodes", cfg.episodes_path, "episodes CSV (rate)");
        sub->add_option("--relocations", cfg.relocations_path, "relocations CSV (rate, optional)");
        sub->add_option("--fixed-duration", cfg.fixed_duration,
                        "infectious for D days after onset instead of the recovery column");
        sub->add_flag("--immunizing", cfg.immunizing, "first episode blocks later susceptibility");
        sub->add_option("--susceptibility-delay", cfg.susceptibility_delay,
                        "days after recovery before susceptible again");
    };
    bool r_given = false;
    auto add_sampling = [&](CLI::App* sub, const char* r_help) {
        sub->add_option_function<std::size_t>(
               "--R", [&](const std::size_t& v) { cfg.R = v; r_given = true; }, r_help);
        sub->add_option_function<std::uint64_t>(
               "--seed", [&](const std::uint64_t& v) { cfg.seed = v; cfg.seed_set = true; },
               "RNG seed (default: TAUKIT_SEED env, else 0)");
        sub->add_option("--level", cfg.level, "envelope level (default 0.95)");
    };

    auto* tau = app.add_subcommand("tau", "tau curve over distance bands");
    add_common(tau, true);
    add_estimator(tau);
    tau->add_option("--bands", cfg.bands_spec, "width:D:K | width:auto:K | discs:A,B,... | eqcount:K | overlap:A,B,...:H")
        ->required();
    add_sampling(tau, "bootstrap replicates (default 0 = point estimate only)");
    tau->add_option("--convention", cfg.convention, "plot abscissa: end (default) or mid");
    tau->add_flag("--log-tau", cfg.log_tau, "log tau axis");
    tau->add_flag("--dump-tallies", cfg.dump_tallies, "also write raw pair tallies");

    auto* map = app.add_subcommand("map", "space by time-lag tau map");
    add_common(map, false);
    map->add_option("--dbands", cfg.dbands_spec, "distance band spec")->required();
    map->add_option("--tbands", cfg.tbands_spec, "onset-lag band spec")->required();
    map->add_option("--min-pairs", cfg.min_pairs, "flag cells with fewer related pairs (default 10)");

    auto* range = app.add_subcommand("range", "clustering range from bootstrap curves");
    add_common(range, true);
    add_estimator(range);
    range->add_option("--bands", cfg.bands_spec, "band spec")->required();
    add_sampling(range, "bootstrap replicates (default 500)");
    range->add_option("--crossing", cfg.crossing, "which down-crossing of 1: first (default) or last");
    range->add_option("--convention", cfg.convention, "plot abscissa: end (default) or mid");
    range->add_flag("--log-tau", cfg.log_tau, "log tau axis");

    auto* test = app.add_subcommand("test", "global envelope test against a permutation null");
    add_common(test, true);
    test->add_option("--estimator", cfg.estimator, "odds (default) or prev");
    test->add_option("--bands", cfg.bands_spec, "band spec")->required();
    add_sampling(test, "permutation replicates (default 999)");
    test->add_option("--alpha", cfg.alpha, "test level (default 0.05)");
    test->add_option("--convention", cfg.convention, "plot abscissa: end (default) or mid");
    test->add_flag("--log-tau", cfg.log_tau, "log tau axis");

    auto* simulate = app.add_subcommand("simulate", "synthetic case data");
    simulate->add_option("--model", sim.model, "null or epidemic (default)");
    simulate->add_option_function<std::uint64_t>(
                 "--seed", [&](const std::uint64_t& v) { sim.seed = v; sim.seed_set = true; },
                 "RNG seed (default: TAUKIT_SEED env, else 0)");
    simulate->add_option("--out", sim.out_dir, "output directory");
    simulate->add_option("--n", sim.n, "points for --model null (default 500)");
    simulate->add_option("--width", sim.width, "region width in meters (default 2000)");
    simulate->add_option("--height", sim.height, "region height in meters (default 2000)");
    simulate->add_option("--horizon", sim.horizon, "days simulated (default 60)");
    simulate->add_option("--population", sim.population, "home locations (default 2000)");
    simulate->add_option("--layout", sim.layout, "uniform | clustered:COUNT:SD");
    simulate->add_option("--kernel", sim.kernel, "gaussian:SD | exp:RATE | disc:RADIUS");
    simulate->add_option("--serial", sim.serial, "serial interval MEAN:SD in days");
    simulate->add_option("--preset", sim.preset, "cholera | dengue | measles");
    simulate->add_option("--re", sim.r_e, "expected offspring per case (default 2)");
    simulate->add_option("--initial", sim.initial, "seed cases (default 5)");
    simulate->add_option("--max-cases", sim.max_cases, "hard case cap (default 20000)");
    simulate->add_option("--observe", sim.observe, "full | frac:P | bias:CX:CY:R:PIN:POUT");

    auto* bands = app.add_subcommand("bands", "resolve a band spec and print the edges");
    bands->add_option("--bands", cfg.bands_spec, "band spec")->required();
    bands->add_option("--cases", cfg.cases_path, "case CSV (needed for auto and eqcount specs)");
    bands->add_flag("--geographic", cfg.geographic, "");
    bands->add_option("--axis", bands_axis, "distance (default) or time");
    bands->add_option("--scope", bands_scope, "cases (default) or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help, --version
        json j;
        j["error"] = "InvalidArgument";
        j["exit_code"] = 2;
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 2;
    }

    try {
        if (tau->parsed()) {
            if (!r_given) cfg.R = 0;
            return run_tau(cfg);
        }
        if (map->parsed()) return run_map(cfg);
        if (range->parsed()) {
            if (!r_given) cfg.R = 500;
            return run_range(cfg);
        }
        if (test->parsed()) {
            if (!r_given) cfg.R = 999;
            return run_test(cfg);
        }
        if (simulate->parsed()) return run_simulate(sim);
        if (bands->parsed()) return run_bands(cfg, bands_axis, bands_scope);
    } catch (const tau_error& e) {
        json j;
        j["error"] = errc_name(e.code());
        j["exit_code"] = errc_exit_code(e.code());
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return errc_exit_code(e.code());
    } catch (const std::exception& e) {
        json j;
        j["error"] = "Internal";
        j["exit_code"] = 1;
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 1;
    }
    return 0;
}

} // namespace taukit::cli
