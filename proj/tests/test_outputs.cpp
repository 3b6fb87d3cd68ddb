#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "vendor/json.hpp"

#include "taukit/io.hpp"
#include "tests/helpers.hpp"

using namespace taukit;
using nlohmann::json;
using testutil::cli_result;
using testutil::expect_error;
using testutil::read_text;
using testutil::run_cli;
using testutil::temp_dir;
using testutil::write_text;

namespace {

const char* four_cases_csv = "id,x,y,t,status\n"
                             "a,0,0,0,case\n"
                             "b,1,0,1,case\n"
                             "c,2,0,50,case\n"
                             "d,10,0,100,case\n";

// two tight clusters 1000 apart; onsets relate only within a cluster
std::string clustered_csv() {
    std::string s = "id,x,y,t,status\n";
    const double onset[] = {0, 1, 2, 3, 10, 20};
    for (int i = 0; i < 6; ++i)
        s += "a" + std::to_string(i + 1) + "," + std::to_string(2 * i) + ",0," +
             std::to_string(onset[i]) + ",case\n";
    for (int i = 0; i < 6; ++i)
        s += "b" + std::to_string(i + 1) + "," + std::to_string(1000 + 2 * i) + ",0," +
             std::to_string(100 + onset[i]) + ",case\n";
    return s;
}

bool file_exists(const std::string& p) { return std::filesystem::exists(p); }

json parse_file(const std::string& path) {
    const auto text = read_text(path);
    REQUIRE_FALSE(text.empty());
    return json::parse(text);
}

} // namespace

TEST_CASE("tau writes the full output set", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), four_cases_csv);
    const auto res = run_cli("tau --cases " + dir.file("cases.csv") +
                             " --bands discs:2,11 --relate 0:10 --out " + dir.path.string());
    INFO(res.output);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("wrote ") != std::string::npos);

    REQUIRE(read_text(dir.file("curve.csv")) ==
            "band_lo,band_hi,tau,n_related,n_unrelated,defined_flag\n"
            "0,2,5,1,1,1\n"
            "0,11,1,1,5,1\n");

    const auto doc = parse_file(dir.file("result.json"));
    REQUIRE(doc["estimator"] == "odds");
    REQUIRE(doc["tau"] == json({5.0, 1.0}));
    REQUIRE(doc["bands"][0]["lo"] == 0.0);
    REQUIRE(doc["bands"][1]["hi"] == 11.0);
    REQUIRE(doc["envelope"].is_null());
    REQUIRE(doc["global_test"].is_null());
    REQUIRE(doc["range"].is_null());
    REQUIRE(doc["meta"]["seed"] == 0);
    REQUIRE(doc["meta"]["R"].is_null());
    REQUIRE(doc["meta"]["rng"] == "philox4x32-10/v1");
    REQUIRE(doc["meta"]["version"] == "0.1.0");

    const auto svg = read_text(dir.file("curve.svg"));
    REQUIRE(svg.find("<svg") != std::string::npos);
    REQUIRE(svg.find("</svg>") != std::string::npos);
    const auto plot_data = read_text(dir.file("curve_data.csv"));
    REQUIRE(plot_data.rfind("x,tau_odds\n", 0) == 0);
}

TEST_CASE("tau format selection trims tabular outputs", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), four_cases_csv);
    const std::string base =
        "tau --cases " + dir.file("cases.csv") + " --bands discs:2,11 --relate 0:10 --out ";

    auto csv_only = dir.path / "csv";
    REQUIRE(run_cli(base + csv_only.string() + " --format csv").exit_code == 0);
    REQUIRE(file_exists((csv_only / "curve.csv").string()));
    REQUIRE_FALSE(file_exists((csv_only / "result.json").string()));
    REQUIRE(file_exists((csv_only / "curve.svg").string()));
    REQUIRE(file_exists((csv_only / "curve_data.csv").string()));

    auto json_only = dir.path / "json";
    REQUIRE(run_cli(base + json_only.string() + " --format json").exit_code == 0);
    REQUIRE_FALSE(file_exists((json_only / "curve.csv").string()));
    REQUIRE(file_exists((json_only / "result.json").string()));

    REQUIRE(run_cli(base + dir.path.string() + " --format yaml").exit_code == 2);
}

TEST_CASE("tau reruns are byte identical", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), four_cases_csv);
    const std::string base = "tau --cases " + dir.file("cases.csv") +
                             " --bands discs:2,11 --relate 0:10 --R 40 --seed 3 --out ";
    REQUIRE(run_cli(base + (dir.path / "one").string()).exit_code == 0);
    REQUIRE(run_cli(base + (dir.path / "two").string()).exit_code == 0);
    for (const char* f : {"curve.csv", "result.json", "curve.svg", "curve_data.csv"}) {
        const auto a = read_text((dir.path / "one" / f).string());
        REQUIRE_FALSE(a.empty());
        REQUIRE(a == read_text((dir.path / "two" / f).string()));
    }
    const auto doc = parse_file((dir.path / "one" / "result.json").string());
    REQUIRE(doc["meta"]["R"] == 40);
    REQUIRE(doc["meta"]["seed"] == 3);
    REQUIRE(doc["envelope"]["level"] == 0.95);
    REQUIRE(doc["envelope"]["lo"].size() == 2);
    const auto plot_data = read_text((dir.path / "one" / "curve_data.csv").string());
    REQUIRE(plot_data.rfind("x,tau_odds,env_lo,env_hi\n", 0) == 0);
}

TEST_CASE("the seed falls back to the environment", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), four_cases_csv);
    const std::string base = "tau --cases " + dir.file("cases.csv") +
                             " --bands discs:2,11 --relate 0:10 --R 20 --out " + dir.path.string();

    setenv("TAUKIT_SEED", "77", 1);
    REQUIRE(run_cli(base).exit_code == 0);
    REQUIRE(parse_file(dir.file("result.json"))["meta"]["seed"] == 77);

    // an explicit flag beats the environment
    REQUIRE(run_cli(base + " --seed 5").exit_code == 0);
    REQUIRE(parse_file(dir.file("result.json"))["meta"]["seed"] == 5);

    setenv("TAUKIT_SEED", "not-a-number", 1);
    const auto res = run_cli(base);
    REQUIRE(res.exit_code == 2);
    REQUIRE(res.output.find("TAUKIT_SEED") != std::string::npos);
    unsetenv("TAUKIT_SEED");
}

TEST_CASE("usage errors exit 2 with a machine readable reason", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), four_cases_csv);
    const std::string cases = " --cases " + dir.file("cases.csv");
    const std::string out = " --out " + dir.path.string();

    auto code_and_name = [&](const std::string& args, const std::string& name) {
        const auto res = run_cli(args);
        INFO(res.output);
        return res.exit_code == 2 && res.output.find(name) != std::string::npos;
    };
    // missing required --bands (parser-level)
    REQUIRE(code_and_name("tau" + cases + " --relate 0:10" + out, "InvalidArgument"));
    // cutpoints out of order
    REQUIRE(code_and_name("tau" + cases + " --bands discs:11,2 --relate 0:10" + out,
                          "NonIncreasingCutpoints"));
    // rate without panel files
    REQUIRE(code_and_name("tau --estimator rate --bands width:2:1 --relate 0:5" + out,
                          "InvalidArgument"));
    // no relatedness rule at all
    REQUIRE(code_and_name("tau" + cases + " --bands discs:2,11" + out, "InvalidArgument"));
    // unknown policy
    REQUIRE(code_and_name("tau" + cases + " --bands discs:2,11 --relate 0:10 --policy drop" + out,
                          "InvalidArgument"));
}

TEST_CASE("data errors exit 3", "[cli]") {
    temp_dir dir;
    const std::string out = " --out " + dir.path.string();
    const std::string tail = " --bands discs:2,11 --relate 0:10" + out;

    write_text(dir.file("dup.csv"), "id,x,y,t,status\na,0,0,0,case\na,1,0,1,case\n");
    auto res = run_cli("tau --cases " + dir.file("dup.csv") + tail);
    REQUIRE(res.exit_code == 3);
    REQUIRE(res.output.find("DuplicateId") != std::string::npos);

    write_text(dir.file("no_t.csv"), "id,x,y,status\na,0,0,case\n");
    res = run_cli("tau --cases " + dir.file("no_t.csv") + tail);
    REQUIRE(res.exit_code == 3);
    REQUIRE(res.output.find("MissingColumn") != std::string::npos);

    write_text(dir.file("bad_status.csv"), "id,x,y,t,status\na,0,0,0,maybe\n");
    res = run_cli("tau --cases " + dir.file("bad_status.csv") + tail);
    REQUIRE(res.exit_code == 3);
    REQUIRE(res.output.find("ParseError") != std::string::npos);

    write_text(dir.file("persons.csv"), "id,entry,exit,x,y\ni,0,2,0,0\n");
    write_text(dir.file("episodes.csv"), "person_id,onset,recovery\nghost,0,1\n");
    res = run_cli("tau --estimator rate --persons " + dir.file("persons.csv") + " --episodes " +
                  dir.file("episodes.csv") + " --bands width:2:1 --relate 0:5" + out);
    REQUIRE(res.exit_code == 3);
    REQUIRE(res.output.find("UnknownPersonId") != std::string::npos);
}

TEST_CASE("degenerate analyses exit 4", "[cli]") {
    temp_dir dir;
    const std::string out = " --out " + dir.path.string();
    // every pair related: the odds denominator is empty
    write_text(dir.file("all_related.csv"),
               "id,x,y,t,status\ne1,0,0,0,case\ne2,1,0,1,case\ne3,2,0,2,case\n");
    auto res = run_cli("tau --cases " + dir.file("all_related.csv") +
                       " --bands width:4:2 --relate 0:10" + out);
    REQUIRE(res.exit_code == 4);
    REQUIRE(res.output.find("GlobalOddsUndefined") != std::string::npos);

    write_text(dir.file("cases.csv"), four_cases_csv);
    res = run_cli("range --cases " + dir.file("cases.csv") +
                  " --bands discs:2,11 --relate 0:10 --R 10" + out);
    REQUIRE(res.exit_code == 4);
    REQUIRE(res.output.find("TooFewReplicates") != std::string::npos);
}

TEST_CASE("rate runs end to end from panel files", "[cli]") {
    temp_dir dir;
    write_text(dir.file("persons.csv"), "id,entry,exit,x,y\ni,0,2,0,0\nj,0,10,1,0\n");
    write_text(dir.file("episodes.csv"), "person_id,onset,recovery\ni,0,2\nj,1,9\n");
    const auto res = run_cli("tau --estimator rate --persons " + dir.file("persons.csv") +
                             " --episodes " + dir.file("episodes.csv") +
                             " --bands width:2:1 --relate 0:5 --out " + dir.path.string());
    INFO(res.output);
    REQUIRE(res.exit_code == 0);
    REQUIRE(read_text(dir.file("curve.csv")) ==
            "band_lo,band_hi,tau,n_related,pair_time,defined_flag\n"
            "0,2,1,1,1,1\n");
    const auto doc = parse_file(dir.file("result.json"));
    REQUIRE(doc["estimator"] == "rate");
    REQUIRE(doc["tau"] == json({1.0}));
}

TEST_CASE("dump-tallies writes the raw pair counts", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), four_cases_csv);
    const auto res = run_cli("tau --cases " + dir.file("cases.csv") +
                             " --bands discs:2,11 --relate 0:10 --dump-tallies --out " +
                             dir.path.string());
    REQUIRE(res.exit_code == 0);
    const auto t = parse_file(dir.file("tallies.json"));
    REQUIRE(t["scope"] == "cases_only");
    REQUIRE(t["policy"] == "treat_as_unrelated");
    REQUIRE(t["global"]["related"] == 1);
    REQUIRE(t["global"]["unrelated"] == 5);
    REQUIRE(t["global"]["total"] == 6);
    REQUIRE(t["per_band"].size() == 2);
    REQUIRE(t["per_band"][0]["related"] == 1);
}

TEST_CASE("map emits the grid in three shapes", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), four_cases_csv);
    const std::string base = "map --cases " + dir.file("cases.csv") +
                             " --dbands discs:2 --tbands discs:2 --out " + dir.path.string();

    REQUIRE(run_cli(base + " --min-pairs 1").exit_code == 0);
    REQUIRE(read_text(dir.file("map.csv")) ==
            "d_lo,d_hi,t_lo,t_hi,tau,n_pairs,low_support,defined_flag\n"
            "0,2,0,2,5,1,0,1\n");
    auto doc = parse_file(dir.file("map.json"));
    REQUIRE(doc["cells"].size() == 1);
    REQUIRE(doc["cells"][0]["tau"] == 5.0);
    REQUIRE(doc["cells"][0]["n_pairs"] == 1);
    REQUIRE(doc["cells"][0]["low_support"] == false);
    REQUIRE(doc["min_pairs"] == 1);
    REQUIRE(read_text(dir.file("heatmap.svg")).find("<svg") != std::string::npos);

    // the default support threshold flags the same cell without blanking it
    REQUIRE(run_cli(base).exit_code == 0);
    doc = parse_file(dir.file("map.json"));
    REQUIRE(doc["cells"][0]["low_support"] == true);
    REQUIRE(doc["cells"][0]["tau"] == 5.0);
}

TEST_CASE("range reports a crossing distance with an interval", "[cli]") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), clustered_csv());
    const auto res = run_cli("range --cases " + dir.file("cases.csv") +
                             " --bands width:1100:2 --relate 0:5 --R 60 --seed 11 --out " +
                             dir.path.string());
    INFO(res.output);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("range = ") != std::string::npos);

    const auto doc = parse_file(dir.file("result.json"));
    const auto& r = doc["range"];
    REQUIRE(r["crossing"] == "first");
    const double lo = r["lo"], point = r["point"], hi = r["hi"];
    REQUIRE(lo >= 550.0);
    REQUIRE(lo <= point);
    REQUIRE(point <= hi);
    REQUIRE(hi <= 1100.0);
    REQUIRE(r["censored_fraction"] == 0.0);
    REQUIRE_FALSE(doc["envelope"].is_null());
}

TEST_CASE("test reports a global p value", "[cli]") {
    temp_dir dir;
    REQUIRE(run_cli("simulate --model null --n 50 --width 500 --height 500 --horizon 60 --seed 9"
                    " --out " +
                    dir.path.string())
                .exit_code == 0);
    const auto res = run_cli("test --cases " + dir.file("cases.csv") +
                             " --bands width:250:5 --relate 0:10 --R 39 --seed 2 --out " +
                             dir.path.string());
    INFO(res.output);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("p = ") != std::string::npos);

    const auto doc = parse_file(dir.file("result.json"));
    const auto& t = doc["global_test"];
    REQUIRE(t["alpha"] == 0.05);
    const double p = t["p"];
    REQUIRE(p >= 1.0 / 40.0);
    REQUIRE(p <= 1.0);
    REQUIRE(t["bounds"]["lo"].size() == 5);
    REQUIRE(t["bounds"]["hi"].size() == 5);
}

TEST_CASE("simulated null data round trips through the analysis", "[cli]") {
    temp_dir dir;
    const std::string sim = "simulate --model null --n 50 --width 500 --height 500 --horizon 60"
                            " --seed 9 --out ";
    REQUIRE(run_cli(sim + (dir.path / "one").string()).exit_code == 0);
    REQUIRE(run_cli(sim + (dir.path / "two").string()).exit_code == 0);
    const auto text = read_text((dir.path / "one" / "cases.csv").string());
    REQUIRE(text == read_text((dir.path / "two" / "cases.csv").string()));

    const auto ds = load_case_data((dir.path / "one" / "cases.csv").string());
    REQUIRE(ds.size() == 50);
    REQUIRE(ds.case_count() == 50);

    const auto res = run_cli("tau --cases " + (dir.path / "one" / "cases.csv").string() +
                             " --bands width:250:5 --relate 0:10 --out " + dir.path.string());
    REQUIRE(res.exit_code == 0);
    const auto doc = parse_file(dir.file("result.json"));
    REQUIRE(doc["tau"].size() == 5);
    std::size_t defined = 0;
    for (const auto& v : doc["tau"]) defined += !v.is_null();
    REQUIRE(defined >= 4);
}

TEST_CASE("simulate epidemic writes a joinable transmission tree", "[cli]") {
    temp_dir dir;
    const std::string base = "simulate --model epidemic --population 200 --width 800 --height 800"
                             " --kernel gaussian:60 --re 1.5 --initial 3 --horizon 25 --seed 4"
                             " --out ";
    auto res = run_cli(base + dir.path.string());
    INFO(res.output);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("simulated ") != std::string::npos);

    const auto tree = parse_file(dir.file("tree.json"));
    REQUIRE(tree["seed"] == 4);
    REQUIRE(tree["config"]["kernel"]["kind"] == "gaussian");
    REQUIRE(tree["config"]["kernel"]["param"] == 60.0);
    REQUIRE(tree["config"]["serial_interval"]["mean"] == 5.0);
    const auto& cases = tree["cases"];
    REQUIRE(cases.size() >= 3);
    for (std::size_t i = 0; i < cases.size(); ++i) {
        REQUIRE(cases[i]["id"] == "c" + std::to_string(i + 1));
        REQUIRE(cases[i]["observed"] == true);
        if (i < 3) REQUIRE(cases[i]["parent"].is_null());
    }

    const auto ds = load_case_data(dir.file("cases.csv"));
    REQUIRE(ds.size() == cases.size());

    // reruns of the same seed reproduce the tree byte for byte
    auto rerun = dir.path / "rerun";
    REQUIRE(run_cli(base + rerun.string()).exit_code == 0);
    REQUIRE(read_text(dir.file("tree.json")) == read_text((rerun / "tree.json").string()));
}

TEST_CASE("partial observation thins the emitted case file", "[cli]") {
    temp_dir dir;
    const std::string base = "simulate --model epidemic --population 200 --width 800 --height 800"
                             " --kernel gaussian:60 --re 1.5 --initial 3 --horizon 25 --seed 4"
                             " --observe frac:0.4 --out ";
    REQUIRE(run_cli(base + dir.path.string()).exit_code == 0);
    const auto tree = parse_file(dir.file("tree.json"));
    std::size_t observed = 0;
    for (const auto& c : tree["cases"]) observed += c["observed"] == true;
    REQUIRE(observed > 0);
    REQUIRE(observed < tree["cases"].size());
    const auto ds = load_case_data(dir.file("cases.csv"));
    REQUIRE(ds.size() == observed);
    REQUIRE(tree["config"]["observation"]["p"] == 0.4);
}

TEST_CASE("disease presets reach the simulator config", "[cli]") {
    temp_dir dir;
    const auto res = run_cli("simulate --model epidemic --population 100 --re 0 --initial 2"
                             " --preset dengue --seed 1 --out " +
                             dir.path.string());
    REQUIRE(res.exit_code == 0);
    const auto tree = parse_file(dir.file("tree.json"));
    REQUIRE(tree["config"]["serial_interval"]["mean"] == 16.0);
    REQUIRE(tree["config"]["serial_interval"]["sd"] == 5.0);
    REQUIRE(run_cli("simulate --model epidemic --preset smallpox --out " + dir.path.string())
                .exit_code == 2);
}

TEST_CASE("bands dry runs print resolved edges", "[cli]") {
    temp_dir dir;
    auto res = run_cli("bands --bands discs:2,11");
    REQUIRE(res.exit_code == 0);
    auto doc = json::parse(res.output);
    REQUIRE(doc["axis"] == "distance");
    REQUIRE(doc["bands"] == json({{{"lo", 0.0}, {"hi", 2.0}}, {{"lo", 0.0}, {"hi", 11.0}}}));

    // auto width halves the largest pair distance seen in the data
    write_text(dir.file("cases.csv"), four_cases_csv);
    res = run_cli("bands --bands width:auto:2 --cases " + dir.file("cases.csv"));
    REQUIRE(res.exit_code == 0);
    doc = json::parse(res.output);
    REQUIRE(doc["bands"] == json({{{"lo", 0.0}, {"hi", 2.5}}, {{"lo", 2.5}, {"hi", 5.0}}}));

    res = run_cli("bands --bands eqcount:2 --cases " + dir.file("cases.csv"));
    REQUIRE(res.exit_code == 0);
    doc = json::parse(res.output);
    REQUIRE(doc["bands"].size() == 2);
    REQUIRE(doc["bands"][0]["lo"] == 0.0);

    res = run_cli("bands --bands width:auto:2");
    REQUIRE(res.exit_code == 2); // needs data to resolve
}

TEST_CASE("version and help exit cleanly", "[cli]") {
    auto res = run_cli("--version");
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("0.1.0") != std::string::npos);
    res = run_cli("--help");
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("tau") != std::string::npos);
    res = run_cli("tau --help");
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.output.find("--bands") != std::string::npos);
}

TEST_CASE("case files round trip through save and load") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), "id,x,y,t,status,serotype\n"
                                      "a,0,0,0,case,O1\n"
                                      "b,1,2,1.5,case,\n"
                                      "c,2,0,,noncase,O139\n"
                                      "d,3,1,,control,\n");
    const auto ds = load_case_data(dir.file("cases.csv"));
    REQUIRE(ds.size() == 4);
    REQUIRE(ds.case_count() == 2);
    REQUIRE_FALSE(ds.individuals[2].onset.has_value());
    REQUIRE(ds.individuals[0].marks.at("serotype") == "O1");
    REQUIRE(ds.individuals[1].marks.count("serotype") == 0);

    save_case_data(ds, dir.file("saved.csv"));
    const auto back = load_case_data(dir.file("saved.csv"));
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        REQUIRE(back.individuals[i].id == ds.individuals[i].id);
        REQUIRE(back.individuals[i].x == ds.individuals[i].x);
        REQUIRE(back.individuals[i].y == ds.individuals[i].y);
        REQUIRE(back.individuals[i].onset == ds.individuals[i].onset);
        REQUIRE(back.individuals[i].status == ds.individuals[i].status);
        REQUIRE(back.individuals[i].marks == ds.individuals[i].marks);
    }
}

TEST_CASE("calendar dates become day offsets") {
    temp_dir dir;
    write_text(dir.file("cases.csv"), "id,x,y,t,status\n"
                                      "a,0,0,2026-01-05,case\n"
                                      "b,1,0,2026-01-01,case\n"
                                      "c,2,0,,noncase\n");
    const auto ds = load_case_data(dir.file("cases.csv"));
    REQUIRE(*ds.individuals[0].onset == 4.0);
    REQUIRE(*ds.individuals[1].onset == 0.0);
    REQUIRE_FALSE(ds.individuals[2].onset.has_value());

    write_text(dir.file("mixed.csv"), "id,x,y,t,status\n"
                                      "a,0,0,2026-01-05,case\n"
                                      "b,1,0,7,case\n");
    REQUIRE(expect_error([&] { load_case_data(dir.file("mixed.csv")); }) == errc::parse_error);
}

TEST_CASE("panel files round trip through save and load") {
    temp_dir dir;
    write_text(dir.file("persons.csv"), "id,entry,exit,x,y\ni,0,2,0,0\nj,0,10,1,0\n");
    write_text(dir.file("episodes.csv"), "person_id,onset,recovery\ni,0,2\nj,1,9\n");
    write_text(dir.file("relocations.csv"), "id,from_t,x,y\nj,5,99,0\n");
    const auto panel = load_episode_panel(dir.file("persons.csv"), dir.file("episodes.csv"),
                                          dir.file("relocations.csv"));
    REQUIRE(panel.persons.size() == 2);
    REQUIRE(panel.persons[1].track.size() == 2);
    REQUIRE(panel.persons[1].track[1].x == 99.0);
    REQUIRE(panel.episodes.size() == 2);

    save_episode_panel(panel, dir.file("p2.csv"), dir.file("e2.csv"), dir.file("r2.csv"));
    const auto back = load_episode_panel(dir.file("p2.csv"), dir.file("e2.csv"), dir.file("r2.csv"));
    REQUIRE(back.persons.size() == panel.persons.size());
    for (std::size_t i = 0; i < panel.persons.size(); ++i) {
        REQUIRE(back.persons[i].id == panel.persons[i].id);
        REQUIRE(back.persons[i].entry == panel.persons[i].entry);
        REQUIRE(back.persons[i].exit == panel.persons[i].exit);
        REQUIRE(back.persons[i].track.size() == panel.persons[i].track.size());
    }
    REQUIRE(back.episodes.size() == panel.episodes.size());
    REQUIRE(back.episodes[1].onset == panel.episodes[1].onset);
}
