#pragma once

// CSV ingestion and serialization for both data models.
//
// cases.csv     id,x,y,t,status[,mark columns...]
// persons.csv   id,entry,exit,x,y
// relocations   id,from_t,x,y            (optional sidecar to persons.csv)
// episodes.csv  person_id,onset,recovery
//
// Any time column may hold either plain numbers or ISO-8601 dates, uniformly
// per load; dates become day offsets relative to the smallest date seen.

#include <string>
#include <vector>

#include "taukit/csv.hpp"
#include "taukit/model.hpp"

namespace taukit {

namespace detail {

// Classifies one logical set of time cells as numeric or ISO dates.
// `cells` pairs each raw string with a label used in error messages.
struct time_parser {
    bool any_date = false, any_number = false;
    std::int64_t min_serial = 0;
    std::vector<std::pair<std::string, std::string>> cells;

    void add(std::string raw, std::string where) { cells.emplace_back(std::move(raw), std::move(where)); }

    void classify() {
        bool have_min = false;
        for (const auto& [raw, where] : cells) {
            if (raw.empty()) continue;
            if (csv::parse_double(raw)) { any_number = true; continue; }
            if (auto d = csv::parse_iso_date(raw)) {
                any_date = true;
                if (!have_min || *d < min_serial) { min_serial = *d; have_min = true; }
                continue;
            }
            raise(errc::parse_error, where + ": unparseable time '" + raw + "'");
        }
        if (any_date && any_number)
            raise(errc::parse_error, "mixed numeric and calendar time values");
    }

    std::optional<double> value(const std::string& raw, const std::string& where) const {
        if (raw.empty()) return std::nullopt;
        if (any_date) {
            auto d = csv::parse_iso_date(raw);
            if (!d) raise(errc::parse_error, where + ": unparseable date '" + raw + "'");
            return static_cast<double>(*d - min_serial);
        }
        auto v = csv::parse_double(raw);
        if (!v) raise(errc::parse_error, where + ": unparseable time '" + raw + "'");
        return *v;
    }
};

inline double require_number(const csv::table& t, std::size_t row, int col, const std::string& what) {
    const auto& raw = t.rows[row][static_cast<std::size_t>(col)];
    auto v = csv::parse_double(raw);
    if (!v) raise(errc::parse_error, "row " + std::to_string(row + 1) + ": unparseable " + what + " '" + raw + "'");
    return *v;
}

inline int require_column(const csv::table& t, const std::string& name, const std::string& path) {
    int c = t.column(name);
    if (c < 0) raise(errc::missing_column, "'" + name + "' in " + path);
    return c;
}

} // namespace detail

struct case_csv_options {
    crs_mode crs = crs_mode::planar;
    bool implicit_relatedness = false;
    std::string time_unit = "days";
};

inline case_dataset load_case_data(const std::string& path, case_csv_options opt = {}) {
    const auto t = csv::read_file(path);
    const int ci = detail::require_column(t, "id", path);
    const int cx = detail::require_column(t, "x", path);
    const int cy = detail::require_column(t, "y", path);
    const int ct = detail::require_column(t, "t", path);
    const int cs = detail::require_column(t, "status", path);

    case_dataset ds;
    ds.crs = opt.crs;
    ds.implicit_relatedness = opt.implicit_relatedness;
    ds.time_unit = opt.time_unit;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const int ic = static_cast<int>(c);
        if (ic != ci && ic != cx && ic != cy && ic != ct && ic != cs)
            ds.mark_columns.push_back(t.header[c]);
    }

    detail::time_parser tp;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() != t.header.size())
            raise(errc::parse_error, "row " + std::to_string(r + 1) + ": wrong field count");
        tp.add(t.rows[r][static_cast<std::size_t>(ct)], "row " + std::to_string(r + 1));
    }
    tp.classify();

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string where = "row " + std::to_string(r + 1);
        individual a;
        a.id = t.rows[r][static_cast<std::size_t>(ci)];
        a.x = detail::require_number(t, r, cx, "x");
        a.y = detail::require_number(t, r, cy, "y");
        a.onset = tp.value(t.rows[r][static_cast<std::size_t>(ct)], where);
        std::string st = t.rows[r][static_cast<std::size_t>(cs)];
        std::transform(st.begin(), st.end(), st.begin(), [](unsigned char c) { return std::tolower(c); });
        if (st == "case") a.status = case_status::case_;
        else if (st == "noncase" || st == "control") a.status = case_status::noncase;
        else raise(errc::parse_error, where + ": unknown status '" + st + "'");
        for (std::size_t c = 0, m = 0; c < t.header.size(); ++c) {
            const int ic = static_cast<int>(c);
            if (ic == ci || ic == cx || ic == cy || ic == ct || ic == cs) continue;
            const auto& v = t.rows[r][c];
            if (!v.empty()) a.marks[ds.mark_columns[m]] = v;
            ++m;
        }
        ds.individuals.push_back(std::move(a));
    }
    validate(ds);
    return ds;
}

inline void save_case_data(const case_dataset& ds, const std::string& path) {
    std::vector<std::string> cols = ds.mark_columns;
    for (const auto& a : ds.individuals)
        for (const auto& [k, v] : a.marks)
            if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);

    std::vector<std::string> header = {"id", "x", "y", "t", "status"};
    header.insert(header.end(), cols.begin(), cols.end());
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ds.individuals.size());
    for (const auto& a : ds.individuals) {
        std::vector<std::string> row = {a.id, csv::format_double(a.x), csv::format_double(a.y),
                                        a.onset ? csv::format_double(*a.onset) : std::string{},
                                        a.is_case() ? "case" : "noncase"};
        for (const auto& c : cols) {
            auto it = a.marks.find(c);
            row.push_back(it == a.marks.end() ? std::string{} : it->second);
        }
        rows.push_back(std::move(row));
    }
    csv::write_file(path, header, rows);
}

struct panel_csv_options {
    crs_mode crs = crs_mode::planar;
    bool immunizing = false;
    infectious_window window = infectious_window::use_recovery;
    double fixed_duration = 0;
    double susceptibility_delay = 0;
};

inline episode_panel load_episode_panel(const std::string& persons_path,
                                        const std::string& episodes_path,
                                        const std::string& relocations_path = {},
                                        panel_csv_options opt = {}) {
    const auto pt = csv::read_file(persons_path);
    const int pid = detail::require_column(pt, "id", persons_path);
    const int pen = detail::require_column(pt, "entry", persons_path);
    const int pex = detail::require_column(pt, "exit", persons_path);
    const int px = detail::require_column(pt, "x", persons_path);
    const int py = detail::require_column(pt, "y", persons_path);

    const auto et = csv::read_file(episodes_path);
    const int eid = detail::require_column(et, "person_id", episodes_path);
    const int eon = detail::require_column(et, "onset", episodes_path);
    const int ere = detail::require_column(et, "recovery", episodes_path);

    csv::table rt;
    int rid = -1, rfrom = -1, rx = -1, ry = -1;
    if (!relocations_path.empty()) {
        rt = csv::read_file(relocations_path);
        rid = detail::require_column(rt, "id", relocations_path);
        rfrom = detail::require_column(rt, "from_t", relocations_path);
        rx = detail::require_column(rt, "x", relocations_path);
        ry = detail::require_column(rt, "y", relocations_path);
    }

    // All time columns across the three files share one calendar.
    detail::time_parser tp;
    for (std::size_t r = 0; r < pt.rows.size(); ++r) {
        tp.add(pt.rows[r][static_cast<std::size_t>(pen)], "persons row " + std::to_string(r + 1));
        tp.add(pt.rows[r][static_cast<std::size_t>(pex)], "persons row " + std::to_string(r + 1));
    }
    for (std::size_t r = 0; r < et.rows.size(); ++r) {
        tp.add(et.rows[r][static_cast<std::size_t>(eon)], "episodes row " + std::to_string(r + 1));
        tp.add(et.rows[r][static_cast<std::size_t>(ere)], "episodes row " + std::to_string(r + 1));
    }
    for (std::size_t r = 0; r < rt.rows.size(); ++r)
        tp.add(rt.rows[r][static_cast<std::size_t>(rfrom)], "relocations row " + std::to_string(r + 1));
    tp.classify();

    auto time_at = [&tp](const csv::table& t, std::size_t r, int c, const std::string& file) {
        auto v = tp.value(t.rows[r][static_cast<std::size_t>(c)], file + " row " + std::to_string(r + 1));
        if (!v) raise(errc::parse_error, file + " row " + std::to_string(r + 1) + ": empty time");
        return *v;
    };

    episode_panel panel;
    panel.crs = opt.crs;
    panel.immunizing = opt.immunizing;
    panel.window = opt.window;
    panel.fixed_duration = opt.fixed_duration;
    panel.susceptibility_delay = opt.susceptibility_delay;

    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < pt.rows.size(); ++r) {
        person q;
        q.id = pt.rows[r][static_cast<std::size_t>(pid)];
        q.entry = time_at(pt, r, pen, "persons");
        q.exit = time_at(pt, r, pex, "persons");
        q.track.push_back({q.entry, detail::require_number(pt, r, px, "x"),
                           detail::require_number(pt, r, py, "y")});
        index[q.id] = panel.persons.size();
        panel.persons.push_back(std::move(q));
    }
    for (std::size_t r = 0; r < rt.rows.size(); ++r) {
        const auto& id = rt.rows[r][static_cast<std::size_t>(rid)];
        auto it = index.find(id);
        if (it == index.end())
            raise(errc::unknown_person_id, "relocations row " + std::to_string(r + 1) + " (id " + id + ")");
        panel.persons[it->second].track.push_back(
            {time_at(rt, r, rfrom, "relocations"),
             detail::require_number(rt, r, rx, "x"), detail::require_number(rt, r, ry, "y")});
    }
    for (auto& q : panel.persons)
        std::sort(q.track.begin(), q.track.end(),
                  [](const track_point& a, const track_point& b) { return a.from_t < b.from_t; });

    for (std::size_t r = 0; r < et.rows.size(); ++r) {
        const auto& id = et.rows[r][static_cast<std::size_t>(eid)];
        auto it = index.find(id);
        if (it == index.end())
            raise(errc::unknown_person_id, "episodes row " + std::to_string(r + 1) + " (id " + id + ")");
        episode e;
        e.person_index = it->second;
        e.onset = time_at(et, r, eon, "episodes");
        e.recovery = time_at(et, r, ere, "episodes");
        panel.episodes.push_back(e);
    }
    std::sort(panel.episodes.begin(), panel.episodes.end(), [](const episode& a, const episode& b) {
        return a.person_index != b.person_index ? a.person_index < b.person_index : a.onset < b.onset;
    });
    validate(panel);
    return panel;
}

inline void save_episode_panel(const episode_panel& p, const std::string& persons_path,
                               const std::string& episodes_path,
                               const std::string& relocations_path = {}) {
    std::vector<std::vector<std::string>> prow, erow, rrow;
    for (const auto& q : p.persons) {
        prow.push_back({q.id, csv::format_double(q.entry), csv::format_double(q.exit),
                        csv::format_double(q.track.front().x), csv::format_double(q.track.front().y)});
        for (std::size_t k = 1; k < q.track.size(); ++k)
            rrow.push_back({q.id, csv::format_double(q.track[k].from_t),
                            csv::format_double(q.track[k].x), csv::format_double(q.track[k].y)});
    }
    for (const auto& e : p.episodes)
        erow.push_back({p.persons[e.person_index].id, csv::format_double(e.onset),
                        csv::format_double(e.recovery)});
    csv::write_file(persons_path, {"id", "entry", "exit", "x", "y"}, prow);
    csv::write_file(episodes_path, {"person_id", "onset", "recovery"}, erow);
    if (!relocations_path.empty())
        csv::write_file(relocations_path, {"id", "from_t", "x", "y"}, rrow);
}

} // namespace taukit
