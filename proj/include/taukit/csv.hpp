#pragma once

// Small CSV layer: RFC-style quoting, locale-independent numbers, and
// ISO-8601 calendar dates. Dates are converted to serial day numbers at
// ingestion; nothing downstream ever sees a calendar type.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "taukit/error.hpp"

namespace taukit::csv {

struct table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows; // row r, column c

    // 0-based header lookup, -1 when absent.
    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { field += '"'; ++i; }
                else quoted = false;
            } else field += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else field += c;
    }
    out.push_back(field);
    return out;
}

inline table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::parse_error, "cannot open " + path);
    table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        auto fields = split_record(line);
        if (first) { t.header = std::move(fields); first = false; }
        else t.rows.push_back(std::move(fields));
    }
    if (first) raise(errc::parse_error, "empty file " + path);
    return t;
}

inline std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) { if (c == '"') out += "\"\""; out += c; }
    out += '"';
    return out;
}

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc{} || r.ptr != e) return std::nullopt;
    return v;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Strict YYYY-MM-DD.
inline std::optional<std::int64_t> parse_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto digits = [&](size_t a, size_t b) -> std::optional<std::int64_t> {
        std::int64_t v = 0;
        for (size_t i = a; i < b; ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    auto y = digits(0, 4), m = digits(5, 7), d = digits(8, 10);
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1 || *d > 31) return std::nullopt;
    return days_from_civil(*y, static_cast<unsigned>(*m), static_cast<unsigned>(*d));
}

inline void write_file(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) raise(errc::parse_error, "cannot write " + path);
    for (size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << quote_field(header[c]);
    out << '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << quote_field(row[c]);
        out << '\n';
    }
}

} // namespace taukit::csv
