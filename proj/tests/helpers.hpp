#pragma once

// Shared test plumbing: error-code capture, scratch directories, and a
// subprocess harness for the command line tool.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "taukit/error.hpp"

namespace testutil {

template <class F>
taukit::errc expect_error(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const taukit::tau_error& e) {
        return e.code();
    }
    FAIL("expected a tau_error, none thrown");
    return taukit::errc::invalid_argument; // unreachable
}

// Scratch directory removed on scope exit.
struct temp_dir {
    std::filesystem::path path;

    temp_dir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "taukit-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path = tmpl;
    }
    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    temp_dir(const temp_dir&) = delete;
    temp_dir& operator=(const temp_dir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

#ifdef TAUKIT_CLI_PATH

struct cli_result {
    int exit_code = -1;
    std::string output; // stdout and stderr interleaved
};

inline cli_result run_cli(const std::string& args) {
    const std::string cmd = std::string(TAUKIT_CLI_PATH) + " " + args + " 2>&1";
    cli_result res;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return res;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) res.output.append(buf, n);
    const int status = pclose(p);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

#endif

} // namespace testutil
