#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "scle/commands.hpp"
#include "scle/error.hpp"

using namespace scle;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    const auto d = fs::temp_directory_path() / ("scle_cmd_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

RunConfig small_run(const std::string& out, const std::string& beta = "1.0", double coupling = 1.0) {
    auto cfg = parse_config(R"({"model": {"name": "pure_dephasing"},
        "bath": {"kind": "ohmic_debye", "coupling": )" + std::to_string(coupling) +
                            R"(, "cutoff": 0.5, "beta": )" + beta + R"(},
        "grid": {"dt": 0.05, "t_end": 2.0}, "trajectories": 300, "block_size": 40,
        "observables": ["sx", "sy", "coupling_energy"]})");
    cfg.output_path = (scratch() / out).string();
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<double> fields(const std::string& line) {
    std::vector<double> v;
    std::istringstream is(line);
    for (std::string f; std::getline(is, f, ',');) v.push_back(std::stod(f));
    return v;
}

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("run writes a csv with one row per full step") {
    std::ostringstream log;
    const auto cfg = small_run("a");
    REQUIRE(cmd_run(cfg, {1, std::nullopt, false, std::nullopt}, log) == kExitOk);
    const auto rows = lines(slurp(cfg.output_path + ".csv"));
    REQUIRE(rows.size() == cfg.grid.n_full() + 1);
    CHECK(rows[0] ==
          "t,Re_sx,Im_sx,stderr_sx,Re_sy,Im_sy,stderr_sy,Re_coupling_energy,Im_coupling_energy,"
          "stderr_coupling_energy");
    const auto first = fields(rows[1]);
    CHECK(first[0] == 0.0);
    CHECK(first[1] == 1.0);
    CHECK(fields(rows.back())[0] == doctest::Approx(2.0));
    CHECK(fs::exists(cfg.output_path + ".json"));

    // seed override and worker count
    auto other = cfg;
    other.output_path += "_b";
    REQUIRE(cmd_run(other, {2, std::nullopt, false, std::nullopt}, log) == kExitOk);
    CHECK(slurp(other.output_path + ".csv") == slurp(cfg.output_path + ".csv"));
    REQUIRE(cmd_run(other, {2, 99, false, std::nullopt}, log) == kExitOk);
    CHECK(slurp(other.output_path + ".csv") != slurp(cfg.output_path + ".csv"));
}

TEST_CASE("stop and resume reproduce the uninterrupted csv") {
    std::ostringstream log;
    const auto whole = small_run("whole");
    REQUIRE(cmd_run(whole, {1, std::nullopt, false, std::nullopt}, log) == kExitOk);
    const auto split = small_run("split");
    REQUIRE(cmd_run(split, {1, std::nullopt, false, 120}, log) == kExitOk);
    CHECK_FALSE(fs::exists(split.output_path + ".csv"));
    CHECK(fs::exists(split.output_path + ".ckpt"));
    REQUIRE(cmd_run(split, {1, std::nullopt, true, std::nullopt}, log) == kExitOk);
    CHECK(slurp(split.output_path + ".csv") == slurp(whole.output_path + ".csv"));

    auto changed = split;
    changed.trajectories = 400;
    CHECK_THROWS_AS(cmd_run(changed, {1, std::nullopt, true, std::nullopt}, log), RunError);
}

TEST_CASE("correlations at zero temperature") {
    std::ostringstream log;
    const auto cfg = small_run("corr", "\"inf\"");
    REQUIRE(cmd_correlations(cfg, log) == kExitOk);
    const auto rows = lines(slurp(cfg.output_path + "_correlations.csv"));
    REQUIRE(rows.size() == cfg.grid.n_half() + 1);
    CHECK(rows[0] == "t,Re_alpha,Im_alpha,Re_alphaT,Im_alphaT,Re_alphaTilde,Im_alphaTilde");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields(rows[i]);
        CHECK(f[1] == f[3]);
        CHECK(f[2] == f[4]);
        CHECK(f[5] == doctest::Approx(0.5 * f[1]));
    }
    CHECK(log.str().find("omega_max sensitivity") != std::string::npos);
}

TEST_CASE("noise check") {
    std::ostringstream log;
    CHECK(cmd_noise_check(small_run("nc0", "1.0", 0.0), 2000, 10, log) == kExitOk);
    CHECK(cmd_noise_check(small_run("nc1"), 4000, 10, log) == kExitOk);
    CHECK(log.str().find("noise-check passed") != std::string::npos);
    // an absurd threshold must fail
    CHECK(cmd_noise_check(small_run("nc2"), 4000, 10, log, 1e-6) == kExitCheckFailed);
    CHECK_THROWS_AS(cmd_noise_check(small_run("nc3"), 1, 10, log), UsageError);
}

}
