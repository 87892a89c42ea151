#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "rydsim/config.hpp"
#include "rydsim/presets.hpp"
#include "rydsim/pulse.hpp"
#include "rydsim/run.hpp"
#include "rydsim/units.hpp"

using namespace rydsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_quench() {
    return {
        {"experiment", "quench"},
        {"model", {{"n_atoms", 5}, {"spacing_um", 5.74}, {"v_nn_mhz", 24.0}}},
        {"backend", "exact_constrained"},
        {"schedule",
         {{"type", "constant"},
          {"omega_mhz", 2.0},
          {"delta_mhz", 0.0},
          {"duration_us", 0.3},
          {"initial", "crystal"}}},
        {"numerics", {{"dt_us", 0.005}, {"sample_dt_us", 0.05}}},
        {"sampling", {{"n_shots", 200}, {"seed", 41}}},
    };
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("rydsim_cli_" + tag);
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RYDSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

}  // namespace

TEST_CASE("config rejects unknown keys with their paths", "[cli]") {
    json j = small_quench();
    j["spacingg"] = 1.0;
    j["schedule"]["omga_mhz"] = 2.0;
    try {
        parse_config(j);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("spacingg") != std::string::npos);
        CHECK(msg.find("schedule.omga_mhz") != std::string::npos);
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("config reports missing and mistyped fields", "[cli]") {
    json j = small_quench();
    j["model"].erase("n_atoms");
    j["schedule"]["duration_us"] = "long";
    try {
        parse_config(j);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("model.n_atoms") != std::string::npos);
        CHECK(msg.find("schedule.duration_us") != std::string::npos);
    }
}

TEST_CASE("stochastic runs insist on a seed", "[cli]") {
    json j = small_quench();
    j["sampling"].erase("seed");
    REQUIRE_THROWS_MATCHES(parse_config(j), ValidationError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("seed")));
    j["sampling"]["n_shots"] = 0;  // deterministic run: no seed needed
    REQUIRE_NOTHROW(parse_config(j));
}

TEST_CASE("backend size caps give resource errors", "[cli]") {
    json j = small_quench();
    j["model"]["n_atoms"] = 21;
    j["backend"] = "exact_full";
    j["schedule"]["initial"] = "all_g";
    j["sampling"] = {{"n_shots", 0}};
    REQUIRE_THROWS_AS(parse_config(j), ResourceError);
    j["model"]["n_atoms"] = 29;
    j["backend"] = "exact_constrained";
    REQUIRE_THROWS_AS(parse_config(j), ResourceError);
    j["model"]["n_atoms"] = 64;
    j["backend"] = "mps";
    REQUIRE_THROWS_AS(parse_config(j), ResourceError);
    try {
        j["model"]["n_atoms"] = 29;
        j["backend"] = "exact_constrained";
        parse_config(j);
    } catch (const ResourceError& e) {
        CHECK(e.exit_code() == 3);
    }
}

TEST_CASE("thermal needs exactly one temperature handle", "[cli]") {
    json j = {
        {"experiment", "thermal"},
        {"model", {{"n_atoms", 13}}},
        {"ensemble",
         {{"delta_mhz", 14.0}, {"v1_mhz", 24.0}, {"v2_mhz", 0.38}, {"beta_times_delta", 3.44}}},
    };
    REQUIRE_NOTHROW(parse_config(j));
    j["ensemble"]["target_dressed_walls"] = 4.0;
    REQUIRE_THROWS_AS(parse_config(j), ValidationError);
    j["ensemble"].erase("beta_times_delta");
    j["ensemble"].erase("target_dressed_walls");
    REQUIRE_THROWS_AS(parse_config(j), ValidationError);
}

TEST_CASE("reconstruct requires detection, shots, and a seed", "[cli]") {
    json good = {
        {"experiment", "reconstruct"},
        {"model", {{"n_atoms", 9}}},
        {"reconstruction",
         {{"delta_mhz", 14.0}, {"v1_mhz", 24.0}, {"v2_mhz", 0.38}, {"beta_times_delta", 3.44}}},
        {"detection", {{"f_g", 0.99}, {"f_r", 0.93}}},
        {"sampling", {{"n_shots", 500}, {"seed", 7}}},
    };
    REQUIRE_NOTHROW(parse_config(good));
    json j = good;
    j.erase("detection");
    REQUIRE_THROWS_AS(parse_config(j), ValidationError);
    j = good;
    j["sampling"]["n_shots"] = 0;
    REQUIRE_THROWS_AS(parse_config(j), ValidationError);
    j = good;
    j["detection"]["f_r"] = 0.4;  // fidelity below the channel's sensible range
    REQUIRE_THROWS_AS(parse_config(j), ValidationError);
}

TEST_CASE("every preset validates and the required set is present", "[cli]") {
    const auto names = preset_names();
    REQUIRE(names.size() >= 9);
    std::set<std::string> have(names.begin(), names.end());
    REQUIRE(have.size() == names.size());
    for (const char* need :
         {"fig1d_rabi", "fig3_sweep7", "fig5_z2_51", "fig6_quench9", "fig6_quench25",
          "fig6_quench51", "ed9_variational", "ed10_quench25", "thermal_51", "reconstruct_demo"})
        CHECK(have.count(need) == 1);
    for (const auto& name : names) {
        INFO("preset " << name);
        const ExperimentConfig cfg = parse_config(preset_config(name));
        CHECK(cfg.echo == preset_config(name));
        CHECK(!preset_description(name).empty());
    }
    REQUIRE_THROWS_AS(preset_config("no_such_preset"), ValidationError);
}

TEST_CASE("schedule settings are plain MHz and microseconds", "[cli]") {
    ScheduleConfig s;
    s.type = "cubic";
    s.omega_mhz = 2.0;
    s.a = 2.0;
    s.b = 1.2;
    s.c = 0.5;
    s.t0_us = 1.5;
    s.delta_min_mhz = -10.0;
    s.delta_max_mhz = 10.0;
    s.duration_us = 3.0;
    const PulseSchedule ps = detail::schedule_from_config(s);
    CHECK(ps.omega(1.0) == Catch::Approx(mhz_to_rad_us(2.0)));
    CHECK(ps.delta(1.5) == Catch::Approx(mhz_to_rad_us(0.5)));
    // one-sided slope at the center: d(delta)/dt = (3 a u^2 + b) in MHz/us
    const double h = 1e-6;
    const double slope = (ps.delta(1.5 + h) - ps.delta(1.5)) / h;
    CHECK(slope == Catch::Approx(mhz_to_rad_us(1.2)).epsilon(1e-3));
    CHECK(ps.delta(0.0) == Catch::Approx(mhz_to_rad_us(-8.05)));  // a*u^3 + b*u + c at u=-1.5
    ScheduleConfig clipped = s;
    clipped.delta_min_mhz = -5.0;
    CHECK(detail::schedule_from_config(clipped).delta(0.0) ==
          Catch::Approx(mhz_to_rad_us(-5.0)));  // held at the floor

    ScheduleConfig t = s;
    t.type = "tangent";
    t.a = 3.0;
    t.b = 0.9;  // rate in 1/us, stays unscaled
    t.c = 0.0;
    const PulseSchedule pt = detail::schedule_from_config(t);
    CHECK(pt.delta(1.5) == Catch::Approx(0.0).margin(1e-12));
    const double slope_t = (pt.delta(1.5 + h) - pt.delta(1.5)) / h;
    CHECK(slope_t == Catch::Approx(mhz_to_rad_us(3.0) * 0.9).epsilon(1e-3));
}

TEST_CASE("identical config and seed reproduce outputs byte for byte", "[cli]") {
    const json j = small_quench();
    const fs::path d1 = fresh_dir("rep1"), d2 = fresh_dir("rep2");
    run_experiment(parse_config(j), d1);
    run_experiment(parse_config(j), d2);
    CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
    CHECK(slurp(d1 / "shots.txt") == slurp(d2 / "shots.txt"));
    json s1 = json::parse(slurp(d1 / "summary.json"));
    json s2 = json::parse(slurp(d2 / "summary.json"));
    s1.erase("wall_clock_s");
    s2.erase("wall_clock_s");
    CHECK(s1 == s2);
    CHECK(s1["config"] == j);  // echo survives the round trip losslessly

    // a different seed moves the shots but not the deterministic trajectory
    json k = j;
    k["sampling"]["seed"] = 42;
    const fs::path d3 = fresh_dir("rep3");
    run_experiment(parse_config(k), d3);
    CHECK(slurp(d1 / "trajectory.csv") == slurp(d3 / "trajectory.csv"));
    CHECK(slurp(d1 / "shots.txt") != slurp(d3 / "shots.txt"));
    fs::remove_all(d1);
    fs::remove_all(d2);
    fs::remove_all(d3);
}

TEST_CASE("shot files are one configuration per line", "[cli]") {
    const json j = small_quench();
    const fs::path d = fresh_dir("shots");
    run_experiment(parse_config(j), d);
    const std::string text = slurp(d / "shots.txt");
    std::size_t lines = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        const std::size_t nl = text.find('\n', pos);
        REQUIRE(nl != std::string::npos);
        const std::string line = text.substr(pos, nl - pos);
        REQUIRE(line.size() == 5);
        for (char ch : line) REQUIRE((ch == '0' || ch == '1'));
        ++lines;
        pos = nl + 1;
    }
    CHECK(lines == 200);
    fs::remove_all(d);
}

TEST_CASE("a failing run leaves no partial outputs", "[cli]") {
    json j = small_quench();
    j["backend"] = "mps";
    j["numerics"]["entropy_cuts"] = {9};  // outside [1, n-1]: rejected mid-run
    const fs::path d = fresh_dir("fail");
    REQUIRE_THROWS_AS(run_experiment(parse_config(j), d), ValidationError);
    CHECK(!fs::exists(d / "trajectory.csv"));
    CHECK(!fs::exists(d / "summary.json"));
}

TEST_CASE("command line maps errors onto exit codes", "[cli]") {
    const fs::path d = fresh_dir("cli_bin");
    fs::create_directories(d);
    CHECK(run_cli("") == 2);                                 // missing subcommand
    CHECK(run_cli("quench") == 2);                           // no config or preset
    CHECK(run_cli("quench --preset thermal_51") == 2);       // wrong subcommand for kind
    CHECK(run_cli("presets --preset nope") == 2);            // unknown preset
    CHECK(run_cli("rabi --config /nonexistent_config.json") == 3);  // unreadable file
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("presets") == 0);

    const fs::path bad = d / "bad.json";
    write_text_file(bad, "{\"experiment\": \"quench\",");
    CHECK(run_cli("quench --config " + bad.string()) == 2);  // parse error

    json big = small_quench();
    big["model"]["n_atoms"] = 29;
    big["sampling"] = {{"n_shots", 0}};
    const fs::path cap = d / "cap.json";
    write_text_file(cap, big.dump());
    CHECK(run_cli("quench --config " + cap.string()) == 3);  // over the basis cap

    // a run driven from a config file, plus a --seed override
    json ok = small_quench();
    ok["sampling"].erase("seed");
    const fs::path okp = d / "ok.json";
    write_text_file(okp, ok.dump());
    CHECK(run_cli("quench --config " + okp.string() + " --out " + (d / "o1").string()) == 2);
    CHECK(run_cli("quench --config " + okp.string() + " --seed 41 --out " +
                  (d / "o1").string()) == 0);
    const json s = json::parse(slurp(d / "o1" / "summary.json"));
    CHECK(s["config"]["sampling"]["seed"] == 41);
    fs::remove_all(d);
}
