#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "rtstab/config.hpp"
#include "rtstab/csvio.hpp"
#include "rtstab/runner.hpp"

using namespace rtstab;
namespace fs = std::filesystem;

namespace {

json reference_json() {
    return json{{"fluid",
                 {{"g", 1.0},
                  {"m", 1.0},
                  {"ell", 1.0},
                  {"rho0_minus", 1.0},
                  {"law_minus", {{"kind", "isothermal"}, {"K", 2.0}}},
                  {"law_plus", {{"kind", "isothermal"}, {"K", 1.0}}}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rtstab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("shortest round-trip float formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(-1.5e-7) == "-1.5e-07");
    const double v = 1.8152989012345678;
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("config parsing: defaults and reference values") {
    const auto rc = parse_config(reference_json());
    CHECK(rc.fluid.g == 1.0);
    CHECK(rho0_plus(rc.fluid) == doctest::Approx(2.0));
    CHECK(rc.grid.n_lower == 256);
    CHECK(rc.grid.n_upper == 256);
    CHECK(rc.grid.quad_order == 4);
    CHECK(rc.grid.grading == Grading::uniform);
    CHECK(rc.seed == 1);
}

TEST_CASE("config parsing: errors name the offending key path") {
    auto j = reference_json();
    j["fluid"].erase("g");
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("fluid.g"), ConfigError);

    j = reference_json();
    j["fluid"]["law_minus"] = {{"kind", "polytropic"}, {"K", 1.0}, {"gamma", 0.5}};
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("gamma"), ConfigError);

    j = reference_json();
    j["fluid"]["law_plus"]["gamma"] = 1.4;  // isothermal law must not carry gamma
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("gamma"), ConfigError);

    j = reference_json();
    j["turbulence"] = true;
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("unknown key"), ConfigError);

    j = reference_json();
    j["grid"] = {{"grading", "spline"}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = reference_json();
    j["evolve"] = {{"t_end", 1.0}};
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("modes"), ConfigError);
}

TEST_CASE("wavenumber lists: linear and logarithmic spacing") {
    DispersionParams p;
    p.xi_min = 1.0;
    p.xi_max = 100.0;
    p.xi_count = 100;
    const auto lin = wavenumber_list(p);
    CHECK(lin.size() == 100);
    CHECK(lin.front() == 1.0);
    CHECK(lin.back() == 100.0);
    CHECK(lin[1] == doctest::Approx(2.0));
    p.log_spacing = true;
    p.xi_count = 3;
    const auto lg = wavenumber_list(p);
    CHECK(lg[1] == doctest::Approx(10.0));
}

TEST_CASE("steady command: CSV layout with one-sided interface rows") {
    auto j = reference_json();
    j["steady"] = {{"samples", 32}};
    const auto rc = parse_config(j);
    const auto dir = fresh_dir("steady");
    const auto arts = run_command("steady", rc, dir.string());
    REQUIRE(arts.outputs.size() == 1);
    const std::string text = slurp(arts.outputs[0]);
    CHECK(text.rfind("x3,rho0,drho0,side", 0) == 0);
    CHECK(text.find("0,1,-0.5,lower") != std::string::npos);   // rho0(0-) = 1
    CHECK(text.find("0,2,-2,upper") != std::string::npos);     // rho0(0+) = 2
}

TEST_CASE("dispersion command: deterministic bytes and manifest rerun") {
    auto j = reference_json();
    j["grid"] = {{"n_lower", 32}, {"n_upper", 32}};
    j["dispersion"] = {{"xi_min", 1.0}, {"xi_max", 10.0}, {"xi_count", 7}};
    j["seed"] = 5;
    const auto rc = parse_config(j);

    const auto d1 = fresh_dir("disp1");
    const auto d2 = fresh_dir("disp2");
    const auto a1 = run_command("dispersion", rc, d1.string());
    const auto a2 = run_command("dispersion", rc, d2.string());
    const std::string csv1 = slurp(d1 / "dispersion.csv");
    CHECK(csv1 == slurp(d2 / "dispersion.csv"));
    CHECK(csv1.rfind("xi,lambda,mu,el_residual,flux_jump,psi0", 0) == 0);
    // one data row per swept wavenumber
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 8);

    const auto manifest = write_manifest(d1.string(), "dispersion", rc.raw, a1, 0.0);
    json m;
    std::ifstream(manifest) >> m;
    CHECK(m.at("command") == "dispersion");
    CHECK(m.at("config_hash").get<std::string>().size() == 16);
    // re-running from the manifest reproduces the results byte for byte
    const auto rc2 = parse_config(m.at("config"));
    const auto d3 = fresh_dir("disp3");
    run_command(m.at("command").get<std::string>(), rc2, d3.string());
    CHECK(csv1 == slurp(d3 / "dispersion.csv"));

    json summary;
    std::ifstream(d1 / "summary.json") >> summary;
    CHECK(summary.contains("C1_hat"));
    CHECK(summary.at("points") == 7);
    CHECK(summary.at("failed_points") == 0);
    CHECK(summary.at("Lambda").at("value").get<double>() > 0.0);
}

TEST_CASE("synth command: trace columns and envelope consistency") {
    auto j = reference_json();
    j["grid"] = {{"n_lower", 48}, {"n_upper", 48}};
    j["synth"] = {{"R2", 4.0},
                  {"R3", 9.0},
                  {"k", 1},
                  {"times", {0.0, 0.5, 1.0}},
                  {"radial_nodes", 12},
                  {"snapshot", {{"extent", 1.0}, {"count", 3}, {"x3", {-0.25, 0.25}}, {"t", 0.5}}}};
    const auto rc = parse_config(j);
    const auto dir = fresh_dir("synth");
    const auto arts = run_command("synth", rc, dir.string());
    REQUIRE(arts.outputs.size() == 2);
    const std::string trace = slurp(dir / "synth_trace.csv");
    CHECK(trace.rfind("t,eta_hk,v_hk,q_hk,lower_env,upper_env", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 4);
    const std::string snap = slurp(dir / "snapshot.csv");
    CHECK(snap.rfind("x1,x2,x3,component,value", 0) == 0);
    // 3 x 3 grid x 2 heights x 3 components
    CHECK(std::count(snap.begin(), snap.end(), '\n') == 1 + 3 * 3 * 2 * 3);
}

TEST_CASE("evolve and illposed commands produce their tables") {
    auto j = reference_json();
    j["grid"] = {{"n_lower", 48}, {"n_upper", 48}};
    j["evolve"] = {{"modes", {{{"xi", {4.0, 0.0}}, {"init", "eigen"}}}},
                   {"t_end", 0.2},
                   {"dt", 1e-3},
                   {"samples", 5}};
    auto rc = parse_config(j);
    const auto dir = fresh_dir("evolve");
    run_command("evolve", rc, dir.string());
    const std::string csv = slurp(dir / "evolve.csv");
    CHECK(csv.rfind("t,energy,drift,l2_v,l2_dtv,fitted_rate", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 5);

    auto j2 = reference_json();
    j2["grid"] = {{"n_lower", 64}, {"n_upper", 64}, {"grading", "geometric"}, {"grading_ratio", 1.08}};
    j2["illposed"] = {{"k", 0}, {"j", 0}, {"alpha", 1.0}, {"T0", 1.0}, {"n_max", 1},
                      {"radial_nodes", 12}};
    const auto rc2 = parse_config(j2);
    const auto dir2 = fresh_dir("illposed");
    run_command("illposed", rc2, dir2.string());
    const std::string icsv = slurp(dir2 / "illposed.csv");
    CHECK(icsv.rfind("n,R_n,init_norm_Hj,final_norm_Hk,lambda_min,lambda_max,pass", 0) == 0);
    json rep;
    std::ifstream(dir2 / "illposed_report.json") >> rep;
    CHECK(rep.at("entries").size() == 1);
}

#ifdef RTSTAB_BIN
TEST_CASE("binary: usage errors exit 2, steady run exits 0") {
    const std::string bin = RTSTAB_BIN;
    const int bad = std::system((bin + " frobnicate >/dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(bad) == 2);
    const int none = std::system((bin + " >/dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(none) == 2);

    const auto dir = fresh_dir("cli_steady");
    const auto cfgfile = dir / "cfg.json";
    std::ofstream(cfgfile) << reference_json().dump();
    const int ok = std::system(
        (bin + " steady " + cfgfile.string() + " --out " + dir.string() + " >/dev/null 2>&1")
            .c_str());
    CHECK(WEXITSTATUS(ok) == 0);
    CHECK(fs::exists(dir / "steady.csv"));
    CHECK(fs::exists(dir / "manifest.json"));

    // computation/config failures exit 1
    auto broken = reference_json();
    broken["fluid"]["g"] = -1.0;
    const auto badfile = dir / "bad.json";
    std::ofstream(badfile) << broken.dump();
    const int err = std::system(
        (bin + " steady " + badfile.string() + " --out " + dir.string() + " >/dev/null 2>&1")
            .c_str());
    CHECK(WEXITSTATUS(err) == 1);
}
#endif

TEST_CASE("CSV writer: empty results leave a header-only file") {
    const auto dir = fresh_dir("csv_empty");
    const auto path = (dir / "empty.csv").string();
    { CsvWriter csv(path, {"a", "b", "c"}); }
    CHECK(slurp(path) == "a,b,c\n");
}
