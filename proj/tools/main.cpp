// Command-line front end: config ingestion, command dispatch and CSV/JSON
// export with a reproducibility manifest.
//
// Exit codes: 0 success, 1 computation failure, 2 usage error.

#include <chrono>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rtstab/runner.hpp"
#include "rtstab/selftest.hpp"

namespace {

int fail_with(const std::string& stage, const std::exception& e) {
    rtstab::json err;
    err["error"] = e.what();
    err["stage"] = stage;
    std::cerr << err.dump() << std::endl;
    return 1;
}

int run_and_manifest(const std::string& command, const rtstab::RunConfig& rc,
                     const std::string& outdir) {
    const auto t0 = std::chrono::steady_clock::now();
    auto artifacts = rtstab::run_command(command, rc, outdir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto manifest = rtstab::write_manifest(outdir, command, rc.raw, artifacts, secs);
    artifacts.outputs.push_back(manifest);
    for (const auto& f : artifacts.outputs) std::cout << f << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear-stability toolkit for the two-fluid compressible "
                 "Rayleigh-Taylor problem"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string config_path, outdir = ".", manifest_path;
    double xi_min = -1.0, xi_max = -1.0;
    int xi_count = -1;
    bool xi_log = false;

    auto add_config_cmd = [&](const std::string& name, const std::string& desc) {
        auto* cmd = app.add_subcommand(name, desc);
        cmd->add_option("config", config_path, "JSON configuration file")->required();
        cmd->add_option("--out", outdir, "output directory (default: current)");
        return cmd;
    };

    auto* steady = add_config_cmd("steady", "tabulate the hydrostatic density profile");
    auto* dispersion =
        add_config_cmd("dispersion", "growth-rate curve lambda(|xi|) over a frequency sweep");
    dispersion->add_option("--xi-min", xi_min, "lowest wavenumber");
    dispersion->add_option("--xi-max", xi_max, "highest wavenumber");
    dispersion->add_option("--xi-count", xi_count, "number of sweep points");
    dispersion->add_flag("--log", xi_log, "logarithmic wavenumber spacing");
    auto* synth = add_config_cmd("synth", "Fourier synthesis: H^k norm traces and snapshots");
    auto* evolve = add_config_cmd("evolve", "integrate the linearized system per frequency");
    auto* illposed = add_config_cmd("illposed", "Hadamard ill-posedness demonstration sequence");

    auto* selftest = app.add_subcommand("selftest", "run the full verification suite");
    selftest->add_option("--out", outdir, "output directory for the report");

    auto* rerun = app.add_subcommand("rerun", "repeat a run recorded in a manifest");
    rerun->add_option("manifest", manifest_path, "manifest.json from a previous run")->required();
    rerun->add_option("--out", outdir, "output directory (default: current)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (selftest->parsed()) {
            const auto results = rtstab::run_acceptance(&std::cout);
            std::filesystem::create_directories(outdir);
            rtstab::json rep = rtstab::json::array();
            for (const auto& r : results)
                rep.push_back({{"id", r.id},
                               {"name", r.name},
                               {"pass", r.pass},
                               {"detail", r.detail},
                               {"seconds", r.seconds}});
            std::ofstream(std::filesystem::path(outdir) / "selftest_report.json")
                << rep.dump(2) << '\n';
            return rtstab::acceptance_passed(results) ? 0 : 1;
        }

        if (rerun->parsed()) {
            std::ifstream in(manifest_path);
            if (!in) throw rtstab::ConfigError("cannot open manifest " + manifest_path);
            rtstab::json m;
            in >> m;
            if (!m.contains("command") || !m.contains("config"))
                throw rtstab::ConfigError("manifest missing command/config");
            const auto rc = rtstab::parse_config(m.at("config"));
            return run_and_manifest(m.at("command").get<std::string>(), rc, outdir);
        }

        auto rc = rtstab::load_config(config_path);
        std::string command;
        if (steady->parsed()) command = "steady";
        if (dispersion->parsed()) {
            command = "dispersion";
            if (xi_min > 0) rc.dispersion.xi_min = xi_min;
            if (xi_max > 0) rc.dispersion.xi_max = xi_max;
            if (xi_count > 0) rc.dispersion.xi_count = xi_count;
            if (xi_log) rc.dispersion.log_spacing = true;
            // echo the effective sweep back into the manifest config
            rc.raw["dispersion"] = {{"xi_min", rc.dispersion.xi_min},
                                    {"xi_max", rc.dispersion.xi_max},
                                    {"xi_count", rc.dispersion.xi_count},
                                    {"log", rc.dispersion.log_spacing}};
            if (rc.dispersion.fit_window_min)
                rc.raw["dispersion"]["fit_window_min"] = *rc.dispersion.fit_window_min;
        }
        if (synth->parsed()) command = "synth";
        if (evolve->parsed()) command = "evolve";
        if (illposed->parsed()) command = "illposed";
        return run_and_manifest(command, rc, outdir);
    } catch (const rtstab::ConfigError& e) {
        return fail_with("config", e);
    } catch (const std::invalid_argument& e) {
        return fail_with("setup", e);
    } catch (const std::exception& e) {
        return fail_with("compute", e);
    }
}
