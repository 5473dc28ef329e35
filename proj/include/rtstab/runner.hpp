#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rtstab/config.hpp"
#include "rtstab/csvio.hpp"
#include "rtstab/dispersion.hpp"
#include "rtstab/evolution.hpp"
#include "rtstab/illposed.hpp"
#include "rtstab/parallel.hpp"
#include "rtstab/synthesis.hpp"

namespace rtstab {

inline constexpr const char* kVersion = "0.1.0";

struct RunArtifacts {
    std::vector<std::string> outputs;
};

namespace run_detail {

inline std::string side_name(Side s) { return s == Side::lower ? "lower" : "upper"; }

inline std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace run_detail

inline RunArtifacts run_steady(const RunConfig& rc, const std::string& outdir) {
    const SteadyProfile prof(rc.fluid);
    const std::string file = run_detail::path_join(outdir, "steady.csv");
    CsvWriter csv(file, {"x3", "rho0", "drho0", "side"});
    const double total = rc.fluid.m + rc.fluid.ell;
    int n_lower = std::max(2, static_cast<int>(std::lround(rc.steady.samples * rc.fluid.m / total)));
    int n_upper = std::max(2, rc.steady.samples - n_lower);
    for (int i = 0; i < n_lower; ++i) {
        const double x = -rc.fluid.m + rc.fluid.m * i / (n_lower - 1.0);
        csv.row({format_double(x), format_double(prof.density(x, Side::lower)),
                 format_double(prof.density_gradient(x, Side::lower)), "lower"});
    }
    for (int i = 0; i < n_upper; ++i) {
        const double x = rc.fluid.ell * i / (n_upper - 1.0);
        csv.row({format_double(x), format_double(prof.density(x, Side::upper)),
                 format_double(prof.density_gradient(x, Side::upper)), "upper"});
    }
    return {{file}};
}

inline std::vector<double> wavenumber_list(const DispersionParams& p) {
    std::vector<double> xs(p.xi_count);
    for (int i = 0; i < p.xi_count; ++i) {
        const double f = p.xi_count == 1 ? 0.0 : static_cast<double>(i) / (p.xi_count - 1);
        xs[i] = p.log_spacing ? p.xi_min * std::pow(p.xi_max / p.xi_min, f)
                              : p.xi_min + (p.xi_max - p.xi_min) * f;
    }
    return xs;
}

inline RunArtifacts run_dispersion(const RunConfig& rc, const std::string& outdir) {
    const SteadyProfile prof(rc.fluid);
    const VerticalGrid grid(rc.fluid.m, rc.fluid.ell, rc.grid);
    const auto xis = wavenumber_list(rc.dispersion);
    const auto curve = sweep(prof, grid, xis, rc.dispersion.fit_window_min);

    const std::string file = run_detail::path_join(outdir, "dispersion.csv");
    CsvWriter csv(file, {"xi", "lambda", "mu", "el_residual", "flux_jump", "psi0"});
    int failed = 0, unstable = 0;
    for (const auto& p : curve.points) {
        if (p.failed) {
            ++failed;
            continue;
        }
        if (p.is_unstable) ++unstable;
        csv.row({format_double(p.wavenumber), format_double(p.growth_rate),
                 format_double(p.eigenvalue), format_double(p.el_residual),
                 format_double(p.flux_jump), format_double(p.interface_value)});
    }

    json summary;
    summary["C1_hat"] = curve.C1_hat;
    summary["C2_hat"] = curve.C2_hat;
    summary["fit_window_min"] = curve.fit_window_min;
    summary["Lambda"] = {{"R", rc.dispersion.xi_max},
                         {"value", curve.max_growth_below(rc.dispersion.xi_max)}};
    summary["points"] = curve.points.size();
    summary["unstable_points"] = unstable;
    summary["failed_points"] = failed;
    const std::string sfile = run_detail::path_join(outdir, "summary.json");
    std::ofstream(sfile) << summary.dump(2) << '\n';
    return {{file, sfile}};
}

inline RunArtifacts run_synth(const RunConfig& rc, const std::string& outdir) {
    const SteadyProfile prof(rc.fluid);
    const VerticalGrid grid(rc.fluid.m, rc.fluid.ell, rc.grid);
    FrequencyProfile fp;
    fp.R2 = rc.synth.R2;
    fp.R3 = rc.synth.R3;
    fp.amplitude = rc.synth.amplitude;
    fp.radial_nodes = rc.synth.radial_nodes;
    const ModeBank bank(prof, grid, fp, std::max(rc.synth.order, 1));
    const auto tr = hk_norm_trace(bank, rc.synth.order, rc.synth.times);

    const std::string file = run_detail::path_join(outdir, "synth_trace.csv");
    CsvWriter csv(file, {"t", "eta_hk", "v_hk", "q_hk", "lower_env", "upper_env"});
    const double eta0 = std::sqrt(tr.eta_sq[0]);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        csv.row({format_double(t), format_double(std::sqrt(tr.eta_sq[i])),
                 format_double(std::sqrt(tr.v_sq[i])), format_double(std::sqrt(tr.q_sq[i])),
                 format_double(eta0 * std::exp(tr.growth_min * t)),
                 format_double(eta0 * std::exp(tr.growth_max * t))});
    }
    RunArtifacts out{{file}};

    if (rc.synth.snapshot) {
        const auto& sp = *rc.synth.snapshot;
        const Unknown u = sp.unknown == "eta" ? Unknown::displacement
                          : sp.unknown == "v" ? Unknown::velocity
                                              : Unknown::compression;
        const std::string sfile = run_detail::path_join(outdir, "snapshot.csv");
        CsvWriter scsv(sfile, {"x1", "x2", "x3", "component", "value"});
        for (int i = 0; i < sp.count; ++i)
            for (int j = 0; j < sp.count; ++j)
                for (double x3 : sp.x3) {
                    SnapshotPoint pt;
                    pt.x1 = sp.count == 1 ? 0.0 : -sp.extent + 2.0 * sp.extent * i / (sp.count - 1);
                    pt.x2 = sp.count == 1 ? 0.0 : -sp.extent + 2.0 * sp.extent * j / (sp.count - 1);
                    pt.x3 = x3;
                    pt.side = x3 < 0.0 ? Side::lower : Side::upper;
                    const auto v = field_snapshot(bank, u, sp.t, pt);
                    if (u == Unknown::compression) {
                        scsv.row({format_double(pt.x1), format_double(pt.x2), format_double(x3),
                                  "q", format_double(v[0])});
                    } else {
                        const char* base = u == Unknown::displacement ? "eta" : "v";
                        for (int cc = 0; cc < 3; ++cc)
                            scsv.row({format_double(pt.x1), format_double(pt.x2),
                                      format_double(x3), base + std::to_string(cc + 1),
                                      format_double(v[cc])});
                    }
                }
        out.outputs.push_back(sfile);
    }
    return out;
}

inline RunArtifacts run_evolve(const RunConfig& rc, const std::string& outdir) {
    const SteadyProfile prof(rc.fluid);
    const VerticalGrid grid(rc.fluid.m, rc.fluid.ell, rc.grid);
    const EvolutionOperator op(prof, grid);

    double band = rc.evolve.R;
    std::vector<double> mags;
    for (const auto& m : rc.evolve.modes) mags.push_back(std::hypot(m.xi[0], m.xi[1]));
    for (double m : mags) band = std::max(band, m);

    // Lambda(R) over the evolved frequencies themselves plus the band edge
    std::vector<double> sweep_xis;
    for (double m : mags)
        if (m > 0.0) sweep_xis.push_back(m);
    sweep_xis.push_back(band);
    const auto curve = sweep(prof, grid, sweep_xis);
    const double Lambda_R = curve.max_growth_below(band);

    MultiState ms;
    for (const auto& m : rc.evolve.modes) {
        if (m.init == "eigen") {
            const double mag = std::hypot(m.xi[0], m.xi[1]);
            if (!(mag > 0.0)) throw ConfigError("evolve.modes[].xi: eigen init needs |xi| > 0");
            ms.push_back(eigenmode_state(op, solve_mode(prof, grid, mag), m.xi));
        } else {
            ms.push_back(random_state(grid, m.xi, m.seed ^ rc.seed));
        }
    }

    IntegrateOptions opt;
    opt.t_end = rc.evolve.t_end;
    opt.dt = rc.evolve.dt;
    opt.samples = rc.evolve.samples;
    opt.bound_rate = Lambda_R;
    opt.growth_guard = Lambda_R;
    const auto traj = integrate(op, std::move(ms), opt);

    const std::string file = run_detail::path_join(outdir, "evolve.csv");
    CsvWriter csv(file, {"t", "energy", "drift", "l2_v", "l2_dtv", "fitted_rate"});
    const double e0 = traj.ledger.samples.front().total;
    double drift = 0.0;
    for (const auto& s : traj.ledger.samples) {
        drift = std::max(drift, std::abs(s.total - e0) / (1.0 + std::abs(e0)));
        csv.row({format_double(s.t), format_double(s.total), format_double(drift),
                 format_double(std::sqrt(s.l2_v)), format_double(std::sqrt(s.l2_dtv)),
                 format_double(traj.fitted_rate)});
    }

    json summary;
    summary["fitted_rate"] = traj.fitted_rate;
    summary["Lambda"] = {{"R", band}, {"value", Lambda_R}};
    summary["rate_ceiling"] = 2.0 * Lambda_R;
    summary["rate_within_ceiling"] = growth_rate_check(traj, Lambda_R).within;
    summary["energy_drift"] = traj.ledger.drift();
    const std::string sfile = run_detail::path_join(outdir, "evolve_summary.json");
    std::ofstream(sfile) << summary.dump(2) << '\n';
    return {{file, sfile}};
}

inline RunArtifacts run_illposed(const RunConfig& rc, const std::string& outdir) {
    const SteadyProfile prof(rc.fluid);
    const VerticalGrid grid(rc.fluid.m, rc.fluid.ell, rc.grid);
    const auto rep = verify_sequence(prof, grid, rc.illposed);

    const std::string file = run_detail::path_join(outdir, "illposed.csv");
    CsvWriter csv(file,
                  {"n", "R_n", "init_norm_Hj", "final_norm_Hk", "lambda_min", "lambda_max",
                   "pass"});
    json entries = json::array();
    for (const auto& e : rep.entries) {
        csv.row({std::to_string(e.n), format_double(e.annulus_left),
                 format_double(e.initial_norm), format_double(e.final_norm),
                 format_double(e.growth_min), format_double(e.growth_max),
                 e.pass ? "1" : "0"});
        entries.push_back({{"n", e.n},
                           {"R", e.annulus_left},
                           {"amplitude", e.amplitude},
                           {"init_norm", e.initial_norm},
                           {"final_norm", e.final_norm},
                           {"final_v_norm", e.final_v_norm},
                           {"lambda_min", e.growth_min},
                           {"lambda_max", e.growth_max},
                           {"pass", e.pass},
                           {"note", e.note}});
    }
    json rep_json;
    rep_json["spec"] = {{"k", rc.illposed.obs_order},
                        {"j", rc.illposed.data_order},
                        {"alpha", rc.illposed.amplitude_target},
                        {"T0", rc.illposed.time_target},
                        {"n_max", rc.illposed.seq_length}};
    rep_json["entries"] = entries;
    rep_json["all_pass"] = rep.all_pass;
    const std::string jfile = run_detail::path_join(outdir, "illposed_report.json");
    std::ofstream(jfile) << rep_json.dump(2) << '\n';
    return {{file, jfile}};
}

inline std::string write_manifest(const std::string& outdir, const std::string& command,
                                  const json& config, const RunArtifacts& artifacts,
                                  double seconds) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["config"] = config;
    m["config_hash"] = fnv1a_hex(config.dump());
    m["outputs"] = artifacts.outputs;
    m["duration_seconds"] = seconds;
    m["threads"] = worker_count();
    const std::string file = run_detail::path_join(outdir, "manifest.json");
    std::ofstream(file) << m.dump(2) << '\n';
    return file;
}

/// Dispatch used by both the CLI and the manifest rerun path.
inline RunArtifacts run_command(const std::string& command, const RunConfig& rc,
                                const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    if (command == "steady") return run_steady(rc, outdir);
    if (command == "dispersion") return run_dispersion(rc, outdir);
    if (command == "synth") return run_synth(rc, outdir);
    if (command == "evolve") return run_evolve(rc, outdir);
    if (command == "illposed") return run_illposed(rc, outdir);
    throw std::invalid_argument("unknown command: " + command);
}

}  // namespace rtstab
