#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtstab/grid.hpp"
#include "rtstab/illposed.hpp"
#include "rtstab/steady.hpp"

namespace rtstab {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cfg_detail {

inline void require_keys(const json& j, const std::string& path,
                         const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError(path + "." + item.key() + ": unknown key");
}

inline const json& require(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline double get_number(const json& j, const std::string& path, const std::string& key) {
    return number(require(j, path, key), path + "." + key);
}

inline double get_number_or(const json& j, const std::string& path, const std::string& key,
                            double fallback) {
    return j.contains(key) ? number(j.at(key), path + "." + key) : fallback;
}

inline int get_int_or(const json& j, const std::string& path, const std::string& key,
                      int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
    return v.get<int>();
}

}  // namespace cfg_detail

inline BarotropicLaw parse_law(const json& j, const std::string& path) {
    using namespace cfg_detail;
    require_keys(j, path, {"kind", "K", "gamma"});
    const auto& kind = require(j, path, "kind");
    if (!kind.is_string()) throw ConfigError(path + ".kind: expected a string");
    const std::string k = kind.get<std::string>();
    const double K = get_number(j, path, "K");
    if (k == "isothermal") {
        if (j.contains("gamma"))
            throw ConfigError(path + ".gamma: not accepted for an isothermal law");
        return BarotropicLaw::isothermal(K);
    }
    if (k == "polytropic") {
        const double gamma = get_number(j, path, "gamma");
        if (!(gamma >= 1.0)) throw ConfigError(path + ".gamma: gamma >= 1 required");
        return BarotropicLaw::polytropic(K, gamma);
    }
    throw ConfigError(path + ".kind: expected \"polytropic\" or \"isothermal\"");
}

inline TwoFluidConfig parse_fluid(const json& j, const std::string& path) {
    using namespace cfg_detail;
    require_keys(j, path, {"g", "m", "ell", "rho0_minus", "law_minus", "law_plus"});
    TwoFluidConfig cfg;
    cfg.g = get_number(j, path, "g");
    cfg.m = get_number(j, path, "m");
    cfg.ell = get_number(j, path, "ell");
    cfg.rho0_minus = get_number(j, path, "rho0_minus");
    cfg.law_minus = parse_law(require(j, path, "law_minus"), path + ".law_minus");
    cfg.law_plus = parse_law(require(j, path, "law_plus"), path + ".law_plus");
    cfg.validate();
    return cfg;
}

inline GridSpec parse_grid(const json& j, const std::string& path) {
    using namespace cfg_detail;
    require_keys(j, path, {"n_lower", "n_upper", "grading", "grading_ratio", "quad_order"});
    GridSpec spec;
    spec.n_lower = get_int_or(j, path, "n_lower", 256);
    spec.n_upper = get_int_or(j, path, "n_upper", 256);
    spec.quad_order = get_int_or(j, path, "quad_order", 4);
    if (j.contains("grading")) {
        const auto& g = j.at("grading");
        if (!g.is_string()) throw ConfigError(path + ".grading: expected a string");
        const std::string s = g.get<std::string>();
        if (s == "uniform") {
            spec.grading = Grading::uniform;
        } else if (s == "geometric") {
            spec.grading = Grading::geometric;
            spec.grading_ratio = get_number(j, path, "grading_ratio");
        } else {
            throw ConfigError(path + ".grading: expected \"uniform\" or \"geometric\"");
        }
    } else if (j.contains("grading_ratio")) {
        throw ConfigError(path + ".grading_ratio: requires grading = \"geometric\"");
    }
    return spec;
}

struct DispersionParams {
    double xi_min = 1.0;
    double xi_max = 100.0;
    int xi_count = 100;
    bool log_spacing = false;
    std::optional<double> fit_window_min;
};

struct SteadyParams {
    int samples = 512;
};

struct SnapshotParams {
    std::string unknown = "eta";
    double extent = 2.0;
    int count = 9;
    std::vector<double> x3;
    double t = 0.0;
};

struct SynthParams {
    double R2 = 4.0;
    double R3 = 9.0;
    double amplitude = 1.0;
    int order = 0;  // Sobolev order k
    std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0};
    int radial_nodes = 64;
    std::optional<SnapshotParams> snapshot;
};

struct EvolveModeParams {
    std::array<double, 2> xi{1.0, 0.0};
    std::string init = "eigen";
    std::uint64_t seed = 1;
};

struct EvolveParams {
    std::vector<EvolveModeParams> modes;
    double t_end = 1.0;
    double dt = 1e-3;
    double R = 0.0;  // band radius for Lambda(R); 0 = max |xi| of the modes
    int samples = 33;
};

struct RunConfig {
    TwoFluidConfig fluid;
    GridSpec grid;
    std::uint64_t seed = 1;
    DispersionParams dispersion;
    SteadyParams steady;
    SynthParams synth;
    EvolveParams evolve;
    IllposedDemoSpec illposed;
    json raw;  // resolved config echoed into the manifest
};

inline RunConfig parse_config(const json& j) {
    using namespace cfg_detail;
    require_keys(j, "config",
                 {"fluid", "grid", "seed", "dispersion", "steady", "synth", "evolve",
                  "illposed"});
    RunConfig rc;
    rc.fluid = parse_fluid(require(j, "config", "fluid"), "fluid");
    if (j.contains("grid")) rc.grid = parse_grid(j.at("grid"), "grid");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) throw ConfigError("seed: expected an integer");
        rc.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("dispersion")) {
        const auto& d = j.at("dispersion");
        require_keys(d, "dispersion", {"xi_min", "xi_max", "xi_count", "log", "fit_window_min"});
        rc.dispersion.xi_min = get_number_or(d, "dispersion", "xi_min", rc.dispersion.xi_min);
        rc.dispersion.xi_max = get_number_or(d, "dispersion", "xi_max", rc.dispersion.xi_max);
        rc.dispersion.xi_count = get_int_or(d, "dispersion", "xi_count", rc.dispersion.xi_count);
        if (d.contains("log")) {
            if (!d.at("log").is_boolean()) throw ConfigError("dispersion.log: expected a bool");
            rc.dispersion.log_spacing = d.at("log").get<bool>();
        }
        if (d.contains("fit_window_min"))
            rc.dispersion.fit_window_min = get_number(d, "dispersion", "fit_window_min");
        if (!(rc.dispersion.xi_min > 0.0) || !(rc.dispersion.xi_max >= rc.dispersion.xi_min) ||
            rc.dispersion.xi_count < 1)
            throw ConfigError("dispersion: need 0 < xi_min <= xi_max and xi_count >= 1");
    }
    if (j.contains("steady")) {
        const auto& s = j.at("steady");
        require_keys(s, "steady", {"samples"});
        rc.steady.samples = get_int_or(s, "steady", "samples", rc.steady.samples);
        if (rc.steady.samples < 2) throw ConfigError("steady.samples: need at least 2");
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        require_keys(s, "synth",
                     {"R2", "R3", "amplitude", "k", "times", "radial_nodes", "snapshot"});
        rc.synth.R2 = get_number_or(s, "synth", "R2", rc.synth.R2);
        rc.synth.R3 = get_number_or(s, "synth", "R3", rc.synth.R3);
        rc.synth.amplitude = get_number_or(s, "synth", "amplitude", rc.synth.amplitude);
        rc.synth.order = get_int_or(s, "synth", "k", rc.synth.order);
        rc.synth.radial_nodes = get_int_or(s, "synth", "radial_nodes", rc.synth.radial_nodes);
        if (s.contains("times")) {
            if (!s.at("times").is_array()) throw ConfigError("synth.times: expected an array");
            rc.synth.times.clear();
            for (const auto& t : s.at("times")) rc.synth.times.push_back(number(t, "synth.times[]"));
        }
        if (rc.synth.order < 0 || rc.synth.order > 3)
            throw ConfigError("synth.k: supported Sobolev orders are 0..3");
        if (s.contains("snapshot")) {
            const auto& sn = s.at("snapshot");
            require_keys(sn, "synth.snapshot", {"unknown", "extent", "count", "x3", "t"});
            SnapshotParams sp;
            if (sn.contains("unknown")) {
                const std::string u = sn.at("unknown").get<std::string>();
                if (u != "eta" && u != "v" && u != "q")
                    throw ConfigError("synth.snapshot.unknown: expected eta, v or q");
                sp.unknown = u;
            }
            sp.extent = get_number_or(sn, "synth.snapshot", "extent", sp.extent);
            sp.count = get_int_or(sn, "synth.snapshot", "count", sp.count);
            sp.t = get_number_or(sn, "synth.snapshot", "t", sp.t);
            if (sn.contains("x3")) {
                if (!sn.at("x3").is_array())
                    throw ConfigError("synth.snapshot.x3: expected an array");
                for (const auto& v : sn.at("x3"))
                    sp.x3.push_back(number(v, "synth.snapshot.x3[]"));
            }
            if (sp.x3.empty()) sp.x3 = {-0.5 * rc.fluid.m, 0.0, 0.5 * rc.fluid.ell};
            rc.synth.snapshot = sp;
        }
    }
    if (j.contains("evolve")) {
        const auto& e = j.at("evolve");
        require_keys(e, "evolve", {"modes", "t_end", "dt", "R", "samples"});
        rc.evolve.t_end = get_number_or(e, "evolve", "t_end", rc.evolve.t_end);
        rc.evolve.dt = get_number_or(e, "evolve", "dt", rc.evolve.dt);
        rc.evolve.R = get_number_or(e, "evolve", "R", rc.evolve.R);
        rc.evolve.samples = get_int_or(e, "evolve", "samples", rc.evolve.samples);
        if (e.contains("modes")) {
            if (!e.at("modes").is_array()) throw ConfigError("evolve.modes: expected an array");
            for (const auto& mj : e.at("modes")) {
                require_keys(mj, "evolve.modes[]", {"xi", "init", "seed"});
                EvolveModeParams mp;
                const auto& xi = require(mj, "evolve.modes[]", "xi");
                if (!xi.is_array() || xi.size() != 2)
                    throw ConfigError("evolve.modes[].xi: expected [a, b]");
                mp.xi = {number(xi[0], "evolve.modes[].xi[0]"),
                         number(xi[1], "evolve.modes[].xi[1]")};
                if (mj.contains("init")) {
                    mp.init = mj.at("init").get<std::string>();
                    if (mp.init != "eigen" && mp.init != "random")
                        throw ConfigError("evolve.modes[].init: expected eigen or random");
                }
                mp.seed = static_cast<std::uint64_t>(get_int_or(mj, "evolve.modes[]", "seed", 1));
                rc.evolve.modes.push_back(mp);
            }
        }
        if (rc.evolve.modes.empty()) throw ConfigError("evolve.modes: at least one mode required");
    }
    if (j.contains("illposed")) {
        const auto& s = j.at("illposed");
        require_keys(s, "illposed",
                     {"k", "j", "alpha", "T0", "n_max", "R_start", "R_cap", "radial_nodes"});
        rc.illposed.obs_order = get_int_or(s, "illposed", "k", 0);
        rc.illposed.data_order = get_int_or(s, "illposed", "j", 2);
        rc.illposed.amplitude_target = get_number_or(s, "illposed", "alpha", 1.0);
        rc.illposed.time_target = get_number_or(s, "illposed", "T0", 1.0);
        rc.illposed.seq_length = get_int_or(s, "illposed", "n_max", 5);
        rc.illposed.search_start = get_number_or(s, "illposed", "R_start", 1.0);
        rc.illposed.search_cap = get_number_or(s, "illposed", "R_cap", 4096.0);
        rc.illposed.radial_nodes = get_int_or(s, "illposed", "radial_nodes", 32);
        rc.illposed.validate();
    }
    rc.raw = j;
    return rc;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace rtstab
