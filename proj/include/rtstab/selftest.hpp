#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rtstab/dispersion.hpp"
#include "rtstab/evolution.hpp"
#include "rtstab/illposed.hpp"
#include "rtstab/synthesis.hpp"

namespace rtstab {

// Full verification suite: one entry per checked property, runnable on a
// single machine in minutes.  The CLI selftest command and the acceptance
// test binary both run exactly this list.

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace selftest_detail {

/// Dense-route eigenvalue of the reference isothermal configuration at
/// wavenumber 10 on the 1024/1024 grid with quadrature order 8, produced once
/// offline by tests/reference_solve --full and pinned here as the regression
/// target for the production solver.
inline constexpr double kReferenceGrowthRate = 1.81529901246247;

inline TwoFluidConfig reference_config() {
    TwoFluidConfig cfg;
    cfg.g = 1.0;
    cfg.m = 1.0;
    cfg.ell = 1.0;
    cfg.rho0_minus = 1.0;
    cfg.law_minus = BarotropicLaw::isothermal(2.0);
    cfg.law_plus = BarotropicLaw::isothermal(1.0);
    return cfg;
}

/// Randomized unstable polytropic configurations, admissible with margin.
inline std::vector<TwoFluidConfig> random_unstable_configs(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> K(0.5, 3.0), gamma(1.0, 2.2), grav(0.5, 2.0),
        depth(0.6, 1.4), rho(0.5, 2.0), coin(0.0, 1.0);
    std::vector<TwoFluidConfig> out;
    while (static_cast<int>(out.size()) < count) {
        TwoFluidConfig cfg;
        cfg.g = grav(rng);
        cfg.m = depth(rng);
        cfg.rho0_minus = rho(rng);
        cfg.law_minus = coin(rng) < 0.3 ? BarotropicLaw::isothermal(K(rng))
                                        : BarotropicLaw::polytropic(K(rng), gamma(rng));
        cfg.law_plus = coin(rng) < 0.3 ? BarotropicLaw::isothermal(K(rng))
                                       : BarotropicLaw::polytropic(K(rng), gamma(rng));
        if (!check_instability(cfg).unstable) continue;
        const double rp = rho0_plus(cfg);
        const auto& lp = cfg.law_plus;
        double ell = depth(rng);
        if (!lp.is_isothermal()) {
            const double ell_max = lp.scale() * lp.exponent() /
                                   (cfg.g * (lp.exponent() - 1.0)) *
                                   std::pow(rp, lp.exponent() - 1.0);
            ell = std::min(ell, 0.6 * ell_max);
        }
        cfg.ell = ell;
        out.push_back(cfg);
    }
    return out;
}

inline std::vector<double> swept_wavenumbers() {
    std::vector<double> xs(100);
    for (int i = 0; i < 100; ++i) xs[i] = 1.0 + 99.0 * i / 99.0;
    return xs;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Largest relative imaginary part of the synthesized displacement evaluated
/// through the two-dimensional angular quadrature (the Hankel route used by
/// field_snapshot is real by construction; this re-derives the field from the
/// full complex synthesis and measures what is left).
inline double snapshot_imag_level(const ModeBank& bank, double t,
                                  const std::vector<SnapshotPoint>& pts) {
    double worst = 0.0;
    for (const auto& pt : pts) {
        std::complex<double> acc[3] = {0.0, 0.0, 0.0};
        const int n_theta = 256;
        for (const auto& nd : bank.nodes()) {
            const auto profs = bank.profiles_at(nd, pt.x3, pt.side);
            const double grow = std::exp(nd.growth_rate * t);
            for (int it = 0; it < n_theta; ++it) {
                const double th = 2.0 * M_PI * it / n_theta;
                const std::complex<double> phase = std::exp(std::complex<double>(
                    0.0, pt.x1 * nd.radius * std::cos(th) + pt.x2 * nd.radius * std::sin(th)));
                const double meas = nd.weight * nd.radius * (2.0 * M_PI / n_theta) *
                                    nd.shape_value * grow / (4.0 * M_PI * M_PI);
                const std::complex<double> mi(0.0, -1.0);
                acc[0] += meas * mi * profs[1] * std::cos(th) * phase;
                acc[1] += meas * mi * profs[1] * std::sin(th) * phase;
                acc[2] += meas * profs[0] * phase;
            }
        }
        double mag = 1.0;
        for (const auto& a : acc) mag = std::max(mag, std::abs(a));
        for (const auto& a : acc) worst = std::max(worst, std::abs(a.imag()) / mag);
    }
    return worst;
}

}  // namespace selftest_detail

inline std::vector<CriterionResult> run_acceptance(std::ostream* live = nullptr) {
    using namespace selftest_detail;
    std::vector<CriterionResult> results;
    auto emit = [&](CriterionResult r) {
        if (live)
            (*live) << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << " - "
                    << r.name << " (" << r.detail << ") [" << fmt(r.seconds) << "s]"
                    << std::endl;
        results.push_back(std::move(r));
    };

    const TwoFluidConfig ref_cfg = reference_config();
    const SteadyProfile ref(ref_cfg);
    const VerticalGrid grid(ref_cfg.m, ref_cfg.ell, GridSpec{});
    const auto xis = swept_wavenumbers();

    // --- 1: upper-bound sandwich on the reference and randomized configs ---
    DispersionCurve ref_curve;
    {
        Timer tm;
        bool ok = true;
        double worst_slack = 1.0;
        std::string worst_at;
        auto check_curve = [&](const TwoFluidConfig& cfg, const DispersionCurve& curve) {
            for (const auto& p : curve.points) {
                if (p.failed) {
                    ok = false;
                    worst_at = "solver failure at xi = " + fmt(p.wavenumber);
                    continue;
                }
                const double cap = std::sqrt(cfg.g * p.wavenumber);
                const double slack = (cap * (1.0 + 1e-9) - p.growth_rate) / cap;
                if (slack < worst_slack) {
                    worst_slack = slack;
                    worst_at = "xi = " + fmt(p.wavenumber);
                }
                if (p.growth_rate > cap * (1.0 + 1e-9)) ok = false;
            }
        };
        ref_curve = sweep(ref, grid, xis);
        check_curve(ref_cfg, ref_curve);
        for (const auto& cfg : random_unstable_configs(3, 20240817)) {
            const SteadyProfile prof(cfg);
            const VerticalGrid g(cfg.m, cfg.ell, GridSpec{});
            check_curve(cfg, sweep(prof, g, xis));
        }
        CriterionResult r;
        r.id = 1;
        r.name = "growth rate below sqrt(g |xi|) across 4 configs x 100 frequencies";
        r.seconds = tm.seconds();
        ok = ok && r.seconds < 60.0;
        r.pass = ok;
        r.detail = "min relative slack " + fmt(worst_slack) + " at " + worst_at;
        emit(r);
    }

    // --- 2: variational ordering against both trial families --------------
    std::vector<double> unweighted_quotient(xis.size());
    {
        Timer tm;
        bool ok = true;
        std::string fail;
        parallel_for(xis.size(), [&](std::size_t i) {
            unweighted_quotient[i] =
                test_function_quotient(ref, grid, xis[i], std::max(2.0, xis[i]), false).quotient;
        });
        for (std::size_t i = 0; i < xis.size(); ++i) {
            const double mu = ref_curve.points[i].eigenvalue;
            const double lam2 = ref_curve.points[i].growth_rate * ref_curve.points[i].growth_rate;
            for (double alpha : {2.0, 4.0, 8.0, 16.0}) {
                const double q = test_function_quotient(ref, grid, xis[i], alpha, true).quotient;
                if (!(mu <= q + 1e-10)) {
                    ok = false;
                    fail = "weighted alpha " + fmt(alpha) + " at xi " + fmt(xis[i]);
                }
            }
            const double qu = unweighted_quotient[i];
            if (!(mu <= qu + 1e-10)) {
                ok = false;
                fail = "unweighted at xi " + fmt(xis[i]);
            }
            if (qu < 0.0 && !(lam2 >= -qu - 1e-10)) {
                ok = false;
                fail = "lambda^2 below -quotient at xi " + fmt(xis[i]);
            }
        }
        const double spot = test_function_quotient(ref, grid, 7.0, 4.0, true).energy;
        const bool spot_ok = std::abs(spot - (-0.25)) <= 1e-10;
        if (!spot_ok) fail = "trial energy spot value " + fmt(spot);
        ok = ok && spot_ok;
        CriterionResult r;
        r.id = 2;
        r.name = "eigenvalue below every trial quotient; closed-form trial energy -0.25";
        r.pass = ok;
        r.seconds = tm.seconds();
        r.detail = ok ? "spot |error| " + fmt(std::abs(spot + 0.25)) : fail;
        emit(r);
    }

    // --- 3: lambda / sqrt(xi) window on [25, 100] --------------------------
    {
        Timer tm;
        bool ok = true;
        double rmin = 1e300, rmax = 0.0, floor_inf = 1e300;
        for (std::size_t i = 0; i < xis.size(); ++i) {
            if (xis[i] < 25.0) continue;
            const auto& p = ref_curve.points[i];
            const double ratio = p.growth_rate / std::sqrt(p.wavenumber);
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
            const double q = unweighted_quotient[i];
            if (q < 0.0) {
                const double floor_r = std::sqrt(-q) / std::sqrt(p.wavenumber);
                floor_inf = std::min(floor_inf, floor_r);
                if (!(p.growth_rate >= std::sqrt(-q) * (1.0 - 1e-12))) ok = false;
            } else {
                ok = false;
            }
        }
        ok = ok && rmin > 0.0 && rmax <= std::sqrt(ref_cfg.g) * (1.0 + 1e-12) &&
             rmin >= floor_inf * (1.0 - 1e-12);
        CriterionResult r;
        r.id = 3;
        r.name = "lambda/sqrt(xi) inside (0, sqrt(g)] and above the trial floor";
        r.pass = ok;
        r.seconds = tm.seconds();
        r.detail = "window [" + fmt(rmin) + ", " + fmt(rmax) + "], floor " + fmt(floor_inf);
        emit(r);
    }

    // --- 4: grid convergence and the pinned dense-route value --------------
    {
        Timer tm;
        const VerticalGrid g512(ref_cfg.m, ref_cfg.ell,
                                GridSpec{512, 512, Grading::uniform, 1.0, 4});
        const VerticalGrid g1024(ref_cfg.m, ref_cfg.ell,
                                 GridSpec{1024, 1024, Grading::uniform, 1.0, 4});
        const double l512 = solve_mode(ref, g512, 10.0).growth_rate;
        const double l1024 = solve_mode(ref, g1024, 10.0).growth_rate;
        const double rel = std::abs(l512 - l1024) / l1024;
        const double reg512 = std::abs(l512 - kReferenceGrowthRate) / kReferenceGrowthRate;
        const double reg1024 = std::abs(l1024 - kReferenceGrowthRate) / kReferenceGrowthRate;
        CriterionResult r;
        r.id = 4;
        r.name = "grid convergence 5e-5 at N=512 and 1e-4 regression to the dense oracle";
        r.pass = rel <= 5e-5 && reg512 <= 1e-4 && reg1024 <= 1e-4;
        r.seconds = tm.seconds();
        r.detail = "|l512-l1024|/l = " + fmt(rel) + ", oracle offsets " + fmt(reg512) + " / " +
                   fmt(reg1024);
        emit(r);
    }

    // --- 5: stable configurations never report growth ----------------------
    {
        Timer tm;
        bool ok = true;
        auto stable_cfg = ref_cfg;
        stable_cfg.law_minus = stable_cfg.law_plus;  // zero density jump
        auto reversed_cfg = ref_cfg;
        reversed_cfg.law_minus = BarotropicLaw::isothermal(1.0);
        reversed_cfg.law_plus = BarotropicLaw::isothermal(2.0);  // denser below
        int checked = 0;
        for (const auto& cfg : {stable_cfg, reversed_cfg}) {
            const SteadyProfile prof(cfg);
            const auto curve = sweep(prof, grid, xis);
            for (const auto& p : curve.points) {
                ++checked;
                if (p.failed || p.is_unstable) ok = false;
            }
        }
        CriterionResult r;
        r.id = 5;
        r.name = "no growing mode on nonpositive density jump";
        r.pass = ok;
        r.seconds = tm.seconds();
        r.detail = std::to_string(checked) + " stable solves";
        emit(r);
    }

    // --- 6: eigenmode evolution fidelity, ledger drift, mixed-mode rate ----
    {
        Timer tm;
        const EvolutionOperator op(ref, grid);
        const auto mode = solve_mode(ref, grid, 10.0);
        IntegrateOptions opt;
        opt.t_end = 1.0;
        opt.dt = 1e-3;
        opt.samples = 11;
        const auto traj = integrate(op, eigenmode_state(op, mode, {10.0, 0.0}), opt);
        double amp_err = 0.0;
        const double n0 = traj.states.front()[0].coeff_norm();
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            const double want = std::exp(mode.growth_rate * traj.times[i]);
            amp_err = std::max(amp_err,
                               std::abs(traj.states[i][0].coeff_norm() / n0 - want) / want);
        }
        const double drift = traj.ledger.drift();

        // five random band-limited modes against the swept Lambda(12)
        const double Lambda12 = ref_curve.max_growth_below(12.0);
        MultiState mixed;
        std::mt19937_64 rng(7771);
        std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
        for (double mag : {3.0, 5.0, 7.0, 9.0, 11.0}) {
            const double th = ang(rng);
            mixed.push_back(random_state(grid, {mag * std::cos(th), mag * std::sin(th)},
                                         static_cast<std::uint64_t>(mag * 100)));
        }
        IntegrateOptions mopt;
        mopt.t_end = 5.0;  // long enough for the growing part to outrun the acoustics
        mopt.dt = 1e-3;
        mopt.samples = 33;
        const auto mixed_traj = integrate(op, std::move(mixed), mopt);
        const auto chk = growth_rate_check(mixed_traj, Lambda12);

        // stable configuration: the oscillatory branch carries no growth
        auto stable_cfg = ref_cfg;
        stable_cfg.law_minus = stable_cfg.law_plus;
        const SteadyProfile stable(stable_cfg);
        const EvolutionOperator sop(stable, grid);
        const auto smode = solve_mode(stable, grid, 4.0);
        IntegrateOptions sopt;
        sopt.t_end = 2.0;
        sopt.dt = 1e-3;
        sopt.samples = 9;
        const auto stable_traj = integrate(sop, eigenmode_state(sop, smode, {4.0, 0.0}), sopt);

        CriterionResult r;
        r.id = 6;
        r.name = "eigenmode exp(lambda t) to 1e-6, drift 1e-7, mixed rate under 2 Lambda(R)";
        r.pass = amp_err <= 1e-6 && drift <= 1e-7 && chk.within &&
                 std::abs(stable_traj.fitted_rate) <= 1e-3;
        r.seconds = tm.seconds();
        r.detail = "amp err " + fmt(amp_err) + ", drift " + fmt(drift) + ", mixed rate " +
                   fmt(chk.fitted_rate) + " vs ceiling " + fmt(chk.ceiling) + ", stable rate " +
                   fmt(stable_traj.fitted_rate);
        emit(r);
    }

    // --- 7: synthesis growth sandwich and real-valued snapshots ------------
    {
        Timer tm;
        FrequencyProfile fp;
        fp.R2 = 4.0;
        fp.R3 = 9.0;
        fp.radial_nodes = 48;
        const ModeBank bank(ref, grid, fp, 4);
        std::vector<double> times;
        for (int i = 0; i <= 8; ++i) times.push_back(0.25 * i);
        bool ok = true;
        std::string fail;
        for (int k = 0; k <= 3 && ok; ++k) {
            const auto tr = hk_norm_trace(bank, k, times);
            for (std::size_t i = 0; i < times.size(); ++i) {
                const double lo = std::exp(2.0 * tr.growth_min * times[i]) * (1.0 - 1e-12);
                const double hi = std::exp(2.0 * tr.growth_max * times[i]) * (1.0 + 1e-12);
                auto inside = [&](double now, double start) {
                    return now >= lo * start && now <= hi * start;
                };
                if (!inside(tr.eta_sq[i], tr.eta_sq[0]) || !inside(tr.v_sq[i], tr.v_sq[0]) ||
                    !inside(tr.q_sq[i], tr.q_sq[0])) {
                    ok = false;
                    fail = "sandwich violated at k=" + std::to_string(k) +
                           " t=" + fmt(times[i]);
                }
            }
        }
        const double imag_level = snapshot_imag_level(
            bank, 1.0,
            {SnapshotPoint{0.6, -0.2, 0.4, Side::upper}, SnapshotPoint{1.2, 0.9, -0.5, Side::lower}});
        if (imag_level > 1e-12) {
            ok = false;
            fail = "snapshot imaginary level " + fmt(imag_level);
        }
        CriterionResult r;
        r.id = 7;
        r.name = "H^k traces inside the measured-rate envelopes; snapshots real to 1e-12";
        r.pass = ok;
        r.seconds = tm.seconds();
        r.detail = ok ? "k = 0..3 over t in [0,2], imag level " + fmt(imag_level) : fail;
        emit(r);
    }

    // --- 8: Hadamard sequence -----------------------------------------------
    {
        Timer tm;
        const VerticalGrid graded(ref_cfg.m, ref_cfg.ell,
                                  GridSpec{256, 256, Grading::geometric, 1.05, 4});
        IllposedDemoSpec spec;
        spec.obs_order = 0;
        spec.data_order = 2;
        spec.amplitude_target = 1.0;
        spec.time_target = 1.0;
        spec.seq_length = 5;
        spec.radial_nodes = 24;
        const auto rep = verify_sequence(ref, graded, spec);
        bool ok = rep.all_pass && rep.entries.size() == 5;
        double prev_R = 0.0;
        std::ostringstream rs;
        for (const auto& e : rep.entries) {
            ok = ok && std::abs(e.initial_norm * e.n - 1.0) <= 1e-9;
            ok = ok && e.final_norm >= spec.amplitude_target;
            ok = ok && e.final_norm / e.initial_norm >= spec.amplitude_target * e.n * (1.0 - 1e-12);
            ok = ok && e.annulus_left >= prev_R;
            prev_R = e.annulus_left;
            rs << (e.n > 1 ? "," : "") << e.annulus_left;
        }
        CriterionResult r;
        r.id = 8;
        r.name = "Hadamard sequence n=1..5: data 1/n, solution above 1, ratio above n";
        r.seconds = tm.seconds();
        ok = ok && r.seconds < 300.0;
        r.pass = ok;
        r.detail = "annuli R(n) = [" + rs.str() + "]";
        emit(r);
    }

    // --- 9: zero-data uniqueness probe --------------------------------------
    {
        Timer tm;
        const EvolutionOperator op(ref, grid);
        MultiState zeros;
        zeros.push_back(LinearState::zero(grid, {3.0, 0.0}));
        zeros.push_back(LinearState::zero(grid, {0.0, 7.0}));
        zeros.push_back(LinearState::zero(grid, {5.0, 5.0}));
        IntegrateOptions opt;
        opt.t_end = 1.0;
        opt.dt = 1e-3;
        opt.samples = 9;
        const auto traj = integrate(op, std::move(zeros), opt);
        double worst = 0.0;
        for (const auto& ms : traj.states)
            for (const auto& s : ms) worst = std::max(worst, s.coeff_norm());
        for (const auto& e : traj.ledger.samples)
            worst = std::max({worst, std::sqrt(e.l2_v), std::sqrt(e.l2_dtv), std::abs(e.total)});
        CriterionResult r;
        r.id = 9;
        r.name = "zero data stays below 1e-14 in every norm on [0, 1]";
        r.pass = worst <= 1e-14;
        r.seconds = tm.seconds();
        r.detail = "max norm " + fmt(worst);
        emit(r);
    }

    return results;
}

inline bool acceptance_passed(const std::vector<CriterionResult>& rs) {
    for (const auto& r : rs)
        if (!r.pass) return false;
    return !rs.empty();
}

}  // namespace rtstab
