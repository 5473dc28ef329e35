#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "rtstab/steady.hpp"

using namespace rtstab;
using rtstab::testing::reference_iso_config;

TEST_CASE("upper interface density from pressure continuity") {
    auto cfg = reference_iso_config();
    CHECK(rho0_plus(cfg) == doctest::Approx(2.0).epsilon(1e-14));

    cfg.law_minus = BarotropicLaw::polytropic(1.0, 1.7);
    cfg.law_plus = cfg.law_minus;
    cfg.rho0_minus = 3.3;
    CHECK(rho0_plus(cfg) == doctest::Approx(3.3).epsilon(1e-13));

    cfg.law_minus = BarotropicLaw::polytropic(4.0, 1.0);
    cfg.law_plus = BarotropicLaw::polytropic(1.0, 2.0);
    cfg.rho0_minus = 1.0;
    CHECK(rho0_plus(cfg) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("instability test and polytropic regime inequality") {
    auto cfg = reference_iso_config();
    auto d = check_instability(cfg);
    CHECK(d.unstable);
    CHECK(d.density_jump == doctest::Approx(1.0).epsilon(1e-14));

    cfg.law_minus = cfg.law_plus;
    d = check_instability(cfg);
    CHECK_FALSE(d.unstable);
    CHECK(d.density_jump == doctest::Approx(0.0));

    // gamma- = 2, gamma+ = 1, K = 1 on both sides, rho0- = 0.5: the regime
    // inequality (rho0-)^(gamma- - gamma+) > K+/K- fails
    cfg.law_minus = BarotropicLaw::polytropic(1.0, 2.0);
    cfg.law_plus = BarotropicLaw::polytropic(1.0, 1.0);
    cfg.rho0_minus = 0.5;
    d = check_instability(cfg);
    CHECK_FALSE(d.unstable);
    CHECK(d.regime_lhs < d.regime_rhs);
}

TEST_CASE("isothermal closed-form profile") {
    const SteadyProfile prof(reference_iso_config());
    CHECK(prof.density(-1.0, Side::lower) == doctest::Approx(std::exp(0.5)).epsilon(1e-13));
    CHECK(prof.density(1.0, Side::upper) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-13));
    CHECK(prof.density(0.25, Side::upper) ==
          doctest::Approx(2.0 * std::exp(-0.25)).epsilon(1e-13));
    CHECK(prof.density(-0.5, Side::lower) == doctest::Approx(std::exp(0.25)).epsilon(1e-13));
    CHECK(prof.density_gradient(-0.5, Side::lower) ==
          doctest::Approx(-0.5 * std::exp(0.25)).epsilon(1e-13));

    // one-sided limits at the interface
    CHECK(prof.density(0.0, Side::lower) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prof.density(0.0, Side::upper) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(prof.density(0.5, Side::lower), std::domain_error);
    CHECK_THROWS_AS(prof.density(-1.5, Side::lower), std::domain_error);
    CHECK_THROWS_AS(prof.side_of(0.0), std::domain_error);
}

TEST_CASE("admissibility bound on the upper slab") {
    TwoFluidConfig cfg;
    cfg.g = 1.0;
    cfg.m = 1.0;
    cfg.rho0_minus = 1.0;
    cfg.law_minus = BarotropicLaw::polytropic(1.0, 2.0);
    cfg.law_plus = BarotropicLaw::polytropic(1.0, 2.0);
    // rho0+ = 1, so ell must stay below K gamma/(g (gamma-1)) = 2
    cfg.ell = 3.0;
    CHECK_THROWS_WITH_AS(build_profile(cfg), doctest::Contains("ell must be < 2"),
                         std::invalid_argument);
    cfg.ell = 1.9;
    CHECK_NOTHROW(build_profile(cfg));
}

TEST_CASE("hydrostatic relation and pressure continuity on random configs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> Kd(0.4, 3.0), gd(1.0, 2.5), rd(0.4, 2.5),
        grav(0.5, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        TwoFluidConfig cfg;
        cfg.g = grav(rng);
        cfg.m = 0.7;
        cfg.rho0_minus = rd(rng);
        cfg.law_minus = trial % 4 == 0 ? BarotropicLaw::isothermal(Kd(rng))
                                       : BarotropicLaw::polytropic(Kd(rng), gd(rng));
        cfg.law_plus = trial % 3 == 0 ? BarotropicLaw::isothermal(Kd(rng))
                                      : BarotropicLaw::polytropic(Kd(rng), gd(rng));
        const double rp = rho0_plus(cfg);
        const auto& lp = cfg.law_plus;
        double ell_max = lp.is_isothermal()
                             ? 1.0
                             : lp.scale() * lp.exponent() / (cfg.g * (lp.exponent() - 1.0)) *
                                   std::pow(rp, lp.exponent() - 1.0);
        cfg.ell = 0.5 * std::min(1.0, ell_max);
        const SteadyProfile prof(cfg);

        // pressure continuity across the interface
        const double pm = cfg.law_minus.pressure(prof.rho0_minus());
        const double pp = cfg.law_plus.pressure(prof.rho0_plus());
        CHECK(std::abs(pp - pm) <= 1e-12 * pm);

        // d(h(rho0))/dx3 = -g by centered differences, both slabs
        for (double frac : {0.15, 0.5, 0.85}) {
            for (Side s : {Side::lower, Side::upper}) {
                const double L = s == Side::lower ? cfg.m : cfg.ell;
                const double x = (s == Side::lower ? -1.0 : 1.0) * frac * L;
                const double dx = 1e-6 * L;
                const auto& law = prof.law(s);
                const double fd = (law.enthalpy(prof.density(x + dx, s)) -
                                   law.enthalpy(prof.density(x - dx, s))) /
                                  (2.0 * dx);
                CHECK(std::abs(fd + cfg.g) <= 1e-6 * cfg.g);
                // rho0' = -g rho0 / P'(rho0)
                const double fd_rho =
                    (prof.density(x + dx, s) - prof.density(x - dx, s)) / (2.0 * dx);
                CHECK(std::abs(fd_rho - prof.density_gradient(x, s)) <=
                      1e-6 * std::abs(fd_rho) + 1e-12);
            }
        }

        // profile bounded above and below on a dense sample
        for (int i = 0; i <= 64; ++i) {
            const double xl = -cfg.m + cfg.m * i / 64.0;
            const double xu = cfg.ell * i / 64.0;
            CHECK(prof.density(xl, Side::lower) > 0.0);
            CHECK(prof.density(xu, Side::upper) > 0.0);
        }
    }
}

TEST_CASE("instability is equivalent to a positive jump and the regime inequality") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> Kd(0.4, 3.0), gd(1.0, 2.5), rd(0.4, 2.5);
    for (int trial = 0; trial < 40; ++trial) {
        TwoFluidConfig cfg;
        cfg.rho0_minus = rd(rng);
        cfg.law_minus = BarotropicLaw::polytropic(Kd(rng), gd(rng));
        cfg.law_plus = BarotropicLaw::polytropic(Kd(rng), gd(rng));
        const auto d = check_instability(cfg);
        CHECK(d.unstable == (d.density_jump > 0.0));
        CHECK(d.unstable == (d.regime_lhs > d.regime_rhs));
    }
}

TEST_CASE("isothermal scaling in rho0_minus") {
    auto cfg = reference_iso_config();
    const SteadyProfile base(cfg);
    cfg.rho0_minus *= 3.0;
    const SteadyProfile scaled(cfg);
    for (double x : {-0.8, -0.3, 0.2, 0.9}) {
        const Side s = x < 0 ? Side::lower : Side::upper;
        CHECK(scaled.density(x, s) == doctest::Approx(3.0 * base.density(x, s)).epsilon(1e-12));
    }
    CHECK(scaled.density_jump() == doctest::Approx(3.0 * base.density_jump()).epsilon(1e-12));
}
