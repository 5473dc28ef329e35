// Offline producer of the pinned reference numbers quoted in the test and
// acceptance suites: the dense-route eigenvalue on the refined grid, residual
// convergence ratios, flux-jump levels and trial-quotient spot values for the
// reference isothermal configuration.  Not registered with ctest.

#include <chrono>
#include <cstdio>
#include <string>

#include "common.hpp"
#include "rtstab/dispersion.hpp"

using namespace rtstab;

int main(int argc, char** argv) {
    const bool full = argc > 1 && std::string(argv[1]) == "--full";
    const SteadyProfile prof(rtstab::testing::reference_iso_config());
    const double xi = 10.0;

    std::printf("banded-route growth rates, reference config, xi = %.1f\n", xi);
    double lam_prev = 0.0;
    for (int n : {64, 128, 256, 512, 1024, 2048}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto g = build_grid(1.0, 1.0, n, n);
        const auto m = solve_mode(prof, g, xi);
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("  N=%5d  lambda=%.15g  mu=%.15g  el=%.6g  flux_jump=%.6g  gap=%.6g  (%.3fs)",
                    n, m.growth_rate, m.eigenvalue, m.residuals.euler_lagrange,
                    m.residuals.flux_jump, m.eigen_gap, dt);
        if (lam_prev != 0.0)
            std::printf("  |dlam|/lam=%.3e", std::abs(m.growth_rate - lam_prev) / m.growth_rate);
        std::printf("\n");
        lam_prev = m.growth_rate;
    }

    std::printf("\nEL residual ratios per doubling:\n");
    double prev = 0.0;
    for (int n : {64, 128, 256, 512, 1024}) {
        const auto g = build_grid(1.0, 1.0, n, n);
        const auto m = solve_mode(prof, g, xi);
        if (prev > 0.0) std::printf("  N=%d ratio=%.4f\n", n, prev / m.residuals.euler_lagrange);
        prev = m.residuals.euler_lagrange;
    }

    std::printf("\nunweighted quotient at alpha = xi = 50 (grid 512/512): ");
    {
        const auto g = build_grid(1.0, 1.0, 512, 512);
        const auto q = test_function_quotient(prof, g, 50.0, 50.0, false);
        std::printf("%.12g (E=%.12g J=%.12g)\n", q.quotient, q.energy, q.mass);
    }

    std::printf("\nweighted quotients at xi = 10 (grid 512/512):\n");
    {
        const auto g = build_grid(1.0, 1.0, 512, 512);
        for (double a : {2.0, 4.0, 8.0, 16.0}) {
            const auto q = test_function_quotient(prof, g, 10.0, a, true);
            std::printf("  alpha=%2.0f quotient=%.12g energy=%.12g closed=%.12g\n", a, q.quotient,
                        q.energy, trial_energy_closed_form(prof, a));
        }
    }

    if (full) {
        std::printf("\ndense-route oracle, grid 1024/1024, quadrature order 8 ...\n");
        std::fflush(stdout);
        const auto t0 = std::chrono::steady_clock::now();
        const auto g = build_grid(1.0, 1.0, 1024, 1024, Grading::uniform, 1.0, 8);
        const auto m = solve_mode_dense(prof, g, xi);
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("  lambda=%.15g  mu=%.15g   (%.1fs)\n", m.growth_rate, m.eigenvalue, dt);
        std::printf("  flux_jump(1024)=%.6g el(1024)=%.6g\n", m.residuals.flux_jump,
                    m.residuals.euler_lagrange);
    }
    return 0;
}
