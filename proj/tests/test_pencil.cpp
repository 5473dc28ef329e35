#include <doctest.h>

#include <cmath>
#include <random>

#include "rtstab/pencil.hpp"

using namespace rtstab;

namespace {

// random SPD banded mass and symmetric banded stiffness with known spectrum
// helpers for small dense checks
double dense_rayleigh(const SymBanded& a, const std::vector<double>& x) {
    std::vector<double> y;
    a.matvec(x, y);
    double num = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) num += x[i] * y[i];
    return num;
}

}  // namespace

TEST_CASE("banded matvec and quadratic form agree") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SymBanded a(12, 2);
    for (int i = 0; i < 12; ++i)
        for (int j = std::max(0, i - 2); j <= i; ++j) a.add(i, j, u(rng));
    std::vector<double> x(12);
    for (auto& v : x) v = u(rng);
    CHECK(a.quad_form(x) == doctest::Approx(dense_rayleigh(a, x)).epsilon(1e-13));
}

TEST_CASE("inertia count on a known diagonal pencil") {
    const int n = 9;
    SymBanded e(n, 1), j(n, 1);
    for (int i = 0; i < n; ++i) {
        e.add(i, i, static_cast<double>(i) - 4.0);  // eigenvalues -4..4
        j.add(i, i, 1.0);
    }
    CHECK(pencil_count_below(e, j, -4.5) == 0);
    CHECK(pencil_count_below(e, j, 0.5) == 5);
    CHECK(pencil_count_below(e, j, 10.0) == 9);
    const auto r = pencil_smallest(e, j, -5.0);
    CHECK(r.value == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(r.second == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("banded and dense routes agree on random pentadiagonal pencils") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 40 + 13 * trial;
        SymBanded e(n, 2), j(n, 2);
        for (int i = 0; i < n; ++i) {
            e.add(i, i, 2.0 * u(rng));
            j.add(i, i, 2.5 + u(rng));  // diagonally dominant SPD
            if (i >= 1) {
                e.add(i, i - 1, u(rng));
                j.add(i, i - 1, 0.3 * u(rng));
            }
            if (i >= 2) {
                e.add(i, i - 2, u(rng));
                j.add(i, i - 2, 0.2 * u(rng));
            }
        }
        const auto banded = pencil_smallest(e, j, -50.0);
        const auto dense = dense_pencil_smallest(e, j);
        CHECK(banded.value == doctest::Approx(dense.value).epsilon(1e-10));

        // residual of the banded eigenpair
        std::vector<double> ex, jx;
        e.matvec(banded.vector, ex);
        j.matvec(banded.vector, jx);
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = ex[i] - banded.value * jx[i];
            r2 += r * r;
        }
        CHECK(std::sqrt(r2) <= 1e-8);
        // J-normalization convention
        CHECK(j.quad_form(banded.vector) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(j.quad_form(dense.vector) == doctest::Approx(2.0).epsilon(1e-10));

        // variational property: random Rayleigh quotients sit above the minimum
        std::vector<double> x(n);
        for (int t = 0; t < 50; ++t) {
            for (auto& v : x) v = u(rng);
            CHECK(e.quad_form(x) / j.quad_form(x) >= banded.value - 1e-10);
        }
    }
}
