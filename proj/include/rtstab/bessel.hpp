#pragma once

#include <cmath>

namespace rtstab {

namespace detail {

/// Ascending series sum_k (-1)^k (x^2/4)^k / (k! (k+nu)!), times (x/2)^nu.
inline double bessel_series(int nu, double x) {
    const double q = 0.25 * x * x;
    double term = nu == 0 ? 1.0 : 0.5 * x;
    double sum = term;
    for (int k = 1; k < 80; ++k) {
        term *= -q / (static_cast<double>(k) * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-30)) break;
    }
    return sum;
}

/// Stokes asymptotics J_nu(x) = sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)),
/// chi = x - (2 nu + 1) pi/4, with the divergent tails truncated at their
/// smallest term.
inline double bessel_asymptotic(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double prev = 1e300;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (8.0 * x * k);
        if (std::abs(term) >= prev) break;
        prev = std::abs(term);
        const int r = k % 4;
        if (r == 1) q += term;
        else if (r == 2) p -= term;
        else if (r == 3) q -= term;
        else p += term;
    }
    const double chi = x - (2.0 * nu + 1.0) * M_PI / 4.0;
    return std::sqrt(2.0 / (M_PI * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// Order-zero Bessel function of the first kind, series/asymptotic split.
inline double bessel_j0(double x) {
    x = std::abs(x);
    return x < 16.0 ? detail::bessel_series(0, x) : detail::bessel_asymptotic(0, x);
}

/// Order-one Bessel function of the first kind (odd in x).
inline double bessel_j1(double x) {
    const double ax = std::abs(x);
    const double v = ax < 16.0 ? detail::bessel_series(1, ax) : detail::bessel_asymptotic(1, ax);
    return x < 0.0 ? -v : v;
}

}  // namespace rtstab
