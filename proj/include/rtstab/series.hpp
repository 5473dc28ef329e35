#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace rtstab {

/// Truncated Taylor series about a point, used to chain exact vertical
/// derivatives through the steady-state ODE.  Order is small and fixed.
constexpr int kSeriesCap = 9;  // coefficients 0..8

struct Series {
    int order = 0;  // highest retained coefficient
    std::array<double, kSeriesCap> c{};

    static Series constant(double v, int order) {
        Series s;
        s.order = order;
        s.c[0] = v;
        return s;
    }

    double deriv(int j) const {
        double f = 1.0;
        for (int i = 2; i <= j; ++i) f *= i;
        return c[j] * f;
    }
};

inline Series operator+(const Series& a, const Series& b) {
    Series r;
    r.order = std::min(a.order, b.order);
    for (int i = 0; i <= r.order; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
}

inline Series operator-(const Series& a, const Series& b) {
    Series r;
    r.order = std::min(a.order, b.order);
    for (int i = 0; i <= r.order; ++i) r.c[i] = a.c[i] - b.c[i];
    return r;
}

inline Series operator*(double s, const Series& a) {
    Series r = a;
    for (int i = 0; i <= r.order; ++i) r.c[i] *= s;
    return r;
}

inline Series operator*(const Series& a, const Series& b) {
    Series r;
    r.order = std::min(a.order, b.order);
    for (int n = 0; n <= r.order; ++n) {
        double s = 0.0;
        for (int k = 0; k <= n; ++k) s += a.c[k] * b.c[n - k];
        r.c[n] = s;
    }
    return r;
}

/// w = u^p through the logarithmic-derivative recurrence w' u = p u' w;
/// u(0) must be nonzero (positive for fractional exponents).
inline Series pow(const Series& u, double p) {
    if (!(u.c[0] > 0.0))
        throw std::domain_error("Series::pow: leading coefficient must be positive");
    Series w;
    w.order = u.order;
    w.c[0] = std::pow(u.c[0], p);
    for (int n = 1; n <= u.order; ++n) {
        double s = 0.0;
        for (int k = 1; k <= n; ++k) s += (p * k - (n - k)) * u.c[k] * w.c[n - k];
        w.c[n] = s / (n * u.c[0]);
    }
    return w;
}

inline Series reciprocal(const Series& u) {
    if (u.c[0] == 0.0) throw std::domain_error("Series::reciprocal: division by zero");
    Series w;
    w.order = u.order;
    w.c[0] = 1.0 / u.c[0];
    for (int n = 1; n <= u.order; ++n) {
        double s = 0.0;
        for (int k = 1; k <= n; ++k) s += u.c[k] * w.c[n - k];
        w.c[n] = -s / u.c[0];
    }
    return w;
}

}  // namespace rtstab
