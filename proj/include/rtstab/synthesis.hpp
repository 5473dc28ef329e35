#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtstab/bessel.hpp"
#include "rtstab/dispersion.hpp"
#include "rtstab/grid.hpp"
#include "rtstab/parallel.hpp"
#include "rtstab/series.hpp"
#include "rtstab/steady.hpp"

namespace rtstab {

/// Radial frequency profile supported on the open annulus (R2, R3): a smooth
/// compactly supported bump exp(-1/(1-s^2)) in the rescaled radius by default,
/// scaled by `amplitude`.
struct FrequencyProfile {
    double R2 = 0.0;
    double R3 = 0.0;
    double amplitude = 1.0;
    int radial_nodes = 64;               // one eigensolve per node, cached in the bank
    std::function<double(double)> shape; // optional override, evaluated inside (R2, R3)

    double operator()(double r) const {
        if (r <= R2 || r >= R3) return 0.0;
        if (shape) return amplitude * shape(r);
        const double s = (2.0 * r - R2 - R3) / (R3 - R2);
        return amplitude * std::exp(-1.0 / (1.0 - s * s));
    }

    void validate() const {
        if (!(R2 > 0.0) || !(R3 > R2))
            throw std::invalid_argument("FrequencyProfile: need 0 < R2 < R3");
        if (radial_nodes < 2)
            throw std::invalid_argument("FrequencyProfile: need at least 2 radial nodes");
    }
};

namespace detail {

/// Taylor coefficients of the steady density about x, generated from the
/// hydrostatic ODE rho0' = -g rho0 / P'(rho0) = -(g/(K gamma)) rho0^(2-gamma).
inline Series density_series(const SteadyProfile& prof, double x, Side side, int order) {
    const auto& law = prof.law(side);
    const double coef = -prof.config().g / (law.scale() * law.exponent());
    const double expo = 2.0 - law.exponent();
    Series rho;
    rho.order = 0;
    rho.c[0] = prof.density(x, side);
    for (int n = 0; n < order; ++n) {
        const Series u = pow(rho, expo);  // valid through order n
        rho.order = n + 1;
        rho.c[n + 1] = coef * u.c[n] / (n + 1.0);
    }
    return rho;
}

}  // namespace detail

/// Vertical derivative closures of one solved mode, exact given the pointwise
/// seeds: with the flux variable w := P' rho0 (psi' + |xi| phi) the
/// Euler-Lagrange system closes as the first-order pair
///   psi' = (1/(P' rho0) - xi^2/(mu rho0)) w + (g xi^2/mu) psi
///   w'   = rho0 (g^2 xi^2/mu - mu) psi - (g xi^2/mu) w
/// which is chained to arbitrary order through the density series.  The
/// compression profile of the synthesized q is Q = w / P'(rho0).
struct ModeDerivatives {
    Series vertical;    // psi and its derivatives
    Series horizontal;  // phi
    Series compression; // Q
};

inline ModeDerivatives mode_derivatives(const SteadyProfile& prof, const VerticalGrid& grid,
                                        const ModeSolution& mode, double x, Side side,
                                        int order) {
    if (order > 4) throw std::invalid_argument("mode_derivatives: order capped at 4");
    if (!(mode.eigenvalue < 0.0))
        throw std::invalid_argument("mode_derivatives: mode must be unstable");
    const double g = prof.config().g;
    const double xi = mode.wavenumber;
    const double mu = mode.eigenvalue;
    const auto& law = prof.law(side);

    const Series rho = detail::density_series(prof, x, side, order);
    const Series flux_coef = law.scale() * law.exponent() * pow(rho, law.exponent());  // P' rho0
    const Series inv_flux = reciprocal(flux_coef);
    const Series inv_rho = reciprocal(rho);
    const Series inv_pp = rho * inv_flux;  // 1/P'(rho0)

    const int c = grid.cell_of(x, side);
    const double psi0 = mode.vertical.eval(grid, c, x);
    const double phi0 = mode.horizontal(c);
    const double w0 = mu / xi * rho.c[0] * phi0 + g * rho.c[0] * psi0;

    const Series A = inv_flux - (xi * xi / mu) * inv_rho;
    const double b = g * xi * xi / mu;
    const Series Cc = (g * g * xi * xi / mu - mu) * rho;
    const double d = -g * xi * xi / mu;

    Series psi, w;
    psi.order = 0; psi.c[0] = psi0;
    w.order = 0; w.c[0] = w0;
    for (int n = 0; n < order; ++n) {
        const Series dpsi = A * w + Series::constant(b, n) * psi;
        const Series dw = Cc * psi + Series::constant(d, n) * w;
        psi.order = n + 1;
        w.order = n + 1;
        psi.c[n + 1] = dpsi.c[n] / (n + 1.0);
        w.c[n + 1] = dw.c[n] / (n + 1.0);
    }

    ModeDerivatives out;
    out.vertical = psi;
    out.horizontal = (xi / mu) * (w * inv_rho - g * psi);
    out.compression = w * inv_pp;
    return out;
}

/// Per-side squared L^2 norms of the j-th vertical derivatives for one mode.
struct SeminormTable {
    // [j][side]: side 0 = lower, 1 = upper
    std::vector<std::array<double, 2>> vertical, horizontal, compression;
};

/// One radial node of the bank: the solved mode plus everything the traces
/// and snapshots need.
struct BankNode {
    double radius = 0.0;
    double weight = 0.0;     // Gauss-Legendre weight on (R2, R3)
    double shape_value = 0.0;
    double growth_rate = 0.0;
    double eigenvalue = 0.0;
    ModeSolution mode;
    SeminormTable seminorms;
};

class ModeBank {
  public:
    ModeBank(const SteadyProfile& prof, const VerticalGrid& grid, FrequencyProfile profile,
             int j_max)
        : prof_(&prof), grid_(&grid), profile_(std::move(profile)), j_max_(j_max) {
        profile_.validate();
        if (j_max_ < 0 || j_max_ > 4)
            throw std::invalid_argument("ModeBank: j_max must lie in [0, 4]");
        const auto rule = gauss_legendre(profile_.radial_nodes);
        const double mid = 0.5 * (profile_.R2 + profile_.R3);
        const double half = 0.5 * (profile_.R3 - profile_.R2);
        nodes_.resize(profile_.radial_nodes);
        parallel_for(nodes_.size(), [&](std::size_t i) {
            BankNode& nd = nodes_[i];
            nd.radius = mid + half * rule.nodes[i];
            nd.weight = half * rule.weights[i];
            nd.shape_value = profile_(nd.radius);
            nd.mode = solve_mode(prof, grid, nd.radius);
            nd.growth_rate = nd.mode.growth_rate;
            nd.eigenvalue = nd.mode.eigenvalue;
            if (!nd.mode.is_unstable)
                throw std::invalid_argument(
                    "ModeBank: no growing mode at radial node " + std::to_string(i) +
                    " (|xi| = " + std::to_string(nd.radius) + "); shrink the annulus");
            fill_seminorms(nd);
        });
    }

    const FrequencyProfile& profile() const { return profile_; }
    const SteadyProfile& steady() const { return *prof_; }
    const VerticalGrid& grid() const { return *grid_; }
    int j_max() const { return j_max_; }
    const std::vector<BankNode>& nodes() const { return nodes_; }

    double min_growth() const {
        double v = nodes_[0].growth_rate;
        for (const auto& n : nodes_) v = std::min(v, n.growth_rate);
        return v;
    }
    double max_growth() const {
        double v = nodes_[0].growth_rate;
        for (const auto& n : nodes_) v = std::max(v, n.growth_rate);
        return v;
    }

    /// j = 0 pointwise profiles at height x3 for snapshots: (psi, phi, Q).
    std::array<double, 3> profiles_at(const BankNode& nd, double x3, Side side) const {
        const auto d = mode_derivatives(*prof_, *grid_, nd.mode, x3, side, 0);
        return {d.vertical.c[0], d.horizontal.c[0], d.compression.c[0]};
    }

  private:
    void fill_seminorms(BankNode& nd) {
        auto& t = nd.seminorms;
        t.vertical.assign(j_max_ + 1, {0.0, 0.0});
        t.horizontal.assign(j_max_ + 1, {0.0, 0.0});
        t.compression.assign(j_max_ + 1, {0.0, 0.0});
        const auto& g = *grid_;
        for (int c = 0; c < g.cell_count(); ++c) {
            const Side side = g.cell_side(c);
            const int si = side == Side::lower ? 0 : 1;
            for (int k = 0; k < g.quad_points(); ++k) {
                const double x = g.qp_x(c, k), w = g.qp_w(c, k);
                const auto d = mode_derivatives(*prof_, g, nd.mode, x, side, j_max_);
                for (int j = 0; j <= j_max_; ++j) {
                    const double dv = d.vertical.deriv(j);
                    const double dh = d.horizontal.deriv(j);
                    const double dq = d.compression.deriv(j);
                    t.vertical[j][si] += w * dv * dv;
                    t.horizontal[j][si] += w * dh * dh;
                    t.compression[j][si] += w * dq * dq;
                }
            }
        }
    }

    const SteadyProfile* prof_;
    const VerticalGrid* grid_;
    FrequencyProfile profile_;
    int j_max_;
    std::vector<BankNode> nodes_;
};

inline ModeBank build_mode_bank(const SteadyProfile& prof, const VerticalGrid& grid,
                                const FrequencyProfile& profile, int j_max = 4) {
    return ModeBank(prof, grid, profile, j_max);
}

/// Squared piecewise H^k norms of the synthesized unknowns, evaluated exactly
/// in frequency space as radial quadratures (Parseval carries the 1/(2 pi)).
struct SobolevNormTrace {
    int order = 0;
    std::vector<double> times;
    std::vector<double> eta_sq, v_sq, q_sq;
    double growth_min = 0.0, growth_max = 0.0;
};

namespace detail {

inline double radial_weight(const BankNode& nd, int k,
                            const std::vector<std::array<double, 2>>& a,
                            const std::vector<std::array<double, 2>>& b) {
    double sum = 0.0;
    const double q = 1.0 + nd.radius * nd.radius;
    for (int j = 0; j <= k; ++j) {
        const double wk = std::pow(q, static_cast<double>(k - j));
        double s = a[j][0] + a[j][1];
        if (!b.empty()) s += b[j][0] + b[j][1];
        sum += wk * s;
    }
    return sum;
}

}  // namespace detail

inline SobolevNormTrace hk_norm_trace(const ModeBank& bank, int k,
                                      const std::vector<double>& times) {
    if (k < 0 || k > bank.j_max())
        throw std::invalid_argument("hk_norm_trace: order exceeds the bank's derivative cap");
    SobolevNormTrace tr;
    tr.order = k;
    tr.times = times;
    tr.growth_min = bank.min_growth();
    tr.growth_max = bank.max_growth();
    tr.eta_sq.assign(times.size(), 0.0);
    tr.v_sq.assign(times.size(), 0.0);
    tr.q_sq.assign(times.size(), 0.0);
    static const std::vector<std::array<double, 2>> kNone;
    for (const auto& nd : bank.nodes()) {
        const double f = nd.shape_value;
        if (f == 0.0) continue;
        const double base = nd.weight * nd.radius * f * f / (2.0 * M_PI);
        const double weta = detail::radial_weight(nd, k, nd.seminorms.vertical,
                                                  nd.seminorms.horizontal);
        const double wq = detail::radial_weight(nd, k, nd.seminorms.compression, kNone);
        const double lam2 = nd.growth_rate * nd.growth_rate;
        for (std::size_t it = 0; it < times.size(); ++it) {
            const double grow = std::exp(2.0 * nd.growth_rate * times[it]);
            tr.eta_sq[it] += base * grow * weta;
            tr.v_sq[it] += base * grow * lam2 * weta;
            tr.q_sq[it] += base * grow * wq;
        }
    }
    return tr;
}

/// Weighted data size (integral (1 + |xi|^2)^(k+1) |f|^2 d xi)^(1/2); the
/// plain frequency measure, no Parseval factor.
inline double profile_data_norm(const ModeBank& bank, int k) {
    double sum = 0.0;
    for (const auto& nd : bank.nodes()) {
        const double f = nd.shape_value;
        sum += 2.0 * M_PI * nd.weight * nd.radius * std::pow(1.0 + nd.radius * nd.radius, k + 1) *
               f * f;
    }
    return std::sqrt(sum);
}

/// Complex profile components of the synthesized velocity at a full 2-D
/// frequency: the horizontal pair is -i phi times the unit direction (it
/// rotates with the frequency vector), the vertical profile does not change.
inline std::array<std::complex<double>, 3> mode_at_direction(const ModeBank& bank,
                                                             const BankNode& nd,
                                                             std::array<double, 2> xi, double x3,
                                                             Side side) {
    const double mag = std::hypot(xi[0], xi[1]);
    if (!(mag > 0.0)) throw std::invalid_argument("mode_at_direction: |xi| must be > 0");
    const auto p = bank.profiles_at(nd, x3, side);
    const std::complex<double> mi(0.0, -1.0);
    return {mi * p[1] * (xi[0] / mag), mi * p[1] * (xi[1] / mag),
            std::complex<double>(p[0], 0.0)};
}

enum class Unknown { displacement, velocity, compression };

struct SnapshotPoint {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0;
    Side side = Side::lower;
};

/// Physical-space sample of a synthesized field by Hankel reduction: the
/// vertical component pairs with J0(r |x'|), the horizontal pair with
/// J1(r |x'|) along the radial unit direction, and the compression is scalar
/// with J0.  Real by construction.
inline std::array<double, 3> field_snapshot(const ModeBank& bank, Unknown which, double t,
                                            const SnapshotPoint& pt) {
    const double s = std::hypot(pt.x1, pt.x2);
    const double ux = s > 0.0 ? pt.x1 / s : 0.0;
    const double uy = s > 0.0 ? pt.x2 / s : 0.0;
    double horiz = 0.0, vert = 0.0, comp = 0.0;
    for (const auto& nd : bank.nodes()) {
        const double f = nd.shape_value;
        if (f == 0.0) continue;
        const auto prof = bank.profiles_at(nd, pt.x3, pt.side);
        const double grow = std::exp(nd.growth_rate * t);
        const double speed = which == Unknown::velocity ? nd.growth_rate : 1.0;
        const double base = nd.weight * nd.radius * f * grow * speed / (2.0 * M_PI);
        horiz += base * prof[1] * bessel_j1(nd.radius * s);
        vert += base * prof[0] * bessel_j0(nd.radius * s);
        comp -= base * prof[2] * bessel_j0(nd.radius * s);
    }
    if (which == Unknown::compression) return {comp, 0.0, 0.0};
    return {horiz * ux, horiz * uy, vert};
}

}  // namespace rtstab
