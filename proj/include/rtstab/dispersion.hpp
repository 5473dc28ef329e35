#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtstab/grid.hpp"
#include "rtstab/parallel.hpp"
#include "rtstab/pencil.hpp"
#include "rtstab/steady.hpp"

namespace rtstab {

// The normal-mode eigenproblem couples a per-cell horizontal profile (P0, the
// role of phi) with a continuous vertical profile (P1c with zero ends, the
// role of psi).  Interleaving the unknowns as
//     [phi_0, psi_1, phi_1, psi_2, ..., psi_{C-1}, phi_{C-1}]
// makes both quadratic forms pentadiagonal (half-bandwidth 2).
//
// Convention, fixed once: the assembled matrices represent the DOUBLED
// quadratic forms, v^T M v = 2 * functional(v), so that the generalized
// eigenproblem  energy x = mu mass x  has exactly the variational eigenvalue
// mu = inf E/J, and membership in the constraint set reads x^T mass x = 2.

struct QuadraticForms {
    double wavenumber = 0.0;  // |xi| > 0
    SymBanded energy;         // doubled form of E(phi, psi)
    SymBanded mass;           // doubled form of J(phi, psi); SPD
};

inline int dof_count(const VerticalGrid& g) { return 2 * g.cell_count() - 1; }
inline int dof_phi(int cell) { return 2 * cell; }
/// Interior nodes only; the two boundary values of psi are pinned to zero.
inline int dof_psi(const VerticalGrid& g, int node) {
    return (node >= 1 && node <= g.cell_count() - 1) ? 2 * node - 1 : -1;
}

/// Assemble E and J on the P0 + P1c pair by per-cell quadrature.
///   2E = int P'(rho0) rho0 (psi' + |xi| phi)^2 - 2 g |xi| rho0 psi phi
///   2J = int rho0 (phi^2 + psi^2)
inline QuadraticForms assemble_forms(const SteadyProfile& prof, const VerticalGrid& grid,
                                     double wavenumber) {
    if (!(wavenumber > 0.0))
        throw std::invalid_argument("assemble_forms: wavenumber must be > 0");
    const double xi = wavenumber;
    const double g = prof.config().g;
    const int n = dof_count(grid);
    QuadraticForms f;
    f.wavenumber = xi;
    f.energy = SymBanded(n, 2);
    f.mass = SymBanded(n, 2);

    for (int c = 0; c < grid.cell_count(); ++c) {
        const Side side = grid.cell_side(c);
        const auto& law = prof.law(side);
        const double h = grid.cell_width(c);
        const double xa = grid.node(c);

        double A = 0, R = 0, Sa = 0, Sb = 0, Maa = 0, Mab = 0, Mbb = 0;
        for (int k = 0; k < grid.quad_points(); ++k) {
            const double x = grid.qp_x(c, k), w = grid.qp_w(c, k);
            const double rho = prof.density(x, side);
            const double a = law.dpressure(rho) * rho;
            const double Nb = (x - xa) / h, Na = 1.0 - Nb;
            A += w * a;
            R += w * rho;
            Sa += w * rho * Na;
            Sb += w * rho * Nb;
            Maa += w * rho * Na * Na;
            Mab += w * rho * Na * Nb;
            Mbb += w * rho * Nb * Nb;
        }

        const int ip = dof_phi(c);
        const int ia = dof_psi(grid, c);
        const int ib = dof_psi(grid, c + 1);
        // gradient of (psi' + xi phi) in the local dofs (phi, psi_a, psi_b)
        const double gp = xi, ga = -1.0 / h, gb = 1.0 / h;

        f.energy.add(ip, ip, A * gp * gp);
        f.mass.add(ip, ip, R);
        if (ia >= 0) {
            f.energy.add(ia, ia, A * ga * ga);
            f.energy.add(ia, ip, A * ga * gp - g * xi * Sa);
            f.mass.add(ia, ia, Maa);
        }
        if (ib >= 0) {
            f.energy.add(ib, ib, A * gb * gb);
            f.energy.add(ib, ip, A * gb * gp - g * xi * Sb);
            f.mass.add(ib, ib, Mbb);
        }
        if (ia >= 0 && ib >= 0) {
            f.energy.add(ib, ia, A * ga * gb);
            f.mass.add(ib, ia, Mab);
        }
    }
    return f;
}

struct ModeResiduals {
    double euler_lagrange = 0.0;  // L2 norm of both strong-form residuals
    double flux_jump = 0.0;       // relative mismatch of P' rho0 (|xi| phi + psi') at 0
    double interface_value = 0.0; // psi(0)
};

/// One solved normal mode: eigenvalue mu = -lambda^2 of the pencil, growth
/// rate lambda = sqrt(max(0, -mu)), profiles normalized to J(phi, psi) = 1.
struct ModeSolution {
    double wavenumber = 0.0;
    double eigenvalue = 0.0;      // mu
    double growth_rate = 0.0;     // lambda
    bool is_unstable = false;
    double eigen_gap = 0.0;       // mu_2 - mu_1, no simplicity assumed
    P0Field<> horizontal;         // phi, per cell
    P1Field<> vertical;           // psi, all nodes (ends zero)
    ModeResiduals residuals;
};

namespace detail {

inline void unpack_mode(const VerticalGrid& g, const std::vector<double>& x, P0Field<>& phi,
                        P1Field<>& psi) {
    phi = P0Field<>(g.cell_count());
    psi = P1Field<>(g.node_count(), 0.0);
    for (int c = 0; c < g.cell_count(); ++c) phi.cell[c] = x[dof_phi(c)];
    for (int j = 1; j < g.cell_count(); ++j) psi.node[j] = x[dof_psi(g, j)];
}

inline void fix_sign(const VerticalGrid& g, std::vector<double>& x) {
    const int mid = dof_psi(g, g.interface_index());
    double pivot = mid >= 0 ? x[mid] : 0.0;
    if (std::abs(pivot) < 1e-12) {
        for (double v : x)
            if (std::abs(v) > std::abs(pivot)) pivot = v;
    }
    if (pivot < 0.0)
        for (auto& v : x) v = -v;
}

}  // namespace detail

inline ModeResiduals compute_residuals(const SteadyProfile& prof, const VerticalGrid& grid,
                                       double xi, double mu, const P0Field<>& phi,
                                       const P1Field<>& psi) {
    const double g = prof.config().g;
    const int C = grid.cell_count();

    // Reconstruct the flux P'(rho0) rho0 (psi' + |xi| phi) as a continuous
    // nodal field per slab (one-sided at the interface and the walls) so its
    // cell-wise slope is a consistent stand-in for the derivative term of the
    // second equation; per-cell strain alone drops the psi'' content.
    std::vector<double> strain(C);
    for (int c = 0; c < C; ++c) strain[c] = psi.slope(grid, c) + xi * phi(c);
    auto coef = [&](double x, Side s) {
        const double rho = prof.density(x, s);
        return prof.law(s).dpressure(rho) * rho;
    };
    auto midpoint = [&](int c) { return 0.5 * (grid.node(c) + grid.node(c + 1)); };
    auto node_strain = [&](int c, int node) {
        const bool interior = node > 0 && node < C && node != grid.interface_index();
        if (interior) return 0.5 * (strain[node - 1] + strain[node]);
        // block-boundary node: one-sided second-order extrapolation from the
        // two cells on this side of the node
        const int c1 = c == node ? c + 1 : c - 1;
        const double m0 = midpoint(c), m1 = midpoint(c1);
        const double x = grid.node(node);
        return strain[c] + (strain[c] - strain[c1]) * (x - m0) / (m0 - m1);
    };

    double acc = 0.0;
    for (int c = 0; c < C; ++c) {
        const Side side = grid.cell_side(c);
        const double ph = phi(c);
        const double wl = coef(grid.node(c), side) * node_strain(c, c);
        const double wr = coef(grid.node(c + 1), side) * node_strain(c, c + 1);
        const double flux_slope = (wr - wl) / grid.cell_width(c);
        for (int k = 0; k < grid.quad_points(); ++k) {
            const double x = grid.qp_x(c, k), w = grid.qp_w(c, k);
            const double rho = prof.density(x, side);
            const double pp = prof.law(side).dpressure(rho);
            const double flux = pp * rho * strain[c];
            const double ps = psi.eval(grid, c, x);
            const double r1 = mu * rho * ph - (xi * flux - g * xi * rho * ps);
            const double r2 = mu * rho * ps + flux_slope + g * xi * rho * ph;
            acc += w * (r1 * r1 + r2 * r2);
        }
    }

    ModeResiduals out;
    out.euler_lagrange = std::sqrt(acc);
    const int ic = grid.interface_index();
    const auto flux_at = [&](int c, Side s) {
        const double rho = prof.interface_density(s);
        return prof.law(s).dpressure(rho) * rho * (xi * phi(c) + psi.slope(grid, c));
    };
    const double wm = flux_at(ic - 1, Side::lower);
    const double wp = flux_at(ic, Side::upper);
    const double mean = 0.5 * (std::abs(wm) + std::abs(wp));
    out.flux_jump = mean > 0.0 ? std::abs(wp - wm) / mean : 0.0;
    out.interface_value = psi.node[ic];
    return out;
}

/// Fraction of g|xi| below which an eigenvalue counts as zero; measured
/// discretization noise floor.
inline constexpr double kUnstableTol = 1e-9;

inline ModeSolution solve_mode(const SteadyProfile& prof, const VerticalGrid& grid,
                               const QuadraticForms& forms) {
    const double xi = forms.wavenumber;
    const double g = prof.config().g;
    ModeSolution m;
    m.wavenumber = xi;
    // E >= -g|xi| J holds for the assembled matrices identically, so the
    // bracket for the bisection is certified.
    auto eig = pencil_smallest(forms.energy, forms.mass, -g * xi);
    detail::fix_sign(grid, eig.vector);
    m.eigenvalue = eig.value;
    m.eigen_gap = eig.second - eig.value;
    const double tol_neg = kUnstableTol * g * xi;
    m.is_unstable = m.eigenvalue < -tol_neg;
    m.growth_rate = m.is_unstable ? std::sqrt(-m.eigenvalue) : 0.0;
    detail::unpack_mode(grid, eig.vector, m.horizontal, m.vertical);
    m.residuals = compute_residuals(prof, grid, xi, m.eigenvalue, m.horizontal, m.vertical);
    return m;
}

inline ModeSolution solve_mode(const SteadyProfile& prof, const VerticalGrid& grid,
                               double wavenumber) {
    return solve_mode(prof, grid, assemble_forms(prof, grid, wavenumber));
}

/// Dense reference route (Householder tridiagonalization + Sturm bisection).
inline ModeSolution solve_mode_dense(const SteadyProfile& prof, const VerticalGrid& grid,
                                     double wavenumber) {
    const auto forms = assemble_forms(prof, grid, wavenumber);
    auto eig = dense_pencil_smallest(forms.energy, forms.mass);
    detail::fix_sign(grid, eig.vector);
    ModeSolution m;
    m.wavenumber = wavenumber;
    m.eigenvalue = eig.value;
    m.eigen_gap = 0.0;
    const double tol_neg = kUnstableTol * prof.config().g * wavenumber;
    m.is_unstable = m.eigenvalue < -tol_neg;
    m.growth_rate = m.is_unstable ? std::sqrt(-m.eigenvalue) : 0.0;
    detail::unpack_mode(grid, eig.vector, m.horizontal, m.vertical);
    m.residuals = compute_residuals(prof, grid, wavenumber, m.eigenvalue, m.horizontal,
                                    m.vertical);
    return m;
}

// ---------------------------------------------------------------------------
// Variational test functions.  The trial pair is (phi, psi) = (-psi'/|xi|, psi)
// with psi decaying like (1 - x3/ell)^(alpha/2) away from the interface.  The
// weighted variant multiplies by (rho0/rho0_iface)^((gamma-2)/2), which makes
// the quotient's numerator integrable in closed form.
// ---------------------------------------------------------------------------

struct TrialQuotient {
    double energy = 0.0;    // E(-psi'/|xi|, psi) by quadrature
    double mass = 0.0;      // J(-psi'/|xi|, psi)
    double quotient = 0.0;  // upper bound for mu by the variational principle
};

inline TrialQuotient test_function_quotient(const SteadyProfile& prof, const VerticalGrid& grid,
                                            double wavenumber, double alpha, bool weighted) {
    if (!(alpha >= 2.0))
        throw std::invalid_argument("test_function_quotient: alpha must be >= 2");
    if (!(wavenumber > 0.0))
        throw std::invalid_argument("test_function_quotient: wavenumber must be > 0");
    const double g = prof.config().g;
    const double m = prof.config().m, ell = prof.config().ell;

    auto trial = [&](double x, Side s, double& val, double& dval) {
        const double L = s == Side::lower ? m : ell;
        const double sgn = s == Side::lower ? 1.0 : -1.0;
        const double u = 1.0 + sgn * x / L;  // 1 at the interface, 0 at the wall
        const double up = sgn / L;
        const double base = std::pow(u, 0.5 * alpha);
        const double dbase = 0.5 * alpha * std::pow(u, 0.5 * alpha - 1.0) * up;
        if (!weighted) {
            val = base;
            dval = dbase;
            return;
        }
        const auto& law = prof.law(s);
        const double rho_i = prof.interface_density(s);
        const double rho = prof.density(x, s);
        const double drho = -g * rho / law.dpressure(rho);
        const double e = 0.5 * (law.exponent() - 2.0);
        const double t = rho / rho_i;
        const double wgt = std::pow(t, e);
        const double dwgt = e * std::pow(t, e - 1.0) * drho / rho_i;
        val = wgt * base;
        dval = dwgt * base + wgt * dbase;
    };

    TrialQuotient q;
    double e_acc = 0.0, j_acc = 0.0;
    for (int c = 0; c < grid.cell_count(); ++c) {
        const Side side = grid.cell_side(c);
        const auto& law = prof.law(side);
        for (int k = 0; k < grid.quad_points(); ++k) {
            const double x = grid.qp_x(c, k), w = grid.qp_w(c, k);
            double ps, dps;
            trial(x, side, ps, dps);
            const double ph = -dps / wavenumber;
            const double rho = prof.density(x, side);
            const double a = law.dpressure(rho) * rho;
            const double strain = dps + wavenumber * ph;  // vanishes identically
            e_acc += w * (a * strain * strain - 2.0 * g * wavenumber * rho * ps * ph);
            j_acc += w * rho * (ph * ph + ps * ps);
        }
    }
    q.energy = 0.5 * e_acc;
    q.mass = 0.5 * j_acc;
    q.quotient = q.energy / q.mass;
    return q;
}

/// Closed form of the weighted trial energy:
///   (g/2) (-[[rho0]] + g/(alpha+1) (m rho0-/P-'(rho0-) + ell rho0+/P+'(rho0+)))
inline double trial_energy_closed_form(const SteadyProfile& prof, double alpha) {
    const double g = prof.config().g;
    const double rm = prof.rho0_minus(), rp = prof.rho0_plus();
    const double term = prof.config().m * rm / prof.law(Side::lower).dpressure(rm) +
                        prof.config().ell * rp / prof.law(Side::upper).dpressure(rp);
    return 0.5 * g * (-prof.density_jump() + g / (alpha + 1.0) * term);
}

// ---------------------------------------------------------------------------
// Frequency sweeps
// ---------------------------------------------------------------------------

struct SweepPoint {
    double wavenumber = 0.0;
    double growth_rate = 0.0;
    double eigenvalue = 0.0;
    double el_residual = 0.0;
    double flux_jump = 0.0;
    double interface_value = 0.0;
    bool is_unstable = false;
    bool failed = false;
    std::string error;
};

struct DispersionCurve {
    std::vector<SweepPoint> points;
    double C1_hat = 0.0;  // least-squares fit of lambda^2 ~ C1 |xi| - C2
    double C2_hat = 0.0;
    double fit_window_min = 0.0;

    /// Lambda(R): largest growth rate over swept wavenumbers <= R.
    double max_growth_below(double R) const {
        double out = 0.0;
        for (const auto& p : points)
            if (!p.failed && p.wavenumber <= R) out = std::max(out, p.growth_rate);
        return out;
    }
};

/// Solve one mode per wavenumber (parallel); per-point failures are recorded,
/// not propagated.  The tail fit runs over points with lambda > 0 and
/// wavenumber >= fit_window_min (default: median of the list).
inline DispersionCurve sweep(const SteadyProfile& prof, const VerticalGrid& grid,
                             const std::vector<double>& wavenumbers,
                             std::optional<double> fit_window_min = std::nullopt) {
    DispersionCurve curve;
    curve.points.resize(wavenumbers.size());
    parallel_for(wavenumbers.size(), [&](std::size_t i) {
        SweepPoint& p = curve.points[i];
        p.wavenumber = wavenumbers[i];
        try {
            const ModeSolution m = solve_mode(prof, grid, wavenumbers[i]);
            p.growth_rate = m.growth_rate;
            p.eigenvalue = m.eigenvalue;
            p.el_residual = m.residuals.euler_lagrange;
            p.flux_jump = m.residuals.flux_jump;
            p.interface_value = m.residuals.interface_value;
            p.is_unstable = m.is_unstable;
        } catch (const std::exception& e) {
            p.failed = true;
            p.error = e.what();
        }
    });

    double wmin = 0.0;
    if (fit_window_min) {
        wmin = *fit_window_min;
    } else {
        std::vector<double> ws = wavenumbers;
        std::sort(ws.begin(), ws.end());
        wmin = ws.empty() ? 0.0 : ws[ws.size() / 2];
    }
    curve.fit_window_min = wmin;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& p : curve.points) {
        if (p.failed || !p.is_unstable || p.wavenumber < wmin) continue;
        const double x = p.wavenumber, y = p.growth_rate * p.growth_rate;
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) {
        const double det = cnt * sxx - sx * sx;
        if (det != 0.0) {
            curve.C1_hat = (cnt * sxy - sx * sy) / det;
            curve.C2_hat = -(sy * sxx - sx * sxy) / det;
        }
    }
    return curve;
}

}  // namespace rtstab
