#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtstab/dispersion.hpp"
#include "rtstab/grid.hpp"
#include "rtstab/steady.hpp"

namespace rtstab {

using cplx = std::complex<double>;

/// Per-frequency linearized unknowns.  The vertical components live in P1c
/// with zero ends (interface continuity and wall conditions are built into the
/// space); horizontal components and the compression are per-cell constants.
/// sigma is the relative compression q_hat / rho0 (one complex value per
/// cell; q_hat = rho0 * sigma is reconstructed pointwise), which keeps div v_hat
/// exactly per-cell and makes solved dispersion modes exact eigenvectors of
/// the semi-discrete operator.
struct LinearState {
    std::array<double, 2> xi{0.0, 0.0};
    P0Field<cplx> eta1, eta2;
    P1Field<cplx> eta3;
    P0Field<cplx> v1, v2;
    P1Field<cplx> v3;
    P0Field<cplx> sigma;
    double t = 0.0;

    static LinearState zero(const VerticalGrid& g, std::array<double, 2> xi) {
        LinearState s;
        s.xi = xi;
        s.eta1 = P0Field<cplx>(g.cell_count());
        s.eta2 = P0Field<cplx>(g.cell_count());
        s.v1 = P0Field<cplx>(g.cell_count());
        s.v2 = P0Field<cplx>(g.cell_count());
        s.sigma = P0Field<cplx>(g.cell_count());
        s.eta3 = P1Field<cplx>(g.node_count());
        s.v3 = P1Field<cplx>(g.node_count());
        return s;
    }

    void axpy(double a, const LinearState& o) {
        auto acc = [a](auto& dst, const auto& src) {
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
        };
        acc(eta1.cell, o.eta1.cell);
        acc(eta2.cell, o.eta2.cell);
        acc(eta3.node, o.eta3.node);
        acc(v1.cell, o.v1.cell);
        acc(v2.cell, o.v2.cell);
        acc(v3.node, o.v3.node);
        acc(sigma.cell, o.sigma.cell);
        t += a * o.t;
    }
    void scale(cplx a) {
        auto mul = [a](auto& dst) {
            for (auto& v : dst) v *= a;
        };
        mul(eta1.cell); mul(eta2.cell); mul(eta3.node);
        mul(v1.cell); mul(v2.cell); mul(v3.node);
        mul(sigma.cell);
    }
    double coeff_norm() const {
        double s = 0.0;
        auto acc = [&s](const auto& v) {
            for (const auto& z : v) s += std::norm(z);
        };
        acc(eta1.cell); acc(eta2.cell); acc(eta3.node);
        acc(v1.cell); acc(v2.cell); acc(v3.node);
        acc(sigma.cell);
        return std::sqrt(s);
    }
};

using MultiState = std::vector<LinearState>;

struct EnergySample {
    double t = 0.0;
    double total = 0.0;      // kinetic + compression - interface
    double kinetic = 0.0;    // int rho0/2 |dt v|^2
    double compression = 0.0;// int P' rho0 / 2 |div v - (g/P') v3|^2
    double interface = 0.0;  // g [[rho0]] / 2 |v3(0)|^2
    double l2_v = 0.0;       // int rho-free L2 of v
    double l2_dtv = 0.0;
    double bound_margin = 0.0;  // Lambda^2/2 int rho0 |v|^2 - (interface - compression)
};

struct EnergyLedger {
    std::vector<EnergySample> samples;
    double drift() const {
        if (samples.empty()) return 0.0;
        const double e0 = samples.front().total;
        double d = 0.0;
        for (const auto& s : samples) d = std::max(d, std::abs(s.total - e0));
        return d / (1.0 + std::abs(e0));
    }
};

/// Semi-discrete evolution operator for the linearized equations at fixed
/// horizontal frequency.  Horizontal momentum is enforced against P0 test
/// functions with the rho0 weight; vertical momentum is weak against the
/// interior hat functions, which integrates the pressure term by parts and
/// makes the pressure-jump condition natural.  Coefficient integrals are
/// cached per cell at construction.
class EvolutionOperator {
  public:
    EvolutionOperator(const SteadyProfile& prof, const VerticalGrid& grid)
        : prof_(&prof), grid_(&grid) {
        const auto& g = grid;
        const int C = g.cell_count();
        cell_rho_.resize(C);
        cell_flux_.resize(C);
        cell_rho_na_.resize(C);
        cell_rho_nb_.resize(C);
        rho_qp_.resize(C * g.quad_points());
        pp_qp_.resize(C * g.quad_points());
        double maa, mab, mbb;
        std::vector<double> diag(C + 1, 0.0), off(C, 0.0);
        for (int c = 0; c < C; ++c) {
            const Side s = g.cell_side(c);
            const auto& law = prof.law(s);
            const double xa = g.node(c), h = g.cell_width(c);
            double R = 0, A = 0, Sa = 0, Sb = 0;
            maa = mab = mbb = 0.0;
            for (int k = 0; k < g.quad_points(); ++k) {
                const double x = g.qp_x(c, k), w = g.qp_w(c, k);
                const double rho = prof.density(x, s);
                const double pp = law.dpressure(rho);
                rho_qp_[c * g.quad_points() + k] = rho;
                pp_qp_[c * g.quad_points() + k] = pp;
                const double Nb = (x - xa) / h, Na = 1.0 - Nb;
                R += w * rho;
                A += w * pp * rho;
                Sa += w * rho * Na;
                Sb += w * rho * Nb;
                maa += w * rho * Na * Na;
                mab += w * rho * Na * Nb;
                mbb += w * rho * Nb * Nb;
            }
            cell_rho_[c] = R;
            cell_flux_[c] = A;
            cell_rho_na_[c] = Sa;
            cell_rho_nb_[c] = Sb;
            diag[c] += maa;
            diag[c + 1] += mbb;
            off[c] = mab;
        }
        // rho-weighted P1 mass on the interior nodes, tridiagonal LDL^T
        const int n = C - 1;
        mass_d_.resize(n);
        mass_l_.resize(n > 0 ? n - 1 : 0);
        std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
        for (int j = 0; j < n; ++j) d[j] = diag[j + 1];
        for (int j = 0; j + 1 < n; ++j) e[j] = off[j + 1];
        for (int j = 0; j < n; ++j) {
            double dj = d[j];
            if (j > 0) dj -= mass_l_[j - 1] * mass_l_[j - 1] * mass_d_[j - 1];
            mass_d_[j] = dj;
            if (j + 1 < n) mass_l_[j] = e[j] / dj;
        }
    }

    const SteadyProfile& steady() const { return *prof_; }
    const VerticalGrid& grid() const { return *grid_; }

    LinearState rhs(const LinearState& s) const {
        const auto& g = *grid_;
        const int C = g.cell_count();
        const double grav = prof_->config().g;
        LinearState d = LinearState::zero(g, s.xi);
        d.t = 1.0;
        d.eta1.cell = s.v1.cell;
        d.eta2.cell = s.v2.cell;
        d.eta3.node = s.v3.node;

        const cplx i1(0.0, s.xi[0]), i2(0.0, s.xi[1]);
        for (int c = 0; c < C; ++c) {
            const cplx div = i1 * s.v1(c) + i2 * s.v2(c) + s.v3.slope(g, c);
            d.sigma.cell[c] = -div;
            const cplx pressure_like = s.sigma(c) * cell_flux_[c] +
                                       grav * (s.eta3.node[c] * cell_rho_na_[c] +
                                               s.eta3.node[c + 1] * cell_rho_nb_[c]);
            d.v1.cell[c] = -i1 * pressure_like / cell_rho_[c];
            d.v2.cell[c] = -i2 * pressure_like / cell_rho_[c];
        }

        // weak vertical momentum: for each interior hat chi_j,
        //   int rho0 (dt v3) chi = int P' rho0 sigma chi' - g int rho0 sigma chi
        //                          - g int rho0 (eta3)' chi
        const int n = C - 1;
        std::vector<cplx> b(n, cplx(0.0, 0.0));
        for (int c = 0; c < C; ++c) {
            const double h = g.cell_width(c);
            const cplx flux = s.sigma(c) * cell_flux_[c];
            const cplx load = grav * (s.sigma(c) + s.eta3.slope(g, c));
            // node c carries slope -1/h on this cell, node c+1 carries +1/h
            if (c >= 1) b[c - 1] += flux * (-1.0 / h) - load * cell_rho_na_[c];
            if (c + 1 <= n) b[c] += flux * (1.0 / h) - load * cell_rho_nb_[c];
        }
        // tridiagonal LDL^T solve
        for (int j = 1; j < n; ++j) b[j] -= mass_l_[j - 1] * b[j - 1];
        for (int j = 0; j < n; ++j) b[j] /= mass_d_[j];
        for (int j = n - 2; j >= 0; --j) b[j] -= mass_l_[j] * b[j + 1];
        for (int j = 0; j < n; ++j) d.v3.node[j + 1] = b[j];
        return d;
    }

    /// Energy bookkeeping of the second-order form; dt_v must be the operator
    /// output at the same state (the equation's own time derivative, not a
    /// finite difference).
    EnergySample energy(const LinearState& s, const LinearState& dt_v) const {
        const auto& g = *grid_;
        const double grav = prof_->config().g;
        EnergySample out;
        out.t = s.t;
        const cplx i1(0.0, s.xi[0]), i2(0.0, s.xi[1]);
        for (int c = 0; c < g.cell_count(); ++c) {
            const cplx div = i1 * s.v1(c) + i2 * s.v2(c) + s.v3.slope(g, c);
            for (int k = 0; k < g.quad_points(); ++k) {
                const double x = g.qp_x(c, k), w = g.qp_w(c, k);
                const double rho = rho_qp_[c * g.quad_points() + k];
                const double pp = pp_qp_[c * g.quad_points() + k];
                const cplx v3x = s.v3.eval(g, c, x);
                const cplx dv3x = dt_v.v3.eval(g, c, x);
                const double dtv2 =
                    std::norm(dt_v.v1(c)) + std::norm(dt_v.v2(c)) + std::norm(dv3x);
                const cplx defect = div - grav / pp * v3x;
                out.kinetic += w * 0.5 * rho * dtv2;
                out.compression += w * 0.5 * pp * rho * std::norm(defect);
                out.l2_v += w * (std::norm(s.v1(c)) + std::norm(s.v2(c)) + std::norm(v3x));
                out.l2_dtv += w * dtv2;
            }
        }
        const cplx v30 = s.v3.node[g.interface_index()];
        out.interface = 0.5 * grav * prof_->density_jump() * std::norm(v30);
        out.total = out.kinetic + out.compression - out.interface;
        return out;
    }

    /// rho0-weighted L2 of the velocity triple, for the band-limit bound.
    double weighted_v_norm_sq(const LinearState& s) const {
        const auto& g = *grid_;
        double acc = 0.0;
        for (int c = 0; c < g.cell_count(); ++c)
            for (int k = 0; k < g.quad_points(); ++k) {
                const double w = g.qp_w(c, k);
                const double rho = rho_qp_[c * g.quad_points() + k];
                const cplx v3x = s.v3.eval(g, c, g.qp_x(c, k));
                acc += w * rho * (std::norm(s.v1(c)) + std::norm(s.v2(c)) + std::norm(v3x));
            }
        return acc;
    }

  private:
    const SteadyProfile* prof_;
    const VerticalGrid* grid_;
    std::vector<double> cell_rho_, cell_flux_, cell_rho_na_, cell_rho_nb_;
    std::vector<double> rho_qp_, pp_qp_;
    std::vector<double> mass_d_, mass_l_;
};

/// Eigenmode initial data at a full 2-D frequency: the mode profiles rotate
/// with the horizontal direction while the vertical profile is unchanged.
/// Unstable modes give the growing branch (rate lambda); stable modes with
/// mu > 0 give the single oscillatory branch exp(i sqrt(mu) t), whose norms
/// are constant in time.
inline LinearState eigenmode_state(const EvolutionOperator& op, const ModeSolution& mode,
                                   std::array<double, 2> xi) {
    const auto& g = op.grid();
    const double mag = std::hypot(xi[0], xi[1]);
    if (!(mag > 0.0)) throw std::invalid_argument("eigenmode_state: |xi| must be > 0");
    if (std::abs(mag - mode.wavenumber) > 1e-12 * mag)
        throw std::invalid_argument("eigenmode_state: mode solved at a different |xi|");
    const double e1 = xi[0] / mag, e2 = xi[1] / mag;
    cplx rate;
    if (mode.is_unstable) {
        rate = mode.growth_rate;
    } else {
        if (!(mode.eigenvalue > 0.0))
            throw std::invalid_argument("eigenmode_state: neutral mode has no branch");
        rate = cplx(0.0, std::sqrt(mode.eigenvalue));
    }
    LinearState s = LinearState::zero(g, xi);
    const cplx mi(0.0, -1.0);
    for (int c = 0; c < g.cell_count(); ++c) {
        const cplx h = mi * mode.horizontal(c);
        s.eta1.cell[c] = h * e1;
        s.eta2.cell[c] = h * e2;
        s.v1.cell[c] = rate * h * e1;
        s.v2.cell[c] = rate * h * e2;
        s.sigma.cell[c] = -(mag * mode.horizontal(c) + mode.vertical.slope(g, c));
    }
    for (int j = 0; j < g.node_count(); ++j) {
        s.eta3.node[j] = mode.vertical.node[j];
        s.v3.node[j] = rate * mode.vertical.node[j];
    }
    return s;
}

inline LinearState random_state(const VerticalGrid& g, std::array<double, 2> xi,
                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    LinearState s = LinearState::zero(g, xi);
    auto fill_cells = [&](P0Field<cplx>& f) {
        for (auto& v : f.cell) v = cplx(gauss(rng), gauss(rng));
    };
    auto fill_nodes = [&](P1Field<cplx>& f) {
        for (std::size_t j = 1; j + 1 < f.node.size(); ++j)
            f.node[j] = cplx(gauss(rng), gauss(rng));
    };
    fill_cells(s.eta1);
    fill_cells(s.eta2);
    fill_nodes(s.eta3);
    fill_cells(s.v1);
    fill_cells(s.v2);
    fill_nodes(s.v3);
    fill_cells(s.sigma);
    return s;
}

/// Smooth band-limit multiplier: 1 on [0, R/2], 0 outside [0, R), glued by
/// the standard exp(-1/x) partition.
inline double band_multiplier(double mag, double R) {
    const double s = mag / R;
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    auto bump = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double u = 2.0 * (1.0 - s);  // 1 at s = 1/2, 0 at s = 1
    return bump(u) / (bump(u) + bump(1.0 - u));
}

inline void project_band(LinearState& s, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("project_band: R must be > 0");
    s.scale(band_multiplier(std::hypot(s.xi[0], s.xi[1]), R));
}

inline void project_band(MultiState& ms, double R) {
    for (auto& s : ms) project_band(s, R);
}

/// Power iteration on the squared operator; the spectral radius of the RHS is
/// its square root (the spectrum is vertical-pair symmetric).
inline double spectral_radius_estimate(const EvolutionOperator& op,
                                       std::array<double, 2> xi, int iterations = 60,
                                       std::uint64_t seed = 2024) {
    LinearState x = random_state(op.grid(), xi, seed);
    double nu = 0.0;
    double nrm = x.coeff_norm();
    x.scale(1.0 / nrm);
    for (int it = 0; it < iterations; ++it) {
        LinearState y = op.rhs(x);
        LinearState z = op.rhs(y);
        nu = z.coeff_norm();
        if (!(nu > 0.0)) return 0.0;
        z.scale(1.0 / nu);
        x = std::move(z);
    }
    return std::sqrt(nu);
}

/// dt ceiling from the preflight probe against the classical RK4 stability
/// interval on the imaginary axis (2.828); 2.5 leaves margin.
inline double stable_dt(const EvolutionOperator& op, std::array<double, 2> xi) {
    const double rad = spectral_radius_estimate(op, xi);
    return rad > 0.0 ? 2.5 / rad : std::numeric_limits<double>::infinity();
}

struct Trajectory {
    std::vector<double> times;
    std::vector<MultiState> states;
    EnergyLedger ledger;
    double fitted_rate = 0.0;  // least-squares slope of log(|v|^2 + |dt v|^2), trailing half
};

struct IntegrateOptions {
    double t_end = 1.0;
    double dt = 1e-3;
    int samples = 33;                 // ledger/trajectory sample count (incl. endpoints)
    double growth_guard = 0.0;        // Lambda(R) for runaway detection; 0 disables
    double bound_rate = 0.0;          // Lambda(R) for the band-limit energy bound margin
    bool check_dt = true;
    bool backward = false;            // integrate the negated system (time reversal)
};

/// Classical RK4 on the frequency-diagonal system.  Each mode advances
/// independently; the ledger sums over modes at the sample instants.
inline Trajectory integrate(const EvolutionOperator& op, MultiState state,
                            const IntegrateOptions& opt) {
    if (!(opt.dt > 0.0) || !(opt.t_end > 0.0))
        throw std::invalid_argument("integrate: dt and t_end must be > 0");
    if (opt.check_dt) {
        for (const auto& s : state) {
            const double cap = stable_dt(op, s.xi);
            if (opt.dt > cap)
                throw std::invalid_argument("integrate: dt " + std::to_string(opt.dt) +
                                            " above the stability limit " + std::to_string(cap));
        }
    }
    const long steps = std::lround(opt.t_end / opt.dt);
    if (steps < 1) throw std::invalid_argument("integrate: no steps to take");
    const int samples = std::max(2, opt.samples);

    Trajectory traj;
    double norm0 = 0.0;
    for (const auto& s : state) norm0 += s.coeff_norm() * s.coeff_norm();
    norm0 = std::sqrt(norm0);

    auto record = [&](const MultiState& ms, double t) {
        EnergySample acc;
        acc.t = t;
        double wv = 0.0;
        for (const auto& s : ms) {
            const LinearState ds = op.rhs(s);
            const EnergySample e = op.energy(s, ds);
            acc.total += e.total;
            acc.kinetic += e.kinetic;
            acc.compression += e.compression;
            acc.interface += e.interface;
            acc.l2_v += e.l2_v;
            acc.l2_dtv += e.l2_dtv;
            wv += op.weighted_v_norm_sq(s);
        }
        if (opt.bound_rate > 0.0)
            acc.bound_margin = 0.5 * opt.bound_rate * opt.bound_rate * wv -
                               (acc.interface - acc.compression);
        traj.ledger.samples.push_back(acc);
        traj.times.push_back(t);
        traj.states.push_back(ms);
    };

    record(state, 0.0);
    const double dt_signed = opt.backward ? -opt.dt : opt.dt;
    long next_sample = 1;
    for (long step = 1; step <= steps; ++step) {
        for (auto& s : state) {
            LinearState k1 = op.rhs(s);
            LinearState u = s;
            u.axpy(0.5 * dt_signed, k1);
            LinearState k2 = op.rhs(u);
            u = s;
            u.axpy(0.5 * dt_signed, k2);
            LinearState k3 = op.rhs(u);
            u = s;
            u.axpy(dt_signed, k3);
            LinearState k4 = op.rhs(u);
            s.axpy(dt_signed / 6.0, k1);
            s.axpy(dt_signed / 3.0, k2);
            s.axpy(dt_signed / 3.0, k3);
            s.axpy(dt_signed / 6.0, k4);
            s.t = step * dt_signed;
        }
        const double t = step * opt.dt;
        if (opt.growth_guard > 0.0) {
            // runaway guard: rate margin of 1 over Lambda(R) plus a factor of
            // ten on the prefactor, ample for any band-limited solution
            double nrm = 0.0;
            for (const auto& s : state) nrm += s.coeff_norm() * s.coeff_norm();
            nrm = std::sqrt(nrm);
            const double cap = norm0 * std::exp((opt.growth_guard + 1.0) * t) * 10.0;
            if (nrm > cap)
                throw std::runtime_error("integrate: norm growth exceeds the band-limit rate at t = " +
                                         std::to_string(t));
        }
        if (step == steps || step * (samples - 1) >= next_sample * steps) {
            record(state, t);
            ++next_sample;
        }
    }

    // trailing-half fit of log(l2_v + l2_dtv) (squared norms) against t
    const auto& ss = traj.ledger.samples;
    const std::size_t n = ss.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = n / 2; i < n; ++i) {
        const double q = ss[i].l2_v + ss[i].l2_dtv;
        if (!(q > 0.0)) continue;
        const double x = ss[i].t, y = std::log(q);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) {
        const double det = cnt * sxx - sx * sx;
        if (det != 0.0) traj.fitted_rate = (cnt * sxy - sx * sy) / det;
    }
    return traj;
}

inline Trajectory integrate(const EvolutionOperator& op, const LinearState& s,
                            const IntegrateOptions& opt) {
    return integrate(op, MultiState{s}, opt);
}

/// Fitted exponential rate of the trajectory versus the band-limit ceiling
/// 2 Lambda(R); the Gronwall estimate asserts only the rate, no prefactor.
struct GrowthCheck {
    double fitted_rate = 0.0;
    double ceiling = 0.0;
    bool within = false;
};

inline GrowthCheck growth_rate_check(const Trajectory& traj, double Lambda_R,
                                     double tolerance = 1e-3) {
    GrowthCheck out;
    out.fitted_rate = traj.fitted_rate;
    out.ceiling = 2.0 * Lambda_R;
    out.within = out.fitted_rate <= out.ceiling + tolerance;
    return out;
}

}  // namespace rtstab
