#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtstab {

/// Symmetric banded matrix, lower storage: entry(i, j) kept for 0 <= i - j <= kb.
class SymBanded {
  public:
    SymBanded() = default;
    SymBanded(int n, int kb) : n_(n), kb_(kb), a_((kb + 1) * n, 0.0) {}

    int size() const { return n_; }
    int bandwidth() const { return kb_; }

    double get(int i, int j) const {
        if (i < j) std::swap(i, j);
        if (i - j > kb_) return 0.0;
        return a_[(i - j) * n_ + j];
    }
    /// Accumulate v into the (i, j) entry of the symmetric matrix.
    void add(int i, int j, double v) {
        if (i < j) std::swap(i, j);
        a_[(i - j) * n_ + j] += v;
    }

    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            y[j] += a_[j] * x[j];
            for (int d = 1; d <= kb_ && j + d < n_; ++d) {
                const double v = a_[d * n_ + j];
                y[j + d] += v * x[j];
                y[j] += v * x[j + d];
            }
        }
    }

    double quad_form(const std::vector<double>& x) const {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) {
            s += a_[j] * x[j] * x[j];
            for (int d = 1; d <= kb_ && j + d < n_; ++d)
                s += 2.0 * a_[d * n_ + j] * x[j] * x[j + d];
        }
        return s;
    }

    double max_abs_diag() const {
        double m = 0.0;
        for (int j = 0; j < n_; ++j) m = std::max(m, std::abs(a_[j]));
        return m;
    }

  private:
    int n_ = 0, kb_ = 0;
    std::vector<double> a_;
};

/// Banded LDL^T factorization of E - sigma*J without pivoting.  Stable enough
/// for inertia counts: a vanishing pivot is nudged to +tiny, which at worst
/// misattributes an eigenvalue equal to sigma itself.
class BandedLDLT {
  public:
    BandedLDLT(const SymBanded& E, const SymBanded& J, double sigma)
        : n_(E.size()), kb_(std::max(E.bandwidth(), J.bandwidth())),
          l_((kb_ + 1) * n_, 0.0), d_(n_, 0.0) {
        for (int j = 0; j < n_; ++j)
            for (int d = 0; d <= kb_; ++d)
                if (j + d < n_) l_[d * n_ + j] = E.get(j + d, j) - sigma * J.get(j + d, j);
        const double tiny = 1e-300;
        for (int j = 0; j < n_; ++j) {
            double dj = l_[j];
            const int k0 = std::max(0, j - kb_);
            for (int k = k0; k < j; ++k) {
                const double ljk = l_[(j - k) * n_ + k];
                dj -= ljk * ljk * d_[k];
            }
            if (dj == 0.0) dj = tiny;
            d_[j] = dj;
            if (dj < 0.0) ++neg_;
            for (int i = j + 1; i <= std::min(n_ - 1, j + kb_); ++i) {
                double v = l_[(i - j) * n_ + j];
                for (int k = std::max(0, i - kb_); k < j; ++k)
                    v -= l_[(i - k) * n_ + k] * l_[(j - k) * n_ + k] * d_[k];
                l_[(i - j) * n_ + j] = v / dj;
            }
        }
    }

    /// Number of eigenvalues of the pencil (E, J) strictly below sigma.
    int negative_count() const { return neg_; }

    void solve(std::vector<double>& x) const {
        for (int j = 0; j < n_; ++j)
            for (int d = 1; d <= kb_ && j + d < n_; ++d) x[j + d] -= l_[d * n_ + j] * x[j];
        for (int j = 0; j < n_; ++j) x[j] /= d_[j];
        for (int j = n_ - 1; j >= 0; --j)
            for (int d = 1; d <= kb_ && j + d < n_; ++d) x[j] -= l_[d * n_ + j] * x[j + d];
    }

  private:
    int n_, kb_;
    std::vector<double> l_;
    std::vector<double> d_;
    int neg_ = 0;
};

inline int pencil_count_below(const SymBanded& E, const SymBanded& J, double sigma) {
    return BandedLDLT(E, J, sigma).negative_count();
}

struct PencilEigResult {
    double value = 0.0;           // smallest generalized eigenvalue
    double second = 0.0;          // next one up (gap diagnostic)
    std::vector<double> vector;   // J-normalized: x^T J x = 2
    int bisections = 0;
    int iterations = 0;
};

/// Smallest eigenvalue of the symmetric pencil E x = mu J x (J SPD) by inertia
/// bisection on the banded LDL^T, then shift-invert inverse iteration just
/// above the converged bracket.  lower_bound must certifiably sit at or below
/// the spectrum; the caller has -g|xi| available for that.
inline PencilEigResult pencil_smallest(const SymBanded& E, const SymBanded& J,
                                       double lower_bound, std::uint64_t seed = 12345) {
    const int n = E.size();
    if (n < 1) throw std::invalid_argument("pencil_smallest: empty problem");
    const double scale = std::max({1.0, E.max_abs_diag(), J.max_abs_diag()});

    double lo = lower_bound - 1e-12 * (std::abs(lower_bound) + scale);
    {
        int guard = 0;
        while (pencil_count_below(E, J, lo) > 0) {
            lo -= std::max(1.0, std::abs(lo));
            if (++guard > 64)
                throw std::runtime_error("pencil_smallest: cannot certify lower bound, lo = " +
                                         std::to_string(lo));
        }
    }
    // Any Rayleigh quotient bounds the minimum from above; basis vectors are free.
    double hi = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        const double jj = J.get(j, j);
        if (jj > 0.0) hi = std::min(hi, E.get(j, j) / jj);
    }
    hi += 1e-12 * (std::abs(hi) + scale);
    {
        int guard = 0;
        while (pencil_count_below(E, J, hi) < 1) {
            hi += std::max(1.0, std::abs(hi));
            if (++guard > 64)
                throw std::runtime_error("pencil_smallest: no eigenvalue under upper probe");
        }
    }

    PencilEigResult res;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (pencil_count_below(E, J, mid) >= 1) hi = mid; else lo = mid;
        ++res.bisections;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
    }

    // Inverse iteration anchored between mu_1 and mu_2.
    double shift = hi + std::max(4.0 * (hi - lo), 1e-13 * std::max(1.0, std::abs(hi)));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(n), jx(n), ex(n);
    for (auto& v : x) v = gauss(rng);
    double mu = hi;
    for (int it = 0; it < 50; ++it) {
        ++res.iterations;
        BandedLDLT fac(E, J, shift);
        J.matvec(x, jx);
        fac.solve(jx);
        x.swap(jx);
        const double nrm = std::sqrt(J.quad_form(x));
        if (!(nrm > 0.0) || !std::isfinite(nrm))
            throw std::runtime_error("pencil_smallest: inverse iteration breakdown at shift " +
                                     std::to_string(shift));
        for (auto& v : x) v /= nrm;
        mu = E.quad_form(x) / J.quad_form(x);
        E.matvec(x, ex);
        J.matvec(x, jx);
        double rnorm = 0.0, xnorm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = ex[i] - mu * jx[i];
            rnorm += r * r;
            xnorm += jx[i] * jx[i];
        }
        if (std::sqrt(rnorm) <= 1e-11 * scale * std::sqrt(std::max(1e-300, xnorm) / n) ||
            std::sqrt(rnorm) <= 1e-13 * scale)
            break;
    }
    const double jq = J.quad_form(x);
    const double fac = std::sqrt(2.0 / jq);
    for (auto& v : x) v *= fac;
    res.value = mu;
    res.vector = std::move(x);

    // Second eigenvalue by the same counting argument, for the gap report.
    if (n >= 2) {
        double lo2 = hi, hi2 = std::max(hi + 1.0, hi + std::abs(hi));
        int guard = 0;
        while (pencil_count_below(E, J, hi2) < 2) {
            hi2 += std::max(1.0, std::abs(hi2));
            if (++guard > 200) break;
        }
        for (int it = 0; it < 120 && hi2 - lo2 > 1e-12 * std::max(1.0, std::abs(hi2)); ++it) {
            const double mid = 0.5 * (lo2 + hi2);
            if (pencil_count_below(E, J, mid) >= 2) hi2 = mid; else lo2 = mid;
        }
        res.second = 0.5 * (lo2 + hi2);
    } else {
        res.second = res.value;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Dense reference path: Cholesky of J, congruence to standard form, Householder
// tridiagonalization, Sturm bisection.  O(n^3); kept as the independent check
// and oracle route for the banded solver.
// ---------------------------------------------------------------------------

struct DenseSym {
    int n = 0;
    std::vector<double> a;  // row-major, full symmetric storage
    explicit DenseSym(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

inline DenseSym to_dense(const SymBanded& b) {
    DenseSym d(b.size());
    for (int i = 0; i < b.size(); ++i)
        for (int j = std::max(0, i - b.bandwidth()); j <= i; ++j) {
            d.at(i, j) = b.get(i, j);
            d.at(j, i) = b.get(i, j);
        }
    return d;
}

/// In-place lower Cholesky; throws if not SPD.
inline void dense_cholesky(DenseSym& m) {
    const int n = m.n;
    for (int j = 0; j < n; ++j) {
        double d = m.at(j, j);
        for (int k = 0; k < j; ++k) d -= m.at(j, k) * m.at(j, k);
        if (!(d > 0.0)) throw std::runtime_error("dense_cholesky: matrix not positive definite");
        d = std::sqrt(d);
        m.at(j, j) = d;
        for (int i = j + 1; i < n; ++i) {
            double v = m.at(i, j);
            for (int k = 0; k < j; ++k) v -= m.at(i, k) * m.at(j, k);
            m.at(i, j) = v / d;
        }
        for (int i = 0; i < j; ++i) m.at(i, j) = 0.0;
    }
}

/// Smallest eigenvalue (and eigenvector) of the dense pencil via
/// C = L^-1 E L^-T, tridiagonalization, bisection and tridiagonal inverse
/// iteration.  Vector comes back J-normalized like the banded path.
inline PencilEigResult dense_pencil_smallest(const SymBanded& Eb, const SymBanded& Jb) {
    const int n = Eb.size();
    DenseSym L = to_dense(Jb);
    dense_cholesky(L);
    DenseSym C = to_dense(Eb);
    // C <- L^-1 C: forward-solve each column
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double v = C.at(i, j);
            for (int k = 0; k < i; ++k) v -= L.at(i, k) * C.at(k, j);
            C.at(i, j) = v / L.at(i, i);
        }
    // C <- C L^-T: forward-solve each row (same triangular factor)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = C.at(i, j);
            for (int k = 0; k < j; ++k) v -= C.at(i, k) * L.at(j, k);
            C.at(i, j) = v / L.at(j, j);
        }

    // Householder tridiagonalization, accumulating the transform lazily in C's
    // lower part (reflectors) for the back-substitution of the eigenvector.
    std::vector<double> diag(n), sub(std::max(0, n - 1));
    std::vector<std::vector<double>> reflectors;
    reflectors.reserve(std::max(0, n - 2));
    std::vector<double> p(n), w(n);
    for (int k = 0; k < n - 2; ++k) {
        double sigma = 0.0;
        for (int i = k + 1; i < n; ++i) sigma += C.at(i, k) * C.at(i, k);
        double alpha = std::sqrt(sigma);
        if (C.at(k + 1, k) > 0.0) alpha = -alpha;
        diag[k] = C.at(k, k);
        if (sigma == 0.0) {
            sub[k] = C.at(k + 1, k);
            reflectors.emplace_back();
            continue;
        }
        std::vector<double> v(n, 0.0);
        v[k + 1] = C.at(k + 1, k) - alpha;
        for (int i = k + 2; i < n; ++i) v[i] = C.at(i, k);
        double vnorm2 = 0.0;
        for (int i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) {
            sub[k] = alpha;
            reflectors.emplace_back();
            continue;
        }
        const double beta = 2.0 / vnorm2;
        // p = beta * C v ; w = p - (beta/2)(v.p) v ; C <- C - v w^T - w v^T
        for (int i = k + 1; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += C.at(i, j) * v[j];
            p[i] = beta * s;
        }
        double vp = 0.0;
        for (int i = k + 1; i < n; ++i) vp += v[i] * p[i];
        for (int i = k + 1; i < n; ++i) w[i] = p[i] - 0.5 * beta * vp * v[i];
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j <= i; ++j) {
                const double upd = C.at(i, j) - v[i] * w[j] - w[i] * v[j];
                C.at(i, j) = upd;
                C.at(j, i) = upd;
            }
        sub[k] = alpha;
        reflectors.push_back(std::move(v));
    }
    if (n >= 2) {
        diag[n - 2] = C.at(n - 2, n - 2);
        sub[n - 2] = C.at(n - 1, n - 2);
    }
    diag[n - 1] = C.at(n - 1, n - 1);

    // Sturm count for the tridiagonal (diag, sub)
    auto count_below = [&](double x) {
        int cnt = 0;
        double d = diag[0] - x;
        if (d < 0.0) ++cnt;
        for (int i = 1; i < n; ++i) {
            const double e = sub[i - 1];
            double denom = d;
            if (denom == 0.0) denom = 1e-300;
            d = diag[i] - x - e * e / denom;
            if (d < 0.0) ++cnt;
        }
        return cnt;
    };
    double rad = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = std::abs(diag[i]);
        if (i > 0) r += std::abs(sub[i - 1]);
        if (i + 1 < n) r += std::abs(sub[i]);
        rad = std::max(rad, r);
    }
    double lo = -rad - 1.0, hi = rad + 1.0;
    for (int it = 0; it < 220 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1) hi = mid; else lo = mid;
    }
    const double mu = 0.5 * (lo + hi);

    // Tridiagonal inverse iteration at a shift nudged off the eigenvalue.
    std::vector<double> y(n, 1.0);
    {
        const double shift = hi + std::max(1e-12 * std::max(1.0, std::abs(hi)), 8.0 * (hi - lo));
        std::vector<double> dl(n), du(n), b(n);
        std::mt19937_64 rng(991);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& v : y) v = gauss(rng);
        for (int sweep = 0; sweep < 4; ++sweep) {
            // Thomas algorithm with partial row scaling
            for (int i = 0; i < n; ++i) {
                dl[i] = diag[i] - shift;
                du[i] = i + 1 < n ? sub[i] : 0.0;
                b[i] = y[i];
            }
            std::vector<double> low(n, 0.0);
            for (int i = 0; i + 1 < n; ++i) low[i] = sub[i];
            for (int i = 0; i + 1 < n; ++i) {
                if (dl[i] == 0.0) dl[i] = 1e-300;
                const double m = low[i] / dl[i];
                dl[i + 1] -= m * du[i];
                b[i + 1] -= m * b[i];
            }
            if (dl[n - 1] == 0.0) dl[n - 1] = 1e-300;
            y[n - 1] = b[n - 1] / dl[n - 1];
            for (int i = n - 2; i >= 0; --i) y[i] = (b[i] - du[i] * y[i + 1]) / dl[i];
            double nrm = 0.0;
            for (double v : y) nrm += v * v;
            nrm = std::sqrt(nrm);
            for (auto& v : y) v /= nrm;
        }
    }

    // Undo the Householder reflectors, then z = L^-T y gives the pencil vector.
    for (int k = static_cast<int>(reflectors.size()) - 1; k >= 0; --k) {
        const auto& v = reflectors[k];
        if (v.empty()) continue;
        double vnorm2 = 0.0, vy = 0.0;
        for (int i = k + 1; i < n; ++i) {
            vnorm2 += v[i] * v[i];
            vy += v[i] * y[i];
        }
        const double beta = 2.0 / vnorm2;
        for (int i = k + 1; i < n; ++i) y[i] -= beta * vy * v[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = y[i];
        for (int k = i + 1; k < n; ++k) v -= L.at(k, i) * y[k];
        y[i] = v / L.at(i, i);
    }
    const double jq = Jb.quad_form(y);
    const double fac = std::sqrt(2.0 / jq);
    for (auto& v : y) v *= fac;

    PencilEigResult res;
    res.value = mu;
    res.second = mu;
    res.vector = std::move(y);
    return res;
}

}  // namespace rtstab
