#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rtstab/quadrature.hpp"
#include "rtstab/steady.hpp"

namespace rtstab {

enum class Grading { uniform, geometric };

struct GridSpec {
    int n_lower = 256;
    int n_upper = 256;
    Grading grading = Grading::uniform;
    double grading_ratio = 1.0;  // cell-width ratio moving away from the interface
    int quad_order = 4;
};

/// Vertical mesh of (-m, 0) u (0, ell) with x3 = 0 a mandatory node, so no
/// cell straddles the interface.  Cells below the interface are tagged lower.
/// Each cell carries the same Gauss-Legendre rule, cached in mapped form.
class VerticalGrid {
  public:
    VerticalGrid(double m, double ell, const GridSpec& spec) {
        if (!(m > 0.0) || !(ell > 0.0))
            throw std::invalid_argument("VerticalGrid: slab depths must be > 0");
        if (spec.n_lower < 2 || spec.n_upper < 2)
            throw std::invalid_argument("VerticalGrid: need at least 2 cells per side");
        if (spec.quad_order < 1)
            throw std::invalid_argument("VerticalGrid: quadrature order must be >= 1");
        if (spec.grading == Grading::geometric && !(spec.grading_ratio > 0.0))
            throw std::invalid_argument("VerticalGrid: grading ratio must be > 0");

        const double r = spec.grading == Grading::geometric ? spec.grading_ratio : 1.0;
        auto widths = [&](double extent, int n) {
            std::vector<double> w(n);
            if (r == 1.0) {
                for (int i = 0; i < n; ++i) w[i] = extent / n;
            } else {
                // w0 nearest the interface, growing by r outward
                double s = (std::pow(r, n) - 1.0) / (r - 1.0);
                double w0 = extent / s;
                for (int i = 0; i < n; ++i) w[i] = w0 * std::pow(r, i);
            }
            return w;
        };

        const auto wl = widths(m, spec.n_lower);
        const auto wu = widths(ell, spec.n_upper);
        interface_index_ = spec.n_lower;
        nodes_.resize(spec.n_lower + spec.n_upper + 1);
        nodes_[interface_index_] = 0.0;
        for (int i = 0; i < spec.n_lower; ++i)
            nodes_[interface_index_ - 1 - i] = nodes_[interface_index_ - i] - wl[i];
        nodes_.front() = -m;
        for (int i = 0; i < spec.n_upper; ++i)
            nodes_[interface_index_ + 1 + i] = nodes_[interface_index_ + i] + wu[i];
        nodes_.back() = ell;

        rule_ = gauss_legendre(spec.quad_order);
        const int C = cell_count();
        qp_x_.resize(C * quad_points());
        qp_w_.resize(C * quad_points());
        for (int c = 0; c < C; ++c) {
            const double a = nodes_[c], b = nodes_[c + 1];
            if (!(b > a)) throw std::invalid_argument("VerticalGrid: nonpositive cell width");
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (int k = 0; k < quad_points(); ++k) {
                qp_x_[c * quad_points() + k] = mid + half * rule_.nodes[k];
                qp_w_[c * quad_points() + k] = half * rule_.weights[k];
            }
        }
    }

    int cell_count() const { return static_cast<int>(nodes_.size()) - 1; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int interface_index() const { return interface_index_; }
    int quad_points() const { return static_cast<int>(rule_.nodes.size()); }
    double node(int i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double lower_end() const { return nodes_.front(); }
    double upper_end() const { return nodes_.back(); }
    double cell_width(int c) const { return nodes_[c + 1] - nodes_[c]; }
    Side cell_side(int c) const { return c < interface_index_ ? Side::lower : Side::upper; }
    double qp_x(int c, int k) const { return qp_x_[c * quad_points() + k]; }
    double qp_w(int c, int k) const { return qp_w_[c * quad_points() + k]; }

    int cell_of(double x3) const {
        if (x3 < nodes_.front() || x3 > nodes_.back())
            throw std::domain_error("VerticalGrid: point outside the slab");
        int lo = 0, hi = cell_count() - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (x3 <= nodes_[mid + 1]) hi = mid; else lo = mid + 1;
        }
        return lo;
    }
    int cell_of(double x3, Side s) const {
        if (x3 == 0.0) return s == Side::lower ? interface_index_ - 1 : interface_index_;
        int c = cell_of(x3);
        // a node hit between two cells of the same side is unambiguous
        if (cell_side(c) != s && x3 == nodes_[c]) c -= 1;
        if (cell_side(c) != s)
            throw std::domain_error("VerticalGrid: point not on the requested side");
        return c;
    }

  private:
    std::vector<double> nodes_;
    int interface_index_ = 0;
    GaussRule rule_;
    std::vector<double> qp_x_, qp_w_;
};

inline VerticalGrid build_grid(double m, double ell, int n_lower, int n_upper,
                               Grading grading = Grading::uniform, double ratio = 1.0,
                               int quad_order = 4) {
    GridSpec spec;
    spec.n_lower = n_lower;
    spec.n_upper = n_upper;
    spec.grading = grading;
    spec.grading_ratio = ratio;
    spec.quad_order = quad_order;
    return VerticalGrid(m, ell, spec);
}

/// Per-cell constants; the discrete stand-in for L^2 data.
template <class T = double>
struct P0Field {
    std::vector<T> cell;
    P0Field() = default;
    explicit P0Field(int n, T v = T{}) : cell(n, v) {}
    T operator()(int c) const { return cell[c]; }
};

/// Continuous piecewise-linear nodal values; with the two end values held at
/// zero this models H_0^1.
template <class T = double>
struct P1Field {
    std::vector<T> node;
    P1Field() = default;
    explicit P1Field(int n, T v = T{}) : node(n, v) {}

    T eval(const VerticalGrid& g, int c, double x) const {
        const double a = g.node(c), h = g.cell_width(c);
        const double s = (x - a) / h;
        return node[c] * (1.0 - s) + node[c + 1] * s;
    }
    T slope(const VerticalGrid& g, int c) const {
        return (node[c + 1] - node[c]) / g.cell_width(c);
    }
};

template <class T>
P0Field<T> derivative(const VerticalGrid& g, const P1Field<T>& f) {
    P0Field<T> d(g.cell_count());
    for (int c = 0; c < g.cell_count(); ++c) d.cell[c] = f.slope(g, c);
    return d;
}

/// Sum of per-cell Gauss-Legendre quadratures of fn(x3).
template <class F>
double integrate(const VerticalGrid& g, F&& fn) {
    double sum = 0.0;
    for (int c = 0; c < g.cell_count(); ++c)
        for (int k = 0; k < g.quad_points(); ++k) sum += g.qp_w(c, k) * fn(g.qp_x(c, k));
    return sum;
}

/// Same, with the cell index available to the integrand.
template <class F>
double integrate_cells(const VerticalGrid& g, F&& fn) {
    double sum = 0.0;
    for (int c = 0; c < g.cell_count(); ++c)
        for (int k = 0; k < g.quad_points(); ++k) sum += g.qp_w(c, k) * fn(c, g.qp_x(c, k));
    return sum;
}

/// Squared L^2 norms of the vertical derivatives d^j f, j = 0..j_max,
/// accumulated separately on the lower and the upper slab.  The evaluator
/// receives (j, cell, x3).
template <class F>
std::vector<std::pair<double, double>> piecewise_hk_seminorms(const VerticalGrid& g, int j_max,
                                                              F&& deriv) {
    std::vector<std::pair<double, double>> out(j_max + 1, {0.0, 0.0});
    for (int c = 0; c < g.cell_count(); ++c) {
        const bool lower = g.cell_side(c) == Side::lower;
        for (int k = 0; k < g.quad_points(); ++k) {
            const double x = g.qp_x(c, k), w = g.qp_w(c, k);
            for (int j = 0; j <= j_max; ++j) {
                const double v = deriv(j, c, x);
                (lower ? out[j].first : out[j].second) += w * v * v;
            }
        }
    }
    return out;
}

/// Raw-field variant: a P1c field supports j_max <= 1 (value and cell slope).
template <class T>
std::vector<std::pair<double, double>> piecewise_hk_seminorms(const VerticalGrid& g,
                                                              const P1Field<T>& f, int j_max) {
    if (j_max > 1)
        throw std::invalid_argument(
            "piecewise_hk_seminorms: raw P1c fields carry derivatives up to order 1 only");
    return piecewise_hk_seminorms(g, j_max, [&](int j, int c, double x) {
        return j == 0 ? f.eval(g, c, x) : f.slope(g, c);
    });
}

}  // namespace rtstab
