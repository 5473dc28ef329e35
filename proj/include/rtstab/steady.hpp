#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "rtstab/barotropic.hpp"

namespace rtstab {

/// Which side of the interface x3 = 0 a point belongs to.  The steady density
/// has a genuine jump there, so evaluation at 0 always names a side.
enum class Side { lower, upper };

/// Two-fluid setup on the slab (-m, ell): gravity g, slab depths, interface
/// density of the lower fluid, and one pressure law per fluid.
struct TwoFluidConfig {
    double g = 1.0;
    double m = 1.0;
    double ell = 1.0;
    double rho0_minus = 1.0;
    BarotropicLaw law_minus = BarotropicLaw::isothermal(1.0);
    BarotropicLaw law_plus = BarotropicLaw::isothermal(1.0);

    void validate() const {
        if (!(g > 0.0)) throw std::invalid_argument("TwoFluidConfig: g must be > 0");
        if (!(m > 0.0)) throw std::invalid_argument("TwoFluidConfig: m must be > 0");
        if (!(ell > 0.0)) throw std::invalid_argument("TwoFluidConfig: ell must be > 0");
        if (!(rho0_minus > 0.0))
            throw std::invalid_argument("TwoFluidConfig: rho0_minus must be > 0");
    }
};

/// Upper interface density fixed by pressure continuity P+(rho0+) = P-(rho0-);
/// for the polytropic family this is (K-/K+)^(1/gamma+) (rho0-)^(gamma-/gamma+).
inline double rho0_plus(const TwoFluidConfig& cfg) {
    cfg.validate();
    const double Km = cfg.law_minus.scale(), Kp = cfg.law_plus.scale();
    const double gm = cfg.law_minus.exponent(), gp = cfg.law_plus.exponent();
    return std::pow(Km / Kp, 1.0 / gp) * std::pow(cfg.rho0_minus, gm / gp);
}

struct InstabilityDiagnostic {
    bool unstable = false;
    double rho0_plus = 0.0;
    double density_jump = 0.0;   // rho0+ - rho0-
    double regime_lhs = 0.0;     // (rho0-)^(gamma- - gamma+)
    double regime_rhs = 0.0;     // K+/K-
};

/// True iff the upper fluid is denser at the interface (density jump > 0),
/// equivalently (rho0-)^(gamma- - gamma+) > K+/K- for polytropic laws.
inline InstabilityDiagnostic check_instability(const TwoFluidConfig& cfg) {
    InstabilityDiagnostic d;
    d.rho0_plus = rho0_plus(cfg);
    d.density_jump = d.rho0_plus - cfg.rho0_minus;
    d.regime_lhs = std::pow(cfg.rho0_minus,
                            cfg.law_minus.exponent() - cfg.law_plus.exponent());
    d.regime_rhs = cfg.law_plus.scale() / cfg.law_minus.scale();
    d.unstable = d.density_jump > 0.0;
    return d;
}

/// Hydrostatic steady density rho0 on (-m, 0) u (0, ell).  Each slab solves
/// d(enthalpy(rho0))/dx3 = -g anchored at its interface density, so
///   rho0(x3) = enthalpy_inv(enthalpy(rho_iface) - g x3)
/// with the closed-form inverse of the slab's law.  Isothermal slabs reduce to
/// rho_iface * exp(-g x3 / K).
class SteadyProfile {
  public:
    explicit SteadyProfile(const TwoFluidConfig& cfg)
        : cfg_(cfg), rho_plus_(rtstab::rho0_plus(cfg)) {
        cfg.validate();
        // The upper slab must not drain: for gamma+ > 1 the density hits zero
        // at x3 = K+ gamma+ / (g (gamma+ - 1)) * (rho0+)^(gamma+ - 1).
        const auto& lp = cfg_.law_plus;
        if (!lp.is_isothermal()) {
            const double ell_max = lp.scale() * lp.exponent() /
                                   (cfg_.g * (lp.exponent() - 1.0)) *
                                   std::pow(rho_plus_, lp.exponent() - 1.0);
            if (!(cfg_.ell < ell_max))
                throw std::invalid_argument(
                    "SteadyProfile: upper slab inadmissible, ell must be < " +
                    std::to_string(ell_max));
        }
        // The lower slab gains enthalpy downward, which stays in the image for
        // every law in the family; nothing to check for gamma- >= 1.
        h_anchor_minus_ = cfg_.law_minus.enthalpy(cfg_.rho0_minus);
        h_anchor_plus_ = cfg_.law_plus.enthalpy(rho_plus_);
    }

    const TwoFluidConfig& config() const { return cfg_; }
    double rho0_plus() const { return rho_plus_; }
    double rho0_minus() const { return cfg_.rho0_minus; }
    double density_jump() const { return rho_plus_ - cfg_.rho0_minus; }
    double interface_density(Side s) const {
        return s == Side::lower ? cfg_.rho0_minus : rho_plus_;
    }
    const BarotropicLaw& law(Side s) const {
        return s == Side::lower ? cfg_.law_minus : cfg_.law_plus;
    }

    /// rho0(x3); the side flag decides the branch and is mandatory at x3 = 0.
    double density(double x3, Side s) const {
        check_range(x3, s);
        const auto& l = law(s);
        const double h0 = s == Side::lower ? h_anchor_minus_ : h_anchor_plus_;
        return l.enthalpy_inv(h0 - cfg_.g * x3);
    }

    /// rho0'(x3) = -g rho0 / P'(rho0).
    double density_gradient(double x3, Side s) const {
        const double rho = density(x3, s);
        return -cfg_.g * rho / law(s).dpressure(rho);
    }

    Side side_of(double x3) const {
        if (x3 < 0.0) return Side::lower;
        if (x3 > 0.0) return Side::upper;
        throw std::domain_error("SteadyProfile: x3 = 0 requires an explicit side");
    }

  private:
    void check_range(double x3, Side s) const {
        const bool ok = s == Side::lower ? (x3 >= -cfg_.m && x3 <= 0.0)
                                         : (x3 >= 0.0 && x3 <= cfg_.ell);
        if (!ok)
            throw std::domain_error("SteadyProfile: x3 = " + std::to_string(x3) +
                                    " outside the requested slab");
    }

    TwoFluidConfig cfg_;
    double rho_plus_;
    double h_anchor_minus_ = 0.0;
    double h_anchor_plus_ = 0.0;
};

inline SteadyProfile build_profile(const TwoFluidConfig& cfg) { return SteadyProfile(cfg); }

}  // namespace rtstab
