#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rtstab {

enum class LawKind { polytropic, isothermal };

/// Barotropic pressure law of one fluid: P(rho) = K rho^gamma with K > 0 and
/// gamma >= 1.  gamma == 1 (isothermal) is dispatched as its own branch
/// everywhere; it is never reached as a numerical limit of the gamma > 1
/// formulas.  The derived enthalpy is normalized so that enthalpy(1) = 0.
class BarotropicLaw {
  public:
    static BarotropicLaw polytropic(double K, double gamma) {
        if (!(K > 0.0)) throw std::invalid_argument("BarotropicLaw: K must be > 0");
        if (!(gamma >= 1.0)) throw std::invalid_argument("BarotropicLaw: gamma must be >= 1");
        return BarotropicLaw(gamma == 1.0 ? LawKind::isothermal : LawKind::polytropic, K, gamma);
    }
    static BarotropicLaw isothermal(double K) {
        if (!(K > 0.0)) throw std::invalid_argument("BarotropicLaw: K must be > 0");
        return BarotropicLaw(LawKind::isothermal, K, 1.0);
    }

    LawKind kind() const { return kind_; }
    double scale() const { return K_; }
    double exponent() const { return gamma_; }
    bool is_isothermal() const { return kind_ == LawKind::isothermal; }

    /// P(rho) = K rho^gamma.
    double pressure(double rho) const {
        require_density(rho);
        return is_isothermal() ? K_ * rho : K_ * std::pow(rho, gamma_);
    }

    /// P'(rho) = K gamma rho^(gamma-1); strictly positive on (0, inf).
    double dpressure(double rho) const {
        require_density(rho);
        return is_isothermal() ? K_ : K_ * gamma_ * std::pow(rho, gamma_ - 1.0);
    }

    /// P''(rho) = K gamma (gamma-1) rho^(gamma-2).
    double d2pressure(double rho) const {
        require_density(rho);
        return is_isothermal() ? 0.0 : K_ * gamma_ * (gamma_ - 1.0) * std::pow(rho, gamma_ - 2.0);
    }

    /// Specific enthalpy, the antiderivative of P'(r)/r with enthalpy(1) = 0:
    /// gamma > 1: K gamma/(gamma-1) (rho^(gamma-1) - 1);  gamma = 1: K log rho.
    double enthalpy(double rho) const {
        require_density(rho);
        if (is_isothermal()) return K_ * std::log(rho);
        return K_ * gamma_ / (gamma_ - 1.0) * (std::pow(rho, gamma_ - 1.0) - 1.0);
    }

    /// Lower endpoint of the enthalpy image: -K gamma/(gamma-1) for gamma > 1,
    /// -inf for the isothermal law.
    double enthalpy_inf() const {
        return is_isothermal() ? -std::numeric_limits<double>::infinity()
                               : -K_ * gamma_ / (gamma_ - 1.0);
    }

    /// Closed-form inverse of enthalpy; y must lie in the image.
    double enthalpy_inv(double y) const {
        if (is_isothermal()) return std::exp(y / K_);
        const double lo = enthalpy_inf();
        if (!(y > lo))
            throw std::range_error("BarotropicLaw::enthalpy_inv: argument " + std::to_string(y) +
                                   " outside image (" + std::to_string(lo) + ", inf)");
        return std::pow(1.0 + (gamma_ - 1.0) * y / (K_ * gamma_), 1.0 / (gamma_ - 1.0));
    }

  private:
    BarotropicLaw(LawKind kind, double K, double gamma) : kind_(kind), K_(K), gamma_(gamma) {}

    static void require_density(double rho) {
        if (!(rho > 0.0))
            throw std::domain_error("BarotropicLaw: density must be > 0, got " +
                                    std::to_string(rho));
    }

    LawKind kind_;
    double K_;
    double gamma_;
};

}  // namespace rtstab
