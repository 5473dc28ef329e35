#pragma once

#include "rtstab/steady.hpp"

namespace rtstab::testing {

// Reference two-fluid setup used throughout the tests: isothermal laws with
// K- = 2 over K+ = 1, unit gravity and unit slabs, so rho0+ = 2 and the
// density jump is 1.
inline TwoFluidConfig reference_iso_config() {
    TwoFluidConfig cfg;
    cfg.g = 1.0;
    cfg.m = 1.0;
    cfg.ell = 1.0;
    cfg.rho0_minus = 1.0;
    cfg.law_minus = BarotropicLaw::isothermal(2.0);
    cfg.law_plus = BarotropicLaw::isothermal(1.0);
    return cfg;
}

}  // namespace rtstab::testing
