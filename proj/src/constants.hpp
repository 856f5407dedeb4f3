#pragma once

#include <cmath>

#include "error.hpp"

namespace dpc {

// Physical constants threaded through every energy computation. xi is the
// prefactor convention of the double-integral interaction energy; 1/2 makes
// all three computational routes to the interaction energy agree.
struct PhysicalConstants {
    double G;
    double hbar;
    double c;
    double xi = 0.5;

    static PhysicalConstants si() {
        return {6.67430e-11, 1.054571817e-34, 299792458.0, 0.5};
    }

    // G = hbar = c = 1. Handy for tests and for the worked examples.
    static PhysicalConstants dimensionless() { return {1.0, 1.0, 1.0, 0.5}; }

    void validate() const {
        if (!(G > 0.0) || !std::isfinite(G)) fail_config("constants: G must be positive and finite");
        if (!(hbar > 0.0) || !std::isfinite(hbar)) fail_config("constants: hbar must be positive and finite");
        if (!(c > 0.0) || !std::isfinite(c)) fail_config("constants: c must be positive and finite");
        if (!(xi > 0.0) || !std::isfinite(xi)) fail_config("constants: xi must be positive and finite");
    }
};

}  // namespace dpc
