#pragma once

#include <cmath>

namespace dpc {

// (3/(4 pi))^(1/3): radius of the ball with the volume of a unit cube.
inline constexpr double kEquivalentBallRadius = 0.6203504908994001;

// Coulomb kernel for fields sampled on cubic cells of side h. Outside a
// small ball it is the plain 1/r; the self cell is treated as a homogeneous
// ball of the cell's volume, so K(0) = (3/2)/r_eq with r_eq ~ 0.6204 h.
// The ball lies below the nearest-neighbor distance, so only the self term
// departs from 1/r. One kernel is shared by the pairwise energy sum,
// potential evaluation and both summation backends, which makes the
// double-integral and potential-form energies agree to roundoff on a grid.
struct CellKernel {
    double rb;     // smoothing radius
    double rb2;
    double a0, a2; // K(r) = a0 - a2 r^2 inside the ball

    explicit CellKernel(double h) {
        rb = kEquivalentBallRadius * h;
        rb2 = rb * rb;
        const double rb3 = rb2 * rb;
        a0 = 1.5 / rb;
        a2 = 0.5 / rb3;
    }

    double operator()(double r) const {
        return r >= rb ? 1.0 / r : a0 - a2 * r * r;
    }

    double from_r2(double r2) const {
        return r2 >= rb2 ? 1.0 / std::sqrt(r2) : a0 - a2 * r2;
    }
};

}  // namespace dpc
