#pragma once

namespace dpc {

// Mutual Coulomb-type integral of two homogeneous balls with total masses
// ma, mb and radii Ra, Rb at center separation s:
//
//   C = integral_a integral_b rho_a(x) rho_b(y) / |x - y|
//
// (no G, no sign). Exact for every separation: point form outside contact,
// containment form when one ball sits inside the other, and an exact
// piecewise-polynomial quadrature in the partial-overlap band.
double sphere_pair_coulomb(double ma, double Ra, double mb, double Rb, double s);

// Self integral of one ball, C_self = (6/5) m^2 / R.
double sphere_self_coulomb(double m, double R);

}  // namespace dpc
