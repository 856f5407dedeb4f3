#pragma once

#include <utility>

#include "massdist.hpp"

namespace dpc {

enum class DpMethod { double_integral, potential_form, field_form };

// One evaluation of the gravitational self-energy of the difference of two
// mass distributions. estimated_error is a Richardson half-resolution
// comparison for grid methods (plus a boundary-tail estimate for the field
// form) and 0 for closed-form sphere arithmetic.
struct DpEnergyResult {
    double value = 0.0;
    DpMethod method = DpMethod::double_integral;
    bool analytic = true;
    GridSpec grid{};  // meaningful only when analytic == false
    double estimated_error = 0.0;
    double xi = 0.5;
};

// xi G * int int (rho1-rho2)(x) (rho1-rho2)(y) / |x-y|. Sphere/point sets
// evaluate through the closed pair forms; voxel inputs run the discrete
// double sum (both on one shared grid). Mixed inputs rasterize the analytic
// side onto the voxel grid.
DpEnergyResult dp_energy_double_integral(const MassDistribution& rho1, const MassDistribution& rho2,
                                         const PhysicalConstants& constants);

// Same, forced onto an explicit grid.
DpEnergyResult dp_energy_double_integral(const MassDistribution& rho1, const MassDistribution& rho2,
                                         const PhysicalConstants& constants, const GridSpec& grid);

// (1/2) int (rho1-rho2)(phi2-phi1). The prefactor convention is fixed by
// the form itself, so there is no xi argument; the result coincides with
// the double integral at xi = 1/2.
DpEnergyResult dp_energy_potential_form(const ScalarField& rho1, const ScalarField& rho2,
                                        const PotentialField& phi1, const PotentialField& phi2);

// Convenience wrapper: rasterizes and solves on `grid` first.
DpEnergyResult dp_energy_potential_form(const MassDistribution& rho1, const MassDistribution& rho2,
                                        const PhysicalConstants& constants, const GridSpec& grid,
                                        SolveMethod method = SolveMethod::automatic);

// (1/(8 pi G)) int |g1-g2|^2 over the grid domain. Non-negative by
// construction; the far-field tail outside the domain is part of
// estimated_error, not of value.
DpEnergyResult dp_energy_field_form(const VectorField& g1, const VectorField& g2,
                                    const PhysicalConstants& constants);

DpEnergyResult dp_energy_field_form(const MassDistribution& rho1, const MassDistribution& rho2,
                                    const PhysicalConstants& constants, const GridSpec& grid,
                                    SolveMethod method = SolveMethod::automatic);

// 1 + phi/c^2, guarded to the weak-field regime |phi|/c^2 <= 0.01.
double clock_rate_factor(double phi, const PhysicalConstants& constants);

// (dE1, dE2) with dE1 = int rho1 (phi2-phi1), dE2 = int rho2 (phi1-phi2).
// Their mean is exactly the potential-form energy.
std::pair<double, double> energy_fuzziness(const ScalarField& rho1, const ScalarField& rho2,
                                           const PotentialField& phi1, const PotentialField& phi2);

// hbar / E. E == 0 returns +infinity (no decay); E < 0 is a guard error.
double lifetime(double e_g12, const PhysicalConstants& constants);

// sqrt(hbar G / (V dt)): smallest resolvable gravitational-acceleration
// fuzz over volume V and duration dt.
double diosi_field_uncertainty(double volume, double dt, const PhysicalConstants& constants);

}  // namespace dpc
