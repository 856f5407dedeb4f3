#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dpenergy.hpp"
#include "massdist.hpp"

namespace dpc {

struct SuperpositionState {
    double intensity = 0.0;  // |c_i|^2
    MassDistribution dist;
    // replaces the integral rest energy; lets dimensionless tests cancel
    // the dominant m c^2 term
    std::optional<double> rest_energy_override;
};

struct SuperpositionSpec {
    std::vector<SuperpositionState> states;
    PhysicalConstants constants = PhysicalConstants::dimensionless();

    void validate() const;  // non-empty, intensities in [0,1] summing to 1 within 1e-12
};

// Result of the two-state total-energy computation. `total` is the
// mean-field integral (rest + half the mean density times mean potential);
// per_state and interaction_term are the decomposition pieces, and the two
// routes agree to rounding by the bilinear normalization identity.
struct EnergyBreakdown {
    std::vector<double> per_state;
    double interaction_term = 0.0;
    double total = 0.0;
    double dp_energy = 0.0;  // grid interaction energy used for the term
};

// Rest energy plus half the self-potential energy. Sphere sets evaluate in
// closed form; voxel inputs sum on their own grid.
double state_energy(const MassDistribution& dist, const PhysicalConstants& constants);

// Two-state mean-field energy on a shared grid, with the decomposition
// into per-state energies and the intensity-weighted interaction term.
EnergyBreakdown total_energy(const SuperpositionSpec& spec, const GridSpec& grid,
                             SolveMethod method = SolveMethod::automatic);

// (E_G1, E_G2) = (|c2|^2, |c1|^2) * E_G12
std::pair<double, double> energy_increases(const SuperpositionSpec& spec, double e_g12);

// rates (E_G1, E_G2)/hbar
std::pair<double, double> decay_rates(const SuperpositionSpec& spec, double e_g12);

// 1/(rate1+rate2); +infinity when both rates vanish
double mean_lifetime(double rate1, double rate2);

// p_i = |c_i|^2
std::vector<double> born_probabilities(const SuperpositionSpec& spec);

// intensity-weighted mean density, returned as a voxel distribution
MassDistribution mean_distribution(const SuperpositionSpec& spec, const GridSpec& grid);

// intensity-weighted mean of the per-state solved potentials
PotentialField mean_potential(const SuperpositionSpec& spec, const GridSpec& grid,
                              SolveMethod method = SolveMethod::automatic);

}  // namespace dpc
