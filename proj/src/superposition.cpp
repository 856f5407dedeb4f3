#include "superposition.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "numeric.hpp"
#include "sphere_interaction.hpp"

namespace dpc {

void SuperpositionSpec::validate() const {
    constants.validate();
    if (states.empty()) fail_config("superposition: state list must be non-empty");
    double sum = 0.0;
    for (const SuperpositionState& s : states) {
        if (!(s.intensity >= 0.0) || !(s.intensity <= 1.0) || !std::isfinite(s.intensity))
            fail_config("superposition: intensities must lie in [0, 1]");
        if (s.rest_energy_override && !std::isfinite(*s.rest_energy_override))
            fail_config("superposition: rest energy override must be finite");
        s.dist.validate();
        sum += s.intensity;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        fail_config("superposition: intensities must sum to 1, got " + std::to_string(sum));
}

double state_energy(const MassDistribution& dist, const PhysicalConstants& constants) {
    constants.validate();
    dist.validate();
    if (dist.empty()) return 0.0;

    if (dist.analytic()) {
        // self Coulomb integral of the whole set: per-body self terms plus
        // ordered pairs
        const auto& bodies = dist.bodies();
        double coul = 0.0;
        double mass = 0.0;
        for (std::size_t p = 0; p < bodies.size(); ++p) {
            if (!(bodies[p].mass > 0.0)) continue;
            mass += bodies[p].mass;
            coul += sphere_self_coulomb(bodies[p].mass, bodies[p].radius);
            for (std::size_t q = p + 1; q < bodies.size(); ++q) {
                if (!(bodies[q].mass > 0.0)) continue;
                coul += 2.0 * sphere_pair_coulomb(bodies[p].mass, bodies[p].radius,
                                                  bodies[q].mass, bodies[q].radius,
                                                  distance(bodies[p].center, bodies[q].center));
            }
        }
        return mass * constants.c * constants.c - 0.5 * constants.G * coul;
    }

    const ScalarField& rho = dist.density_field();
    const double vol = rho.grid.cell_volume();
    const ScalarField psi = kernel_sum(rho);
    const double rest = pairwise_sum(rho.values) * vol * constants.c * constants.c;
    const double pot = blocked_sum(rho.values.size(), [&](std::size_t t) {
        return rho.values[t] * (-constants.G * psi.values[t]) * vol;
    });
    return rest + 0.5 * pot;
}

EnergyBreakdown total_energy(const SuperpositionSpec& spec, const GridSpec& grid,
                             SolveMethod method) {
    spec.validate();
    grid.validate();
    if (spec.states.size() != 2)
        fail_config("total_energy: exactly two states required, got " +
                    std::to_string(spec.states.size()));

    const PhysicalConstants& cst = spec.constants;
    for (const SuperpositionState& s : spec.states)
        if (!support_fits(s.dist, grid, 2.0))
            fail_config("total_energy: grid must enclose every state with 2 cells of padding");

    const double w1 = spec.states[0].intensity, w2 = spec.states[1].intensity;
    const ScalarField d1 = rasterize(spec.states[0].dist, grid);
    const ScalarField d2 = rasterize(spec.states[1].dist, grid);
    const double vol = grid.cell_volume();

    ScalarField phi1 = kernel_sum(d1, method);
    ScalarField phi2 = kernel_sum(d2, method);
    for (double& v : phi1.values) v *= -cst.G;
    for (double& v : phi2.values) v *= -cst.G;

    const double c2 = cst.c * cst.c;
    const double rest1 = spec.states[0].rest_energy_override
                             ? *spec.states[0].rest_energy_override
                             : pairwise_sum(d1.values) * vol * c2;
    const double rest2 = spec.states[1].rest_energy_override
                             ? *spec.states[1].rest_energy_override
                             : pairwise_sum(d2.values) * vol * c2;

    auto half_overlap = [vol](const ScalarField& rho, const ScalarField& phi) {
        return 0.5 * blocked_sum(rho.values.size(), [&](std::size_t t) {
            return rho.values[t] * phi.values[t] * vol;
        });
    };

    EnergyBreakdown out;
    out.per_state = {rest1 + half_overlap(d1, phi1), rest2 + half_overlap(d2, phi2)};
    out.dp_energy = dp_energy_potential_form(d1, d2, phi1, phi2).value;
    out.interaction_term = w1 * w2 * out.dp_energy;

    ScalarField mean_rho(grid), mean_phi(grid);
    for (std::size_t t = 0; t < mean_rho.values.size(); ++t) {
        mean_rho.values[t] = w1 * d1.values[t] + w2 * d2.values[t];
        mean_phi.values[t] = w1 * phi1.values[t] + w2 * phi2.values[t];
    }
    out.total = w1 * rest1 + w2 * rest2 + half_overlap(mean_rho, mean_phi);
    return out;
}

std::pair<double, double> energy_increases(const SuperpositionSpec& spec, double e_g12) {
    spec.validate();
    if (spec.states.size() != 2) fail_config("energy_increases: exactly two states required");
    if (!(e_g12 >= 0.0) || !std::isfinite(e_g12))
        fail_guard("energy_increases: interaction energy must be finite and >= 0");
    return {spec.states[1].intensity * e_g12, spec.states[0].intensity * e_g12};
}

std::pair<double, double> decay_rates(const SuperpositionSpec& spec, double e_g12) {
    const auto [eg1, eg2] = energy_increases(spec, e_g12);
    return {eg1 / spec.constants.hbar, eg2 / spec.constants.hbar};
}

double mean_lifetime(double rate1, double rate2) {
    if (!(rate1 >= 0.0) || !(rate2 >= 0.0))
        fail_guard("mean_lifetime: rates must be >= 0");
    const double total = rate1 + rate2;
    if (total == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / total;
}

std::vector<double> born_probabilities(const SuperpositionSpec& spec) {
    spec.validate();
    std::vector<double> p;
    p.reserve(spec.states.size());
    for (const SuperpositionState& s : spec.states) p.push_back(s.intensity);
    return p;
}

MassDistribution mean_distribution(const SuperpositionSpec& spec, const GridSpec& grid) {
    spec.validate();
    grid.validate();
    ScalarField mean(grid);
    for (const SuperpositionState& s : spec.states) {
        const ScalarField d = rasterize(s.dist, grid);
        for (std::size_t t = 0; t < mean.values.size(); ++t)
            mean.values[t] += s.intensity * d.values[t];
    }
    return MassDistribution::voxel_grid(std::move(mean));
}

PotentialField mean_potential(const SuperpositionSpec& spec, const GridSpec& grid,
                              SolveMethod method) {
    spec.validate();
    grid.validate();
    PotentialField mean(grid);
    for (const SuperpositionState& s : spec.states) {
        const PotentialField phi = solve_potential(s.dist, grid, spec.constants, method);
        for (std::size_t t = 0; t < mean.values.size(); ++t)
            mean.values[t] += s.intensity * phi.values[t];
    }
    return mean;
}

}  // namespace dpc
