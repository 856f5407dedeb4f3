#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "superposition.hpp"

namespace dpc {

// Axis-aligned box region on the shared grid. Cells belong to the area when
// their centers lie inside the closed box. Distinct areas must be disjoint.
struct BundleArea {
    std::string id;
    Vec3 lo, hi;
};

// Group of states whose mass densities coincide on one area.
struct LocalBundle {
    int area_index = 0;
    int kappa = 0;                 // bundle index within its area, 0-based
    std::vector<int> members;      // ascending state indices
    double intensity = 0.0;        // sum of member intensities
};

struct BundleConfiguration {
    SuperpositionSpec spec;
    GridSpec grid;
    std::vector<BundleArea> areas;
    std::vector<std::vector<std::int64_t>> area_cells;  // linear cell indices per area
    std::vector<LocalBundle> bundles;                   // ordered by (area, kappa)
    std::vector<std::vector<int>> area_bundles;         // per area: indices into `bundles`
    std::vector<ScalarField> state_density;             // rasterized per state
    std::vector<ScalarField> state_potential;           // solved per state (full support)
    // pairwise local interaction energies, key {area, kappa, nu} with kappa < nu
    std::map<std::array<int, 3>, double> local_dp;

    const LocalBundle& bundle(int area_index, int kappa) const;
    int n_states() const { return static_cast<int>(spec.states.size()); }
    bool max_two_bundles_per_area() const;
};

// Rasterizes every state on `grid`, groups states by density equality on
// each area (tolerance 1e-12 relative to the largest density on the area),
// and precomputes all pairwise local interaction energies.
BundleConfiguration derive_bundles(const SuperpositionSpec& spec, const std::vector<BundleArea>& areas,
                                   const GridSpec& grid);

// Local interaction energy of two bundles on one area: half the integral
// over the area of (rho_k - rho_n)(phi_n - phi_k), where bundle fields are
// the intensity-weighted means of member fields. kappa != nu required.
double local_dp_energy(const BundleConfiguration& cfg, int area_index, int kappa, int nu);

// E^A_Gk = sum over other bundles nu of W_nu * E^A_{k nu}
double bundle_energy_increase(const BundleConfiguration& cfg, int area_index, int kappa);

struct BundleRate {
    int area_index;
    int kappa;
    double rate;  // E^A_Gk / hbar
};

// decay rate of every (area, bundle) pair, ordered by (area, kappa)
std::vector<BundleRate> bundle_decay_rates(const BundleConfiguration& cfg);

// Full-assembly total energy: sum_i w_i E_i + sum_areas sum_{k<n} W_k W_n E^A_{kn},
// with per-state energies computed on the shared grid.
double total_energy_assembly(const BundleConfiguration& cfg);

// Mean-field total energy on the shared grid (rest + half mean-density
// times mean-potential), the N-state generalization of the two-state total.
double mean_field_total_energy(const BundleConfiguration& cfg);

// Bundle structure sampled at increasing times. The partition (areas,
// member sets) must be identical at every snapshot.
struct BundleTimeline {
    std::vector<double> times;
    std::vector<BundleConfiguration> configs;
    void validate() const;
};

struct LocalActionResult {
    int area_index = 0;
    std::string area_id;
    // trapezoidal time integrals of the pairwise local energies, kappa < nu
    std::map<std::array<int, 2>, double> pair_actions;
    std::vector<double> detuning;  // per bundle kappa: sum_nu W_nu S^A_{kappa nu}
    // interaction part of the total-action assembly for this area:
    // sum_{k<n} W_k W_n S^A_{kn}
    double interaction_action = 0.0;
};

// Time-integrated local competition actions on one area. `relativistic`
// integrates the weak-field volume-factor integrand constructed from the
// bundle mean fields; it agrees with the Newtonian integrand to rounding.
LocalActionResult local_competition_action(const BundleTimeline& bt, int area_index,
                                           bool relativistic = false);

}  // namespace dpc
