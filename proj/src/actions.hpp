#pragma once

#include <utility>
#include <vector>

#include "dpenergy.hpp"
#include "massdist.hpp"

namespace dpc {

// Two competing scenarios sampled at increasing times. Relativistic field
// snapshots (energy-momentum trace contraction and volume factor) may be
// supplied directly; when absent they are constructed from the Newtonian
// snapshots on `grid` as T = c^2 rho, sqrt(-g) = 1 + phi/c^2.
struct ScenarioTimeline {
    std::vector<double> times;
    std::vector<MassDistribution> scenario1;
    std::vector<MassDistribution> scenario2;
    double intensity1 = 0.5;  // |c1|^2
    double intensity2 = 0.5;  // |c2|^2

    // shared grid for grid-based evaluation; dims == 0 means analytic
    // snapshots evaluated without a grid
    GridSpec grid{};

    std::vector<ScalarField> t_contracted1, t_contracted2;
    std::vector<ScalarField> sqrt_neg_g1, sqrt_neg_g2;

    bool has_relativistic_fields() const { return !t_contracted1.empty(); }
    bool has_grid() const { return grid.dims[0] > 0; }
    void validate() const;
};

struct ActionSample {
    double t = 0.0;
    double e_g12 = 0.0;  // integrand at this snapshot
    double s_g12 = 0.0;  // cumulative action, 0 at the first sample
    double s_g1 = 0.0;
    double s_g2 = 0.0;
};

struct ActionResult {
    double s_g12 = 0.0;
    double s_g1 = 0.0;
    double s_g2 = 0.0;
    std::vector<ActionSample> cumulative;
};

// Trapezoidal time integral of the interaction energy between the two
// scenarios. Detuning actions are s_g1 = |c2|^2 s_g12, s_g2 = |c1|^2 s_g12.
// Snapshots are evaluated on tl.grid when set, else analytically.
ActionResult competition_action_newtonian(const ScenarioTimeline& tl, const PhysicalConstants& constants);

// Same integral from the relativistic integrand
// (1/2) int (T1 - T2)(sqrt(-g2) - sqrt(-g1)). For fields constructed from
// the Newtonian snapshots the integrand reduces algebraically to the
// Newtonian one, so both actions agree to rounding.
ActionResult competition_action_relativistic(const ScenarioTimeline& tl, const PhysicalConstants& constants);

// (rate1, rate2) at query time t: finite-difference slope of the detuning
// actions over hbar. Centered in the interior, one-sided at the ends;
// t must lie within the trace's time range (snapped to the nearest sample).
std::pair<double, double> decay_rates_from_actions(const ActionResult& ar, double t,
                                                   const PhysicalConstants& constants);

// Integrated residual of the bilinear normalization identity
//   (w1 a1 + w2 a2)(w1 b1 + w2 b2)
//     = w1 a1 b1 + w2 a2 b2 + w1 w2 (a1 - a2)(b2 - b1)
// over the shared grid, relative to the magnitude of its pieces. Zero in
// exact arithmetic whenever w1 + w2 = 1.
double eh_decomposition_check(const ScalarField& a1, const ScalarField& a2,
                              const ScalarField& b1, const ScalarField& b2,
                              double w1, double w2);

}  // namespace dpc
