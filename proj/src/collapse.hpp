#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "bundles.hpp"

namespace dpc {

// One bundle decay: at `time`, bundle `kappa` on area `area_id` decayed in
// favour of a competitor, leaving `survivors` (ascending state indices).
struct CollapseEvent {
    double time = 0.0;
    std::string area_id;
    int kappa = 0;
    std::vector<int> survivors;
};

// Full record of one stochastic reduction. Events are strictly time-ordered
// and each strictly shrinks the survivor set. final_state is -1 only for the
// no-decay result (zero interaction energy).
struct CollapseTrace {
    std::uint64_t seed = 0;   // master seed
    std::uint64_t index = 0;  // trace index; selects the RNG stream
    std::vector<CollapseEvent> events;
    int final_state = -1;
    double total_time = 0.0;
};

// Static description of one competition region for the cascade. Bundles
// partition the state set; pair_energy is the nb x nb symmetric matrix of
// local interaction energies, zero on the diagonal, held fixed during a run.
struct CascadeArea {
    std::string id;
    std::vector<std::vector<int>> bundles;  // member lists, ascending
    std::vector<double> pair_energy;        // row-major nb x nb

    double energy(int k, int n) const {
        return pair_energy[static_cast<std::size_t>(k) * bundles.size() +
                           static_cast<std::size_t>(n)];
    }
};

// Reduced cascade input: initial intensities plus the per-area bundle
// structure with fixed local energies. Intensities must sum to 1; every
// bundle on every area must partition the full state set.
struct CascadeProblem {
    std::vector<double> intensities;
    std::vector<CascadeArea> areas;
    PhysicalConstants constants;
    bool allow_many_bundles = false;  // default refuses > 2 bundles per area

    int n_states() const { return static_cast<int>(intensities.size()); }
    void validate() const;
};

// Reduces a grid-derived bundle configuration to its cascade description,
// freezing the pairwise local energies at their current values.
CascadeProblem make_cascade_problem(const BundleConfiguration& cfg, bool allow_many_bundles = false);

// Detector-array cascade: area i carries bundles {i} and not-i with local
// energy detector_energy[i].
CascadeProblem detector_cascade_problem(const std::vector<double>& intensities,
                                        const std::vector<double>& detector_energy,
                                        const PhysicalConstants& constants);

// Layout of the synthetic detector array: n areas in a row along x, one
// rigid sphere per area, displaced along +x in the state the area detects.
struct DetectorGeometry {
    double mass = 1.0;
    double radius = 1.0;
    double displacement = 2.0;      // rest-to-displaced center shift
    double area_half_width = 4.0;   // area box half-extent on every axis
    double area_pitch = 16.0;       // distance between area centers
};

struct DetectorScenario {
    SuperpositionSpec spec;
    std::vector<BundleArea> areas;         // ids "D1".."Dn"
    std::vector<double> detector_energy;   // analytic per-area interaction energy
};

// Geometric mode: every detector uses geom.mass; per-area energies follow
// from the displaced-sphere pair integrals.
DetectorScenario build_detector_scenario(int n, const std::vector<double>& intensities,
                                         const DetectorGeometry& geom,
                                         const PhysicalConstants& constants);

// Abstract mode: per-area energies are prescribed and realized by
// calibrating each detector's sphere mass, so the geometric and reduced
// descriptions agree exactly.
DetectorScenario build_detector_scenario(int n, const std::vector<double>& intensities,
                                         const std::vector<double>& detector_energy,
                                         const PhysicalConstants& constants);

// Two competing exponential clocks with rates w2 E/hbar and w1 E/hbar; the
// earlier clock's state decays and the other survives. E == 0 yields the
// no-decay trace (no events, final_state -1, infinite total_time).
CollapseTrace simulate_two_state(const std::vector<double>& intensities, double e_g12,
                                 const PhysicalConstants& constants, std::uint64_t master_seed,
                                 std::uint64_t trace_index = 0);

// Continuous-time cascade: every ordered bundle pair (kappa, nu) on every
// active area carries an exponential clock at rate W_nu E_{kappa nu}/hbar;
// on the earliest firing kappa decays in favour of nu, survivors become the
// intersection with nu's members, intensities renormalize proportionally,
// and all clocks resample. Runs until a single state survives. Equal firing
// times break toward the lowest (area, kappa, nu). max_events > 0 caps the
// event count (the structural bound is n_states - 1).
CollapseTrace simulate_cascade(const CascadeProblem& problem, std::uint64_t master_seed,
                               std::uint64_t trace_index, int max_events = 0);

// n_trials independent traces, indices 0..n_trials-1, parallel across
// traces. Output order is by index, independent of thread count.
std::vector<CollapseTrace> simulate_traces(const CascadeProblem& problem,
                                           std::uint64_t master_seed, std::size_t n_trials,
                                           int max_events = 0);

struct BornStateReport {
    int state = 0;
    std::uint64_t count = 0;
    double expected_probability = 0.0;
    double frequency = 0.0;
    double sigma = 0.0;  // binomial standard error of the frequency
    double z = 0.0;
};

struct BornReport {
    std::uint64_t n_traces = 0;
    std::vector<BornStateReport> states;
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 1.0;
    double z_limit = 3.0;
    double p_limit = 1e-3;
    bool pass = false;
};

// Empirical final-state frequencies against the expected intensities:
// per-state z-scores plus a chi-square test over all states with nonzero
// expectation. Pass requires every |z| < z_limit and p_value > p_limit.
BornReport born_check(const std::vector<CollapseTrace>& traces,
                      const std::vector<double>& intensities, double z_limit = 3.0,
                      double p_limit = 1e-3);

struct DecoherenceTrace {
    std::vector<double> times;
    std::vector<std::complex<double>> offdiag;
    std::vector<double> offdiag_magnitude;
};

// Off-diagonal density-matrix element under
//   d rho12/dt = -(i/hbar)(E1 - E2) rho12 - (E_G12/hbar) rho12,
// integrated with classical RK4 (substeps keep |lambda h| <= 0.01).
// Populations are untouched by this equation. E_G12 < 0 is a guard error.
DecoherenceTrace decohere_two_state(double e1, double e2, double e_g12,
                                    std::complex<double> rho12_initial,
                                    const std::vector<double>& t_grid,
                                    const PhysicalConstants& constants);

// Exponential decay rate of |rho12| fitted by least squares on the log
// magnitudes. Requires at least two samples with nonzero magnitude.
double fitted_decay_rate(const DecoherenceTrace& trace);

}  // namespace dpc
