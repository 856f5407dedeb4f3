#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "checks.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "superposition.hpp"

using namespace dpc;

namespace {

const PhysicalConstants kUnit = PhysicalConstants::dimensionless();

MassDistribution ball_at(double x, double m = 1.0, double r = 1.0) {
    return MassDistribution::uniform_sphere_set({{{x, 0.0, 0.0}, m, r}});
}

GridSpec pair_grid() {
    GridSpec g;
    g.dims = {32, 32, 32};
    g.spacing = 0.375;
    g.origin = {-5.0 + 0.1875, -6.0 + 0.1875, -6.0 + 0.1875};
    return g;
}

SuperpositionSpec displaced_pair(double w1, double w2) {
    SuperpositionSpec spec;
    spec.states.resize(2);
    spec.states[0].intensity = w1;
    spec.states[0].dist = ball_at(0.0);
    spec.states[1].intensity = w2;
    spec.states[1].dist = ball_at(2.0);
    spec.constants = kUnit;
    return spec;
}

}  // namespace

TEST_CASE("spec validation") {
    SuperpositionSpec spec;
    expect_error([&] { spec.validate(); }, ErrorCategory::config, "state list must be non-empty");

    spec = displaced_pair(0.5, 0.5);
    spec.validate();

    spec.states[0].intensity = -0.1;
    spec.states[1].intensity = 1.1;
    expect_error([&] { spec.validate(); }, ErrorCategory::config,
                 "intensities must lie in [0, 1]");

    spec = displaced_pair(0.3, 0.69);
    expect_error([&] { spec.validate(); }, ErrorCategory::config, "intensities must sum to 1");

    spec = displaced_pair(0.5, 0.5);
    spec.states[0].rest_energy_override = std::nan("");
    expect_error([&] { spec.validate(); }, ErrorCategory::config,
                 "rest energy override must be finite");
}

TEST_CASE("state energy of sphere sets in closed form") {
    // rest mass c^2 minus half the self Coulomb energy: 1 - 0.6
    CHECK(state_energy(ball_at(0.0), kUnit) == doctest::Approx(0.4).epsilon(1e-14));
    // two separated balls add a cross term: 2 - 0.5 (1.2 + 1.2 + 2/4)
    const MassDistribution pair = MassDistribution::uniform_sphere_set(
        {{{0.0, 0.0, 0.0}, 1.0, 1.0}, {{4.0, 0.0, 0.0}, 1.0, 1.0}});
    CHECK(state_energy(pair, kUnit) == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(state_energy(MassDistribution(), kUnit) == 0.0);

    // G only touches the binding part, c only the rest part
    PhysicalConstants noG = kUnit;
    noG.G = 1e-30;
    CHECK(state_energy(ball_at(0.0), noG) == doctest::Approx(1.0).epsilon(1e-12));

    // the discrete route converges to the same number; 0.4 is a difference
    // of two O(1) terms, so grid error is amplified about fourfold
    const MassDistribution vox =
        MassDistribution::voxel_grid(rasterize(ball_at(0.0), pair_grid()));
    CHECK(oracle::rel_err(state_energy(vox, kUnit), 0.4) < 0.10);
}

TEST_CASE("two-state energy decomposition identity on the displaced pair") {
    const GridSpec g = pair_grid();
    for (auto [w1, w2] : {std::pair{0.5, 0.5}, std::pair{0.25, 0.75}, std::pair{0.9, 0.1}}) {
        const SuperpositionSpec spec = displaced_pair(w1, w2);
        const EnergyBreakdown b = total_energy(spec, g);

        INFO("w1 = " << w1);
        REQUIRE(b.per_state.size() == 2);
        CHECK(b.interaction_term == w1 * w2 * b.dp_energy);
        const double assembled =
            w1 * b.per_state[0] + w2 * b.per_state[1] + b.interaction_term;
        CHECK(oracle::rel_err(b.total, assembled) < 1e-10);

        // the interaction piece is the bilinear grid energy of the pair
        const ScalarField d1 = rasterize(spec.states[0].dist, g);
        const ScalarField d2 = rasterize(spec.states[1].dist, g);
        ScalarField p1 = kernel_sum(d1), p2 = kernel_sum(d2);
        for (double& v : p1.values) v *= -kUnit.G;
        for (double& v : p2.values) v *= -kUnit.G;
        CHECK(b.dp_energy ==
              doctest::Approx(dp_energy_potential_form(d1, d2, p1, p2).value).epsilon(1e-15));
    }
}

TEST_CASE("decomposition identity holds for random voxel pairs") {
    GridSpec g;
    g.dims = {14, 14, 14};
    g.spacing = 0.5;
    g.origin = {-3.25, -3.25, -3.25};

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        ScalarField f1(g), f2(g);
        for (std::int64_t i = 4; i <= 9; ++i)
            for (std::int64_t j = 4; j <= 9; ++j)
                for (std::int64_t k = 4; k <= 9; ++k) {
                    f1.at(i, j, k) = u(rng);
                    f2.at(i, j, k) = u(rng);
                }
        SuperpositionSpec spec;
        spec.states.resize(2);
        const double w1 = 0.1 + 0.8 * u(rng);
        spec.states[0].intensity = w1;
        spec.states[0].dist = MassDistribution::voxel_grid(f1);
        spec.states[1].intensity = 1.0 - w1;
        spec.states[1].dist = MassDistribution::voxel_grid(f2);
        spec.constants = kUnit;

        const EnergyBreakdown b = total_energy(spec, g);
        const double assembled = w1 * b.per_state[0] + (1.0 - w1) * b.per_state[1] +
                                 b.interaction_term;
        CHECK(oracle::rel_err(b.total, assembled) < 1e-10);
    }
}

TEST_CASE("rest-energy overrides shift the books without touching binding") {
    const GridSpec g = pair_grid();
    SuperpositionSpec spec = displaced_pair(0.25, 0.75);
    const EnergyBreakdown plain = total_energy(spec, g);

    spec.states[0].rest_energy_override = 0.0;
    spec.states[1].rest_energy_override = 0.0;
    const EnergyBreakdown zeroed = total_energy(spec, g);
    CHECK(zeroed.dp_energy == plain.dp_energy);  // binding identical

    spec.states[0].rest_energy_override = 5.0;
    spec.states[1].rest_energy_override = 5.0;
    const EnergyBreakdown shifted = total_energy(spec, g);
    CHECK(shifted.total - zeroed.total == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(shifted.per_state[0] - zeroed.per_state[0] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("total_energy guards") {
    SuperpositionSpec spec = displaced_pair(0.5, 0.5);
    spec.states.resize(1);
    spec.states[0].intensity = 1.0;
    expect_error([&] { total_energy(spec, pair_grid()); }, ErrorCategory::config,
                 "exactly two states required, got 1");

    spec = displaced_pair(0.5, 0.5);
    GridSpec tight;
    tight.dims = {16, 16, 16};
    tight.spacing = 0.25;
    tight.origin = {-1.875, -1.875, -1.875};  // no room for the displaced state
    expect_error([&] { total_energy(spec, tight); }, ErrorCategory::config,
                 "grid must enclose every state with 2 cells of padding");
}

TEST_CASE("increases, rates, lifetime and probabilities") {
    const SuperpositionSpec spec = displaced_pair(0.25, 0.75);

    const auto [eg1, eg2] = energy_increases(spec, 2.0);
    CHECK(eg1 == 1.5);  // w2 E
    CHECK(eg2 == 0.5);  // w1 E

    const auto [r1, r2] = decay_rates(spec, 2.0);
    CHECK(r1 == 1.5);
    CHECK(r2 == 0.5);
    CHECK(mean_lifetime(r1, r2) == 0.5);
    CHECK(std::isinf(mean_lifetime(0.0, 0.0)));

    PhysicalConstants half_hbar = kUnit;
    half_hbar.hbar = 0.5;
    SuperpositionSpec fast = spec;
    fast.constants = half_hbar;
    CHECK(decay_rates(fast, 2.0).first == 3.0);

    CHECK(born_probabilities(spec) == std::vector<double>{0.25, 0.75});

    expect_error([&] { energy_increases(spec, -1.0); }, ErrorCategory::guard,
                 "interaction energy must be finite and >= 0");
    expect_error([&] { energy_increases(spec, std::nan("")); }, ErrorCategory::guard,
                 "interaction energy");
    expect_error([&] { mean_lifetime(-0.5, 1.0); }, ErrorCategory::guard, "rates must be >= 0");

    SuperpositionSpec one = spec;
    one.states.resize(1);
    one.states[0].intensity = 1.0;
    expect_error([&] { energy_increases(one, 1.0); }, ErrorCategory::config,
                 "exactly two states required");
}

TEST_CASE("mean distribution and mean potential are intensity-weighted") {
    const GridSpec g = pair_grid();
    const SuperpositionSpec spec = displaced_pair(0.25, 0.75);

    const MassDistribution mean = mean_distribution(spec, g);
    CHECK(mean.kind() == DistKind::voxel_grid);
    CHECK(mean.density_field().grid == g);

    const ScalarField d1 = rasterize(spec.states[0].dist, g);
    const ScalarField d2 = rasterize(spec.states[1].dist, g);
    const ScalarField& got = mean.density_field();
    for (std::size_t t = 0; t < got.values.size(); t += 97)
        CHECK(got.values[t] == 0.25 * d1.values[t] + 0.75 * d2.values[t]);
    CHECK(mean.total_mass() == doctest::Approx(1.0).epsilon(0.01));

    const PotentialField mp = mean_potential(spec, g);
    const PotentialField p1 = solve_potential(spec.states[0].dist, g, kUnit);
    const PotentialField p2 = solve_potential(spec.states[1].dist, g, kUnit);
    for (std::size_t t = 0; t < mp.values.size(); t += 97)
        CHECK(mp.values[t] == 0.25 * p1.values[t] + 0.75 * p2.values[t]);
}
