#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "actions.hpp"
#include "checks.hpp"
#include "doctest.h"
#include "dpenergy.hpp"
#include "error.hpp"
#include "massdist.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace dpc;

namespace {

MassDistribution ball_at(double x, double mass = 1.0, double radius = 1.0) {
    return MassDistribution::uniform_sphere_set({{{x, 0.0, 0.0}, mass, radius}});
}

GridSpec centered_grid(std::int64_t n, double span) {
    const double h = span / static_cast<double>(n);
    return GridSpec{{n, n, n}, h, {-span / 2 + h / 2, -span / 2 + h / 2, -span / 2 + h / 2}};
}

// two disjoint unit balls of unit mass: E = (1/2)(6/5 + 6/5 - 2/d)
double disjoint_pair_energy(double d) { return 1.2 - 1.0 / d; }

ScenarioTimeline static_pair_timeline(std::vector<double> times, double w1, double w2) {
    ScenarioTimeline tl;
    tl.times = std::move(times);
    tl.intensity1 = w1;
    tl.intensity2 = w2;
    for (std::size_t k = 0; k < tl.times.size(); ++k) {
        tl.scenario1.push_back(ball_at(0.0));
        tl.scenario2.push_back(ball_at(2.0));
    }
    return tl;
}

}  // namespace

TEST_CASE("static scenario pair accumulates action linearly in time") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();
    ScenarioTimeline tl = static_pair_timeline({0.0, 0.5, 2.0}, 0.25, 0.75);

    const ActionResult res = competition_action_newtonian(tl, cst);
    REQUIRE(res.cumulative.size() == 3);

    CHECK(res.cumulative[0].t == 0.0);
    CHECK(res.cumulative[0].s_g12 == 0.0);
    CHECK(res.cumulative[0].s_g1 == 0.0);
    CHECK(res.cumulative[0].s_g2 == 0.0);

    for (const ActionSample& s : res.cumulative) CHECK(oracle::rel_err(s.e_g12, 0.7) < 1e-13);

    CHECK(oracle::rel_err(res.s_g12, 0.7 * 2.0) < 1e-13);
    CHECK(oracle::rel_err(res.s_g1, 0.75 * 1.4) < 1e-13);
    CHECK(oracle::rel_err(res.s_g2, 0.25 * 1.4) < 1e-13);
    CHECK(oracle::rel_err(res.cumulative[1].s_g12, 0.7 * 0.5) < 1e-13);

    CHECK(res.s_g12 == res.cumulative.back().s_g12);
    CHECK(res.s_g1 == res.cumulative.back().s_g1);
    CHECK(res.s_g2 == res.cumulative.back().s_g2);

    ScenarioTimeline even = static_pair_timeline({0.0, 1.0}, 0.5, 0.5);
    const ActionResult half = competition_action_newtonian(even, cst);
    CHECK(half.s_g1 == half.s_g2);
    CHECK(half.s_g1 == 0.5 * half.s_g12);
}

TEST_CASE("trapezoid rule and detuning shares hold for a separating pair") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();
    ScenarioTimeline tl;
    tl.times = {0.0, 0.3, 0.8, 1.0, 2.0};
    tl.intensity1 = 0.25;
    tl.intensity2 = 0.75;
    std::vector<double> seps;
    for (std::size_t k = 0; k < tl.times.size(); ++k) {
        const double d = 2.0 + 0.5 * static_cast<double>(k);
        seps.push_back(d);
        tl.scenario1.push_back(ball_at(0.0));
        tl.scenario2.push_back(ball_at(d));
    }

    const ActionResult res = competition_action_newtonian(tl, cst);
    REQUIRE(res.cumulative.size() == 5);

    double s = 0.0;
    for (std::size_t k = 0; k < res.cumulative.size(); ++k) {
        const ActionSample& smp = res.cumulative[k];
        CHECK(smp.t == tl.times[k]);
        CHECK(oracle::rel_err(smp.e_g12, disjoint_pair_energy(seps[k])) < 1e-12);
        if (k > 0) {
            s += 0.5 * (tl.times[k] - tl.times[k - 1]) *
                 (res.cumulative[k].e_g12 + res.cumulative[k - 1].e_g12);
            CHECK(smp.e_g12 > res.cumulative[k - 1].e_g12);
            CHECK(smp.s_g12 > res.cumulative[k - 1].s_g12);
        }
        CHECK(smp.s_g12 == s);
        CHECK(smp.s_g1 == 0.75 * smp.s_g12);
        CHECK(smp.s_g2 == 0.25 * smp.s_g12);
    }
    CHECK(res.s_g12 == s);
}

TEST_CASE("grid timeline evaluates snapshot energies on the shared grid") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();
    ScenarioTimeline tl = static_pair_timeline({0.0, 1.0, 2.0}, 0.5, 0.5);
    tl.grid = GridSpec{{32, 32, 32}, 0.375, {-4.8125, -5.8125, -5.8125}};

    const ActionResult res = competition_action_newtonian(tl, cst);
    const double e_grid =
        dp_energy_potential_form(tl.scenario1[0], tl.scenario2[0], cst, tl.grid).value;

    CHECK(oracle::rel_err(res.cumulative[1].e_g12, e_grid) < 1e-13);
    CHECK(oracle::rel_err(res.s_g12, 2.0 * e_grid) < 1e-13);
    CHECK(oracle::rel_err(e_grid, 0.7) < 0.1);
}

TEST_CASE("relativistic action matches the newtonian one on constructed weak fields") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();
    const GridSpec grid = centered_grid(16, 8.0);

    for (std::uint64_t rep = 0; rep < 5; ++rep) {
        Xoshiro256pp rng(991, rep);
        ScenarioTimeline tl;
        const double t1 = 0.4 + 0.2 * rng.uniform();
        tl.times = {0.0, t1, t1 + 0.5 + 0.5 * rng.uniform()};
        tl.intensity1 = 0.2 + 0.6 * rng.uniform();
        tl.intensity2 = 1.0 - tl.intensity1;
        tl.grid = grid;

        const double m1 = 2e-3 + 1.5e-3 * rng.uniform();
        const double m2 = 2e-3 + 1.5e-3 * rng.uniform();
        const double r1 = 0.6 + 0.2 * rng.uniform();
        const double r2 = 0.6 + 0.2 * rng.uniform();
        const Vec3 c1{-2.0 + 0.9 * rng.uniform(), rng.uniform() - 0.5, rng.uniform() - 0.5};
        const Vec3 c2{1.1 + 0.9 * rng.uniform(), rng.uniform() - 0.5, rng.uniform() - 0.5};
        for (std::size_t k = 0; k < tl.times.size(); ++k) {
            const double drift = 0.05 * static_cast<double>(k);
            tl.scenario1.push_back(MassDistribution::uniform_sphere_set(
                {{{c1.x + drift, c1.y, c1.z - drift * rng.uniform()}, m1, r1}}));
            tl.scenario2.push_back(MassDistribution::uniform_sphere_set(
                {{{c2.x - drift, c2.y + drift * rng.uniform(), c2.z}, m2, r2}}));
        }

        const ActionResult newt = competition_action_newtonian(tl, cst);
        const ActionResult rel = competition_action_relativistic(tl, cst);

        CHECK(oracle::rel_err(rel.s_g12, newt.s_g12) < 1e-12);
        CHECK(oracle::rel_err(rel.s_g1, newt.s_g1) < 1e-12);
        CHECK(oracle::rel_err(rel.s_g2, newt.s_g2) < 1e-12);
        for (std::size_t k = 0; k < tl.times.size(); ++k) {
            CHECK(oracle::rel_err(rel.cumulative[k].e_g12, newt.cumulative[k].e_g12) < 1e-12);
        }

        PhysicalConstants fast = cst;
        fast.c = 2.0;
        const ActionResult rel2 = competition_action_relativistic(tl, fast);
        CHECK(oracle::rel_err(rel2.s_g12, newt.s_g12) < 1e-12);
    }
}

TEST_CASE("supplied relativistic field snapshots reproduce the constructed ones") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();
    const GridSpec grid = centered_grid(12, 4.8);

    ScenarioTimeline tl;
    tl.times = {0.0, 0.7, 1.5};
    tl.grid = grid;
    for (std::size_t k = 0; k < tl.times.size(); ++k) {
        tl.scenario1.push_back(ball_at(0.0, 2e-3, 0.7));
        tl.scenario2.push_back(ball_at(0.8 - 0.1 * static_cast<double>(k), 2e-3, 0.7));
    }
    const ActionResult newt = competition_action_newtonian(tl, cst);
    const ActionResult con = competition_action_relativistic(tl, cst);

    ScenarioTimeline sup = tl;
    const double c2 = cst.c * cst.c;
    for (std::size_t k = 0; k < tl.times.size(); ++k) {
        const ScalarField d1 = rasterize(tl.scenario1[k], grid);
        const ScalarField d2 = rasterize(tl.scenario2[k], grid);
        ScalarField phi1 = kernel_sum(d1);
        ScalarField phi2 = kernel_sum(d2);
        for (double& v : phi1.values) v *= -cst.G;
        for (double& v : phi2.values) v *= -cst.G;
        ScalarField tc1(grid), tc2(grid), sg1(grid), sg2(grid);
        for (std::size_t t = 0; t < d1.values.size(); ++t) {
            tc1.values[t] = c2 * d1.values[t];
            tc2.values[t] = c2 * d2.values[t];
            sg1.values[t] = 1.0 + phi1.values[t] / c2;
            sg2.values[t] = 1.0 + phi2.values[t] / c2;
        }
        sup.t_contracted1.push_back(tc1);
        sup.t_contracted2.push_back(tc2);
        sup.sqrt_neg_g1.push_back(sg1);
        sup.sqrt_neg_g2.push_back(sg2);
    }

    const ActionResult direct = competition_action_relativistic(sup, cst);
    CHECK(direct.s_g12 == con.s_g12);
    CHECK(oracle::rel_err(direct.s_g12, newt.s_g12) < 1e-12);
    for (std::size_t k = 0; k < tl.times.size(); ++k)
        CHECK(oracle::rel_err(direct.cumulative[k].e_g12, newt.cumulative[k].e_g12) < 1e-12);

    SUBCASE("volume factors far from unity trip the guard") {
        ScenarioTimeline bad = sup;
        bad.sqrt_neg_g1[1].values[100] = 1.02;
        expect_error([&] { competition_action_relativistic(bad, cst); }, ErrorCategory::guard,
                     "exceeds the weak-field bound");
        ScenarioTimeline low = sup;
        low.sqrt_neg_g2[0].values[3] = 0.985;
        expect_error([&] { competition_action_relativistic(low, cst); }, ErrorCategory::guard,
                     "exceeds the weak-field bound");
    }
}

TEST_CASE("relativistic guards and grid requirement") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();

    SUBCASE("heavy sources violate the constructed weak-field bound") {
        ScenarioTimeline tl = static_pair_timeline({0.0, 1.0}, 0.5, 0.5);
        tl.grid = GridSpec{{32, 32, 32}, 0.375, {-4.8125, -5.8125, -5.8125}};
        expect_error([&] { competition_action_relativistic(tl, cst); }, ErrorCategory::guard,
                     "constructed potential violates the weak-field bound");
    }

    SUBCASE("analytic timelines cannot construct fields") {
        ScenarioTimeline tl = static_pair_timeline({0.0, 1.0}, 0.5, 0.5);
        expect_error([&] { competition_action_relativistic(tl, cst); }, ErrorCategory::config,
                     "a shared grid is required");
    }
}

TEST_CASE("decay rates equal the intensity-weighted energy over hbar") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();
    ScenarioTimeline tl = static_pair_timeline({0.0, 0.5, 1.0, 1.5, 2.0}, 0.25, 0.75);
    const ActionResult res = competition_action_newtonian(tl, cst);

    const auto [r1, r2] = decay_rates_from_actions(res, 1.0, cst);
    CHECK(oracle::rel_err(r1, 0.75 * 0.7) < 1e-12);
    CHECK(oracle::rel_err(r2, 0.25 * 0.7) < 1e-12);

    SUBCASE("queries snap to the nearest sample") {
        const auto snapped = decay_rates_from_actions(res, 0.9, cst);
        CHECK(snapped.first == r1);
        CHECK(snapped.second == r2);
    }

    SUBCASE("one-sided differences cover the endpoints") {
        const auto lo = decay_rates_from_actions(res, 0.0, cst);
        const auto hi = decay_rates_from_actions(res, 2.0, cst);
        CHECK(oracle::rel_err(lo.first, 0.75 * 0.7) < 1e-12);
        CHECK(oracle::rel_err(hi.second, 0.25 * 0.7) < 1e-12);
    }

    SUBCASE("hbar rescales both rates") {
        PhysicalConstants h = cst;
        h.hbar = 0.5;
        const auto scaled = decay_rates_from_actions(res, 1.0, h);
        CHECK(scaled.first == 2.0 * r1);
        CHECK(scaled.second == 2.0 * r2);
    }

    SUBCASE("out-of-range queries and short traces are rejected") {
        expect_error([&] { decay_rates_from_actions(res, -0.1, cst); }, ErrorCategory::config,
                     "query time outside the trace range");
        expect_error([&] { decay_rates_from_actions(res, 2.2, cst); }, ErrorCategory::config,
                     "query time outside the trace range");
        ActionResult stub;
        stub.cumulative.resize(1);
        expect_error([&] { decay_rates_from_actions(stub, 0.0, cst); }, ErrorCategory::config,
                     "needs at least two samples");
    }
}

TEST_CASE("decay rate slopes track a time-varying energy") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();
    ScenarioTimeline tl;
    tl.times = {0.0, 0.5, 1.0, 1.5, 2.0};
    tl.intensity1 = 0.25;
    tl.intensity2 = 0.75;
    std::vector<double> energies;
    for (std::size_t k = 0; k < tl.times.size(); ++k) {
        const double d = 2.0 + 0.5 * static_cast<double>(k);
        energies.push_back(disjoint_pair_energy(d));
        tl.scenario1.push_back(ball_at(0.0));
        tl.scenario2.push_back(ball_at(d));
    }
    const ActionResult res = competition_action_newtonian(tl, cst);

    // centered slope at sample 2 averages the two adjacent trapezoids
    std::vector<double> s(5, 0.0);
    for (std::size_t k = 1; k < 5; ++k)
        s[k] = s[k - 1] + 0.25 * (energies[k] + energies[k - 1]);
    const auto mid = decay_rates_from_actions(res, 1.0, cst);
    CHECK(oracle::rel_err(mid.first, 0.75 * (s[3] - s[1]) / 1.0) < 1e-12);
    CHECK(oracle::rel_err(mid.second, 0.25 * (s[3] - s[1]) / 1.0) < 1e-12);

    const auto front = decay_rates_from_actions(res, 0.0, cst);
    CHECK(oracle::rel_err(front.first, 0.75 * (s[1] - s[0]) / 0.5) < 1e-12);
}

TEST_CASE("normalization decomposition residual vanishes for unit intensity sums") {
    const GridSpec grid{{9, 8, 7}, 0.3, {0.0, 0.0, 0.0}};

    for (std::uint64_t rep = 0; rep < 30; ++rep) {
        Xoshiro256pp rng(77, rep);
        ScalarField a1(grid), a2(grid), b1(grid), b2(grid);
        for (std::size_t t = 0; t < a1.values.size(); ++t) {
            a1.values[t] = 4.0 * rng.uniform() - 2.0;
            a2.values[t] = 4.0 * rng.uniform() - 2.0;
            b1.values[t] = 4.0 * rng.uniform() - 2.0;
            b2.values[t] = 4.0 * rng.uniform() - 2.0;
        }
        double w1 = rng.uniform();
        if (rep == 0) w1 = 0.0;
        if (rep == 1) w1 = 1.0;
        if (rep == 2) w1 = 0.5;
        CHECK(eh_decomposition_check(a1, a2, b1, b2, w1, 1.0 - w1) < 1e-12);
    }

    SUBCASE("all-zero fields give a zero residual") {
        ScalarField z(grid);
        CHECK(eh_decomposition_check(z, z, z, z, 0.3, 0.7) == 0.0);
    }

    SUBCASE("mismatched grids and unnormalized intensities are rejected") {
        ScalarField a(grid);
        ScalarField other(GridSpec{{9, 8, 7}, 0.4, {0.0, 0.0, 0.0}});
        expect_error([&] { eh_decomposition_check(a, a, a, other, 0.5, 0.5); },
                     ErrorCategory::config, "fields must share one grid");
        expect_error([&] { eh_decomposition_check(a, a, a, a, 0.6, 0.6); }, ErrorCategory::config,
                     "intensities must sum to 1");
    }
}

TEST_CASE("timeline validation rejects malformed input") {
    const PhysicalConstants cst = PhysicalConstants::dimensionless();

    ScenarioTimeline tl;
    tl.times = {0.0};
    expect_error([&] { tl.validate(); }, ErrorCategory::config,
                 "at least two time samples required");

    tl.times = {0.0, 0.0};
    expect_error([&] { tl.validate(); }, ErrorCategory::config,
                 "times must be finite and strictly increasing");

    tl.times = {0.0, std::numeric_limits<double>::infinity()};
    expect_error([&] { tl.validate(); }, ErrorCategory::config, "times must be finite");

    tl = static_pair_timeline({0.0, 1.0}, 0.6, 0.6);
    expect_error([&] { tl.validate(); }, ErrorCategory::config,
                 "intensities must be >= 0 and sum to 1");
    tl.intensity1 = -0.2;
    tl.intensity2 = 1.2;
    expect_error([&] { tl.validate(); }, ErrorCategory::config,
                 "intensities must be >= 0 and sum to 1");

    tl = static_pair_timeline({0.0, 1.0}, 0.5, 0.5);
    tl.scenario2.pop_back();
    expect_error([&] { tl.validate(); }, ErrorCategory::config,
                 "both scenarios must cover every time sample");

    SUBCASE("relativistic snapshot bookkeeping") {
        const GridSpec grid{{4, 4, 4}, 0.5, {0.0, 0.0, 0.0}};
        ScenarioTimeline rel;
        rel.times = {0.0, 1.0};
        rel.grid = grid;
        rel.t_contracted1 = {ScalarField(grid), ScalarField(grid)};
        expect_error([&] { rel.validate(); }, ErrorCategory::config,
                     "relativistic field snapshots must cover every time sample");

        rel.t_contracted2 = {ScalarField(grid), ScalarField(grid)};
        rel.sqrt_neg_g1 = {ScalarField(grid), ScalarField(grid)};
        rel.sqrt_neg_g2 = {ScalarField(grid), ScalarField(grid)};
        for (ScalarField* f : {&rel.sqrt_neg_g1[0], &rel.sqrt_neg_g1[1], &rel.sqrt_neg_g2[0],
                               &rel.sqrt_neg_g2[1]})
            for (double& v : f->values) v = 1.0;

        ScenarioTimeline nogrid = rel;
        nogrid.grid = GridSpec{};
        expect_error([&] { nogrid.validate(); }, ErrorCategory::config,
                     "relativistic fields require the shared grid");

        ScenarioTimeline off = rel;
        off.sqrt_neg_g2[1] = ScalarField(GridSpec{{4, 4, 4}, 0.25, {0.0, 0.0, 0.0}});
        expect_error([&] { off.validate(); }, ErrorCategory::config,
                     "relativistic snapshots must share the timeline grid");

        // fields-only timelines satisfy validate but carry no mass snapshots
        rel.validate();
        expect_error([&] { competition_action_newtonian(rel, cst); }, ErrorCategory::config,
                     "timeline carries no mass snapshots");
    }
}
