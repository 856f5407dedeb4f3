#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "checks.hpp"
#include "doctest.h"
#include "grid.hpp"

using dpc::GridSpec;
using dpc::ScalarField;
using dpc::Vec3;

namespace {

GridSpec small_grid() {
    GridSpec g;
    g.dims = {3, 4, 5};
    g.spacing = 0.25;
    g.origin = {-1.0, 0.5, 2.0};
    return g;
}

}  // namespace

TEST_CASE("validate rejects malformed specs") {
    GridSpec g = small_grid();
    g.validate();

    GridSpec bad = g;
    bad.dims[0] = 0;
    expect_error([&] { bad.validate(); }, dpc::ErrorCategory::config,
                 "dims must be >= 1, got 0 on axis 0");

    bad = g;
    bad.dims[2] = -4;
    expect_error([&] { bad.validate(); }, dpc::ErrorCategory::config, "on axis 2");

    bad = g;
    bad.spacing = 0.0;
    expect_error([&] { bad.validate(); }, dpc::ErrorCategory::config,
                 "spacing must be positive and finite");
    bad.spacing = -0.5;
    expect_error([&] { bad.validate(); }, dpc::ErrorCategory::config, "spacing");
    bad.spacing = std::nan("");
    expect_error([&] { bad.validate(); }, dpc::ErrorCategory::config, "spacing");

    bad = g;
    bad.origin.y = std::numeric_limits<double>::infinity();
    expect_error([&] { bad.validate(); }, dpc::ErrorCategory::config, "origin must be finite");

    bad = g;
    bad.dims = {1 << 10, 1 << 10, 1 << 9};  // 2^29 nodes
    expect_error([&] { bad.validate(); }, dpc::ErrorCategory::config, "exceeds the supported size");
}

TEST_CASE("linear index runs z fastest and round-trips through pos") {
    const GridSpec g = small_grid();
    CHECK(g.n_nodes() == 60);
    CHECK(g.cell_volume() == doctest::Approx(0.015625).epsilon(1e-15));

    std::int64_t linear = 0;
    for (std::int64_t i = 0; i < g.dims[0]; ++i)
        for (std::int64_t j = 0; j < g.dims[1]; ++j)
            for (std::int64_t k = 0; k < g.dims[2]; ++k, ++linear) {
                CHECK(g.index(i, j, k) == linear);
                const Vec3 p = g.pos(i, j, k);
                CHECK(p.x == g.origin.x + static_cast<double>(i) * g.spacing);
                CHECK(p.y == g.origin.y + static_cast<double>(j) * g.spacing);
                CHECK(p.z == g.origin.z + static_cast<double>(k) * g.spacing);
                CHECK(g.pos(linear) == p);
            }
}

TEST_CASE("cells are centered on nodes") {
    const GridSpec g = small_grid();
    const Vec3 lo = g.min_corner();
    const Vec3 hi = g.max_corner();
    CHECK(lo.x == g.origin.x - 0.125);
    CHECK(lo.y == g.origin.y - 0.125);
    CHECK(lo.z == g.origin.z - 0.125);
    CHECK(hi.x == doctest::Approx(g.origin.x + 2.0 * 0.25 + 0.125).epsilon(1e-15));
    CHECK(hi.y == doctest::Approx(g.origin.y + 3.0 * 0.25 + 0.125).epsilon(1e-15));
    CHECK(hi.z == doctest::Approx(g.origin.z + 4.0 * 0.25 + 0.125).epsilon(1e-15));

    GridSpec h = g;
    CHECK(g == h);
    h.spacing = 0.5;
    CHECK(!(g == h));
}

TEST_CASE("gradient is exact for quadratics at every node") {
    GridSpec g;
    g.dims = {7, 6, 5};
    g.spacing = 0.3;
    g.origin = {-0.4, 0.2, 0.1};

    ScalarField f(g);
    for (std::int64_t i = 0; i < g.dims[0]; ++i)
        for (std::int64_t j = 0; j < g.dims[1]; ++j)
            for (std::int64_t k = 0; k < g.dims[2]; ++k) {
                const Vec3 p = g.pos(i, j, k);
                f.at(i, j, k) = 1.5 + 2.0 * p.x - 3.0 * p.y + 0.5 * p.z + 0.75 * p.x * p.x -
                                0.25 * p.y * p.y + 1.25 * p.z * p.z + 0.5 * p.x * p.y -
                                0.8 * p.y * p.z + 0.3 * p.z * p.x;
            }

    const dpc::VectorField grad = dpc::gradient(f);
    for (std::int64_t i = 0; i < g.dims[0]; ++i)
        for (std::int64_t j = 0; j < g.dims[1]; ++j)
            for (std::int64_t k = 0; k < g.dims[2]; ++k) {
                const Vec3 p = g.pos(i, j, k);
                const Vec3 got = grad.values[static_cast<std::size_t>(g.index(i, j, k))];
                CHECK(got.x == doctest::Approx(2.0 + 1.5 * p.x + 0.5 * p.y + 0.3 * p.z).epsilon(1e-12));
                CHECK(got.y == doctest::Approx(-3.0 - 0.5 * p.y + 0.5 * p.x - 0.8 * p.z).epsilon(1e-12));
                CHECK(got.z == doctest::Approx(0.5 + 2.5 * p.z - 0.8 * p.y + 0.3 * p.x).epsilon(1e-12));
            }
}

TEST_CASE("interior stencil is exact for quartics, face-adjacent one is not") {
    GridSpec g;
    g.dims = {8, 8, 8};
    g.spacing = 0.2;
    g.origin = {-0.7, -0.7, -0.7};

    ScalarField f(g);
    for (std::int64_t i = 0; i < 8; ++i)
        for (std::int64_t j = 0; j < 8; ++j)
            for (std::int64_t k = 0; k < 8; ++k) {
                const Vec3 p = g.pos(i, j, k);
                f.at(i, j, k) = p.x * p.x * p.x * p.x + p.y * p.y * p.y * p.y +
                                p.z * p.z * p.z * p.z;
            }

    const dpc::VectorField grad = dpc::gradient(f);
    for (std::int64_t i = 2; i <= 5; ++i)
        for (std::int64_t j = 2; j <= 5; ++j)
            for (std::int64_t k = 2; k <= 5; ++k) {
                const Vec3 p = g.pos(i, j, k);
                const Vec3 got = grad.values[static_cast<std::size_t>(g.index(i, j, k))];
                CHECK(std::abs(got.x - 4.0 * p.x * p.x * p.x) < 1e-12);
                CHECK(std::abs(got.y - 4.0 * p.y * p.y * p.y) < 1e-12);
                CHECK(std::abs(got.z - 4.0 * p.z * p.z * p.z) < 1e-12);
            }

    // node beside the face falls back to the second-order stencil, whose
    // h^2 f''' / 6 error is visible on a quartic
    const Vec3 p = g.pos(1, 4, 4);
    const Vec3 near_face = grad.values[static_cast<std::size_t>(g.index(1, 4, 4))];
    CHECK(std::abs(near_face.x - 4.0 * p.x * p.x * p.x) > 1e-3);
}

TEST_CASE("gradient needs three nodes per axis") {
    GridSpec g;
    g.dims = {2, 8, 8};
    g.spacing = 0.1;
    ScalarField f(g);
    expect_error([&] { dpc::gradient(f); }, dpc::ErrorCategory::config,
                 "needs at least 3 nodes per axis");
}

TEST_CASE("coarsen2 halves dims, recenters nodes and conserves the integral") {
    GridSpec g;
    g.dims = {8, 6, 4};
    g.spacing = 0.5;
    g.origin = {0.25, -1.0, 3.0};

    ScalarField f(g);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : f.values) v = u(rng);

    const ScalarField c = dpc::coarsen2(f);
    CHECK(c.grid.dims == std::array<std::int64_t, 3>{4, 3, 2});
    CHECK(c.grid.spacing == 1.0);
    CHECK(c.grid.origin == Vec3{0.5, -0.75, 3.25});

    double fine = 0.0, coarse = 0.0;
    for (double v : f.values) fine += v;
    for (double v : c.values) coarse += v;
    CHECK(fine * g.cell_volume() == doctest::Approx(coarse * c.grid.cell_volume()).epsilon(1e-12));

    // each coarse cell is the mean of its 2x2x2 block
    double block = 0.0;
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) block += f.at(2 + di, 4 + dj, 2 + dk);
    CHECK(c.at(1, 2, 1) == doctest::Approx(block / 8.0).epsilon(1e-15));

    GridSpec odd = g;
    odd.dims[1] = 7;
    ScalarField fo(odd);
    expect_error([&] { dpc::coarsen2(fo); }, dpc::ErrorCategory::config,
                 "coarsen2: dims must be even");
}

TEST_CASE("subsample2 keeps alternate nodes bitwise and the origin fixed") {
    GridSpec g;
    g.dims = {6, 4, 8};
    g.spacing = 0.125;
    g.origin = {-0.3, 0.7, 1.1};

    ScalarField f(g);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (double& v : f.values) v = u(rng);

    const ScalarField s = dpc::subsample2(f);
    CHECK(s.grid.dims == std::array<std::int64_t, 3>{3, 2, 4});
    CHECK(s.grid.spacing == 0.25);
    CHECK(s.grid.origin == g.origin);
    for (std::int64_t i = 0; i < 3; ++i)
        for (std::int64_t j = 0; j < 2; ++j)
            for (std::int64_t k = 0; k < 4; ++k)
                CHECK(s.at(i, j, k) == f.at(2 * i, 2 * j, 2 * k));

    GridSpec odd = g;
    odd.dims[0] = 5;
    ScalarField fo(odd);
    expect_error([&] { dpc::subsample2(fo); }, dpc::ErrorCategory::config,
                 "subsample2: dims must be even");
}
