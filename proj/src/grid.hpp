#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vec3.hpp"

namespace dpc {

// Uniform cubic-cell grid. Nodes sit at cell centers; the field value at a
// node represents the cell average. Linear index runs z fastest, x slowest.
struct GridSpec {
    std::array<std::int64_t, 3> dims{0, 0, 0};
    double spacing = 0.0;
    Vec3 origin{};  // position of node (0,0,0)

    std::int64_t n_nodes() const { return dims[0] * dims[1] * dims[2]; }
    double cell_volume() const { return spacing * spacing * spacing; }

    std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return (i * dims[1] + j) * dims[2] + k;
    }

    Vec3 pos(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return {origin.x + static_cast<double>(i) * spacing,
                origin.y + static_cast<double>(j) * spacing,
                origin.z + static_cast<double>(k) * spacing};
    }

    Vec3 pos(std::int64_t linear) const {
        const std::int64_t k = linear % dims[2];
        const std::int64_t j = (linear / dims[2]) % dims[1];
        const std::int64_t i = linear / (dims[1] * dims[2]);
        return pos(i, j, k);
    }

    // cell extents, each cell is a cube of side `spacing` centered on its node
    Vec3 min_corner() const { return origin - Vec3{0.5, 0.5, 0.5} * spacing; }
    Vec3 max_corner() const {
        return min_corner() + Vec3{static_cast<double>(dims[0]),
                                   static_cast<double>(dims[1]),
                                   static_cast<double>(dims[2])} * spacing;
    }

    bool operator==(const GridSpec&) const = default;

    void validate() const;  // throws Error(config)
};

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g) : grid(g), values(static_cast<std::size_t>(g.n_nodes()), 0.0) {}

    double& at(std::int64_t i, std::int64_t j, std::int64_t k) {
        return values[static_cast<std::size_t>(grid.index(i, j, k))];
    }
    double at(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return values[static_cast<std::size_t>(grid.index(i, j, k))];
    }
};

struct VectorField {
    GridSpec grid;
    std::vector<Vec3> values;

    VectorField() = default;
    explicit VectorField(const GridSpec& g) : grid(g), values(static_cast<std::size_t>(g.n_nodes())) {}
};

// Fourth-order central differences where the five-point stencil fits,
// second-order central beside the faces, second-order one-sided on the six
// faces. Requires dims >= 3 along every axis.
VectorField gradient(const ScalarField& f);

// Merges 2x2x2 cell blocks by averaging, which conserves integral(f dV) for
// densities. Requires even dims.
ScalarField coarsen2(const ScalarField& f);

// Keeps every second node starting at node 0. Samples the same function on a
// grid of doubled spacing (no re-averaging), for Richardson-style estimates
// of node-sampled quantities. Requires even dims.
ScalarField subsample2(const ScalarField& f);

}  // namespace dpc
