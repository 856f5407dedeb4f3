#include "grid.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "numeric.hpp"

namespace dpc {

void GridSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1)
            fail_config("grid: dims must be >= 1, got " + std::to_string(dims[a]) + " on axis " + std::to_string(a));
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        fail_config("grid: spacing must be positive and finite");
    if (!origin.finite()) fail_config("grid: origin must be finite");
    const std::int64_t n = n_nodes();
    // 2^31 nodes of doubles is already 16 GiB, refuse long before that
    if (n > (std::int64_t{1} << 28))
        fail_config("grid: " + std::to_string(n) + " nodes exceeds the supported size");
}

VectorField gradient(const ScalarField& f) {
    const GridSpec& g = f.grid;
    g.validate();
    for (int a = 0; a < 3; ++a)
        if (g.dims[a] < 3) fail_config("gradient: needs at least 3 nodes per axis");

    VectorField out(g);
    const double invh = 1.0 / g.spacing;
    const std::int64_t nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];

    auto diff = [invh](auto&& at, std::int64_t i, std::int64_t n) {
        if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) * (0.5 * invh);
        if (i == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * (0.5 * invh);
        if (i < 2 || i > n - 3) return (at(i + 1) - at(i - 1)) * (0.5 * invh);
        return (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) * (invh / 12.0);
    };

    parallel_for_blocks(static_cast<std::size_t>(nx), [&](std::size_t bi) {
        const std::int64_t i = static_cast<std::int64_t>(bi);
        for (std::int64_t j = 0; j < ny; ++j) {
            for (std::int64_t k = 0; k < nz; ++k) {
                Vec3 gvec;
                gvec.x = diff([&](std::int64_t q) { return f.at(q, j, k); }, i, nx);
                gvec.y = diff([&](std::int64_t q) { return f.at(i, q, k); }, j, ny);
                gvec.z = diff([&](std::int64_t q) { return f.at(i, j, q); }, k, nz);
                out.values[static_cast<std::size_t>(g.index(i, j, k))] = gvec;
            }
        }
    });
    return out;
}

ScalarField coarsen2(const ScalarField& f) {
    const GridSpec& g = f.grid;
    for (int a = 0; a < 3; ++a)
        if (g.dims[a] % 2 != 0 || g.dims[a] < 2) fail_config("coarsen2: dims must be even");

    GridSpec cg;
    cg.dims = {g.dims[0] / 2, g.dims[1] / 2, g.dims[2] / 2};
    cg.spacing = 2.0 * g.spacing;
    // coarse node (0,0,0) is the centroid of fine cells (0..1)^3
    cg.origin = g.origin + Vec3{0.5, 0.5, 0.5} * g.spacing;

    ScalarField out(cg);
    for (std::int64_t i = 0; i < cg.dims[0]; ++i)
        for (std::int64_t j = 0; j < cg.dims[1]; ++j)
            for (std::int64_t k = 0; k < cg.dims[2]; ++k) {
                double s = 0.0;
                for (int di = 0; di < 2; ++di)
                    for (int dj = 0; dj < 2; ++dj)
                        for (int dk = 0; dk < 2; ++dk)
                            s += f.at(2 * i + di, 2 * j + dj, 2 * k + dk);
                out.at(i, j, k) = s / 8.0;
            }
    return out;
}

ScalarField subsample2(const ScalarField& f) {
    const GridSpec& g = f.grid;
    for (int a = 0; a < 3; ++a)
        if (g.dims[a] % 2 != 0 || g.dims[a] < 2) fail_config("subsample2: dims must be even");

    GridSpec sg;
    sg.dims = {g.dims[0] / 2, g.dims[1] / 2, g.dims[2] / 2};
    sg.spacing = 2.0 * g.spacing;
    sg.origin = g.origin;

    ScalarField out(sg);
    for (std::int64_t i = 0; i < sg.dims[0]; ++i)
        for (std::int64_t j = 0; j < sg.dims[1]; ++j)
            for (std::int64_t k = 0; k < sg.dims[2]; ++k)
                out.at(i, j, k) = f.at(2 * i, 2 * j, 2 * k);
    return out;
}

}  // namespace dpc
