#include "dpenergy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "numeric.hpp"
#include "sphere_interaction.hpp"

namespace dpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SignedBody {
    SphereBody body;
    double sign;
};

// Canonical body order makes the summation tree identical for
// dp(rho1, rho2) and dp(rho2, rho1), so the symmetry invariant holds
// bitwise, not just to rounding.
bool body_less(const SignedBody& a, const SignedBody& b) {
    return std::tie(a.body.center.x, a.body.center.y, a.body.center.z,
                    a.body.radius, a.body.mass, a.sign) <
           std::tie(b.body.center.x, b.body.center.y, b.body.center.z,
                    b.body.radius, b.body.mass, b.sign);
}

double analytic_difference_coulomb(const MassDistribution& r1, const MassDistribution& r2) {
    std::vector<SignedBody> all;
    for (const SphereBody& b : r1.bodies())
        if (b.mass > 0.0) all.push_back({b, 1.0});
    for (const SphereBody& b : r2.bodies())
        if (b.mass > 0.0) all.push_back({b, -1.0});
    std::sort(all.begin(), all.end(), body_less);

    const std::size_t n = all.size();
    std::vector<double> terms;
    terms.reserve(n * (n + 1) / 2);
    for (std::size_t p = 0; p < n; ++p) {
        terms.push_back(sphere_self_coulomb(all[p].body.mass, all[p].body.radius));
        for (std::size_t q = p + 1; q < n; ++q) {
            const double s = distance(all[p].body.center, all[q].body.center);
            terms.push_back(2.0 * all[p].sign * all[q].sign *
                            sphere_pair_coulomb(all[p].body.mass, all[p].body.radius,
                                                all[q].body.mass, all[q].body.radius, s));
        }
    }
    return pairwise_sum(terms);
}

// sum over cell pairs of dm_c dm_d K(r_cd), including the c = d self term
double grid_difference_coulomb(const ScalarField& delta) {
    const GridSpec& g = delta.grid;
    const double vol = g.cell_volume();
    const double h = g.spacing;

    struct Cell {
        std::int32_t i, j, k;
        double m;
    };
    std::vector<Cell> nz;
    for (std::int64_t i = 0; i < g.dims[0]; ++i)
        for (std::int64_t j = 0; j < g.dims[1]; ++j)
            for (std::int64_t k = 0; k < g.dims[2]; ++k) {
                const double v = delta.at(i, j, k);
                if (v != 0.0)
                    nz.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                                  static_cast<std::int32_t>(k), v * vol});
            }
    if (nz.empty()) return 0.0;

    const double pair_cost = static_cast<double>(nz.size()) * static_cast<double>(nz.size());
    if (pair_cost <= 2.0e8) {
        const CellKernel kern(h);
        std::vector<double> partial(nz.size(), 0.0);
        parallel_for_blocks(nz.size(), [&](std::size_t p) {
            const Cell& a = nz[p];
            double s = 0.0;
            for (const Cell& b : nz) {
                const double dx = static_cast<double>(a.i - b.i) * h;
                const double dy = static_cast<double>(a.j - b.j) * h;
                const double dz = static_cast<double>(a.k - b.k) * h;
                s += b.m * kern.from_r2(dx * dx + dy * dy + dz * dz);
            }
            partial[p] = a.m * s;
        });
        return pairwise_sum(partial);
    }

    const ScalarField psi = kernel_sum(delta, SolveMethod::convolution);
    return blocked_sum(delta.values.size(), [&](std::size_t t) {
        return delta.values[t] * vol * psi.values[t];
    });
}

ScalarField density_difference(const ScalarField& a, const ScalarField& b) {
    ScalarField d(a.grid);
    for (std::size_t t = 0; t < d.values.size(); ++t) d.values[t] = a.values[t] - b.values[t];
    return d;
}

bool dims_even(const GridSpec& g) {
    return g.dims[0] % 2 == 0 && g.dims[1] % 2 == 0 && g.dims[2] % 2 == 0 && g.dims[0] >= 2 &&
           g.dims[1] >= 2 && g.dims[2] >= 2;
}

GridSpec halved_grid(const GridSpec& g) {
    GridSpec cg;
    cg.dims = {g.dims[0] / 2, g.dims[1] / 2, g.dims[2] / 2};
    cg.spacing = 2.0 * g.spacing;
    cg.origin = g.origin + Vec3{0.5, 0.5, 0.5} * g.spacing;
    return cg;
}

double bilinear_energy(const ScalarField& rho1, const ScalarField& rho2,
                       const PotentialField& phi1, const PotentialField& phi2) {
    const double vol = rho1.grid.cell_volume();
    return 0.5 * blocked_sum(rho1.values.size(), [&](std::size_t t) {
        return (rho1.values[t] - rho2.values[t]) * (phi2.values[t] - phi1.values[t]) * vol;
    });
}

double field_energy(const VectorField& g1, const VectorField& g2, double G) {
    const double vol = g1.grid.cell_volume();
    const double s = blocked_sum(g1.values.size(), [&](std::size_t t) {
        const Vec3 d = g1.values[t] - g2.values[t];
        return d.norm2() * vol;
    });
    return s / (8.0 * kPi * G);
}

// Crude dipole-tail estimate: the difference field of equal-mass pairs
// falls off like r^-3, so the truncated exterior integral is about
// <|dg|^2 at boundary> * L^3 / (6 G) with L the nearest boundary distance.
double field_tail_estimate(const VectorField& g1, const VectorField& g2, double G) {
    const GridSpec& g = g1.grid;
    double acc = 0.0;
    std::int64_t cnt = 0;
    const std::int64_t nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    for (std::int64_t i = 0; i < nx; ++i)
        for (std::int64_t j = 0; j < ny; ++j)
            for (std::int64_t k = 0; k < nz; ++k) {
                if (i != 0 && i != nx - 1 && j != 0 && j != ny - 1 && k != 0 && k != nz - 1)
                    continue;
                const Vec3 d = g1.values[static_cast<std::size_t>(g.index(i, j, k))] -
                               g2.values[static_cast<std::size_t>(g.index(i, j, k))];
                acc += d.norm2();
                ++cnt;
            }
    if (cnt == 0) return 0.0;
    const double mean_g2 = acc / static_cast<double>(cnt);
    const Vec3 ext = g.max_corner() - g.min_corner();
    const double L = 0.5 * std::min({ext.x, ext.y, ext.z});
    return mean_g2 * L * L * L / (6.0 * G);
}

}  // namespace

DpEnergyResult dp_energy_double_integral(const MassDistribution& rho1, const MassDistribution& rho2,
                                         const PhysicalConstants& constants) {
    constants.validate();
    rho1.validate();
    rho2.validate();

    DpEnergyResult res;
    res.method = DpMethod::double_integral;
    res.xi = constants.xi;

    if (rho1.analytic() && rho2.analytic()) {
        res.analytic = true;
        res.estimated_error = 0.0;
        res.value = constants.xi * constants.G * analytic_difference_coulomb(rho1, rho2);
        return res;
    }

    const GridSpec grid = rho1.kind() == DistKind::voxel_grid ? rho1.density_field().grid
                                                              : rho2.density_field().grid;
    if (rho1.kind() == DistKind::voxel_grid && rho2.kind() == DistKind::voxel_grid &&
        !(rho1.density_field().grid == rho2.density_field().grid))
        fail_config("dp_energy_double_integral: voxel inputs must share one grid");
    return dp_energy_double_integral(rho1, rho2, constants, grid);
}

DpEnergyResult dp_energy_double_integral(const MassDistribution& rho1, const MassDistribution& rho2,
                                         const PhysicalConstants& constants, const GridSpec& grid) {
    constants.validate();
    grid.validate();

    DpEnergyResult res;
    res.method = DpMethod::double_integral;
    res.xi = constants.xi;
    res.analytic = false;
    res.grid = grid;

    const ScalarField d1 = rasterize(rho1, grid);
    const ScalarField d2 = rasterize(rho2, grid);
    const ScalarField delta = density_difference(d1, d2);
    res.value = constants.xi * constants.G * grid_difference_coulomb(delta);

    if (dims_even(grid)) {
        const ScalarField delta2 = coarsen2(delta);
        const double coarse = constants.xi * constants.G * grid_difference_coulomb(delta2);
        res.estimated_error = std::abs(res.value - coarse);
    } else {
        res.estimated_error = std::abs(res.value);
    }
    return res;
}

DpEnergyResult dp_energy_potential_form(const ScalarField& rho1, const ScalarField& rho2,
                                        const PotentialField& phi1, const PotentialField& phi2) {
    if (!(rho1.grid == rho2.grid) || !(rho1.grid == phi1.grid) || !(rho1.grid == phi2.grid))
        fail_config("dp_energy_potential_form: all fields must share one grid");

    DpEnergyResult res;
    res.method = DpMethod::potential_form;
    res.xi = 0.5;
    res.analytic = false;
    res.grid = rho1.grid;
    res.value = bilinear_energy(rho1, rho2, phi1, phi2);

    if (dims_even(rho1.grid)) {
        const double coarse = bilinear_energy(subsample2(rho1), subsample2(rho2),
                                              subsample2(phi1), subsample2(phi2));
        res.estimated_error = std::abs(res.value - coarse);
    } else {
        res.estimated_error = std::abs(res.value);
    }
    return res;
}

DpEnergyResult dp_energy_potential_form(const MassDistribution& rho1, const MassDistribution& rho2,
                                        const PhysicalConstants& constants, const GridSpec& grid,
                                        SolveMethod method) {
    const ScalarField d1 = rasterize(rho1, grid);
    const ScalarField d2 = rasterize(rho2, grid);
    const PotentialField p1 = solve_potential(rho1, grid, constants, method);
    const PotentialField p2 = solve_potential(rho2, grid, constants, method);

    // voxel inputs cannot be re-rasterized at doubled spacing, use the
    // node-subsampled estimate instead
    if (!rho1.analytic() || !rho2.analytic() || !dims_even(grid))
        return dp_energy_potential_form(d1, d2, p1, p2);

    DpEnergyResult res;
    res.method = DpMethod::potential_form;
    res.xi = 0.5;
    res.analytic = false;
    res.grid = grid;
    res.value = bilinear_energy(d1, d2, p1, p2);

    // full-pipeline Richardson: re-rasterize and re-solve at doubled spacing
    const GridSpec cg = halved_grid(grid);
    const double coarse = bilinear_energy(rasterize(rho1, cg), rasterize(rho2, cg),
                                          solve_potential(rho1, cg, constants, method),
                                          solve_potential(rho2, cg, constants, method));
    res.estimated_error = std::abs(res.value - coarse);
    return res;
}

// Closed-form node samples for analytic inputs; the grid solve would smear
// the body surfaces by one cell and the |g|^2 integral is dominated by the
// surface shell. Voxel inputs have no closed form and keep the solver.
static PotentialField nodal_potential(const MassDistribution& dist, const GridSpec& grid,
                                      const PhysicalConstants& constants, SolveMethod method) {
    if (!dist.analytic()) return solve_potential(dist, grid, constants, method);
    grid.validate();
    PotentialField out(grid);
    parallel_for_blocks(static_cast<std::size_t>(grid.dims[0]), [&](std::size_t bi) {
        const std::int64_t i = static_cast<std::int64_t>(bi);
        for (std::int64_t j = 0; j < grid.dims[1]; ++j)
            for (std::int64_t k = 0; k < grid.dims[2]; ++k)
                out.values[static_cast<std::size_t>(grid.index(i, j, k))] =
                    potential_at(dist, grid.pos(i, j, k), constants);
    });
    return out;
}

DpEnergyResult dp_energy_field_form(const VectorField& g1, const VectorField& g2,
                                    const PhysicalConstants& constants) {
    constants.validate();
    if (!(g1.grid == g2.grid)) fail_config("dp_energy_field_form: fields must share one grid");

    DpEnergyResult res;
    res.method = DpMethod::field_form;
    res.xi = 0.5;
    res.analytic = false;
    res.grid = g1.grid;
    res.value = field_energy(g1, g2, constants.G);

    double rich = std::abs(res.value);
    if (dims_even(g1.grid)) {
        const GridSpec& g = g1.grid;
        GridSpec sg;
        sg.dims = {g.dims[0] / 2, g.dims[1] / 2, g.dims[2] / 2};
        sg.spacing = 2.0 * g.spacing;
        sg.origin = g.origin;
        VectorField s1(sg), s2(sg);
        for (std::int64_t i = 0; i < sg.dims[0]; ++i)
            for (std::int64_t j = 0; j < sg.dims[1]; ++j)
                for (std::int64_t k = 0; k < sg.dims[2]; ++k) {
                    const std::size_t cidx = static_cast<std::size_t>(sg.index(i, j, k));
                    const std::size_t fidx = static_cast<std::size_t>(g.index(2 * i, 2 * j, 2 * k));
                    s1.values[cidx] = g1.values[fidx];
                    s2.values[cidx] = g2.values[fidx];
                }
        rich = std::abs(res.value - field_energy(s1, s2, constants.G));
    }
    res.estimated_error = rich + field_tail_estimate(g1, g2, constants.G);
    return res;
}

DpEnergyResult dp_energy_field_form(const MassDistribution& rho1, const MassDistribution& rho2,
                                    const PhysicalConstants& constants, const GridSpec& grid,
                                    SolveMethod method) {
    const VectorField g1 = gradient(nodal_potential(rho1, grid, constants, method));
    const VectorField g2 = gradient(nodal_potential(rho2, grid, constants, method));

    // voxel inputs cannot be re-sampled on the halved grid, fall back to the
    // subsampled-field estimate
    if (!rho1.analytic() || !rho2.analytic() || !dims_even(grid))
        return dp_energy_field_form(g1, g2, constants);

    DpEnergyResult res;
    res.method = DpMethod::field_form;
    res.xi = 0.5;
    res.analytic = false;
    res.grid = grid;
    res.value = field_energy(g1, g2, constants.G);

    const GridSpec cg = halved_grid(grid);
    const VectorField c1 = gradient(nodal_potential(rho1, cg, constants, method));
    const VectorField c2 = gradient(nodal_potential(rho2, cg, constants, method));
    res.estimated_error = std::abs(res.value - field_energy(c1, c2, constants.G)) +
                          field_tail_estimate(g1, g2, constants.G);
    return res;
}

double clock_rate_factor(double phi, const PhysicalConstants& constants) {
    constants.validate();
    if (!std::isfinite(phi)) fail_config("clock_rate_factor: potential must be finite");
    const double ratio = std::abs(phi) / (constants.c * constants.c);
    // inclusive boundary, so phi = -0.01 c^2 is still legal
    if (ratio > 0.01 * (1.0 + 1e-12))
        fail_guard("clock_rate_factor: weak-field guard violated, |phi|/c^2 = " + std::to_string(ratio));
    return 1.0 + phi / (constants.c * constants.c);
}

std::pair<double, double> energy_fuzziness(const ScalarField& rho1, const ScalarField& rho2,
                                           const PotentialField& phi1, const PotentialField& phi2) {
    if (!(rho1.grid == rho2.grid) || !(rho1.grid == phi1.grid) || !(rho1.grid == phi2.grid))
        fail_config("energy_fuzziness: all fields must share one grid");
    const double vol = rho1.grid.cell_volume();
    const double de1 = blocked_sum(rho1.values.size(), [&](std::size_t t) {
        return rho1.values[t] * (phi2.values[t] - phi1.values[t]) * vol;
    });
    const double de2 = blocked_sum(rho2.values.size(), [&](std::size_t t) {
        return rho2.values[t] * (phi1.values[t] - phi2.values[t]) * vol;
    });
    return {de1, de2};
}

double lifetime(double e_g12, const PhysicalConstants& constants) {
    constants.validate();
    if (!std::isfinite(e_g12)) fail_config("lifetime: energy must be finite");
    if (e_g12 < 0.0) fail_guard("lifetime: negative interaction energy");
    if (e_g12 == 0.0) return std::numeric_limits<double>::infinity();
    return constants.hbar / e_g12;
}

double diosi_field_uncertainty(double volume, double dt, const PhysicalConstants& constants) {
    constants.validate();
    if (!(volume > 0.0) || !std::isfinite(volume)) fail_config("field uncertainty: volume must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail_config("field uncertainty: duration must be > 0");
    return std::sqrt(constants.hbar * constants.G / (volume * dt));
}

}  // namespace dpc
