#pragma once

#include <vector>

#include "constants.hpp"
#include "grid.hpp"

namespace dpc {

enum class DistKind { point_set, uniform_sphere_set, voxel_grid };

// A smeared point is represented as a homogeneous ball of its smearing
// radius, so both analytic kinds share this record.
struct SphereBody {
    Vec3 center;
    double mass = 0.0;
    double radius = 0.0;
};

class MassDistribution {
public:
    MassDistribution() = default;  // empty distribution, zero mass everywhere

    // radius field of each body is its smearing radius, must be > 0
    static MassDistribution point_set(std::vector<SphereBody> points);
    static MassDistribution uniform_sphere_set(std::vector<SphereBody> spheres);
    static MassDistribution voxel_grid(ScalarField density);

    DistKind kind() const { return kind_; }
    bool analytic() const { return kind_ != DistKind::voxel_grid; }
    bool empty() const;

    const std::vector<SphereBody>& bodies() const { return bodies_; }
    const ScalarField& density_field() const;

    double total_mass() const;

    // tight axis-aligned box around all cells/bodies carrying mass;
    // false when the distribution is empty
    bool support_bbox(Vec3& lo, Vec3& hi) const;

    MassDistribution translated(const Vec3& t) const;

    void validate() const;

private:
    DistKind kind_ = DistKind::uniform_sphere_set;
    std::vector<SphereBody> bodies_;
    ScalarField field_;
};

// Φ(x) of the distribution. Analytic closed forms for sphere/point sets
// (interior and exterior), discrete kernel sum for voxel grids.
double potential_at(const MassDistribution& dist, const Vec3& x, const PhysicalConstants& constants);

enum class SolveMethod {
    automatic,    // direct for small jobs, convolution for large same-grid jobs
    direct,       // node-by-cell kernel summation
    convolution,  // zero-padded FFT with the identical discrete kernel
};

using PotentialField = ScalarField;

// Discrete free-space potential of the distribution sampled on `grid`.
// Analytic inputs are rasterized onto the grid first; both backends share
// the cell kernel, so they agree to rounding. Requires two cells of empty
// padding between the support and the grid boundary.
PotentialField solve_potential(const MassDistribution& dist, const GridSpec& grid,
                               const PhysicalConstants& constants,
                               SolveMethod method = SolveMethod::automatic);

// Cell-averaged density of the distribution on `grid` (kg/m^3 in SI).
// Boundary cells of analytic bodies get fractional occupancy from
// subsample^3 interior tests per cell; subsample = 1 reduces to the
// cell-center rule. Voxel input must already live on `grid`.
ScalarField rasterize(const MassDistribution& dist, const GridSpec& grid, int subsample = 4);

// Support check used by the solver, exposed for reuse: true when the
// support fits inside the grid with `margin_cells` empty cells on every
// side.
bool support_fits(const MassDistribution& dist, const GridSpec& grid, double margin_cells);

// Raw discrete kernel sum out(c) = sum_d density_d * V * K(|r_c - r_d|)
// over the density's own grid. Signed densities are allowed; this is the
// shared backend of solve_potential (which is -G times this) and of the
// grid double-integral energy.
ScalarField kernel_sum(const ScalarField& density, SolveMethod method = SolveMethod::automatic);

}  // namespace dpc
