#include "massdist.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <utility>

#include <fftw3.h>

#include "error.hpp"
#include "kernel.hpp"
#include "numeric.hpp"

namespace dpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// potential of a homogeneous ball divided by (-G m)
double ball_phi_shape(double r, double R) {
    if (r >= R) return 1.0 / r;
    return (3.0 * R * R - r * r) / (2.0 * R * R * R);
}

}  // namespace

MassDistribution MassDistribution::point_set(std::vector<SphereBody> points) {
    MassDistribution d;
    d.kind_ = DistKind::point_set;
    d.bodies_ = std::move(points);
    d.validate();
    return d;
}

MassDistribution MassDistribution::uniform_sphere_set(std::vector<SphereBody> spheres) {
    MassDistribution d;
    d.kind_ = DistKind::uniform_sphere_set;
    d.bodies_ = std::move(spheres);
    d.validate();
    return d;
}

MassDistribution MassDistribution::voxel_grid(ScalarField density) {
    MassDistribution d;
    d.kind_ = DistKind::voxel_grid;
    d.field_ = std::move(density);
    d.validate();
    return d;
}

void MassDistribution::validate() const {
    if (kind_ == DistKind::voxel_grid) {
        field_.grid.validate();
        if (field_.values.size() != static_cast<std::size_t>(field_.grid.n_nodes()))
            fail_config("voxel distribution: value count does not match grid dims");
        for (double v : field_.values)
            if (!(v >= 0.0) || !std::isfinite(v))
                fail_config("voxel distribution: density values must be finite and >= 0");
        return;
    }
    for (const SphereBody& b : bodies_) {
        if (!b.center.finite()) fail_config("mass distribution: body center must be finite");
        if (!(b.mass >= 0.0) || !std::isfinite(b.mass))
            fail_config("mass distribution: body mass must be finite and >= 0");
        if (!(b.radius > 0.0) || !std::isfinite(b.radius))
            fail_config(kind_ == DistKind::point_set
                            ? "point set: smearing radius must be > 0"
                            : "sphere set: radius must be > 0");
    }
}

bool MassDistribution::empty() const {
    if (kind_ == DistKind::voxel_grid) {
        for (double v : field_.values)
            if (v > 0.0) return false;
        return true;
    }
    for (const SphereBody& b : bodies_)
        if (b.mass > 0.0) return false;
    return true;
}

const ScalarField& MassDistribution::density_field() const {
    if (kind_ != DistKind::voxel_grid) fail_internal("density_field: not a voxel distribution");
    return field_;
}

double MassDistribution::total_mass() const {
    if (kind_ == DistKind::voxel_grid) {
        return pairwise_sum(field_.values) * field_.grid.cell_volume();
    }
    double m = 0.0;
    for (const SphereBody& b : bodies_) m += b.mass;
    return m;
}

bool MassDistribution::support_bbox(Vec3& lo, Vec3& hi) const {
    bool found = false;
    if (kind_ == DistKind::voxel_grid) {
        const GridSpec& g = field_.grid;
        const double half = 0.5 * g.spacing;
        for (std::int64_t i = 0; i < g.dims[0]; ++i)
            for (std::int64_t j = 0; j < g.dims[1]; ++j)
                for (std::int64_t k = 0; k < g.dims[2]; ++k) {
                    if (!(field_.at(i, j, k) > 0.0)) continue;
                    const Vec3 p = g.pos(i, j, k);
                    const Vec3 clo{p.x - half, p.y - half, p.z - half};
                    const Vec3 chi{p.x + half, p.y + half, p.z + half};
                    if (!found) {
                        lo = clo;
                        hi = chi;
                        found = true;
                    } else {
                        lo = {std::min(lo.x, clo.x), std::min(lo.y, clo.y), std::min(lo.z, clo.z)};
                        hi = {std::max(hi.x, chi.x), std::max(hi.y, chi.y), std::max(hi.z, chi.z)};
                    }
                }
        return found;
    }
    for (const SphereBody& b : bodies_) {
        if (!(b.mass > 0.0)) continue;
        const Vec3 blo = b.center - Vec3{b.radius, b.radius, b.radius};
        const Vec3 bhi = b.center + Vec3{b.radius, b.radius, b.radius};
        if (!found) {
            lo = blo;
            hi = bhi;
            found = true;
        } else {
            lo = {std::min(lo.x, blo.x), std::min(lo.y, blo.y), std::min(lo.z, blo.z)};
            hi = {std::max(hi.x, bhi.x), std::max(hi.y, bhi.y), std::max(hi.z, bhi.z)};
        }
    }
    return found;
}

MassDistribution MassDistribution::translated(const Vec3& t) const {
    MassDistribution d = *this;
    if (d.kind_ == DistKind::voxel_grid) {
        d.field_.grid.origin += t;
    } else {
        for (SphereBody& b : d.bodies_) b.center += t;
    }
    return d;
}

double potential_at(const MassDistribution& dist, const Vec3& x, const PhysicalConstants& constants) {
    if (!x.finite()) fail_config("potential_at: point must be finite");
    constants.validate();
    if (dist.empty()) return 0.0;

    if (dist.analytic()) {
        double s = 0.0;
        for (const SphereBody& b : dist.bodies()) {
            if (!(b.mass > 0.0)) continue;
            const double r = distance(x, b.center);
            s += b.mass * ball_phi_shape(r, b.radius);
        }
        return -constants.G * s;
    }

    const ScalarField& f = dist.density_field();
    const GridSpec& g = f.grid;
    const CellKernel kern(g.spacing);
    const double vol = g.cell_volume();
    const Vec3 d0 = x - g.origin;
    const std::int64_t ny = g.dims[1], nz = g.dims[2];
    const double h = g.spacing;

    const double s = blocked_sum(static_cast<std::size_t>(g.n_nodes()), [&](std::size_t lin) {
        const double rho = f.values[lin];
        if (rho == 0.0) return 0.0;
        const std::int64_t k = static_cast<std::int64_t>(lin) % nz;
        const std::int64_t j = (static_cast<std::int64_t>(lin) / nz) % ny;
        const std::int64_t i = static_cast<std::int64_t>(lin) / (ny * nz);
        const double dx = d0.x - static_cast<double>(i) * h;
        const double dy = d0.y - static_cast<double>(j) * h;
        const double dz = d0.z - static_cast<double>(k) * h;
        return rho * vol * kern.from_r2(dx * dx + dy * dy + dz * dz);
    });
    return -constants.G * s;
}

bool support_fits(const MassDistribution& dist, const GridSpec& grid, double margin_cells) {
    Vec3 lo, hi;
    if (!dist.support_bbox(lo, hi)) return true;
    const double m = margin_cells * grid.spacing;
    const Vec3 gl = grid.min_corner();
    const Vec3 gh = grid.max_corner();
    return lo.x >= gl.x + m && lo.y >= gl.y + m && lo.z >= gl.z + m &&
           hi.x <= gh.x - m && hi.y <= gh.y - m && hi.z <= gh.z - m;
}

ScalarField rasterize(const MassDistribution& dist, const GridSpec& grid, int subsample) {
    grid.validate();
    dist.validate();
    if (subsample < 1) fail_config("rasterize: subsample must be >= 1");

    if (dist.kind() == DistKind::voxel_grid) {
        if (!(dist.density_field().grid == grid))
            fail_config("rasterize: voxel distribution must already be sampled on the target grid");
        return dist.density_field();
    }

    if (!support_fits(dist, grid, 0.0))
        fail_config("rasterize: distribution support extends outside the grid");

    ScalarField out(grid);
    const double h = grid.spacing;
    const double half_diag = 0.5 * std::sqrt(3.0) * h;
    const std::int64_t nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
    const int ns = subsample;
    const double inv_ns3 = 1.0 / (static_cast<double>(ns) * ns * ns);

    for (const SphereBody& b : dist.bodies()) {
        if (!(b.mass > 0.0)) continue;
        const double R = b.radius;
        const double rho = b.mass / ((4.0 / 3.0) * kPi * R * R * R);
        const Vec3 rel = b.center - grid.origin;  // body center in node coordinates
        const double r2_in = (R - half_diag) * (R - half_diag);
        const double r2_out = (R + half_diag) * (R + half_diag);

        auto axis_range = [&](double c, std::int64_t n, std::int64_t& a, std::int64_t& bmax) {
            a = static_cast<std::int64_t>(std::ceil((c - R) / h - 0.5));
            bmax = static_cast<std::int64_t>(std::floor((c + R) / h + 0.5));
            a = std::max<std::int64_t>(a, 0);
            bmax = std::min<std::int64_t>(bmax, n - 1);
        };
        std::int64_t i0, i1, j0, j1, k0, k1;
        axis_range(rel.x, nx, i0, i1);
        axis_range(rel.y, ny, j0, j1);
        axis_range(rel.z, nz, k0, k1);

        for (std::int64_t i = i0; i <= i1; ++i) {
            const double dx = static_cast<double>(i) * h - rel.x;
            for (std::int64_t j = j0; j <= j1; ++j) {
                const double dy = static_cast<double>(j) * h - rel.y;
                for (std::int64_t k = k0; k <= k1; ++k) {
                    const double dz = static_cast<double>(k) * h - rel.z;
                    const double r2 = dx * dx + dy * dy + dz * dz;
                    double frac;
                    if (r2 <= r2_in) {
                        frac = 1.0;
                    } else if (r2 >= r2_out) {
                        continue;
                    } else if (ns == 1) {
                        frac = r2 <= R * R ? 1.0 : 0.0;
                    } else {
                        int cnt = 0;
                        for (int a = 0; a < ns; ++a) {
                            const double sx = dx + ((a + 0.5) / ns - 0.5) * h;
                            for (int bq = 0; bq < ns; ++bq) {
                                const double sy = dy + ((bq + 0.5) / ns - 0.5) * h;
                                for (int cq = 0; cq < ns; ++cq) {
                                    const double sz = dz + ((cq + 0.5) / ns - 0.5) * h;
                                    if (sx * sx + sy * sy + sz * sz <= R * R) ++cnt;
                                }
                            }
                        }
                        if (cnt == 0) continue;
                        frac = cnt * inv_ns3;
                    }
                    out.at(i, j, k) += rho * frac;
                }
            }
        }
    }
    return out;
}

namespace {

struct SourceCell {
    std::int32_t i, j, k;
    double mass;
};

std::vector<SourceCell> compact_sources(const ScalarField& rho) {
    std::vector<SourceCell> src;
    const GridSpec& g = rho.grid;
    const double vol = g.cell_volume();
    for (std::int64_t i = 0; i < g.dims[0]; ++i)
        for (std::int64_t j = 0; j < g.dims[1]; ++j)
            for (std::int64_t k = 0; k < g.dims[2]; ++k) {
                const double v = rho.at(i, j, k);
                if (v != 0.0)
                    src.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j),
                                   static_cast<std::int32_t>(k), v * vol});
            }
    return src;
}

void sum_direct(const ScalarField& rho, ScalarField& phi) {
    const GridSpec& g = rho.grid;
    const CellKernel kern(g.spacing);
    const double h = g.spacing;
    const std::vector<SourceCell> src = compact_sources(rho);
    const std::int64_t ny = g.dims[1], nz = g.dims[2];

    parallel_for_blocks(static_cast<std::size_t>(g.dims[0]), [&](std::size_t bi) {
        const std::int64_t i = static_cast<std::int64_t>(bi);
        for (std::int64_t j = 0; j < ny; ++j)
            for (std::int64_t k = 0; k < nz; ++k) {
                double s = 0.0;
                for (const SourceCell& c : src) {
                    const double dx = static_cast<double>(i - c.i) * h;
                    const double dy = static_cast<double>(j - c.j) * h;
                    const double dz = static_cast<double>(k - c.k) * h;
                    s += c.mass * kern.from_r2(dx * dx + dy * dy + dz * dz);
                }
                phi.at(i, j, k) = s;
            }
    });
}

// Zero-padded circular convolution with the cell kernel, in-place r2c / c2r.
void sum_convolution(const ScalarField& rho, ScalarField& phi) {
    const GridSpec& g = rho.grid;
    const std::int64_t nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const std::int64_t px = 2 * nx, py = 2 * ny, pz = 2 * nz;
    const std::int64_t pzc = pz / 2 + 1;   // complex count along last axis
    const std::int64_t pzr = 2 * pzc;      // real row stride for in-place transform
    const std::size_t nreal = static_cast<std::size_t>(px * py * pzr);
    const CellKernel kern(g.spacing);
    const double h = g.spacing;

    double* kbuf = fftw_alloc_real(nreal);
    double* mbuf = fftw_alloc_real(nreal);
    if (!kbuf || !mbuf) {
        if (kbuf) fftw_free(kbuf);
        if (mbuf) fftw_free(mbuf);
        fail_internal("solve_potential: fftw allocation failed");
    }
    std::memset(kbuf, 0, nreal * sizeof(double));
    std::memset(mbuf, 0, nreal * sizeof(double));

    auto ridx = [py, pzr](std::int64_t i, std::int64_t j, std::int64_t k) {
        return static_cast<std::size_t>((i * py + j) * pzr + k);
    };

    for (std::int64_t i = 0; i < px; ++i) {
        const std::int64_t sx = i < nx ? i : i - px;
        for (std::int64_t j = 0; j < py; ++j) {
            const std::int64_t sy = j < ny ? j : j - py;
            for (std::int64_t k = 0; k < pz; ++k) {
                const std::int64_t sz = k < nz ? k : k - pz;
                const double r2 = static_cast<double>(sx * sx + sy * sy + sz * sz) * h * h;
                kbuf[ridx(i, j, k)] = kern.from_r2(r2);
            }
        }
    }

    const double vol = g.cell_volume();
    for (std::int64_t i = 0; i < nx; ++i)
        for (std::int64_t j = 0; j < ny; ++j)
            for (std::int64_t k = 0; k < nz; ++k)
                mbuf[ridx(i, j, k)] = rho.at(i, j, k) * vol;

    // FFTW_ESTIMATE keeps planning deterministic, so repeated runs of the
    // same job produce identical bits.
    fftw_plan pk = fftw_plan_dft_r2c_3d(static_cast<int>(px), static_cast<int>(py), static_cast<int>(pz),
                                        kbuf, reinterpret_cast<fftw_complex*>(kbuf), FFTW_ESTIMATE);
    fftw_plan pm = fftw_plan_dft_r2c_3d(static_cast<int>(px), static_cast<int>(py), static_cast<int>(pz),
                                        mbuf, reinterpret_cast<fftw_complex*>(mbuf), FFTW_ESTIMATE);
    if (!pk || !pm) fail_internal("solve_potential: fftw planning failed");
    fftw_execute(pk);
    fftw_execute(pm);

    const std::int64_t ncplx = px * py * pzc;
    const double scale = 1.0 / static_cast<double>(px * py * pz);
    auto* kc = reinterpret_cast<fftw_complex*>(kbuf);
    auto* mc = reinterpret_cast<fftw_complex*>(mbuf);
    for (std::int64_t t = 0; t < ncplx; ++t) {
        const double re = mc[t][0] * kc[t][0] - mc[t][1] * kc[t][1];
        const double im = mc[t][0] * kc[t][1] + mc[t][1] * kc[t][0];
        mc[t][0] = re * scale;
        mc[t][1] = im * scale;
    }

    fftw_plan pb = fftw_plan_dft_c2r_3d(static_cast<int>(px), static_cast<int>(py), static_cast<int>(pz),
                                        mc, mbuf, FFTW_ESTIMATE);
    if (!pb) fail_internal("solve_potential: fftw planning failed");
    fftw_execute(pb);

    for (std::int64_t i = 0; i < nx; ++i)
        for (std::int64_t j = 0; j < ny; ++j)
            for (std::int64_t k = 0; k < nz; ++k)
                phi.at(i, j, k) = mbuf[ridx(i, j, k)];

    fftw_destroy_plan(pk);
    fftw_destroy_plan(pm);
    fftw_destroy_plan(pb);
    fftw_free(kbuf);
    fftw_free(mbuf);
}

}  // namespace

ScalarField kernel_sum(const ScalarField& density, SolveMethod method) {
    const GridSpec& g = density.grid;
    g.validate();
    if (density.values.size() != static_cast<std::size_t>(g.n_nodes()))
        fail_config("kernel_sum: value count does not match grid dims");

    ScalarField out(g);
    if (method == SolveMethod::automatic) {
        std::int64_t nsrc = 0;
        for (double v : density.values)
            if (v != 0.0) ++nsrc;
        if (nsrc == 0) return out;
        const double direct_cost = static_cast<double>(g.n_nodes()) * static_cast<double>(nsrc);
        method = direct_cost > 2.0e8 ? SolveMethod::convolution : SolveMethod::direct;
    }

    if (method == SolveMethod::direct)
        sum_direct(density, out);
    else
        sum_convolution(density, out);
    return out;
}

PotentialField solve_potential(const MassDistribution& dist, const GridSpec& grid,
                               const PhysicalConstants& constants, SolveMethod method) {
    grid.validate();
    constants.validate();
    dist.validate();

    PotentialField phi(grid);
    if (dist.empty()) return phi;

    if (!support_fits(dist, grid, 2.0))
        fail_config("solve_potential: grid must enclose the support with at least 2 cells of padding");

    const ScalarField rho = rasterize(dist, grid);
    phi = kernel_sum(rho, method);
    for (double& v : phi.values) v *= -constants.G;
    return phi;
}

}  // namespace dpc
