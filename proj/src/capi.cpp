#include "dpcollapse.h"

#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "actions.hpp"
#include "bundles.hpp"
#include "collapse.hpp"
#include "dpenergy.hpp"
#include "error.hpp"
#include "massdist.hpp"
#include "numeric.hpp"
#include "serialize.hpp"
#include "superposition.hpp"
#include "version.hpp"

struct dpc_dist {
    dpc::MassDistribution v;
};
struct dpc_field {
    dpc::ScalarField v;
};
struct dpc_spec {
    dpc::SuperpositionSpec v;
};
struct dpc_timeline {
    dpc::ScenarioTimeline v;
};
struct dpc_bundles {
    dpc::BundleConfiguration v;
};
struct dpc_cascade {
    dpc::CascadeProblem v;
};
struct dpc_traces {
    std::vector<dpc::CollapseTrace> v;
};

namespace {

thread_local std::string g_last_error = "";

template <typename F>
int guarded(F&& f) {
    try {
        f();
        return DPC_OK;
    } catch (const dpc::Error& e) {
        g_last_error = e.what();
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DPC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return DPC_ERR_INTERNAL;
    }
}

template <typename T>
const T& need(const T* p, const char* what) {
    if (!p) dpc::fail_config(std::string("null argument: ") + what);
    return *p;
}

template <typename T>
T& need_mut(T* p, const char* what) {
    if (!p) dpc::fail_config(std::string("null argument: ") + what);
    return *p;
}

const char* need_str(const char* p, const char* what) {
    if (!p) dpc::fail_config(std::string("null argument: ") + what);
    return p;
}

dpc::GridSpec to_grid(const dpc_grid& g) {
    dpc::GridSpec out;
    out.dims = {g.dims[0], g.dims[1], g.dims[2]};
    out.spacing = g.spacing;
    out.origin = {g.origin[0], g.origin[1], g.origin[2]};
    out.validate();
    return out;
}

dpc_grid from_grid(const dpc::GridSpec& g) {
    dpc_grid out;
    out.dims[0] = g.dims[0];
    out.dims[1] = g.dims[1];
    out.dims[2] = g.dims[2];
    out.spacing = g.spacing;
    out.origin[0] = g.origin.x;
    out.origin[1] = g.origin.y;
    out.origin[2] = g.origin.z;
    return out;
}

dpc::PhysicalConstants to_constants(const dpc_constants& pc) {
    dpc::PhysicalConstants out;
    out.G = pc.G;
    out.hbar = pc.hbar;
    out.c = pc.c;
    out.xi = pc.xi;
    out.validate();
    return out;
}

dpc::SolveMethod to_solve_method(int m) {
    switch (m) {
        case DPC_SOLVE_AUTO: return dpc::SolveMethod::automatic;
        case DPC_SOLVE_DIRECT: return dpc::SolveMethod::direct;
        case DPC_SOLVE_CONVOLUTION: return dpc::SolveMethod::convolution;
        default: dpc::fail_config("unknown solve method code");
    }
}

std::vector<dpc::SphereBody> to_bodies(const double* centers, const double* radii,
                                       const double* masses, int64_t n) {
    if (n <= 0) dpc::fail_config("distribution needs at least one body");
    need(centers, "centers");
    need(radii, "radii");
    need(masses, "masses");
    std::vector<dpc::SphereBody> bodies;
    bodies.reserve(static_cast<std::size_t>(n));
    for (int64_t i = 0; i < n; ++i)
        bodies.push_back({{centers[3 * i], centers[3 * i + 1], centers[3 * i + 2]},
                          masses[i],
                          radii[i]});
    return bodies;
}

const dpc::CollapseTrace& trace_at(const dpc_traces& t, int64_t i) {
    if (i < 0 || static_cast<std::size_t>(i) >= t.v.size())
        dpc::fail_config("trace index out of range");
    return t.v[static_cast<std::size_t>(i)];
}

}  // namespace

extern "C" {

const char* dpc_version(void) { return DPC_VERSION_STRING; }

const char* dpc_last_error(void) { return g_last_error.c_str(); }

void dpc_set_max_threads(int n) { dpc::set_max_threads(n); }

int dpc_get_max_threads(void) { return dpc::max_threads(); }

void dpc_constants_si(dpc_constants* out) {
    if (!out) return;
    const dpc::PhysicalConstants pc = dpc::PhysicalConstants::si();
    *out = {pc.G, pc.hbar, pc.c, pc.xi};
}

void dpc_constants_dimensionless(dpc_constants* out) {
    if (!out) return;
    const dpc::PhysicalConstants pc = dpc::PhysicalConstants::dimensionless();
    *out = {pc.G, pc.hbar, pc.c, pc.xi};
}

/* ---- mass distributions ------------------------------------------------ */

int dpc_dist_spheres(const double* centers, const double* radii, const double* masses, int64_t n,
                     dpc_dist** out) {
    return guarded([&] {
        need_mut(out, "out") =
            new dpc_dist{dpc::MassDistribution::uniform_sphere_set(to_bodies(centers, radii, masses, n))};
    });
}

int dpc_dist_points(const double* centers, const double* radii, const double* masses, int64_t n,
                    dpc_dist** out) {
    return guarded([&] {
        need_mut(out, "out") =
            new dpc_dist{dpc::MassDistribution::point_set(to_bodies(centers, radii, masses, n))};
    });
}

int dpc_dist_voxels(const dpc_grid* grid, const double* density, dpc_dist** out) {
    return guarded([&] {
        const dpc::GridSpec g = to_grid(need(grid, "grid"));
        need(density, "density");
        dpc::ScalarField f;
        f.grid = g;
        f.values.assign(density, density + g.n_nodes());
        need_mut(out, "out") = new dpc_dist{dpc::MassDistribution::voxel_grid(std::move(f))};
    });
}

int dpc_dist_translated(const dpc_dist* d, const double shift[3], dpc_dist** out) {
    return guarded([&] {
        need(shift, "shift");
        need_mut(out, "out") = new dpc_dist{
            need(d, "dist").v.translated({shift[0], shift[1], shift[2]})};
    });
}

int dpc_dist_total_mass(const dpc_dist* d, double* out) {
    return guarded([&] { need_mut(out, "out") = need(d, "dist").v.total_mass(); });
}

void dpc_dist_free(dpc_dist* d) { delete d; }

/* ---- scalar fields ------------------------------------------------------ */

int dpc_field_grid(const dpc_field* f, dpc_grid* out) {
    return guarded([&] { need_mut(out, "out") = from_grid(need(f, "field").v.grid); });
}

int dpc_field_values(const dpc_field* f, const double** data, int64_t* count) {
    return guarded([&] {
        const dpc::ScalarField& field = need(f, "field").v;
        need_mut(data, "data") = field.values.data();
        need_mut(count, "count") = static_cast<int64_t>(field.values.size());
    });
}

int dpc_field_write_binary(const dpc_field* f, const char* path) {
    return guarded([&] { dpc::write_field_binary(need_str(path, "path"), need(f, "field").v); });
}

int dpc_field_write_csv(const dpc_field* f, const char* path) {
    return guarded([&] { dpc::write_field_csv(need_str(path, "path"), need(f, "field").v); });
}

int dpc_field_read_binary(const char* path, dpc_field** out) {
    return guarded([&] {
        need_mut(out, "out") = new dpc_field{dpc::read_field_binary(need_str(path, "path"))};
    });
}

void dpc_field_free(dpc_field* f) { delete f; }

int dpc_rasterize(const dpc_dist* d, const dpc_grid* grid, dpc_field** out) {
    return guarded([&] {
        need_mut(out, "out") =
            new dpc_field{dpc::rasterize(need(d, "dist").v, to_grid(need(grid, "grid")))};
    });
}

int dpc_solve_potential(const dpc_dist* d, const dpc_grid* grid, const dpc_constants* pc,
                        int solve_method, dpc_field** out) {
    return guarded([&] {
        need_mut(out, "out") = new dpc_field{
            dpc::solve_potential(need(d, "dist").v, to_grid(need(grid, "grid")),
                                 to_constants(need(pc, "constants")), to_solve_method(solve_method))};
    });
}

int dpc_potential_at(const dpc_dist* d, const double point[3], const dpc_constants* pc,
                     double* out) {
    return guarded([&] {
        need(point, "point");
        need_mut(out, "out") =
            dpc::potential_at(need(d, "dist").v, {point[0], point[1], point[2]},
                              to_constants(need(pc, "constants")));
    });
}

/* ---- difference self-energies ------------------------------------------ */

int dpc_dp_energy(const dpc_dist* a, const dpc_dist* b, const dpc_grid* grid,
                  const dpc_constants* pc, int dp_method, int solve_method, double* value,
                  double* est_error) {
    return guarded([&] {
        const dpc::MassDistribution& da = need(a, "dist a").v;
        const dpc::MassDistribution& db = need(b, "dist b").v;
        const dpc::PhysicalConstants constants = to_constants(need(pc, "constants"));
        dpc::DpEnergyResult r;
        switch (dp_method) {
            case DPC_DP_DOUBLE_INTEGRAL:
                r = grid ? dpc::dp_energy_double_integral(da, db, constants, to_grid(*grid))
                         : dpc::dp_energy_double_integral(da, db, constants);
                break;
            case DPC_DP_POTENTIAL:
                r = dpc::dp_energy_potential_form(da, db, constants,
                                                  to_grid(need(grid, "grid")),
                                                  to_solve_method(solve_method));
                break;
            case DPC_DP_FIELD:
                r = dpc::dp_energy_field_form(da, db, constants, to_grid(need(grid, "grid")),
                                              to_solve_method(solve_method));
                break;
            default:
                dpc::fail_config("unknown interaction-energy method code");
        }
        need_mut(value, "value") = r.value;
        if (est_error) *est_error = r.estimated_error;
    });
}

int dpc_energy_fuzziness(const dpc_dist* a, const dpc_dist* b, const dpc_grid* grid,
                         const dpc_constants* pc, int solve_method, double* de1, double* de2) {
    return guarded([&] {
        const dpc::GridSpec g = to_grid(need(grid, "grid"));
        const dpc::PhysicalConstants constants = to_constants(need(pc, "constants"));
        const dpc::SolveMethod m = to_solve_method(solve_method);
        const dpc::MassDistribution& da = need(a, "dist a").v;
        const dpc::MassDistribution& db = need(b, "dist b").v;
        const dpc::ScalarField r1 = dpc::rasterize(da, g);
        const dpc::ScalarField r2 = dpc::rasterize(db, g);
        const dpc::PotentialField p1 = dpc::solve_potential(da, g, constants, m);
        const dpc::PotentialField p2 = dpc::solve_potential(db, g, constants, m);
        const auto [x, y] = dpc::energy_fuzziness(r1, r2, p1, p2);
        need_mut(de1, "de1") = x;
        need_mut(de2, "de2") = y;
    });
}

int dpc_clock_rate_factor(double phi, const dpc_constants* pc, double* out) {
    return guarded([&] {
        need_mut(out, "out") = dpc::clock_rate_factor(phi, to_constants(need(pc, "constants")));
    });
}

int dpc_lifetime(double e_g12, const dpc_constants* pc, double* out) {
    return guarded([&] {
        need_mut(out, "out") = dpc::lifetime(e_g12, to_constants(need(pc, "constants")));
    });
}

int dpc_field_uncertainty(double volume, double dt, const dpc_constants* pc, double* out) {
    return guarded([&] {
        need_mut(out, "out") =
            dpc::diosi_field_uncertainty(volume, dt, to_constants(need(pc, "constants")));
    });
}

/* ---- superpositions ----------------------------------------------------- */

int dpc_spec_new(const dpc_constants* pc, dpc_spec** out) {
    return guarded([&] {
        auto* s = new dpc_spec{};
        s->v.constants = to_constants(need(pc, "constants"));
        need_mut(out, "out") = s;
    });
}

int dpc_spec_add_state(dpc_spec* s, double intensity, const dpc_dist* d) {
    return guarded([&] {
        dpc::SuperpositionState st;
        st.intensity = intensity;
        st.dist = need(d, "dist").v;
        need_mut(s, "spec").v.states.push_back(std::move(st));
    });
}

int dpc_spec_set_rest_energy(dpc_spec* s, int64_t state, double rest_energy) {
    return guarded([&] {
        dpc::SuperpositionSpec& spec = need_mut(s, "spec").v;
        if (state < 0 || static_cast<std::size_t>(state) >= spec.states.size())
            dpc::fail_config("state index out of range");
        spec.states[static_cast<std::size_t>(state)].rest_energy_override = rest_energy;
    });
}

int dpc_spec_state_count(const dpc_spec* s, int64_t* out) {
    return guarded([&] {
        need_mut(out, "out") = static_cast<int64_t>(need(s, "spec").v.states.size());
    });
}

void dpc_spec_free(dpc_spec* s) { delete s; }

int dpc_total_energy(const dpc_spec* s, const dpc_grid* grid, int solve_method, double* total,
                     double* interaction, double* dp_energy, double* per_state) {
    return guarded([&] {
        const dpc::EnergyBreakdown r = dpc::total_energy(
            need(s, "spec").v, to_grid(need(grid, "grid")), to_solve_method(solve_method));
        need_mut(total, "total") = r.total;
        if (interaction) *interaction = r.interaction_term;
        if (dp_energy) *dp_energy = r.dp_energy;
        if (per_state)
            for (std::size_t i = 0; i < r.per_state.size(); ++i) per_state[i] = r.per_state[i];
    });
}

int dpc_energy_increases(const dpc_spec* s, double e_g12, double* e_g1, double* e_g2) {
    return guarded([&] {
        const auto [a, b] = dpc::energy_increases(need(s, "spec").v, e_g12);
        need_mut(e_g1, "e_g1") = a;
        need_mut(e_g2, "e_g2") = b;
    });
}

int dpc_decay_rates(const dpc_spec* s, double e_g12, double* rate1, double* rate2) {
    return guarded([&] {
        const auto [a, b] = dpc::decay_rates(need(s, "spec").v, e_g12);
        need_mut(rate1, "rate1") = a;
        need_mut(rate2, "rate2") = b;
    });
}

int dpc_mean_lifetime(double rate1, double rate2, double* out) {
    return guarded([&] { need_mut(out, "out") = dpc::mean_lifetime(rate1, rate2); });
}

int dpc_born_probabilities(const dpc_spec* s, double* out) {
    return guarded([&] {
        const std::vector<double> p = dpc::born_probabilities(need(s, "spec").v);
        need(out, "out");
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i];
    });
}

int dpc_mean_distribution(const dpc_spec* s, const dpc_grid* grid, dpc_dist** out) {
    return guarded([&] {
        need_mut(out, "out") = new dpc_dist{
            dpc::mean_distribution(need(s, "spec").v, to_grid(need(grid, "grid")))};
    });
}

int dpc_mean_potential(const dpc_spec* s, const dpc_grid* grid, int solve_method,
                       dpc_field** out) {
    return guarded([&] {
        need_mut(out, "out") = new dpc_field{dpc::mean_potential(
            need(s, "spec").v, to_grid(need(grid, "grid")), to_solve_method(solve_method))};
    });
}

/* ---- competition actions ------------------------------------------------ */

int dpc_timeline_new(dpc_timeline** out) {
    return guarded([&] { need_mut(out, "out") = new dpc_timeline{}; });
}

int dpc_timeline_add_snapshot(dpc_timeline* tl, double t, const dpc_dist* s1, const dpc_dist* s2) {
    return guarded([&] {
        dpc::ScenarioTimeline& v = need_mut(tl, "timeline").v;
        if (!v.times.empty() && !(t > v.times.back()))
            dpc::fail_config("snapshot times must strictly increase");
        v.times.push_back(t);
        v.scenario1.push_back(need(s1, "scenario 1 dist").v);
        v.scenario2.push_back(need(s2, "scenario 2 dist").v);
    });
}

int dpc_timeline_set_intensities(dpc_timeline* tl, double w1, double w2) {
    return guarded([&] {
        dpc::ScenarioTimeline& v = need_mut(tl, "timeline").v;
        v.intensity1 = w1;
        v.intensity2 = w2;
    });
}

int dpc_timeline_set_grid(dpc_timeline* tl, const dpc_grid* grid) {
    return guarded([&] { need_mut(tl, "timeline").v.grid = to_grid(need(grid, "grid")); });
}

void dpc_timeline_free(dpc_timeline* tl) { delete tl; }

int dpc_action(const dpc_timeline* tl, const dpc_constants* pc, int relativistic, double* s_g12,
               double* s_g1, double* s_g2, double* samples) {
    return guarded([&] {
        const dpc::ScenarioTimeline& v = need(tl, "timeline").v;
        const dpc::PhysicalConstants constants = to_constants(need(pc, "constants"));
        const dpc::ActionResult r = relativistic
                                        ? dpc::competition_action_relativistic(v, constants)
                                        : dpc::competition_action_newtonian(v, constants);
        need_mut(s_g12, "s_g12") = r.s_g12;
        if (s_g1) *s_g1 = r.s_g1;
        if (s_g2) *s_g2 = r.s_g2;
        if (samples)
            for (std::size_t i = 0; i < r.cumulative.size(); ++i) {
                const dpc::ActionSample& q = r.cumulative[i];
                samples[5 * i] = q.t;
                samples[5 * i + 1] = q.e_g12;
                samples[5 * i + 2] = q.s_g12;
                samples[5 * i + 3] = q.s_g1;
                samples[5 * i + 4] = q.s_g2;
            }
    });
}

int dpc_action_rates(const dpc_timeline* tl, const dpc_constants* pc, int relativistic, double t,
                     double* rate1, double* rate2) {
    return guarded([&] {
        const dpc::ScenarioTimeline& v = need(tl, "timeline").v;
        const dpc::PhysicalConstants constants = to_constants(need(pc, "constants"));
        const dpc::ActionResult r = relativistic
                                        ? dpc::competition_action_relativistic(v, constants)
                                        : dpc::competition_action_newtonian(v, constants);
        const auto [a, b] = dpc::decay_rates_from_actions(r, t, constants);
        need_mut(rate1, "rate1") = a;
        need_mut(rate2, "rate2") = b;
    });
}

/* ---- local bundles ------------------------------------------------------ */

int dpc_bundles_derive(const dpc_spec* s, const double* area_lo, const double* area_hi,
                       const char* const* area_ids, int64_t n_areas, const dpc_grid* grid,
                       dpc_bundles** out) {
    return guarded([&] {
        if (n_areas <= 0) dpc::fail_config("at least one area required");
        need(area_lo, "area_lo");
        need(area_hi, "area_hi");
        need(area_ids, "area_ids");
        std::vector<dpc::BundleArea> areas;
        for (int64_t i = 0; i < n_areas; ++i) {
            if (!area_ids[i]) dpc::fail_config("null area id");
            areas.push_back({area_ids[i],
                             {area_lo[3 * i], area_lo[3 * i + 1], area_lo[3 * i + 2]},
                             {area_hi[3 * i], area_hi[3 * i + 1], area_hi[3 * i + 2]}});
        }
        need_mut(out, "out") = new dpc_bundles{
            dpc::derive_bundles(need(s, "spec").v, areas, to_grid(need(grid, "grid")))};
    });
}

int dpc_bundles_count(const dpc_bundles* b, int64_t* out) {
    return guarded([&] {
        need_mut(out, "out") = static_cast<int64_t>(need(b, "bundles").v.bundles.size());
    });
}

int dpc_bundles_info(const dpc_bundles* b, int64_t index, int64_t* area_index, int64_t* kappa,
                     double* intensity, int64_t* n_members, int64_t* members) {
    return guarded([&] {
        const dpc::BundleConfiguration& cfg = need(b, "bundles").v;
        if (index < 0 || static_cast<std::size_t>(index) >= cfg.bundles.size())
            dpc::fail_config("bundle index out of range");
        const dpc::LocalBundle& lb = cfg.bundles[static_cast<std::size_t>(index)];
        if (area_index) *area_index = lb.area_index;
        if (kappa) *kappa = lb.kappa;
        if (intensity) *intensity = lb.intensity;
        if (n_members) *n_members = static_cast<int64_t>(lb.members.size());
        if (members)
            for (std::size_t i = 0; i < lb.members.size(); ++i) members[i] = lb.members[i];
    });
}

int dpc_bundles_area_id(const dpc_bundles* b, int64_t area_index, const char** out) {
    return guarded([&] {
        const dpc::BundleConfiguration& cfg = need(b, "bundles").v;
        if (area_index < 0 || static_cast<std::size_t>(area_index) >= cfg.areas.size())
            dpc::fail_config("area index out of range");
        need_mut(out, "out") = cfg.areas[static_cast<std::size_t>(area_index)].id.c_str();
    });
}

int dpc_bundles_local_energy(const dpc_bundles* b, int64_t area, int64_t kappa, int64_t nu,
                             double* out) {
    return guarded([&] {
        need_mut(out, "out") =
            dpc::local_dp_energy(need(b, "bundles").v, static_cast<int>(area),
                                 static_cast<int>(kappa), static_cast<int>(nu));
    });
}

int dpc_bundles_energy_increase(const dpc_bundles* b, int64_t area, int64_t kappa, double* out) {
    return guarded([&] {
        need_mut(out, "out") = dpc::bundle_energy_increase(
            need(b, "bundles").v, static_cast<int>(area), static_cast<int>(kappa));
    });
}

int dpc_bundles_total_energy(const dpc_bundles* b, double* assembly, double* mean_field) {
    return guarded([&] {
        const dpc::BundleConfiguration& cfg = need(b, "bundles").v;
        if (assembly) *assembly = dpc::total_energy_assembly(cfg);
        if (mean_field) *mean_field = dpc::mean_field_total_energy(cfg);
    });
}

void dpc_bundles_free(dpc_bundles* b) { delete b; }

/* ---- reduction cascade --------------------------------------------------- */

int dpc_cascade_from_bundles(const dpc_bundles* b, int allow_many_bundles, dpc_cascade** out) {
    return guarded([&] {
        need_mut(out, "out") = new dpc_cascade{
            dpc::make_cascade_problem(need(b, "bundles").v, allow_many_bundles != 0)};
    });
}

int dpc_cascade_detectors(const double* intensities, const double* energies, int64_t n,
                          const dpc_constants* pc, dpc_cascade** out) {
    return guarded([&] {
        if (n <= 0) dpc::fail_config("at least one detector required");
        need(intensities, "intensities");
        need(energies, "energies");
        need_mut(out, "out") = new dpc_cascade{dpc::detector_cascade_problem(
            std::vector<double>(intensities, intensities + n),
            std::vector<double>(energies, energies + n), to_constants(need(pc, "constants")))};
    });
}

void dpc_cascade_free(dpc_cascade* c) { delete c; }

void dpc_detector_geometry_default(dpc_detector_geometry* out) {
    if (!out) return;
    const dpc::DetectorGeometry g;
    *out = {g.mass, g.radius, g.displacement, g.area_half_width, g.area_pitch};
}

int dpc_detector_scenario(int64_t n, const double* intensities, const double* energies,
                          const dpc_detector_geometry* geom, const dpc_constants* pc,
                          dpc_spec** spec_out, double* area_lo, double* area_hi,
                          double* detector_energy) {
    return guarded([&] {
        if (n < 2) dpc::fail_config("at least two detectors required");
        need(intensities, "intensities");
        const std::vector<double> w(intensities, intensities + n);
        dpc::DetectorGeometry g;
        if (geom)
            g = {geom->mass, geom->radius, geom->displacement, geom->area_half_width,
                 geom->area_pitch};
        const dpc::PhysicalConstants constants = to_constants(need(pc, "constants"));
        const dpc::DetectorScenario sc =
            energies ? dpc::build_detector_scenario(static_cast<int>(n), w,
                                                    std::vector<double>(energies, energies + n),
                                                    constants)
                     : dpc::build_detector_scenario(static_cast<int>(n), w, g, constants);
        if (spec_out) *spec_out = new dpc_spec{sc.spec};
        for (int64_t i = 0; i < n; ++i) {
            if (area_lo) {
                area_lo[3 * i] = sc.areas[static_cast<std::size_t>(i)].lo.x;
                area_lo[3 * i + 1] = sc.areas[static_cast<std::size_t>(i)].lo.y;
                area_lo[3 * i + 2] = sc.areas[static_cast<std::size_t>(i)].lo.z;
            }
            if (area_hi) {
                area_hi[3 * i] = sc.areas[static_cast<std::size_t>(i)].hi.x;
                area_hi[3 * i + 1] = sc.areas[static_cast<std::size_t>(i)].hi.y;
                area_hi[3 * i + 2] = sc.areas[static_cast<std::size_t>(i)].hi.z;
            }
            if (detector_energy)
                detector_energy[i] = sc.detector_energy[static_cast<std::size_t>(i)];
        }
    });
}

int dpc_simulate(const dpc_cascade* c, uint64_t master_seed, uint64_t n_trials, int max_events,
                 dpc_traces** out) {
    return guarded([&] {
        need_mut(out, "out") = new dpc_traces{dpc::simulate_traces(
            need(c, "cascade").v, master_seed, static_cast<std::size_t>(n_trials), max_events)};
    });
}

int dpc_simulate_two_state(const double* intensities, double e_g12, const dpc_constants* pc,
                           uint64_t master_seed, uint64_t n_trials, dpc_traces** out) {
    return guarded([&] {
        need(intensities, "intensities");
        if (n_trials == 0) dpc::fail_config("at least one trial required");
        const std::vector<double> w{intensities[0], intensities[1]};
        const dpc::PhysicalConstants constants = to_constants(need(pc, "constants"));
        auto* t = new dpc_traces{};
        try {
            t->v.resize(n_trials);
            dpc::parallel_for_blocks(n_trials, [&](std::size_t i) {
                t->v[i] = dpc::simulate_two_state(w, e_g12, constants, master_seed,
                                                  static_cast<uint64_t>(i));
            });
        } catch (...) {
            delete t;
            throw;
        }
        need_mut(out, "out") = t;
    });
}

int dpc_traces_count(const dpc_traces* t, int64_t* out) {
    return guarded([&] {
        need_mut(out, "out") = static_cast<int64_t>(need(t, "traces").v.size());
    });
}

int dpc_traces_final_state(const dpc_traces* t, int64_t i, int64_t* out) {
    return guarded([&] {
        need_mut(out, "out") = trace_at(need(t, "traces"), i).final_state;
    });
}

int dpc_traces_total_time(const dpc_traces* t, int64_t i, double* out) {
    return guarded([&] { need_mut(out, "out") = trace_at(need(t, "traces"), i).total_time; });
}

int dpc_traces_event_count(const dpc_traces* t, int64_t i, int64_t* out) {
    return guarded([&] {
        need_mut(out, "out") = static_cast<int64_t>(trace_at(need(t, "traces"), i).events.size());
    });
}

int dpc_traces_event(const dpc_traces* t, int64_t i, int64_t e, double* time,
                     const char** area_id, int64_t* kappa, int64_t* n_survivors) {
    return guarded([&] {
        const dpc::CollapseTrace& trace = trace_at(need(t, "traces"), i);
        if (e < 0 || static_cast<std::size_t>(e) >= trace.events.size())
            dpc::fail_config("event index out of range");
        const dpc::CollapseEvent& ev = trace.events[static_cast<std::size_t>(e)];
        if (time) *time = ev.time;
        if (area_id) *area_id = ev.area_id.c_str();
        if (kappa) *kappa = ev.kappa;
        if (n_survivors) *n_survivors = static_cast<int64_t>(ev.survivors.size());
    });
}

int dpc_traces_write_jsonl(const dpc_traces* t, const char* path) {
    return guarded([&] { dpc::write_traces_jsonl(need_str(path, "path"), need(t, "traces").v); });
}

void dpc_traces_free(dpc_traces* t) { delete t; }

int dpc_born_check(const dpc_traces* t, const double* intensities, int64_t n, double z_limit,
                   double p_limit, int64_t* counts, double* z, double* chi_square,
                   double* p_value, int* pass) {
    return guarded([&] {
        need(intensities, "intensities");
        if (n <= 0) dpc::fail_config("at least one state required");
        const dpc::BornReport r =
            dpc::born_check(need(t, "traces").v, std::vector<double>(intensities, intensities + n),
                            z_limit, p_limit);
        for (int64_t i = 0; i < n; ++i) {
            if (counts) counts[i] = static_cast<int64_t>(r.states[static_cast<std::size_t>(i)].count);
            if (z) z[i] = r.states[static_cast<std::size_t>(i)].z;
        }
        if (chi_square) *chi_square = r.chi_square;
        if (p_value) *p_value = r.p_value;
        if (pass) *pass = r.pass ? 1 : 0;
    });
}

int dpc_born_report_json(const dpc_traces* t, const double* intensities, int64_t n,
                         double z_limit, double p_limit, const char* path) {
    return guarded([&] {
        need(intensities, "intensities");
        if (n <= 0) dpc::fail_config("at least one state required");
        const dpc::BornReport r =
            dpc::born_check(need(t, "traces").v, std::vector<double>(intensities, intensities + n),
                            z_limit, p_limit);
        const std::string text = dpc::born_report_json(r) + "\n";
        std::FILE* f = std::fopen(need_str(path, "path"), "wb");
        if (!f) dpc::fail_io(std::string("cannot open for writing: ") + path);
        const std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
        const int rc = std::fclose(f);
        if (written != text.size() || rc != 0)
            dpc::fail_io(std::string("write failed: ") + path);
    });
}

int dpc_decohere(double e1, double e2, double e_g12, double rho_re, double rho_im,
                 const double* times, int64_t n, const dpc_constants* pc, double* out_re,
                 double* out_im, double* out_mag) {
    return guarded([&] {
        need(times, "times");
        if (n <= 0) dpc::fail_config("at least one time sample required");
        const dpc::DecoherenceTrace trace = dpc::decohere_two_state(
            e1, e2, e_g12, {rho_re, rho_im}, std::vector<double>(times, times + n),
            to_constants(need(pc, "constants")));
        for (int64_t i = 0; i < n; ++i) {
            if (out_re) out_re[i] = trace.offdiag[static_cast<std::size_t>(i)].real();
            if (out_im) out_im[i] = trace.offdiag[static_cast<std::size_t>(i)].imag();
            if (out_mag) out_mag[i] = trace.offdiag_magnitude[static_cast<std::size_t>(i)];
        }
    });
}

int dpc_fitted_decay_rate(const double* times, const double* magnitudes, int64_t n, double* out) {
    return guarded([&] {
        need(times, "times");
        need(magnitudes, "magnitudes");
        if (n < 2) dpc::fail_config("at least two samples required");
        dpc::DecoherenceTrace trace;
        trace.times.assign(times, times + n);
        trace.offdiag_magnitude.assign(magnitudes, magnitudes + n);
        need_mut(out, "out") = dpc::fitted_decay_rate(trace);
    });
}

}  // extern "C"
