#ifndef DPCOLLAPSE_H
#define DPCOLLAPSE_H

/*
 * C interface to the gravitational-collapse toolkit: mass distributions,
 * difference self-energies, superposition energetics, competition actions,
 * local bundles, and the stochastic reduction cascade.
 *
 * Every function returns a status code (DPC_OK on success) and reports
 * results through out-pointers. On failure dpc_last_error() carries a
 * message for the calling thread. Handles are opaque; free them with the
 * matching *_free call. NULL is never a valid handle or out-pointer unless
 * a parameter is documented as optional.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values double as CLI exit codes. */
#define DPC_OK 0
#define DPC_ERR_CONFIG 1      /* invalid input or configuration */
#define DPC_ERR_GUARD 2       /* numeric guard tripped (weak field, negative energy) */
#define DPC_ERR_STATISTICAL 3 /* statistical acceptance check failed */
#define DPC_ERR_IO 4          /* filesystem or serialization failure */
#define DPC_ERR_INTERNAL 5

/* Potential solver backend. */
#define DPC_SOLVE_AUTO 0
#define DPC_SOLVE_DIRECT 1
#define DPC_SOLVE_CONVOLUTION 2

/* Interaction-energy evaluation method. */
#define DPC_DP_DOUBLE_INTEGRAL 0
#define DPC_DP_POTENTIAL 1
#define DPC_DP_FIELD 2

const char* dpc_version(void);

/* Message of the last failing call on this thread; never NULL. */
const char* dpc_last_error(void);

/* Worker-thread cap for the parallel kernels. Results are bitwise
 * independent of the setting. n < 1 is clamped to 1. */
void dpc_set_max_threads(int n);
int dpc_get_max_threads(void);

typedef struct {
    double G;
    double hbar;
    double c;
    double xi; /* interaction-energy prefactor, 1/2 by convention */
} dpc_constants;

void dpc_constants_si(dpc_constants* out);
void dpc_constants_dimensionless(dpc_constants* out);

/* Regular node-centered grid: dims[a] nodes along axis a, cubic cells of
 * side `spacing` centered on the nodes, node (0,0,0) at origin. */
typedef struct {
    int64_t dims[3];
    double spacing;
    double origin[3];
} dpc_grid;

typedef struct dpc_dist dpc_dist;
typedef struct dpc_field dpc_field;
typedef struct dpc_spec dpc_spec;
typedef struct dpc_timeline dpc_timeline;
typedef struct dpc_bundles dpc_bundles;
typedef struct dpc_cascade dpc_cascade;
typedef struct dpc_traces dpc_traces;

/* ---- mass distributions ------------------------------------------------ */

/* n homogeneous balls; centers is 3n doubles (x,y,z per ball). */
int dpc_dist_spheres(const double* centers, const double* radii, const double* masses,
                     int64_t n, dpc_dist** out);

/* n smeared points; radii are the smearing radii (> 0). */
int dpc_dist_points(const double* centers, const double* radii, const double* masses,
                    int64_t n, dpc_dist** out);

/* density holds grid->dims[0]*dims[1]*dims[2] cell values, z fastest. */
int dpc_dist_voxels(const dpc_grid* grid, const double* density, dpc_dist** out);

int dpc_dist_translated(const dpc_dist* d, const double shift[3], dpc_dist** out);
int dpc_dist_total_mass(const dpc_dist* d, double* out);
void dpc_dist_free(dpc_dist* d);

/* ---- scalar fields ------------------------------------------------------ */

int dpc_field_grid(const dpc_field* f, dpc_grid* out);

/* Borrowed pointer into the field; valid until the field is freed. */
int dpc_field_values(const dpc_field* f, const double** data, int64_t* count);

int dpc_field_write_binary(const dpc_field* f, const char* path);
int dpc_field_write_csv(const dpc_field* f, const char* path);
int dpc_field_read_binary(const char* path, dpc_field** out);
void dpc_field_free(dpc_field* f);

/* Cell-averaged density of the distribution on the grid. */
int dpc_rasterize(const dpc_dist* d, const dpc_grid* grid, dpc_field** out);

/* Discrete free-space gravitational potential on the grid. The support
 * must fit with two empty cells of padding on every side. */
int dpc_solve_potential(const dpc_dist* d, const dpc_grid* grid, const dpc_constants* pc,
                        int solve_method, dpc_field** out);

/* Closed-form potential of an analytic distribution at one point. */
int dpc_potential_at(const dpc_dist* d, const double point[3], const dpc_constants* pc,
                     double* out);

/* ---- difference self-energies ------------------------------------------ */

/* Interaction energy of the difference a - b by the selected method.
 * grid may be NULL for DPC_DP_DOUBLE_INTEGRAL when both inputs are
 * analytic (closed-form evaluation); the other methods require a grid.
 * est_error is optional. */
int dpc_dp_energy(const dpc_dist* a, const dpc_dist* b, const dpc_grid* grid,
                  const dpc_constants* pc, int dp_method, int solve_method,
                  double* value, double* est_error);

/* Per-state energy shifts from swapping potentials:
 * de1 = int rho1 (phi2 - phi1), de2 = int rho2 (phi1 - phi2). */
int dpc_energy_fuzziness(const dpc_dist* a, const dpc_dist* b, const dpc_grid* grid,
                         const dpc_constants* pc, int solve_method, double* de1, double* de2);

/* 1 + phi/c^2, guarded to |phi|/c^2 <= 0.01. */
int dpc_clock_rate_factor(double phi, const dpc_constants* pc, double* out);

/* hbar / E; E == 0 gives +infinity, E < 0 is a guard error. */
int dpc_lifetime(double e_g12, const dpc_constants* pc, double* out);

/* sqrt(hbar G / (V dt)) */
int dpc_field_uncertainty(double volume, double dt, const dpc_constants* pc, double* out);

/* ---- superpositions ----------------------------------------------------- */

int dpc_spec_new(const dpc_constants* pc, dpc_spec** out);

/* Appends a state; the distribution is copied. */
int dpc_spec_add_state(dpc_spec* s, double intensity, const dpc_dist* d);

/* Replaces the integral rest energy of one state (index order of adds). */
int dpc_spec_set_rest_energy(dpc_spec* s, int64_t state, double rest_energy);

int dpc_spec_state_count(const dpc_spec* s, int64_t* out);
void dpc_spec_free(dpc_spec* s);

/* Two-state mean-field total energy and its decomposition. per_state is
 * optional and receives one value per state. interaction, dp_energy and
 * est_* pointers are optional. */
int dpc_total_energy(const dpc_spec* s, const dpc_grid* grid, int solve_method, double* total,
                     double* interaction, double* dp_energy, double* per_state);

/* (e_g1, e_g2) = (w2, w1) * e_g12 */
int dpc_energy_increases(const dpc_spec* s, double e_g12, double* e_g1, double* e_g2);

/* per-state decay rates e_gi / hbar */
int dpc_decay_rates(const dpc_spec* s, double e_g12, double* rate1, double* rate2);

/* 1 / (rate1 + rate2); +infinity when both vanish */
int dpc_mean_lifetime(double rate1, double rate2, double* out);

/* out receives one probability per state. */
int dpc_born_probabilities(const dpc_spec* s, double* out);

/* Intensity-weighted mean density as a voxel distribution on the grid. */
int dpc_mean_distribution(const dpc_spec* s, const dpc_grid* grid, dpc_dist** out);

/* Intensity-weighted mean of the per-state potentials. */
int dpc_mean_potential(const dpc_spec* s, const dpc_grid* grid, int solve_method,
                       dpc_field** out);

/* ---- competition actions ------------------------------------------------ */

int dpc_timeline_new(dpc_timeline** out);

/* Appends one snapshot; times must strictly increase across calls. */
int dpc_timeline_add_snapshot(dpc_timeline* tl, double t, const dpc_dist* s1, const dpc_dist* s2);

int dpc_timeline_set_intensities(dpc_timeline* tl, double w1, double w2);

/* Evaluate snapshots on a grid instead of closed forms. */
int dpc_timeline_set_grid(dpc_timeline* tl, const dpc_grid* grid);
void dpc_timeline_free(dpc_timeline* tl);

/* Time-integrated competition action between the two scenarios.
 * relativistic != 0 integrates the weak-field volume-factor form (requires
 * a grid). samples is optional: 5 doubles per snapshot, rows of
 * (t, energy, s_g12, s_g1, s_g2). */
int dpc_action(const dpc_timeline* tl, const dpc_constants* pc, int relativistic, double* s_g12,
               double* s_g1, double* s_g2, double* samples);

/* Decay rates at time t from the finite-difference slope of the detuning
 * actions. t snaps to the nearest snapshot. */
int dpc_action_rates(const dpc_timeline* tl, const dpc_constants* pc, int relativistic, double t,
                     double* rate1, double* rate2);

/* ---- local bundles ------------------------------------------------------ */

/* Groups the spec's states by equal mass density on each area box.
 * area_lo/area_hi are 3*n_areas doubles; area_ids are the n_areas labels.
 * Boxes must be disjoint on the grid. */
int dpc_bundles_derive(const dpc_spec* s, const double* area_lo, const double* area_hi,
                       const char* const* area_ids, int64_t n_areas, const dpc_grid* grid,
                       dpc_bundles** out);

int dpc_bundles_count(const dpc_bundles* b, int64_t* out);

/* Bundle `index` in (area, kappa) order. members is optional and must hold
 * at least the spec's state count. */
int dpc_bundles_info(const dpc_bundles* b, int64_t index, int64_t* area_index, int64_t* kappa,
                     double* intensity, int64_t* n_members, int64_t* members);

/* Borrowed pointer, valid until the handle is freed. */
int dpc_bundles_area_id(const dpc_bundles* b, int64_t area_index, const char** out);

/* Local interaction energy of bundles kappa and nu on one area. */
int dpc_bundles_local_energy(const dpc_bundles* b, int64_t area, int64_t kappa, int64_t nu,
                             double* out);

/* Energy increase of bundle kappa: sum over competitors of W_nu E_kn. */
int dpc_bundles_energy_increase(const dpc_bundles* b, int64_t area, int64_t kappa, double* out);

/* Assembled total (per-state energies plus local interaction terms) and
 * the mean-field total; they agree to rounding. Either out is optional. */
int dpc_bundles_total_energy(const dpc_bundles* b, double* assembly, double* mean_field);

void dpc_bundles_free(dpc_bundles* b);

/* ---- reduction cascade --------------------------------------------------- */

/* Freezes the bundle configuration's local energies into a cascade
 * description. Refuses areas with more than two bundles unless
 * allow_many_bundles != 0. */
int dpc_cascade_from_bundles(const dpc_bundles* b, int allow_many_bundles, dpc_cascade** out);

/* Detector-array cascade: area i carries bundles {i} / not-i with local
 * energy energies[i]. */
int dpc_cascade_detectors(const double* intensities, const double* energies, int64_t n,
                          const dpc_constants* pc, dpc_cascade** out);

void dpc_cascade_free(dpc_cascade* c);

typedef struct {
    double mass;
    double radius;
    double displacement;
    double area_half_width;
    double area_pitch;
} dpc_detector_geometry;

void dpc_detector_geometry_default(dpc_detector_geometry* out);

/* Synthesizes the n-detector array (areas "D1".."Dn" in a row along x; the
 * state an area detects displaces that area's sphere). energies == NULL is
 * the geometric mode (every sphere uses geom->mass); otherwise sphere
 * masses are calibrated so each area's interaction energy equals
 * energies[i]. geom == NULL uses defaults. spec_out, area_lo/area_hi
 * (3n each) and detector_energy (n) are each optional. */
int dpc_detector_scenario(int64_t n, const double* intensities, const double* energies,
                          const dpc_detector_geometry* geom, const dpc_constants* pc,
                          dpc_spec** spec_out, double* area_lo, double* area_hi,
                          double* detector_energy);

/* n_trials independent cascade traces, RNG streams indexed 0..n_trials-1
 * from master_seed. max_events <= 0 means the structural bound. */
int dpc_simulate(const dpc_cascade* c, uint64_t master_seed, uint64_t n_trials, int max_events,
                 dpc_traces** out);

/* Two-state competition: clocks at rates w2 E/hbar and w1 E/hbar; the
 * earlier clock's state decays. One trace per trial. */
int dpc_simulate_two_state(const double* intensities, double e_g12, const dpc_constants* pc,
                           uint64_t master_seed, uint64_t n_trials, dpc_traces** out);

int dpc_traces_count(const dpc_traces* t, int64_t* out);
int dpc_traces_final_state(const dpc_traces* t, int64_t i, int64_t* out);
int dpc_traces_total_time(const dpc_traces* t, int64_t i, double* out);
int dpc_traces_event_count(const dpc_traces* t, int64_t i, int64_t* out);

/* Event e of trace i. area_id is borrowed; any out is optional. */
int dpc_traces_event(const dpc_traces* t, int64_t i, int64_t e, double* time,
                     const char** area_id, int64_t* kappa, int64_t* n_survivors);

/* One JSON object per line, ordered by trace index. */
int dpc_traces_write_jsonl(const dpc_traces* t, const char* path);
void dpc_traces_free(dpc_traces* t);

/* Final-state statistics against expected intensities. counts and z are
 * optional arrays of n entries; chi_square, p_value and pass are optional.
 * pass receives 1 when every |z| < z_limit and the chi-square p-value
 * exceeds p_limit. */
int dpc_born_check(const dpc_traces* t, const double* intensities, int64_t n, double z_limit,
                   double p_limit, int64_t* counts, double* z, double* chi_square,
                   double* p_value, int* pass);

/* Writes the full report as JSON. */
int dpc_born_report_json(const dpc_traces* t, const double* intensities, int64_t n,
                         double z_limit, double p_limit, const char* path);

/* Off-diagonal density-matrix element under gravitational decoherence at
 * rate e_g12/hbar plus phase rotation at (e1 - e2)/hbar, evaluated on the
 * strictly increasing time grid. out arrays are each optional, n entries. */
int dpc_decohere(double e1, double e2, double e_g12, double rho_re, double rho_im,
                 const double* times, int64_t n, const dpc_constants* pc, double* out_re,
                 double* out_im, double* out_mag);

/* Least-squares exponential rate of a positive magnitude series. */
int dpc_fitted_decay_rate(const double* times, const double* magnitudes, int64_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* DPCOLLAPSE_H */
