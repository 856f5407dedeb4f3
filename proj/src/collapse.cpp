#include "collapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "numeric.hpp"
#include "rng.hpp"
#include "sphere_interaction.hpp"
#include "stats.hpp"

namespace dpc {

namespace {

void check_intensities(const std::vector<double>& w) {
    if (w.empty()) fail_config("intensities: at least one state required");
    double sum = 0.0;
    for (double x : w) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0)
            fail_config("intensities: every entry must lie in [0, 1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        fail_config("intensities: entries must sum to 1");
}

// sphere-pair interaction energy of the displaced vs rest configuration
double displaced_pair_energy(double mass, double radius, double displacement,
                             const PhysicalConstants& pc) {
    const double self = sphere_self_coulomb(mass, radius);
    const double cross = sphere_pair_coulomb(mass, radius, mass, radius, displacement);
    return pc.xi * pc.G * 2.0 * (self - cross);
}

DetectorScenario build_detector_array(int n, const std::vector<double>& intensities,
                                      const std::vector<double>& masses,
                                      const DetectorGeometry& geom,
                                      const PhysicalConstants& pc) {
    pc.validate();
    if (n < 2) fail_config("detector scenario: at least two detectors required");
    if (intensities.size() != static_cast<std::size_t>(n))
        fail_config("detector scenario: one intensity per detector required");
    check_intensities(intensities);
    if (!(geom.radius > 0.0) || !(geom.displacement > 0.0))
        fail_config("detector scenario: radius and displacement must be positive");
    if (!(geom.area_half_width > 0.5 * geom.displacement + geom.radius))
        fail_config("detector scenario: area box too small for the displaced sphere");
    if (!(geom.area_pitch > 2.0 * geom.area_half_width))
        fail_config("detector scenario: areas overlap, increase the pitch");
    for (double m : masses)
        if (!(m > 0.0)) fail_config("detector scenario: sphere masses must be positive");

    DetectorScenario out;
    const double hw = geom.area_half_width;
    std::vector<double> centers(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        centers[static_cast<std::size_t>(i)] =
            (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * geom.area_pitch;
        BundleArea area;
        area.id = "D" + std::to_string(i + 1);
        area.lo = {centers[static_cast<std::size_t>(i)] - hw, -hw, -hw};
        area.hi = {centers[static_cast<std::size_t>(i)] + hw, hw, hw};
        out.areas.push_back(std::move(area));
    }

    out.spec.constants = pc;
    for (int j = 0; j < n; ++j) {
        std::vector<SphereBody> bodies;
        for (int i = 0; i < n; ++i) {
            const double cx = centers[static_cast<std::size_t>(i)];
            const double shift = (i == j) ? 0.5 * geom.displacement : -0.5 * geom.displacement;
            bodies.push_back({{cx + shift, 0.0, 0.0}, masses[static_cast<std::size_t>(i)], geom.radius});
        }
        SuperpositionState st;
        st.intensity = intensities[static_cast<std::size_t>(j)];
        st.dist = MassDistribution::uniform_sphere_set(std::move(bodies));
        out.spec.states.push_back(std::move(st));
    }

    for (int i = 0; i < n; ++i)
        out.detector_energy.push_back(
            displaced_pair_energy(masses[static_cast<std::size_t>(i)], geom.radius,
                                  geom.displacement, pc));
    return out;
}

}  // namespace

void CascadeProblem::validate() const {
    check_intensities(intensities);
    constants.validate();
    const int n = n_states();
    if (areas.empty()) fail_config("cascade: at least one competition area required");
    for (const CascadeArea& area : areas) {
        const std::size_t nb = area.bundles.size();
        if (nb < 2) fail_config("cascade: every area needs at least two bundles (" + area.id + ")");
        if (nb > 2 && !allow_many_bundles)
            fail_config("cascade: area " + area.id +
                        " has more than two bundles; pass allow_many_bundles to override");
        if (area.pair_energy.size() != nb * nb)
            fail_config("cascade: pair energy matrix size mismatch on " + area.id);
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (const std::vector<int>& members : area.bundles) {
            if (members.empty()) fail_config("cascade: empty bundle on " + area.id);
            int prev = -1;
            for (int s : members) {
                if (s < 0 || s >= n) fail_config("cascade: bundle member out of range on " + area.id);
                if (s <= prev) fail_config("cascade: bundle members must ascend on " + area.id);
                if (seen[static_cast<std::size_t>(s)])
                    fail_config("cascade: state in two bundles on " + area.id);
                seen[static_cast<std::size_t>(s)] = 1;
                prev = s;
            }
        }
        for (int s = 0; s < n; ++s)
            if (!seen[static_cast<std::size_t>(s)])
                fail_config("cascade: bundles must partition the state set on " + area.id);
        for (std::size_t k = 0; k < nb; ++k)
            for (std::size_t m = 0; m < nb; ++m) {
                if (k == m) continue;
                const double e = area.pair_energy[k * nb + m];
                if (!std::isfinite(e) || e < 0.0)
                    fail_config("cascade: pair energies must be finite and non-negative on " +
                                area.id);
            }
    }
}

CascadeProblem make_cascade_problem(const BundleConfiguration& cfg, bool allow_many_bundles) {
    CascadeProblem out;
    out.constants = cfg.spec.constants;
    out.allow_many_bundles = allow_many_bundles;
    for (const SuperpositionState& s : cfg.spec.states) out.intensities.push_back(s.intensity);
    for (std::size_t a = 0; a < cfg.areas.size(); ++a) {
        CascadeArea area;
        area.id = cfg.areas[a].id;
        const std::vector<int>& ab = cfg.area_bundles[a];
        const std::size_t nb = ab.size();
        for (int bi : ab) area.bundles.push_back(cfg.bundles[static_cast<std::size_t>(bi)].members);
        area.pair_energy.assign(nb * nb, 0.0);
        for (std::size_t k = 0; k < nb; ++k)
            for (std::size_t m = k + 1; m < nb; ++m) {
                const double e =
                    local_dp_energy(cfg, static_cast<int>(a), static_cast<int>(k), static_cast<int>(m));
                area.pair_energy[k * nb + m] = e;
                area.pair_energy[m * nb + k] = e;
            }
        out.areas.push_back(std::move(area));
    }
    out.validate();
    return out;
}

CascadeProblem detector_cascade_problem(const std::vector<double>& intensities,
                                        const std::vector<double>& detector_energy,
                                        const PhysicalConstants& constants) {
    const int n = static_cast<int>(intensities.size());
    if (n < 2) fail_config("detector cascade: at least two states required");
    if (detector_energy.size() != intensities.size())
        fail_config("detector cascade: one energy per detector required");

    CascadeProblem out;
    out.intensities = intensities;
    out.constants = constants;
    for (int i = 0; i < n; ++i) {
        CascadeArea area;
        area.id = "D" + std::to_string(i + 1);
        std::vector<int> self{i}, rest;
        for (int j = 0; j < n; ++j)
            if (j != i) rest.push_back(j);
        // bundle order matches first occurrence by lowest member state
        if (i == 0) {
            area.bundles = {std::move(self), std::move(rest)};
        } else {
            area.bundles = {std::move(rest), std::move(self)};
        }
        const double e = detector_energy[static_cast<std::size_t>(i)];
        area.pair_energy = {0.0, e, e, 0.0};
        out.areas.push_back(std::move(area));
    }
    out.validate();
    return out;
}

DetectorScenario build_detector_scenario(int n, const std::vector<double>& intensities,
                                         const DetectorGeometry& geom,
                                         const PhysicalConstants& constants) {
    return build_detector_array(n, intensities,
                                std::vector<double>(static_cast<std::size_t>(n < 0 ? 0 : n), geom.mass),
                                geom, constants);
}

DetectorScenario build_detector_scenario(int n, const std::vector<double>& intensities,
                                         const std::vector<double>& detector_energy,
                                         const PhysicalConstants& constants) {
    if (n < 2) fail_config("detector scenario: at least two detectors required");
    if (detector_energy.size() != static_cast<std::size_t>(n))
        fail_config("detector scenario: one energy per detector required");
    const DetectorGeometry geom;
    const double unit = displaced_pair_energy(1.0, geom.radius, geom.displacement, constants);
    std::vector<double> masses;
    for (double e : detector_energy) {
        if (!(e > 0.0) || !std::isfinite(e))
            fail_config("detector scenario: detector energies must be positive");
        masses.push_back(std::sqrt(e / unit));
    }
    return build_detector_array(n, intensities, masses, geom, constants);
}

CollapseTrace simulate_two_state(const std::vector<double>& intensities, double e_g12,
                                 const PhysicalConstants& constants, std::uint64_t master_seed,
                                 std::uint64_t trace_index) {
    if (intensities.size() != 2) fail_config("two-state simulation: exactly two states required");
    check_intensities(intensities);
    constants.validate();
    if (e_g12 < 0.0 || !std::isfinite(e_g12))
        fail_guard("two-state simulation: interaction energy must be non-negative");

    CollapseTrace trace;
    trace.seed = master_seed;
    trace.index = trace_index;
    if (e_g12 == 0.0) {
        trace.final_state = -1;
        trace.total_time = std::numeric_limits<double>::infinity();
        return trace;
    }

    Xoshiro256pp rng(master_seed, trace_index);
    // clock of state i fires at the competitor's share of the energy
    const double t0 = rng.exponential(intensities[1] * e_g12 / constants.hbar);
    const double t1 = rng.exponential(intensities[0] * e_g12 / constants.hbar);
    const int decayed = (t1 < t0) ? 1 : 0;
    const int survivor = 1 - decayed;
    const double when = decayed == 0 ? t0 : t1;

    trace.events.push_back({when, "D1", decayed, {survivor}});
    trace.final_state = survivor;
    trace.total_time = when;
    return trace;
}

CollapseTrace simulate_cascade(const CascadeProblem& problem, std::uint64_t master_seed,
                               std::uint64_t trace_index, int max_events) {
    problem.validate();
    const int n = problem.n_states();
    const int cap = max_events > 0 ? max_events : n;

    CollapseTrace trace;
    trace.seed = master_seed;
    trace.index = trace_index;

    std::vector<char> alive(static_cast<std::size_t>(n), 1);
    std::vector<double> p = problem.intensities;
    int n_alive = n;
    double now = 0.0;
    Xoshiro256pp rng(master_seed, trace_index);

    while (n_alive > 1) {
        if (static_cast<int>(trace.events.size()) >= cap)
            fail_internal("cascade exceeded its event cap without terminating");

        double best_t = std::numeric_limits<double>::infinity();
        int best_area = -1, best_k = -1, best_n = -1;
        for (std::size_t a = 0; a < problem.areas.size(); ++a) {
            const CascadeArea& area = problem.areas[a];
            const std::size_t nb = area.bundles.size();

            // bundles with at least one surviving member, and their weights
            std::vector<int> live;
            std::vector<double> weight;
            for (std::size_t b = 0; b < nb; ++b) {
                double w = 0.0;
                bool any = false;
                for (int s : area.bundles[b])
                    if (alive[static_cast<std::size_t>(s)]) {
                        any = true;
                        w += p[static_cast<std::size_t>(s)];
                    }
                if (any) {
                    live.push_back(static_cast<int>(b));
                    weight.push_back(w);
                }
            }
            if (live.size() < 2) continue;

            for (std::size_t x = 0; x < live.size(); ++x)
                for (std::size_t y = 0; y < live.size(); ++y) {
                    if (x == y) continue;
                    const double rate =
                        weight[y] * area.energy(live[x], live[y]) / problem.constants.hbar;
                    const double t = rng.exponential(rate);
                    if (t < best_t) {
                        best_t = t;
                        best_area = static_cast<int>(a);
                        best_k = live[x];
                        best_n = live[y];
                    }
                }
        }

        if (best_area < 0 || !std::isfinite(best_t))
            fail_guard("cascade stalled: zero total decay rate with multiple survivors");

        now += best_t;
        const std::vector<int>& keep = problem.areas[static_cast<std::size_t>(best_area)]
                                           .bundles[static_cast<std::size_t>(best_n)];
        std::vector<char> next(static_cast<std::size_t>(n), 0);
        for (int s : keep) next[static_cast<std::size_t>(s)] = alive[static_cast<std::size_t>(s)];

        double norm = 0.0;
        n_alive = 0;
        for (int s = 0; s < n; ++s)
            if (next[static_cast<std::size_t>(s)]) {
                ++n_alive;
                norm += p[static_cast<std::size_t>(s)];
            }
        if (n_alive == 0 || !(norm > 0.0))
            fail_internal("cascade produced an empty or weightless survivor set");
        alive = std::move(next);
        for (int s = 0; s < n; ++s)
            if (alive[static_cast<std::size_t>(s)]) p[static_cast<std::size_t>(s)] /= norm;

        CollapseEvent ev;
        ev.time = now;
        ev.area_id = problem.areas[static_cast<std::size_t>(best_area)].id;
        ev.kappa = best_k;
        for (int s = 0; s < n; ++s)
            if (alive[static_cast<std::size_t>(s)]) ev.survivors.push_back(s);
        trace.events.push_back(std::move(ev));
    }

    for (int s = 0; s < n; ++s)
        if (alive[static_cast<std::size_t>(s)]) trace.final_state = s;
    trace.total_time = now;
    return trace;
}

std::vector<CollapseTrace> simulate_traces(const CascadeProblem& problem,
                                           std::uint64_t master_seed, std::size_t n_trials,
                                           int max_events) {
    problem.validate();
    if (n_trials == 0) fail_config("simulate_traces: at least one trial required");
    std::vector<CollapseTrace> out(n_trials);
    parallel_for_blocks(n_trials, [&](std::size_t i) {
        out[i] = simulate_cascade(problem, master_seed, static_cast<std::uint64_t>(i), max_events);
    });
    return out;
}

BornReport born_check(const std::vector<CollapseTrace>& traces,
                      const std::vector<double>& intensities, double z_limit, double p_limit) {
    check_intensities(intensities);
    if (traces.empty()) fail_config("born_check: no traces supplied");
    const int n = static_cast<int>(intensities.size());

    std::vector<std::uint64_t> counts(static_cast<std::size_t>(n), 0);
    for (const CollapseTrace& t : traces) {
        if (t.final_state < 0 || t.final_state >= n)
            fail_config("born_check: trace did not end in a known state");
        ++counts[static_cast<std::size_t>(t.final_state)];
    }

    BornReport report;
    report.n_traces = traces.size();
    report.z_limit = z_limit;
    report.p_limit = p_limit;

    const double nn = static_cast<double>(traces.size());
    bool all_z_ok = true;
    double chi2 = 0.0;
    int categories = 0;
    for (int s = 0; s < n; ++s) {
        BornStateReport r;
        r.state = s;
        r.count = counts[static_cast<std::size_t>(s)];
        r.expected_probability = intensities[static_cast<std::size_t>(s)];
        r.frequency = static_cast<double>(r.count) / nn;
        r.sigma = std::sqrt(r.expected_probability * (1.0 - r.expected_probability) / nn);
        if (r.sigma > 0.0) {
            r.z = (r.frequency - r.expected_probability) / r.sigma;
        } else if (r.frequency == r.expected_probability) {
            r.z = 0.0;
        } else {
            r.z = std::copysign(std::numeric_limits<double>::infinity(),
                                r.frequency - r.expected_probability);
        }
        if (!(std::abs(r.z) < z_limit)) all_z_ok = false;
        if (r.expected_probability > 0.0) {
            const double expect = nn * r.expected_probability;
            chi2 += (static_cast<double>(r.count) - expect) * (static_cast<double>(r.count) - expect) /
                    expect;
            ++categories;
        }
        report.states.push_back(r);
    }
    report.chi_square = chi2;
    report.dof = categories > 0 ? categories - 1 : 0;
    report.p_value = chi_square_p_value(chi2, report.dof);
    report.pass = all_z_ok && report.p_value > p_limit;
    return report;
}

DecoherenceTrace decohere_two_state(double e1, double e2, double e_g12,
                                    std::complex<double> rho12_initial,
                                    const std::vector<double>& t_grid,
                                    const PhysicalConstants& constants) {
    constants.validate();
    if (!std::isfinite(e_g12) || e_g12 < 0.0)
        fail_guard("decoherence: interaction energy must be non-negative");
    if (!std::isfinite(e1) || !std::isfinite(e2))
        fail_config("decoherence: state energies must be finite");
    if (t_grid.empty()) fail_config("decoherence: empty time grid");
    for (std::size_t q = 0; q < t_grid.size(); ++q) {
        if (!std::isfinite(t_grid[q])) fail_config("decoherence: time grid must be finite");
        if (q > 0 && !(t_grid[q] > t_grid[q - 1]))
            fail_config("decoherence: time grid must be strictly increasing");
    }
    if (std::abs(rho12_initial) > 0.5 + 1e-12)
        fail_config("decoherence: off-diagonal magnitude cannot exceed 1/2");

    const std::complex<double> lambda(-e_g12 / constants.hbar, -(e1 - e2) / constants.hbar);
    const double lam_abs = std::abs(lambda);

    DecoherenceTrace trace;
    trace.times = t_grid;
    std::complex<double> y = rho12_initial;
    trace.offdiag.push_back(y);
    trace.offdiag_magnitude.push_back(std::abs(y));

    for (std::size_t q = 1; q < t_grid.size(); ++q) {
        const double dt = t_grid[q] - t_grid[q - 1];
        const auto nsub = static_cast<std::int64_t>(std::ceil(lam_abs * dt / 0.01));
        const std::int64_t steps = nsub < 1 ? 1 : nsub;
        const double h = dt / static_cast<double>(steps);
        for (std::int64_t s = 0; s < steps; ++s) {
            const std::complex<double> k1 = lambda * y;
            const std::complex<double> k2 = lambda * (y + 0.5 * h * k1);
            const std::complex<double> k3 = lambda * (y + 0.5 * h * k2);
            const std::complex<double> k4 = lambda * (y + h * k3);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        trace.offdiag.push_back(y);
        trace.offdiag_magnitude.push_back(std::abs(y));
    }
    return trace;
}

double fitted_decay_rate(const DecoherenceTrace& trace) {
    std::vector<double> t, logmag;
    for (std::size_t q = 0; q < trace.times.size(); ++q)
        if (trace.offdiag_magnitude[q] > 0.0) {
            t.push_back(trace.times[q]);
            logmag.push_back(std::log(trace.offdiag_magnitude[q]));
        }
    if (t.size() < 2) fail_config("fitted_decay_rate: needs two or more nonzero magnitudes");
    return -fit_slope(t, logmag);
}

}  // namespace dpc
