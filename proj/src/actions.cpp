#include "actions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"
#include "numeric.hpp"

namespace dpc {

void ScenarioTimeline::validate() const {
    if (times.size() < 2) fail_config("timeline: at least two time samples required");
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        if (!std::isfinite(times[k]) || !(times[k] < times[k + 1]))
            fail_config("timeline: times must be finite and strictly increasing");
    }
    if (!std::isfinite(times.back())) fail_config("timeline: times must be finite");

    if (!(intensity1 >= 0.0) || !(intensity2 >= 0.0) || std::abs(intensity1 + intensity2 - 1.0) > 1e-12)
        fail_config("timeline: intensities must be >= 0 and sum to 1");

    const std::size_t n = times.size();
    if (has_relativistic_fields()) {
        if (t_contracted1.size() != n || t_contracted2.size() != n ||
            sqrt_neg_g1.size() != n || sqrt_neg_g2.size() != n)
            fail_config("timeline: relativistic field snapshots must cover every time sample");
        if (!has_grid()) fail_config("timeline: relativistic fields require the shared grid");
        for (std::size_t k = 0; k < n; ++k) {
            if (!(t_contracted1[k].grid == grid) || !(t_contracted2[k].grid == grid) ||
                !(sqrt_neg_g1[k].grid == grid) || !(sqrt_neg_g2[k].grid == grid))
                fail_config("timeline: relativistic snapshots must share the timeline grid");
        }
    } else {
        if (scenario1.size() != n || scenario2.size() != n)
            fail_config("timeline: both scenarios must cover every time sample");
        for (std::size_t k = 0; k < n; ++k) {
            scenario1[k].validate();
            scenario2[k].validate();
        }
    }
    if (has_grid()) grid.validate();
}

namespace {

ActionResult integrate(const std::vector<double>& times, const std::vector<double>& energies,
                       double w1, double w2) {
    ActionResult out;
    out.cumulative.resize(times.size());
    double s = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k > 0)
            s += 0.5 * (times[k] - times[k - 1]) * (energies[k] + energies[k - 1]);
        ActionSample& smp = out.cumulative[k];
        smp.t = times[k];
        smp.e_g12 = energies[k];
        smp.s_g12 = s;
        smp.s_g1 = w2 * s;
        smp.s_g2 = w1 * s;
    }
    out.s_g12 = out.cumulative.back().s_g12;
    out.s_g1 = out.cumulative.back().s_g1;
    out.s_g2 = out.cumulative.back().s_g2;
    return out;
}

double grid_pair_energy(const MassDistribution& r1, const MassDistribution& r2,
                        const PhysicalConstants& cst, const GridSpec& grid) {
    const ScalarField d1 = rasterize(r1, grid);
    const ScalarField d2 = rasterize(r2, grid);
    ScalarField phi1 = kernel_sum(d1);
    ScalarField phi2 = kernel_sum(d2);
    for (double& v : phi1.values) v *= -cst.G;
    for (double& v : phi2.values) v *= -cst.G;
    const double vol = grid.cell_volume();
    return 0.5 * blocked_sum(d1.values.size(), [&](std::size_t t) {
        return (d1.values[t] - d2.values[t]) * (phi2.values[t] - phi1.values[t]) * vol;
    });
}

}  // namespace

ActionResult competition_action_newtonian(const ScenarioTimeline& tl, const PhysicalConstants& constants) {
    tl.validate();
    constants.validate();
    if (tl.scenario1.size() != tl.times.size())
        fail_config("newtonian action: timeline carries no mass snapshots");

    std::vector<double> energies(tl.times.size(), 0.0);
    parallel_for_blocks(tl.times.size(), [&](std::size_t k) {
        if (tl.has_grid()) {
            energies[k] = grid_pair_energy(tl.scenario1[k], tl.scenario2[k], constants, tl.grid);
        } else {
            energies[k] = dp_energy_double_integral(tl.scenario1[k], tl.scenario2[k], constants).value;
        }
    });
    return integrate(tl.times, energies, tl.intensity1, tl.intensity2);
}

ActionResult competition_action_relativistic(const ScenarioTimeline& tl, const PhysicalConstants& constants) {
    tl.validate();
    constants.validate();

    const std::size_t n = tl.times.size();
    const double c2 = constants.c * constants.c;
    std::vector<double> energies(n, 0.0);

    if (tl.has_relativistic_fields()) {
        const double vol = tl.grid.cell_volume();
        for (std::size_t k = 0; k < n; ++k) {
            const ScalarField& t1 = tl.t_contracted1[k];
            const ScalarField& t2 = tl.t_contracted2[k];
            const ScalarField& v1 = tl.sqrt_neg_g1[k];
            const ScalarField& v2 = tl.sqrt_neg_g2[k];
            for (std::size_t t = 0; t < v1.values.size(); ++t) {
                if (std::abs(v1.values[t] - 1.0) > 0.01 * (1.0 + 1e-12) ||
                    std::abs(v2.values[t] - 1.0) > 0.01 * (1.0 + 1e-12))
                    fail_guard("relativistic action: |sqrt(-g) - 1| exceeds the weak-field bound");
            }
            energies[k] = 0.5 * blocked_sum(t1.values.size(), [&](std::size_t t) {
                return (t1.values[t] - t2.values[t]) * (v2.values[t] - v1.values[t]) * vol;
            });
        }
        return integrate(tl.times, energies, tl.intensity1, tl.intensity2);
    }

    if (!tl.has_grid())
        fail_config("relativistic action: a shared grid is required to construct the fields");

    const double vol = tl.grid.cell_volume();
    parallel_for_blocks(n, [&](std::size_t k) {
        const ScalarField d1 = rasterize(tl.scenario1[k], tl.grid);
        const ScalarField d2 = rasterize(tl.scenario2[k], tl.grid);
        ScalarField phi1 = kernel_sum(d1);
        ScalarField phi2 = kernel_sum(d2);
        for (double& v : phi1.values) v *= -constants.G;
        for (double& v : phi2.values) v *= -constants.G;

        ScalarField tc1(tl.grid), tc2(tl.grid), sg1(tl.grid), sg2(tl.grid);
        for (std::size_t t = 0; t < d1.values.size(); ++t) {
            tc1.values[t] = c2 * d1.values[t];
            tc2.values[t] = c2 * d2.values[t];
            const double x1 = phi1.values[t] / c2;
            const double x2 = phi2.values[t] / c2;
            if (std::abs(x1) > 0.01 * (1.0 + 1e-12) || std::abs(x2) > 0.01 * (1.0 + 1e-12))
                fail_guard("relativistic action: constructed potential violates the weak-field bound");
            sg1.values[t] = 1.0 + x1;
            sg2.values[t] = 1.0 + x2;
        }
        energies[k] = 0.5 * blocked_sum(tc1.values.size(), [&](std::size_t t) {
            return (tc1.values[t] - tc2.values[t]) * (sg2.values[t] - sg1.values[t]) * vol;
        });
    });
    return integrate(tl.times, energies, tl.intensity1, tl.intensity2);
}

std::pair<double, double> decay_rates_from_actions(const ActionResult& ar, double t,
                                                   const PhysicalConstants& constants) {
    constants.validate();
    const auto& c = ar.cumulative;
    if (c.size() < 2) fail_config("decay rates: cumulative trace needs at least two samples");
    if (!(t >= c.front().t) || !(t <= c.back().t))
        fail_config("decay rates: query time outside the trace range");

    // snap to the nearest sample
    std::size_t k = 0;
    double best = std::abs(c[0].t - t);
    for (std::size_t q = 1; q < c.size(); ++q) {
        const double d = std::abs(c[q].t - t);
        if (d < best) {
            best = d;
            k = q;
        }
    }

    std::size_t lo, hi;
    if (k == 0) {
        lo = 0;
        hi = 1;
    } else if (k == c.size() - 1) {
        lo = c.size() - 2;
        hi = c.size() - 1;
    } else {
        lo = k - 1;
        hi = k + 1;
    }
    const double dt = c[hi].t - c[lo].t;
    return {(c[hi].s_g1 - c[lo].s_g1) / dt / constants.hbar,
            (c[hi].s_g2 - c[lo].s_g2) / dt / constants.hbar};
}

double eh_decomposition_check(const ScalarField& a1, const ScalarField& a2,
                              const ScalarField& b1, const ScalarField& b2,
                              double w1, double w2) {
    if (!(a1.grid == a2.grid) || !(a1.grid == b1.grid) || !(a1.grid == b2.grid))
        fail_config("decomposition check: fields must share one grid");
    if (std::abs(w1 + w2 - 1.0) > 1e-12)
        fail_config("decomposition check: intensities must sum to 1");

    const double vol = a1.grid.cell_volume();
    const std::size_t n = a1.values.size();
    const double mixed = blocked_sum(n, [&](std::size_t t) {
        return (w1 * a1.values[t] + w2 * a2.values[t]) * (w1 * b1.values[t] + w2 * b2.values[t]) * vol;
    });
    const double diag1 = blocked_sum(n, [&](std::size_t t) {
        return w1 * a1.values[t] * b1.values[t] * vol;
    });
    const double diag2 = blocked_sum(n, [&](std::size_t t) {
        return w2 * a2.values[t] * b2.values[t] * vol;
    });
    const double cross = blocked_sum(n, [&](std::size_t t) {
        return w1 * w2 * (a1.values[t] - a2.values[t]) * (b2.values[t] - b1.values[t]) * vol;
    });

    const double resid = std::abs(mixed - (diag1 + diag2 + cross));
    const double scale = std::abs(diag1) + std::abs(diag2) + std::abs(cross) + std::abs(mixed);
    return scale > 0.0 ? resid / scale : resid;
}

}  // namespace dpc
