#include "bundles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"
#include "numeric.hpp"

namespace dpc {

namespace {

// normalized intensity-weighted mean of member values at one cell
double bundle_mean_at(const BundleConfiguration& cfg, const LocalBundle& b,
                      const std::vector<ScalarField>& fields, std::size_t cell) {
    double acc = 0.0;
    for (int i : b.members) acc += cfg.spec.states[static_cast<std::size_t>(i)].intensity *
                                   fields[static_cast<std::size_t>(i)].values[cell];
    if (b.intensity > 0.0) return acc / b.intensity;
    double plain = 0.0;
    for (int i : b.members) plain += fields[static_cast<std::size_t>(i)].values[cell];
    return plain / static_cast<double>(b.members.size());
}

double pair_energy_on_area(const BundleConfiguration& cfg, int area_index, int kappa, int nu) {
    const LocalBundle& bk = cfg.bundle(area_index, kappa);
    const LocalBundle& bn = cfg.bundle(area_index, nu);
    const std::vector<std::int64_t>& cells = cfg.area_cells[static_cast<std::size_t>(area_index)];
    const double vol = cfg.grid.cell_volume();

    return 0.5 * blocked_sum(cells.size(), [&](std::size_t t) {
        const std::size_t c = static_cast<std::size_t>(cells[t]);
        const double rk = bundle_mean_at(cfg, bk, cfg.state_density, c);
        const double rn = bundle_mean_at(cfg, bn, cfg.state_density, c);
        const double pk = bundle_mean_at(cfg, bk, cfg.state_potential, c);
        const double pn = bundle_mean_at(cfg, bn, cfg.state_potential, c);
        return (rk - rn) * (pn - pk) * vol;
    });
}

}  // namespace

const LocalBundle& BundleConfiguration::bundle(int area_index, int kappa) const {
    for (int bi : area_bundles.at(static_cast<std::size_t>(area_index))) {
        const LocalBundle& b = bundles[static_cast<std::size_t>(bi)];
        if (b.kappa == kappa) return b;
    }
    fail_config("bundles: no bundle " + std::to_string(kappa) + " on area " + std::to_string(area_index));
}

bool BundleConfiguration::max_two_bundles_per_area() const {
    for (const auto& ab : area_bundles)
        if (ab.size() > 2) return false;
    return true;
}

BundleConfiguration derive_bundles(const SuperpositionSpec& spec, const std::vector<BundleArea>& areas,
                                   const GridSpec& grid) {
    spec.validate();
    grid.validate();
    if (areas.empty()) fail_config("bundles: at least one area required");

    BundleConfiguration cfg;
    cfg.spec = spec;
    cfg.grid = grid;
    cfg.areas = areas;

    const int nstates = static_cast<int>(spec.states.size());
    cfg.state_density.reserve(static_cast<std::size_t>(nstates));
    cfg.state_potential.reserve(static_cast<std::size_t>(nstates));
    for (const SuperpositionState& s : spec.states) {
        ScalarField d = rasterize(s.dist, grid);
        ScalarField psi = kernel_sum(d);
        for (double& v : psi.values) v *= -spec.constants.G;
        cfg.state_density.push_back(std::move(d));
        cfg.state_potential.push_back(std::move(psi));
    }

    // resolve areas to cell lists and check disjointness
    std::vector<std::int8_t> claimed(static_cast<std::size_t>(grid.n_nodes()), 0);
    for (std::size_t a = 0; a < areas.size(); ++a) {
        const BundleArea& area = areas[a];
        if (area.id.empty()) fail_config("bundles: area id must be non-empty");
        if (!(area.lo.x <= area.hi.x) || !(area.lo.y <= area.hi.y) || !(area.lo.z <= area.hi.z))
            fail_config("bundles: area box corners out of order: " + area.id);
        std::vector<std::int64_t> cells;
        for (std::int64_t i = 0; i < grid.dims[0]; ++i)
            for (std::int64_t j = 0; j < grid.dims[1]; ++j)
                for (std::int64_t k = 0; k < grid.dims[2]; ++k) {
                    const Vec3 p = grid.pos(i, j, k);
                    if (p.x < area.lo.x || p.x > area.hi.x || p.y < area.lo.y || p.y > area.hi.y ||
                        p.z < area.lo.z || p.z > area.hi.z)
                        continue;
                    const std::int64_t lin = grid.index(i, j, k);
                    if (claimed[static_cast<std::size_t>(lin)])
                        fail_config("bundles: areas overlap at a grid cell (" + area.id + ")");
                    claimed[static_cast<std::size_t>(lin)] = 1;
                    cells.push_back(lin);
                }
        cfg.area_cells.push_back(std::move(cells));
    }

    // group states by density equality on each area
    for (std::size_t a = 0; a < areas.size(); ++a) {
        const std::vector<std::int64_t>& cells = cfg.area_cells[a];

        double rho_max = 0.0;
        for (int i = 0; i < nstates; ++i)
            for (std::int64_t c : cells)
                rho_max = std::max(rho_max, std::abs(cfg.state_density[static_cast<std::size_t>(i)]
                                                         .values[static_cast<std::size_t>(c)]));
        const double tol = 1e-12 * std::max(1.0, rho_max);

        std::vector<int> representative;  // state index per existing group
        std::vector<std::vector<int>> groups;
        for (int i = 0; i < nstates; ++i) {
            bool placed = false;
            for (std::size_t gidx = 0; gidx < groups.size() && !placed; ++gidx) {
                const ScalarField& ri = cfg.state_density[static_cast<std::size_t>(i)];
                const ScalarField& rr = cfg.state_density[static_cast<std::size_t>(representative[gidx])];
                double maxdiff = 0.0;
                for (std::int64_t c : cells) {
                    maxdiff = std::max(maxdiff, std::abs(ri.values[static_cast<std::size_t>(c)] -
                                                         rr.values[static_cast<std::size_t>(c)]));
                    if (maxdiff > tol) break;
                }
                if (maxdiff <= tol) {
                    groups[gidx].push_back(i);
                    placed = true;
                }
            }
            if (!placed) {
                representative.push_back(i);
                groups.push_back({i});
            }
        }

        std::vector<int> bundle_indices;
        for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
            LocalBundle b;
            b.area_index = static_cast<int>(a);
            b.kappa = static_cast<int>(gidx);
            b.members = groups[gidx];
            double w = 0.0;
            for (int i : b.members) w += spec.states[static_cast<std::size_t>(i)].intensity;
            b.intensity = w;
            bundle_indices.push_back(static_cast<int>(cfg.bundles.size()));
            cfg.bundles.push_back(std::move(b));
        }
        cfg.area_bundles.push_back(std::move(bundle_indices));
    }

    // precompute the pairwise local energies
    for (std::size_t a = 0; a < areas.size(); ++a) {
        const int nb = static_cast<int>(cfg.area_bundles[a].size());
        for (int k = 0; k < nb; ++k)
            for (int n = k + 1; n < nb; ++n)
                cfg.local_dp[{static_cast<int>(a), k, n}] =
                    pair_energy_on_area(cfg, static_cast<int>(a), k, n);
    }
    return cfg;
}

double local_dp_energy(const BundleConfiguration& cfg, int area_index, int kappa, int nu) {
    if (area_index < 0 || static_cast<std::size_t>(area_index) >= cfg.areas.size())
        fail_config("local_dp_energy: area index out of range");
    if (kappa == nu) fail_config("local_dp_energy: bundle compared against itself");
    const int k = std::min(kappa, nu), n = std::max(kappa, nu);
    const auto it = cfg.local_dp.find({area_index, k, n});
    if (it == cfg.local_dp.end())
        fail_config("local_dp_energy: unknown bundle pair on area " + std::to_string(area_index));
    return it->second;
}

double bundle_energy_increase(const BundleConfiguration& cfg, int area_index, int kappa) {
    const std::vector<int>& ab = cfg.area_bundles.at(static_cast<std::size_t>(area_index));
    double acc = 0.0;
    bool found = false;
    for (int bi : ab) {
        const LocalBundle& b = cfg.bundles[static_cast<std::size_t>(bi)];
        if (b.kappa == kappa) {
            found = true;
            continue;
        }
        acc += b.intensity * local_dp_energy(cfg, area_index, kappa, b.kappa);
    }
    if (!found) fail_config("bundle_energy_increase: no such bundle on the area");
    return acc;
}

std::vector<BundleRate> bundle_decay_rates(const BundleConfiguration& cfg) {
    std::vector<BundleRate> out;
    for (std::size_t a = 0; a < cfg.areas.size(); ++a)
        for (int bi : cfg.area_bundles[a]) {
            const LocalBundle& b = cfg.bundles[static_cast<std::size_t>(bi)];
            out.push_back({static_cast<int>(a), b.kappa,
                           bundle_energy_increase(cfg, static_cast<int>(a), b.kappa) /
                               cfg.spec.constants.hbar});
        }
    return out;
}

double total_energy_assembly(const BundleConfiguration& cfg) {
    const double vol = cfg.grid.cell_volume();
    const double c2 = cfg.spec.constants.c * cfg.spec.constants.c;

    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.spec.states.size(); ++i) {
        const SuperpositionState& st = cfg.spec.states[i];
        const ScalarField& rho = cfg.state_density[i];
        const ScalarField& phi = cfg.state_potential[i];
        const double rest = st.rest_energy_override ? *st.rest_energy_override
                                                    : pairwise_sum(rho.values) * vol * c2;
        const double half_pot = 0.5 * blocked_sum(rho.values.size(), [&](std::size_t t) {
            return rho.values[t] * phi.values[t] * vol;
        });
        acc += st.intensity * (rest + half_pot);
    }
    for (std::size_t a = 0; a < cfg.areas.size(); ++a) {
        const std::vector<int>& ab = cfg.area_bundles[a];
        for (std::size_t x = 0; x < ab.size(); ++x)
            for (std::size_t y = x + 1; y < ab.size(); ++y) {
                const LocalBundle& bk = cfg.bundles[static_cast<std::size_t>(ab[x])];
                const LocalBundle& bn = cfg.bundles[static_cast<std::size_t>(ab[y])];
                acc += bk.intensity * bn.intensity *
                       local_dp_energy(cfg, static_cast<int>(a), bk.kappa, bn.kappa);
            }
    }
    return acc;
}

double mean_field_total_energy(const BundleConfiguration& cfg) {
    const double vol = cfg.grid.cell_volume();
    const double c2 = cfg.spec.constants.c * cfg.spec.constants.c;
    const std::size_t n = cfg.state_density.empty() ? 0 : cfg.state_density[0].values.size();

    double rest = 0.0;
    for (std::size_t i = 0; i < cfg.spec.states.size(); ++i) {
        const SuperpositionState& st = cfg.spec.states[i];
        rest += st.intensity * (st.rest_energy_override
                                    ? *st.rest_energy_override
                                    : pairwise_sum(cfg.state_density[i].values) * vol * c2);
    }
    const double pot = 0.5 * blocked_sum(n, [&](std::size_t t) {
        double mr = 0.0, mp = 0.0;
        for (std::size_t i = 0; i < cfg.spec.states.size(); ++i) {
            mr += cfg.spec.states[i].intensity * cfg.state_density[i].values[t];
            mp += cfg.spec.states[i].intensity * cfg.state_potential[i].values[t];
        }
        return mr * mp * vol;
    });
    return rest + pot;
}

void BundleTimeline::validate() const {
    if (times.size() < 2) fail_config("bundle timeline: at least two time samples required");
    if (configs.size() != times.size())
        fail_config("bundle timeline: one configuration required per time sample");
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (!std::isfinite(times[k]) || !(times[k] < times[k + 1]))
            fail_config("bundle timeline: times must be finite and strictly increasing");

    const BundleConfiguration& first = configs.front();
    for (std::size_t k = 1; k < configs.size(); ++k) {
        const BundleConfiguration& c = configs[k];
        if (c.areas.size() != first.areas.size() || c.bundles.size() != first.bundles.size())
            fail_config("bundle timeline: bundle structure changed between snapshots");
        for (std::size_t b = 0; b < c.bundles.size(); ++b) {
            if (c.bundles[b].area_index != first.bundles[b].area_index ||
                c.bundles[b].kappa != first.bundles[b].kappa ||
                c.bundles[b].members != first.bundles[b].members)
                fail_config("bundle timeline: bundle membership changed between snapshots");
        }
    }
}

LocalActionResult local_competition_action(const BundleTimeline& bt, int area_index, bool relativistic) {
    bt.validate();
    const BundleConfiguration& first = bt.configs.front();
    if (area_index < 0 || static_cast<std::size_t>(area_index) >= first.areas.size())
        fail_config("local action: area index out of range");

    LocalActionResult out;
    out.area_index = area_index;
    out.area_id = first.areas[static_cast<std::size_t>(area_index)].id;

    const std::vector<int>& ab = first.area_bundles[static_cast<std::size_t>(area_index)];
    const int nb = static_cast<int>(ab.size());

    auto pair_integrand = [&](const BundleConfiguration& cfg, int k, int n) {
        if (!relativistic) return local_dp_energy(cfg, area_index, k, n);
        const LocalBundle& bk = cfg.bundle(area_index, k);
        const LocalBundle& bn = cfg.bundle(area_index, n);
        const std::vector<std::int64_t>& cells = cfg.area_cells[static_cast<std::size_t>(area_index)];
        const double vol = cfg.grid.cell_volume();
        const double c2 = cfg.spec.constants.c * cfg.spec.constants.c;
        return 0.5 * blocked_sum(cells.size(), [&](std::size_t t) {
            const std::size_t c = static_cast<std::size_t>(cells[t]);
            const double tk = c2 * bundle_mean_at(cfg, bk, cfg.state_density, c);
            const double tn = c2 * bundle_mean_at(cfg, bn, cfg.state_density, c);
            const double gk = 1.0 + bundle_mean_at(cfg, bk, cfg.state_potential, c) / c2;
            const double gn = 1.0 + bundle_mean_at(cfg, bn, cfg.state_potential, c) / c2;
            return (tk - tn) * (gn - gk) * vol;
        });
    };

    for (int k = 0; k < nb; ++k)
        for (int n = k + 1; n < nb; ++n) {
            double s = 0.0;
            double prev = pair_integrand(bt.configs[0], k, n);
            for (std::size_t q = 1; q < bt.times.size(); ++q) {
                const double cur = pair_integrand(bt.configs[q], k, n);
                s += 0.5 * (bt.times[q] - bt.times[q - 1]) * (prev + cur);
                prev = cur;
            }
            out.pair_actions[{k, n}] = s;
        }

    out.detuning.assign(static_cast<std::size_t>(nb), 0.0);
    for (int k = 0; k < nb; ++k) {
        double acc = 0.0;
        for (int n = 0; n < nb; ++n) {
            if (n == k) continue;
            const auto key = std::array<int, 2>{std::min(k, n), std::max(k, n)};
            acc += first.bundles[static_cast<std::size_t>(ab[static_cast<std::size_t>(n)])].intensity *
                   out.pair_actions.at(key);
        }
        out.detuning[static_cast<std::size_t>(k)] = acc;
    }

    out.interaction_action = 0.0;
    for (int k = 0; k < nb; ++k)
        for (int n = k + 1; n < nb; ++n) {
            const double wk = first.bundles[static_cast<std::size_t>(ab[static_cast<std::size_t>(k)])].intensity;
            const double wn = first.bundles[static_cast<std::size_t>(ab[static_cast<std::size_t>(n)])].intensity;
            out.interaction_action += wk * wn * out.pair_actions.at({k, n});
        }
    return out;
}

}  // namespace dpc
