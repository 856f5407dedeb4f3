#include <algorithm>
#include <array>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scenario.hpp"

namespace {

using dpcli::bad_config;
using dpcli::Bundles;
using dpcli::Cascade;
using dpcli::ck;
using dpcli::CliError;
using dpcli::Dist;
using dpcli::Field;
using dpcli::json;
using dpcli::Scenario;
using dpcli::Spec;
using dpcli::Timeline;
using dpcli::Traces;

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string out;
    bool first = true;
    for (const std::string& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    return out;
}

std::string csv_text(const std::string& header, const std::vector<std::string>& rows) {
    std::string out = header;
    out += '\n';
    for (const std::string& r : rows) {
        out += r;
        out += '\n';
    }
    return out;
}

// one invocation: scenario, merged config, output sink
struct Run {
    const Scenario& sc;
    const json& effective;
    std::filesystem::path dir;
    std::vector<std::string> outputs;

    std::string path(const std::string& name) const { return (dir / name).string(); }
    void record(const std::string& name) { outputs.push_back(name); }
    void save_text(const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        out << text;
        if (!out) throw CliError{DPC_ERR_IO, "cannot write " + path(name)};
        record(name);
    }
    void save_json(const std::string& name, const json& j) { save_text(name, j.dump(2) + "\n"); }
};

/* ---- shared computations (also drive sweep rows) ---- */

struct DpEnergyRow {
    double analytic = 0.0;
    std::optional<std::array<double, 2>> di, pf, ff;  // value, est_error
};

DpEnergyRow compute_dp_energy(const Scenario& sc) {
    sc.need_two_states("dp-energy");
    const Dist a = sc.make_state_dist(0);
    const Dist b = sc.make_state_dist(1);
    DpEnergyRow row;
    ck(dpc_dp_energy(a.get(), b.get(), nullptr, &sc.constants, DPC_DP_DOUBLE_INTEGRAL,
                     DPC_SOLVE_AUTO, &row.analytic, nullptr));
    if (sc.has_grid()) {
        const auto eval = [&](int method) {
            std::array<double, 2> ve{};
            ck(dpc_dp_energy(a.get(), b.get(), &*sc.grid, &sc.constants, method, DPC_SOLVE_AUTO,
                             &ve[0], &ve[1]));
            return ve;
        };
        row.di = eval(DPC_DP_DOUBLE_INTEGRAL);
        row.pf = eval(DPC_DP_POTENTIAL);
        row.ff = eval(DPC_DP_FIELD);
    }
    return row;
}

struct LifetimeRow {
    double e_g12 = 0.0, lifetime = 0.0, rate1 = 0.0, rate2 = 0.0, mean = 0.0;
};

LifetimeRow compute_lifetime(const Scenario& sc) {
    sc.need_two_states("lifetime");
    const Dist a = sc.make_state_dist(0);
    const Dist b = sc.make_state_dist(1);
    LifetimeRow r;
    ck(dpc_dp_energy(a.get(), b.get(), nullptr, &sc.constants, DPC_DP_DOUBLE_INTEGRAL,
                     DPC_SOLVE_AUTO, &r.e_g12, nullptr));
    ck(dpc_lifetime(r.e_g12, &sc.constants, &r.lifetime));
    const Spec spec = sc.make_spec();
    ck(dpc_decay_rates(spec.get(), r.e_g12, &r.rate1, &r.rate2));
    ck(dpc_mean_lifetime(r.rate1, r.rate2, &r.mean));
    return r;
}

struct FuzzinessRow {
    double de1 = 0.0, de2 = 0.0, mean = 0.0, potential_form = 0.0, residual = 0.0;
};

FuzzinessRow compute_fuzziness(const Scenario& sc) {
    sc.need_two_states("fuzziness");
    const dpc_grid& g = sc.need_grid("fuzziness");
    const Dist a = sc.make_state_dist(0);
    const Dist b = sc.make_state_dist(1);
    FuzzinessRow r;
    ck(dpc_energy_fuzziness(a.get(), b.get(), &g, &sc.constants, DPC_SOLVE_AUTO, &r.de1, &r.de2));
    r.mean = 0.5 * (r.de1 + r.de2);
    ck(dpc_dp_energy(a.get(), b.get(), &g, &sc.constants, DPC_DP_POTENTIAL, DPC_SOLVE_AUTO,
                     &r.potential_form, nullptr));
    r.residual = std::abs(r.mean - r.potential_form) / std::max(std::abs(r.potential_form), 1e-300);
    return r;
}

struct ActionRow {
    double s12 = 0.0, s1 = 0.0, s2 = 0.0;
    std::optional<std::array<double, 3>> rel;
    std::vector<double> samples, samples_rel;  // 5 per snapshot
};

ActionRow compute_action(const Scenario& sc) {
    if (!sc.has_timeline()) bad_config("action requires a timeline section");
    const Timeline tl = sc.make_timeline();
    ActionRow r;
    r.samples.resize(5 * sc.tl_times.size());
    ck(dpc_action(tl.get(), &sc.constants, 0, &r.s12, &r.s1, &r.s2, r.samples.data()));
    if (sc.has_grid()) {
        std::array<double, 3> s{};
        r.samples_rel.resize(5 * sc.tl_times.size());
        ck(dpc_action(tl.get(), &sc.constants, 1, &s[0], &s[1], &s[2], r.samples_rel.data()));
        r.rel = s;
    }
    return r;
}

/* ---- subcommand runners ---- */

void run_potential(Run& run) {
    const Scenario& sc = run.sc;
    const dpc_grid& g = sc.need_grid("potential");
    if (!sc.has_superposition()) bad_config("potential requires a superposition section");
    Field f;
    if (sc.intensities.size() == 1) {
        const Dist d = sc.make_state_dist(0);
        ck(dpc_solve_potential(d.get(), &g, &sc.constants, DPC_SOLVE_AUTO, f.slot()));
    } else {
        const Spec spec = sc.make_spec();
        ck(dpc_mean_potential(spec.get(), &g, DPC_SOLVE_AUTO, f.slot()));
    }
    bool csv = sc.wants("csv");
    const bool bin = sc.wants("bin");
    if (!csv && !bin) csv = true;
    if (csv) {
        ck(dpc_field_write_csv(f.get(), run.path("potential.csv").c_str()));
        run.record("potential.csv");
    }
    if (bin) {
        ck(dpc_field_write_binary(f.get(), run.path("potential.bin").c_str()));
        run.record("potential.bin");
    }
}

void run_dp_energy(Run& run) {
    const DpEnergyRow r = compute_dp_energy(run.sc);
    json j;
    j["analytic"] = jnum(r.analytic);
    j["xi"] = run.sc.constants.xi;
    if (r.di) {
        json m;
        m["double_integral"] = {{"value", jnum((*r.di)[0])}, {"est_error", jnum((*r.di)[1])}};
        m["potential_form"] = {{"value", jnum((*r.pf)[0])}, {"est_error", jnum((*r.pf)[1])}};
        m["field_form"] = {{"value", jnum((*r.ff)[0])}, {"est_error", jnum((*r.ff)[1])}};
        j["grid_methods"] = m;
    }
    run.save_json("dp_energy.json", j);
    if (run.sc.wants("csv")) {
        std::vector<std::string> rows;
        rows.push_back(csv_row({"analytic", g17(r.analytic), ""}));
        if (r.di) {
            rows.push_back(csv_row({"double_integral", g17((*r.di)[0]), g17((*r.di)[1])}));
            rows.push_back(csv_row({"potential_form", g17((*r.pf)[0]), g17((*r.pf)[1])}));
            rows.push_back(csv_row({"field_form", g17((*r.ff)[0]), g17((*r.ff)[1])}));
        }
        run.save_text("dp_energy.csv", csv_text("method,value,est_error", rows));
    }
}

void run_lifetime(Run& run) {
    const LifetimeRow r = compute_lifetime(run.sc);
    json j;
    j["e_g12"] = jnum(r.e_g12);
    j["lifetime"] = jnum(r.lifetime);
    j["rate1"] = jnum(r.rate1);
    j["rate2"] = jnum(r.rate2);
    j["mean_lifetime"] = jnum(r.mean);
    run.save_json("lifetime.json", j);
    if (run.sc.wants("csv"))
        run.save_text("lifetime.csv",
                      csv_text("e_g12,lifetime,rate1,rate2,mean_lifetime",
                               {csv_row({g17(r.e_g12), g17(r.lifetime), g17(r.rate1),
                                         g17(r.rate2), g17(r.mean)})}));
}

void run_fuzziness(Run& run) {
    const FuzzinessRow r = compute_fuzziness(run.sc);
    json j;
    j["de1"] = jnum(r.de1);
    j["de2"] = jnum(r.de2);
    j["mean"] = jnum(r.mean);
    j["potential_form"] = jnum(r.potential_form);
    j["residual_rel"] = jnum(r.residual);
    run.save_json("fuzziness.json", j);
    if (run.sc.wants("csv"))
        run.save_text("fuzziness.csv",
                      csv_text("de1,de2,mean,potential_form,residual_rel",
                               {csv_row({g17(r.de1), g17(r.de2), g17(r.mean),
                                         g17(r.potential_form), g17(r.residual)})}));
}

void run_action(Run& run) {
    const ActionRow r = compute_action(run.sc);
    json j;
    j["newtonian"] = {{"s_g12", jnum(r.s12)}, {"s_g1", jnum(r.s1)}, {"s_g2", jnum(r.s2)}};
    if (r.rel) {
        j["relativistic"] = {{"s_g12", jnum((*r.rel)[0])},
                             {"s_g1", jnum((*r.rel)[1])},
                             {"s_g2", jnum((*r.rel)[2])}};
        j["relative_difference"] =
            jnum(std::abs((*r.rel)[0] - r.s12) / std::max(std::abs(r.s12), 1e-300));
    }
    run.save_json("action.json", j);
    if (run.sc.wants("csv")) {
        const auto dump = [&](const std::vector<double>& s, const std::string& name) {
            std::vector<std::string> rows;
            for (std::size_t q = 0; 5 * q < s.size(); ++q)
                rows.push_back(csv_row({g17(s[5 * q]), g17(s[5 * q + 1]), g17(s[5 * q + 2]),
                                        g17(s[5 * q + 3]), g17(s[5 * q + 4])}));
            run.save_text(name, csv_text("t,e_g12,s_g12,s_g1,s_g2", rows));
        };
        dump(r.samples, "action_newtonian.csv");
        if (r.rel) dump(r.samples_rel, "action_relativistic.csv");
    }
}

void run_bundles(Run& run) {
    const Scenario& sc = run.sc;
    if (!sc.has_superposition() || !sc.has_areas())
        bad_config("bundles requires superposition and areas sections");
    const dpc_grid& g = sc.need_grid("bundles");
    const Spec spec = sc.make_spec();
    std::vector<const char*> ids;
    for (const std::string& s : sc.area_ids) ids.push_back(s.c_str());
    Bundles b;
    ck(dpc_bundles_derive(spec.get(), sc.area_lo.data(), sc.area_hi.data(), ids.data(),
                          static_cast<int64_t>(ids.size()), &g, b.slot()));

    int64_t count = 0;
    ck(dpc_bundles_count(b.get(), &count));
    const auto n_states = static_cast<int64_t>(sc.intensities.size());

    struct BundleRow {
        int64_t kappa;
        double intensity;
        std::vector<int64_t> members;
        double increase;
    };
    std::map<int64_t, std::vector<BundleRow>> by_area;
    for (int64_t i = 0; i < count; ++i) {
        int64_t area = 0, kappa = 0, nm = 0;
        double w = 0.0;
        std::vector<int64_t> mem(static_cast<std::size_t>(n_states));
        ck(dpc_bundles_info(b.get(), i, &area, &kappa, &w, &nm, mem.data()));
        mem.resize(static_cast<std::size_t>(nm));
        double inc = 0.0;
        ck(dpc_bundles_energy_increase(b.get(), area, kappa, &inc));
        by_area[area].push_back({kappa, w, std::move(mem), inc});
    }

    json areas = json::array();
    std::vector<std::string> rows;
    for (const auto& [area, list] : by_area) {
        const char* id = nullptr;
        ck(dpc_bundles_area_id(b.get(), area, &id));
        json bl = json::array();
        for (const BundleRow& br : list) {
            bl.push_back({{"kappa", br.kappa},
                          {"members", br.members},
                          {"intensity", br.intensity},
                          {"energy_increase", jnum(br.increase)},
                          {"decay_rate", jnum(br.increase / sc.constants.hbar)}});
            rows.push_back(csv_row({id, std::to_string(br.kappa), g17(br.intensity),
                                    std::to_string(br.members.size()), g17(br.increase),
                                    g17(br.increase / sc.constants.hbar)}));
        }
        json pairs = json::array();
        for (std::size_t ka = 0; ka < list.size(); ++ka)
            for (std::size_t nu = ka + 1; nu < list.size(); ++nu) {
                double e = 0.0;
                ck(dpc_bundles_local_energy(b.get(), area, list[ka].kappa, list[nu].kappa, &e));
                pairs.push_back(
                    {{"kappa", list[ka].kappa}, {"nu", list[nu].kappa}, {"value", jnum(e)}});
            }
        areas.push_back({{"id", id}, {"bundles", bl}, {"pair_energies", pairs}});
    }

    double assembly = 0.0, mean_field = 0.0;
    ck(dpc_bundles_total_energy(b.get(), &assembly, &mean_field));
    json j;
    j["areas"] = areas;
    j["total_energy"] = {
        {"assembly", jnum(assembly)},
        {"mean_field", jnum(mean_field)},
        {"residual_rel",
         jnum(std::abs(assembly - mean_field) / std::max(std::abs(mean_field), 1e-300))}};
    run.save_json("bundles.json", j);
    if (sc.wants("csv"))
        run.save_text("bundles.csv",
                      csv_text("area_id,kappa,intensity,n_members,energy_increase,decay_rate",
                               rows));
}

struct CascadeSetup {
    Cascade cascade;
    std::vector<double> expected;
};

CascadeSetup make_cascade(const Scenario& sc) {
    CascadeSetup out;
    if (!sc.sim.detector_energy.empty()) {
        out.expected = sc.sim.intensities.empty() ? sc.intensities : sc.sim.intensities;
        if (out.expected.empty())
            bad_config("simulate needs intensities (simulation.intensities or a superposition)");
        if (out.expected.size() != sc.sim.detector_energy.size())
            bad_config("simulation.detector_energy needs one entry per state");
        ck(dpc_cascade_detectors(out.expected.data(), sc.sim.detector_energy.data(),
                                 static_cast<int64_t>(out.expected.size()), &sc.constants,
                                 out.cascade.slot()));
        return out;
    }
    if (!sc.has_superposition() || !sc.has_areas())
        bad_config(
            "simulate needs simulation.detector_energy or a superposition with areas and a grid");
    const dpc_grid& g = sc.need_grid("simulate");
    const Spec spec = sc.make_spec();
    std::vector<const char*> ids;
    for (const std::string& s : sc.area_ids) ids.push_back(s.c_str());
    Bundles b;
    ck(dpc_bundles_derive(spec.get(), sc.area_lo.data(), sc.area_hi.data(), ids.data(),
                          static_cast<int64_t>(ids.size()), &g, b.slot()));
    ck(dpc_cascade_from_bundles(b.get(), sc.sim.allow_many_bundles ? 1 : 0, out.cascade.slot()));
    out.expected = sc.intensities;
    return out;
}

void summarize_traces(Run& run, const Traces& t, std::size_t n_states) {
    int64_t n = 0;
    ck(dpc_traces_count(t.get(), &n));
    std::vector<int64_t> counts(n_states, 0);
    int64_t none = 0, time_n = 0, ev_sum = 0;
    double time_sum = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        int64_t fs = 0;
        ck(dpc_traces_final_state(t.get(), i, &fs));
        if (fs < 0)
            ++none;
        else
            ++counts[static_cast<std::size_t>(fs)];
        double tt = 0.0;
        ck(dpc_traces_total_time(t.get(), i, &tt));
        if (std::isfinite(tt)) {
            time_sum += tt;
            ++time_n;
        }
        int64_t ec = 0;
        ck(dpc_traces_event_count(t.get(), i, &ec));
        ev_sum += ec;
    }
    json states = json::array();
    for (std::size_t s = 0; s < n_states; ++s)
        states.push_back({{"state", s},
                          {"count", counts[s]},
                          {"frequency", n ? static_cast<double>(counts[s]) / static_cast<double>(n)
                                          : 0.0}});
    json j;
    j["n_traces"] = n;
    j["master_seed"] = run.sc.sim.master_seed;
    j["states"] = states;
    j["no_decay"] = none;
    j["mean_total_time"] =
        time_n ? jnum(time_sum / static_cast<double>(time_n)) : json(nullptr);
    j["mean_events"] =
        n ? jnum(static_cast<double>(ev_sum) / static_cast<double>(n)) : json(nullptr);
    run.save_json("summary.json", j);
}

void run_simulate(Run& run) {
    const Scenario& sc = run.sc;
    const CascadeSetup cs = make_cascade(sc);
    Traces t;
    ck(dpc_simulate(cs.cascade.get(), sc.sim.master_seed, sc.sim.trials, sc.sim.max_events,
                    t.slot()));
    if (sc.wants("jsonl")) {
        ck(dpc_traces_write_jsonl(t.get(), run.path("traces.jsonl").c_str()));
        run.record("traces.jsonl");
    }
    summarize_traces(run, t, cs.expected.size());
}

int run_born_check(Run& run) {
    const Scenario& sc = run.sc;
    const CascadeSetup cs = make_cascade(sc);
    Traces t;
    ck(dpc_simulate(cs.cascade.get(), sc.sim.master_seed, sc.sim.trials, sc.sim.max_events,
                    t.slot()));
    if (sc.wants("jsonl")) {
        ck(dpc_traces_write_jsonl(t.get(), run.path("traces.jsonl").c_str()));
        run.record("traces.jsonl");
    }
    const auto n = static_cast<int64_t>(cs.expected.size());
    ck(dpc_born_report_json(t.get(), cs.expected.data(), n, 3.0, 1e-3,
                            run.path("born.json").c_str()));
    run.record("born.json");
    int pass = 0;
    ck(dpc_born_check(t.get(), cs.expected.data(), n, 3.0, 1e-3, nullptr, nullptr, nullptr,
                      nullptr, &pass));
    return pass ? 0 : DPC_ERR_STATISTICAL;
}

void run_decohere(Run& run) {
    const Scenario& sc = run.sc;
    const dpcli::DecohereParams& dp = sc.deco;

    double e = 0.0;
    if (dp.e_g12) {
        e = *dp.e_g12;
    } else {
        sc.need_two_states("decohere");
        const Dist a = sc.make_state_dist(0);
        const Dist b = sc.make_state_dist(1);
        ck(dpc_dp_energy(a.get(), b.get(), nullptr, &sc.constants, DPC_DP_DOUBLE_INTEGRAL,
                         DPC_SOLVE_AUTO, &e, nullptr));
    }

    double rre = 0.0, rim = 0.0;
    if (dp.rho_re) {
        rre = *dp.rho_re;
        rim = dp.rho_im.value_or(0.0);
    } else {
        sc.need_two_states("decohere");
        rre = std::sqrt(sc.intensities[0] * sc.intensities[1]);
    }

    std::vector<double> times = dp.times;
    if (times.empty()) {
        double t_max = 0.0;
        if (dp.t_max)
            t_max = *dp.t_max;
        else if (e > 0.0)
            t_max = 5.0 * sc.constants.hbar / e;
        else
            bad_config("decohere with zero interaction energy needs t_max or times");
        const auto n = static_cast<std::size_t>(dp.samples);
        times.resize(n);
        for (std::size_t q = 0; q < n; ++q)
            times[q] = t_max * static_cast<double>(q) / static_cast<double>(n - 1);
    }

    const auto n = static_cast<int64_t>(times.size());
    std::vector<double> re(times.size()), im(times.size()), mag(times.size());
    ck(dpc_decohere(dp.e1, dp.e2, e, rre, rim, times.data(), n, &sc.constants, re.data(),
                    im.data(), mag.data()));

    double tau = 0.0;
    ck(dpc_lifetime(e, &sc.constants, &tau));
    const double expected_rate = e / sc.constants.hbar;

    json j;
    j["e_g12"] = jnum(e);
    j["expected_rate"] = jnum(expected_rate);
    j["lifetime"] = jnum(tau);
    j["rho12"] = json::array({jnum(rre), jnum(rim)});
    j["samples"] = n;
    std::size_t positive = 0;
    for (double m : mag) positive += m > 0.0 ? 1 : 0;
    if (positive >= 2) {
        double fit = 0.0;
        ck(dpc_fitted_decay_rate(times.data(), mag.data(), n, &fit));
        j["fitted_rate"] = jnum(fit);
        j["relative_difference"] = expected_rate > 0.0
                                       ? jnum(std::abs(fit - expected_rate) / expected_rate)
                                       : json(nullptr);
    } else {
        j["fitted_rate"] = nullptr;
        j["relative_difference"] = nullptr;
    }
    run.save_json("decohere.json", j);

    if (sc.wants("csv")) {
        std::vector<std::string> rows;
        for (std::size_t q = 0; q < times.size(); ++q)
            rows.push_back(csv_row({g17(times[q]), g17(re[q]), g17(im[q]), g17(mag[q])}));
        run.save_text("decohere.csv", csv_text("t,re,im,magnitude", rows));
    }
}

void run_sweep(Run& run) {
    const Scenario& sc = run.sc;
    if (!sc.sweep) bad_config("sweep requires a sweep section");
    const dpcli::SweepParams& sp = *sc.sweep;
    json::json_pointer ptr;
    try {
        ptr = json::json_pointer(sp.parameter);
    } catch (const std::exception&) {
        bad_config("sweep.parameter is not a valid JSON pointer");
    }

    json rows = json::array();
    std::vector<std::string> csv_rows;
    std::string header;
    for (double v : sp.values) {
        json patched = run.effective;
        try {
            patched[ptr] = v;
        } catch (const std::exception& e) {
            bad_config(std::string("cannot set sweep parameter: ") + e.what());
        }
        const Scenario s2(patched);
        json row;
        row["value"] = v;
        if (sp.subcommand == "dp-energy") {
            header = "value,analytic,double_integral,di_error,potential_form,pf_error,"
                     "field_form,ff_error";
            const DpEnergyRow r = compute_dp_energy(s2);
            row["analytic"] = jnum(r.analytic);
            const auto put = [&](const char* key, const char* ekey,
                                 const std::optional<std::array<double, 2>>& m) {
                row[key] = m ? jnum((*m)[0]) : json(nullptr);
                row[ekey] = m ? jnum((*m)[1]) : json(nullptr);
            };
            put("double_integral", "di_error", r.di);
            put("potential_form", "pf_error", r.pf);
            put("field_form", "ff_error", r.ff);
            const auto cell = [&](const std::optional<std::array<double, 2>>& m, int k) {
                return m ? g17((*m)[static_cast<std::size_t>(k)]) : std::string("nan");
            };
            csv_rows.push_back(csv_row({g17(v), g17(r.analytic), cell(r.di, 0), cell(r.di, 1),
                                        cell(r.pf, 0), cell(r.pf, 1), cell(r.ff, 0),
                                        cell(r.ff, 1)}));
        } else if (sp.subcommand == "lifetime") {
            header = "value,e_g12,lifetime,rate1,rate2";
            const LifetimeRow r = compute_lifetime(s2);
            row["e_g12"] = jnum(r.e_g12);
            row["lifetime"] = jnum(r.lifetime);
            row["rate1"] = jnum(r.rate1);
            row["rate2"] = jnum(r.rate2);
            row["mean_lifetime"] = jnum(r.mean);
            csv_rows.push_back(
                csv_row({g17(v), g17(r.e_g12), g17(r.lifetime), g17(r.rate1), g17(r.rate2)}));
        } else if (sp.subcommand == "fuzziness") {
            header = "value,de1,de2,mean,potential_form";
            const FuzzinessRow r = compute_fuzziness(s2);
            row["de1"] = jnum(r.de1);
            row["de2"] = jnum(r.de2);
            row["mean"] = jnum(r.mean);
            row["potential_form"] = jnum(r.potential_form);
            csv_rows.push_back(
                csv_row({g17(v), g17(r.de1), g17(r.de2), g17(r.mean), g17(r.potential_form)}));
        } else {
            header = "value,s_newtonian,s_relativistic";
            const ActionRow r = compute_action(s2);
            row["s_newtonian"] = jnum(r.s12);
            row["s_relativistic"] = r.rel ? jnum((*r.rel)[0]) : json(nullptr);
            csv_rows.push_back(csv_row(
                {g17(v), g17(r.s12), r.rel ? g17((*r.rel)[0]) : std::string("nan")}));
        }
        rows.push_back(std::move(row));
    }

    json j;
    j["parameter"] = sp.parameter;
    j["subcommand"] = sp.subcommand;
    j["rows"] = rows;
    run.save_json("sweep.json", j);
    if (sc.wants("csv")) run.save_text("sweep.csv", csv_text(header, csv_rows));
}

}  // namespace

int main(int argc, char** argv) {
    const auto t_start = std::chrono::steady_clock::now();

    CLI::App app{"gravitational self-energy and reduction-cascade toolkit"};
    app.fallthrough();

    std::string config_path;
    app.add_option("--config,-c", config_path, "scenario configuration (JSON)")->required();

    std::uint64_t seed_v = 0;
    auto* seed_o = app.add_option("--seed", seed_v, "master seed override");
    std::uint64_t trials_v = 0;
    auto* trials_o = app.add_option("--trials", trials_v, "trial count override");
    int threads_v = 0;
    auto* threads_o = app.add_option("--threads", threads_v, "worker thread cap");
    std::string out_v;
    auto* out_o = app.add_option("--out", out_v, "output directory override");
    std::string fmt_v;
    auto* fmt_o = app.add_option("--format", fmt_v, "single output format (csv, jsonl or bin)");
    double xi_v = 0.0;
    auto* xi_o = app.add_option("--xi", xi_v, "interaction-energy prefactor (0.5 or 1)");
    bool allow_v = false;
    app.add_flag("--allow-many-bundles", allow_v, "permit areas with more than two bundles");

    app.add_subcommand("potential", "solve the mean gravitational potential on the grid");
    app.add_subcommand("dp-energy", "interaction energy of the two-state difference");
    app.add_subcommand("lifetime", "superposition lifetime and per-state decay rates");
    app.add_subcommand("fuzziness", "per-state energy shifts from swapped potentials");
    app.add_subcommand("action", "time-integrated competition actions");
    app.add_subcommand("bundles", "derive local bundles and their energies");
    app.add_subcommand("simulate", "run reduction cascades");
    app.add_subcommand("born-check", "simulate and test final-state statistics");
    app.add_subcommand("decohere", "off-diagonal density-matrix evolution");
    app.add_subcommand("sweep", "repeat a computation over a parameter grid");
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : DPC_ERR_CONFIG;
    }

    int exit_code = 0;
    try {
        std::string raw;
        json cfg = dpcli::load_config(config_path, raw);

        dpcli::FlagOverrides fl;
        if (seed_o->count()) fl.seed = seed_v;
        if (trials_o->count()) fl.trials = trials_v;
        if (xi_o->count()) {
            if (xi_v != 0.5 && xi_v != 1.0) bad_config("--xi must be 0.5 or 1");
            fl.xi = xi_v;
        }
        fl.allow_many_bundles = allow_v;
        if (out_o->count()) fl.out_dir = out_v;
        if (fmt_o->count()) {
            if (fmt_v != "csv" && fmt_v != "jsonl" && fmt_v != "bin")
                bad_config("--format must be csv, jsonl or bin");
            fl.format = fmt_v;
        }
        dpcli::apply_overrides(cfg, fl);

        const Scenario sc(cfg);
        if (threads_o->count()) {
            if (threads_v < 1) bad_config("--threads must be positive");
            dpc_set_max_threads(threads_v);
        }

        std::error_code ec;
        std::filesystem::create_directories(sc.out_dir, ec);
        if (ec) throw CliError{DPC_ERR_IO, "cannot create output directory " + sc.out_dir};

        Run run{sc, cfg, std::filesystem::path(sc.out_dir), {}};
        run.save_json("effective_config.json", cfg);

        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "potential")
            run_potential(run);
        else if (sub == "dp-energy")
            run_dp_energy(run);
        else if (sub == "lifetime")
            run_lifetime(run);
        else if (sub == "fuzziness")
            run_fuzziness(run);
        else if (sub == "action")
            run_action(run);
        else if (sub == "bundles")
            run_bundles(run);
        else if (sub == "simulate")
            run_simulate(run);
        else if (sub == "born-check")
            exit_code = run_born_check(run);
        else if (sub == "decohere")
            run_decohere(run);
        else
            run_sweep(run);

        json manifest;
        manifest["version"] = dpc_version();
        manifest["subcommand"] = sub;
        manifest["config_path"] = config_path;
        manifest["config_fnv1a64"] = hex64(fnv1a64(raw));
        manifest["master_seed"] = sc.sim.master_seed;
        manifest["trials"] = sc.sim.trials;
        manifest["threads"] = dpc_get_max_threads();
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        manifest["runtime_seconds"] = std::round(dt * 1000.0) / 1000.0;
        manifest["timestamp_utc"] = utc_timestamp();
        manifest["outputs"] = run.outputs;
        std::ofstream mout(run.dir / "manifest.json", std::ios::binary);
        mout << manifest.dump(2) << "\n";
        if (!mout) throw CliError{DPC_ERR_IO, "cannot write manifest.json"};
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return DPC_ERR_INTERNAL;
    }
    return exit_code;
}
