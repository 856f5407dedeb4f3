#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dpcli {

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) bad_config(where + " must be an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            bad_config("unknown key '" + item.key() + "' in " + where);
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) bad_config(where + " is missing '" + key + "'");
    const json& v = obj.at(key);
    if (!v.is_number()) bad_config(where + "." + key + " must be a number");
    return v.get<double>();
}

double get_number_or(const json& obj, const std::string& key, double fallback,
                     const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) bad_config(where + "." + key + " must be a number");
    return v.get<double>();
}

std::array<double, 3> get_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) bad_config(where + " must be an array of three numbers");
    std::array<double, 3> out{};
    for (int a = 0; a < 3; ++a) {
        if (!v[static_cast<std::size_t>(a)].is_number())
            bad_config(where + " must contain numbers only");
        out[static_cast<std::size_t>(a)] = v[static_cast<std::size_t>(a)].get<double>();
    }
    return out;
}

std::vector<double> get_number_array(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) bad_config(where + " must be a non-empty array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) bad_config(where + " must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

void check_distribution(const std::vector<double>& w, const std::string& where) {
    double sum = 0.0;
    for (double x : w) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0)
            bad_config(where + " entries must lie in [0, 1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) bad_config(where + " must be normalized (sum to 1)");
}

BodyDef parse_body(const json& def, const std::string& where) {
    if (!def.is_object() || !def.contains("type") || !def.at("type").is_string())
        bad_config(where + " must be an object with a 'type' string");
    const std::string type = def.at("type").get<std::string>();
    BodyDef body;
    if (type == "sphere" || type == "point") {
        check_keys(def,
                   type == "sphere"
                       ? std::set<std::string>{"type", "center", "radius", "mass"}
                       : std::set<std::string>{"type", "center", "smearing", "mass"},
                   where);
        const std::array<double, 3> c = get_vec3(def.contains("center") ? def.at("center") : json(),
                                                 where + ".center");
        body.smeared_points = (type == "point");
        body.centers.insert(body.centers.end(), c.begin(), c.end());
        body.radii.push_back(get_number(def, type == "point" ? "smearing" : "radius", where));
        body.masses.push_back(get_number(def, "mass", where));
    } else if (type == "sphere_set") {
        check_keys(def, {"type", "spheres"}, where);
        if (!def.contains("spheres") || !def.at("spheres").is_array() || def.at("spheres").empty())
            bad_config(where + ".spheres must be a non-empty array");
        std::size_t idx = 0;
        for (const json& s : def.at("spheres")) {
            const std::string sw = where + ".spheres[" + std::to_string(idx++) + "]";
            check_keys(s, {"center", "radius", "mass"}, sw);
            const std::array<double, 3> c =
                get_vec3(s.contains("center") ? s.at("center") : json(), sw + ".center");
            body.centers.insert(body.centers.end(), c.begin(), c.end());
            body.radii.push_back(get_number(s, "radius", sw));
            body.masses.push_back(get_number(s, "mass", sw));
        }
    } else {
        bad_config(where + ".type must be 'sphere', 'point' or 'sphere_set'");
    }
    return body;
}

std::vector<std::string> parse_name_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) bad_config(where + " must be a non-empty array of body names");
    std::vector<std::string> out;
    for (const json& e : v) {
        if (!e.is_string()) bad_config(where + " must contain body names");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::uint64_t get_u64(const json& obj, const std::string& key, std::uint64_t fallback,
                      const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        bad_config(where + "." + key + " must be a non-negative integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        bad_config(where + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

}  // namespace

bool Scenario::wants(const std::string& format) const {
    for (const std::string& f : formats)
        if (f == format) return true;
    return false;
}

const dpc_grid& Scenario::need_grid(const char* surface) const {
    if (!grid) bad_config(std::string(surface) + " requires a grid section");
    return *grid;
}

void Scenario::need_two_states(const char* surface) const {
    if (intensities.size() != 2)
        bad_config(std::string(surface) + " requires a superposition with exactly two states");
}

Scenario::Scenario(const json& cfg) {
    check_keys(cfg,
               {"units", "constants", "grid", "bodies", "superposition", "areas", "timeline",
                "simulation", "decohere", "sweep", "output"},
               "config");

    std::string units = "dimensionless";
    if (cfg.contains("units")) {
        if (!cfg.at("units").is_string()) bad_config("units must be a string");
        units = cfg.at("units").get<std::string>();
    }
    if (units == "si") {
        dpc_constants_si(&constants);
    } else if (units == "dimensionless") {
        dpc_constants_dimensionless(&constants);
    } else {
        bad_config("units must be 'si' or 'dimensionless'");
    }

    if (cfg.contains("constants")) {
        const json& c = cfg.at("constants");
        check_keys(c, {"G", "hbar", "c", "xi"}, "constants");
        constants.G = get_number_or(c, "G", constants.G, "constants");
        constants.hbar = get_number_or(c, "hbar", constants.hbar, "constants");
        constants.c = get_number_or(c, "c", constants.c, "constants");
        constants.xi = get_number_or(c, "xi", constants.xi, "constants");
    }

    if (cfg.contains("grid")) {
        const json& g = cfg.at("grid");
        check_keys(g, {"dims", "spacing", "origin"}, "grid");
        if (!g.contains("dims") || !g.at("dims").is_array() || g.at("dims").size() != 3)
            bad_config("grid.dims must be an array of three integers");
        dpc_grid spec{};
        for (int a = 0; a < 3; ++a) {
            const json& d = g.at("dims")[static_cast<std::size_t>(a)];
            if (!d.is_number_integer() && !d.is_number_unsigned())
                bad_config("grid.dims must contain integers");
            spec.dims[a] = d.get<std::int64_t>();
        }
        spec.spacing = get_number(g, "spacing", "grid");
        const std::array<double, 3> o =
            get_vec3(g.contains("origin") ? g.at("origin") : json(), "grid.origin");
        spec.origin[0] = o[0];
        spec.origin[1] = o[1];
        spec.origin[2] = o[2];
        grid = spec;
    }

    if (cfg.contains("bodies")) {
        if (!cfg.at("bodies").is_object()) bad_config("bodies must be an object");
        for (const auto& item : cfg.at("bodies").items())
            bodies[item.key()] = parse_body(item.value(), "bodies." + item.key());
    }

    if (cfg.contains("superposition")) {
        const json& sp = cfg.at("superposition");
        check_keys(sp, {"states"}, "superposition");
        if (!sp.contains("states") || !sp.at("states").is_array() || sp.at("states").empty())
            bad_config("superposition.states must be a non-empty array");
        std::size_t idx = 0;
        for (const json& st : sp.at("states")) {
            const std::string where = "superposition.states[" + std::to_string(idx++) + "]";
            check_keys(st, {"intensity", "bodies", "displacement", "rest_energy"}, where);
            intensities.push_back(get_number(st, "intensity", where));
            if (!st.contains("bodies")) bad_config(where + " is missing 'bodies'");
            state_bodies.push_back(parse_name_list(st.at("bodies"), where + ".bodies"));
            state_displacement.push_back(
                st.contains("displacement")
                    ? get_vec3(st.at("displacement"), where + ".displacement")
                    : std::array<double, 3>{0.0, 0.0, 0.0});
            rest_energy.push_back(st.contains("rest_energy")
                                      ? std::optional<double>(get_number(st, "rest_energy", where))
                                      : std::nullopt);
        }
        check_distribution(intensities, "superposition intensities");
        for (const std::vector<std::string>& names : state_bodies)
            for (const std::string& n : names)
                if (!bodies.count(n)) bad_config("superposition references unknown body '" + n + "'");
    }

    if (cfg.contains("areas")) {
        if (!cfg.at("areas").is_array() || cfg.at("areas").empty())
            bad_config("areas must be a non-empty array");
        std::size_t idx = 0;
        for (const json& a : cfg.at("areas")) {
            const std::string where = "areas[" + std::to_string(idx++) + "]";
            check_keys(a, {"id", "lo", "hi"}, where);
            if (!a.contains("id") || !a.at("id").is_string())
                bad_config(where + ".id must be a string");
            area_ids.push_back(a.at("id").get<std::string>());
            const std::array<double, 3> lo =
                get_vec3(a.contains("lo") ? a.at("lo") : json(), where + ".lo");
            const std::array<double, 3> hi =
                get_vec3(a.contains("hi") ? a.at("hi") : json(), where + ".hi");
            area_lo.insert(area_lo.end(), lo.begin(), lo.end());
            area_hi.insert(area_hi.end(), hi.begin(), hi.end());
        }
    }

    if (cfg.contains("timeline")) {
        const json& tl = cfg.at("timeline");
        check_keys(tl,
                   {"times", "snapshots1", "snapshots2", "displacements1", "displacements2",
                    "intensities"},
                   "timeline");
        if (!tl.contains("times")) bad_config("timeline is missing 'times'");
        tl_times = get_number_array(tl.at("times"), "timeline.times");
        if (tl_times.size() < 2) bad_config("timeline.times needs at least two samples");
        for (std::size_t q = 1; q < tl_times.size(); ++q)
            if (!(tl_times[q] > tl_times[q - 1]))
                bad_config("timeline.times must strictly increase");

        auto parse_snaps = [&](const char* key) {
            if (!tl.contains(key))
                bad_config(std::string("timeline is missing '") + key + "'");
            const json& v = tl.at(key);
            if (!v.is_array() || v.size() != tl_times.size())
                bad_config(std::string("timeline.") + key + " needs one entry per time");
            std::vector<std::vector<std::string>> out;
            std::size_t idx = 0;
            for (const json& e : v)
                out.push_back(parse_name_list(
                    e, std::string("timeline.") + key + "[" + std::to_string(idx++) + "]"));
            return out;
        };
        tl_snap1 = parse_snaps("snapshots1");
        tl_snap2 = parse_snaps("snapshots2");

        auto parse_disp = [&](const char* key) {
            std::vector<std::array<double, 3>> out(tl_times.size(), {0.0, 0.0, 0.0});
            if (!tl.contains(key)) return out;
            const json& v = tl.at(key);
            if (!v.is_array() || v.size() != tl_times.size())
                bad_config(std::string("timeline.") + key + " needs one entry per time");
            for (std::size_t q = 0; q < out.size(); ++q)
                out[q] = get_vec3(v[q], std::string("timeline.") + key + "[" + std::to_string(q) + "]");
            return out;
        };
        tl_disp1 = parse_disp("displacements1");
        tl_disp2 = parse_disp("displacements2");

        if (tl.contains("intensities")) {
            const std::vector<double> w = get_number_array(tl.at("intensities"), "timeline.intensities");
            if (w.size() != 2) bad_config("timeline.intensities must hold two values");
            check_distribution(w, "timeline intensities");
            tl_w1 = w[0];
            tl_w2 = w[1];
        }
        for (const auto& snaps : {tl_snap1, tl_snap2})
            for (const auto& names : snaps)
                for (const std::string& n : names)
                    if (!bodies.count(n)) bad_config("timeline references unknown body '" + n + "'");
    }

    if (cfg.contains("simulation")) {
        const json& s = cfg.at("simulation");
        check_keys(s,
                   {"trials", "master_seed", "max_events", "allow_many_bundles", "intensities",
                    "detector_energy"},
                   "simulation");
        sim.trials = get_u64(s, "trials", sim.trials, "simulation");
        if (sim.trials == 0) bad_config("simulation.trials must be positive");
        sim.master_seed = get_u64(s, "master_seed", sim.master_seed, "simulation");
        sim.max_events = static_cast<int>(get_u64(s, "max_events", 0, "simulation"));
        if (s.contains("allow_many_bundles")) {
            if (!s.at("allow_many_bundles").is_boolean())
                bad_config("simulation.allow_many_bundles must be a boolean");
            sim.allow_many_bundles = s.at("allow_many_bundles").get<bool>();
        }
        if (s.contains("intensities")) {
            sim.intensities = get_number_array(s.at("intensities"), "simulation.intensities");
            check_distribution(sim.intensities, "simulation intensities");
        }
        if (s.contains("detector_energy")) {
            const json& e = s.at("detector_energy");
            if (e.is_number()) {
                const std::size_t n =
                    !sim.intensities.empty() ? sim.intensities.size() : intensities.size();
                if (n < 2)
                    bad_config("scalar simulation.detector_energy needs intensities to set the count");
                sim.detector_energy.assign(n, e.get<double>());
            } else {
                sim.detector_energy = get_number_array(e, "simulation.detector_energy");
            }
        }
    }

    if (cfg.contains("decohere")) {
        const json& d = cfg.at("decohere");
        check_keys(d, {"e1", "e2", "e_g12", "rho12", "t_max", "samples", "times"}, "decohere");
        deco.e1 = get_number_or(d, "e1", 0.0, "decohere");
        deco.e2 = get_number_or(d, "e2", 0.0, "decohere");
        if (d.contains("e_g12")) deco.e_g12 = get_number(d, "e_g12", "decohere");
        if (d.contains("rho12")) {
            const json& r = d.at("rho12");
            if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
                bad_config("decohere.rho12 must be [re, im]");
            deco.rho_re = r[0].get<double>();
            deco.rho_im = r[1].get<double>();
        }
        if (d.contains("t_max")) deco.t_max = get_number(d, "t_max", "decohere");
        deco.samples = static_cast<std::int64_t>(get_u64(d, "samples", 201, "decohere"));
        if (deco.samples < 2) bad_config("decohere.samples must be at least 2");
        if (d.contains("times")) {
            deco.times = get_number_array(d.at("times"), "decohere.times");
            for (std::size_t q = 1; q < deco.times.size(); ++q)
                if (!(deco.times[q] > deco.times[q - 1]))
                    bad_config("decohere.times must strictly increase");
        }
    }

    if (cfg.contains("sweep")) {
        const json& sw = cfg.at("sweep");
        check_keys(sw, {"parameter", "values", "subcommand"}, "sweep");
        SweepParams sp;
        if (!sw.contains("parameter") || !sw.at("parameter").is_string())
            bad_config("sweep.parameter must be a JSON pointer string");
        sp.parameter = sw.at("parameter").get<std::string>();
        if (!sw.contains("values")) bad_config("sweep is missing 'values'");
        sp.values = get_number_array(sw.at("values"), "sweep.values");
        if (!sw.contains("subcommand") || !sw.at("subcommand").is_string())
            bad_config("sweep.subcommand must be a string");
        sp.subcommand = sw.at("subcommand").get<std::string>();
        const std::set<std::string> allowed{"dp-energy", "lifetime", "fuzziness", "action"};
        if (!allowed.count(sp.subcommand))
            bad_config("sweep.subcommand must be dp-energy, lifetime, fuzziness or action");
        sweep = std::move(sp);
    }

    if (cfg.contains("output")) {
        const json& o = cfg.at("output");
        check_keys(o, {"directory", "formats"}, "output");
        if (o.contains("directory")) {
            if (!o.at("directory").is_string()) bad_config("output.directory must be a string");
            out_dir = o.at("directory").get<std::string>();
        }
        if (o.contains("formats")) {
            if (!o.at("formats").is_array() || o.at("formats").empty())
                bad_config("output.formats must be a non-empty array");
            formats.clear();
            for (const json& f : o.at("formats")) {
                if (!f.is_string()) bad_config("output.formats must contain strings");
                const std::string name = f.get<std::string>();
                if (name != "csv" && name != "jsonl" && name != "bin")
                    bad_config("output.formats entries must be csv, jsonl or bin");
                formats.push_back(name);
            }
        }
    }
}

Dist Scenario::make_dist(const std::vector<std::string>& names,
                         const std::array<double, 3>& displacement) const {
    std::vector<double> centers, radii, masses;
    bool smeared = false, first = true;
    for (const std::string& name : names) {
        const auto it = bodies.find(name);
        if (it == bodies.end()) bad_config("unknown body '" + name + "'");
        const BodyDef& b = it->second;
        if (first) {
            smeared = b.smeared_points;
            first = false;
        } else if (b.smeared_points != smeared) {
            bad_config("bodies of one distribution must share a type (spheres or points)");
        }
        for (std::size_t i = 0; i < b.masses.size(); ++i) {
            centers.push_back(b.centers[3 * i] + displacement[0]);
            centers.push_back(b.centers[3 * i + 1] + displacement[1]);
            centers.push_back(b.centers[3 * i + 2] + displacement[2]);
            radii.push_back(b.radii[i]);
            masses.push_back(b.masses[i]);
        }
    }
    Dist out;
    const auto n = static_cast<int64_t>(masses.size());
    if (smeared)
        ck(dpc_dist_points(centers.data(), radii.data(), masses.data(), n, out.slot()));
    else
        ck(dpc_dist_spheres(centers.data(), radii.data(), masses.data(), n, out.slot()));
    return out;
}

Dist Scenario::make_state_dist(std::size_t state) const {
    if (state >= state_bodies.size()) bad_config("state index out of range");
    return make_dist(state_bodies[state], state_displacement[state]);
}

Spec Scenario::make_spec() const {
    if (!has_superposition()) bad_config("this computation requires a superposition section");
    Spec spec;
    ck(dpc_spec_new(&constants, spec.slot()));
    for (std::size_t i = 0; i < intensities.size(); ++i) {
        const Dist d = make_state_dist(i);
        ck(dpc_spec_add_state(spec.get(), intensities[i], d.get()));
        if (rest_energy[i])
            ck(dpc_spec_set_rest_energy(spec.get(), static_cast<int64_t>(i), *rest_energy[i]));
    }
    return spec;
}

Timeline Scenario::make_timeline() const {
    if (!has_timeline()) bad_config("this computation requires a timeline section");
    Timeline tl;
    ck(dpc_timeline_new(tl.slot()));
    for (std::size_t q = 0; q < tl_times.size(); ++q) {
        const Dist d1 = make_dist(tl_snap1[q], tl_disp1[q]);
        const Dist d2 = make_dist(tl_snap2[q], tl_disp2[q]);
        ck(dpc_timeline_add_snapshot(tl.get(), tl_times[q], d1.get(), d2.get()));
    }
    ck(dpc_timeline_set_intensities(tl.get(), tl_w1, tl_w2));
    if (grid) ck(dpc_timeline_set_grid(tl.get(), &*grid));
    return tl;
}

json load_config(const std::string& path, std::string& raw_bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{DPC_ERR_IO, "cannot read config file: " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    raw_bytes = buf.str();
    try {
        return json::parse(raw_bytes);
    } catch (const std::exception& e) {
        throw CliError{DPC_ERR_CONFIG, std::string("config parse error: ") + e.what()};
    }
}

void apply_overrides(json& cfg, const FlagOverrides& flags) {
    if (flags.seed) cfg["simulation"]["master_seed"] = *flags.seed;
    if (flags.trials) cfg["simulation"]["trials"] = *flags.trials;
    if (flags.xi) cfg["constants"]["xi"] = *flags.xi;
    if (flags.allow_many_bundles) cfg["simulation"]["allow_many_bundles"] = true;
    if (flags.out_dir) cfg["output"]["directory"] = *flags.out_dir;
    if (flags.format) cfg["output"]["formats"] = json::array({*flags.format});
}

}  // namespace dpcli
