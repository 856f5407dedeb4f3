#include "serialize.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "error.hpp"

namespace dpc {

namespace {

void put_u64_le(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64_le(std::string& out, double v) { put_u64_le(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return v;
}

double get_f64_le(const unsigned char* p) { return std::bit_cast<double>(get_u64_le(p)); }

void write_all(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail_io("write failed: " + path);
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_field_binary(const std::string& path, const ScalarField& field) {
    const GridSpec& g = field.grid;
    if (field.values.size() != static_cast<std::size_t>(g.n_nodes()))
        fail_internal("field binary write: value count does not match the grid");
    std::string bytes;
    bytes.reserve(64 + field.values.size() * 8);
    for (int a = 0; a < 3; ++a) put_u64_le(bytes, static_cast<std::uint64_t>(g.dims[a]));
    put_f64_le(bytes, g.spacing);
    put_f64_le(bytes, g.origin.x);
    put_f64_le(bytes, g.origin.y);
    put_f64_le(bytes, g.origin.z);
    for (double v : field.values) put_f64_le(bytes, v);
    write_all(path, bytes);
}

ScalarField read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 56) fail_io("field binary too short: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

    GridSpec g;
    for (int a = 0; a < 3; ++a) g.dims[a] = static_cast<std::int64_t>(get_u64_le(p + 8 * a));
    g.spacing = get_f64_le(p + 24);
    g.origin = {get_f64_le(p + 32), get_f64_le(p + 40), get_f64_le(p + 48)};
    g.validate();

    const std::size_t n = static_cast<std::size_t>(g.n_nodes());
    if (bytes.size() != 56 + n * 8) fail_io("field binary size mismatch: " + path);

    ScalarField f;
    f.grid = g;
    f.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.values[i] = get_f64_le(p + 56 + 8 * i);
    return f;
}

void write_field_csv(const std::string& path, const ScalarField& field) {
    const GridSpec& g = field.grid;
    std::string text = "x,y,z,value\n";
    std::size_t idx = 0;
    for (std::int64_t i = 0; i < g.dims[0]; ++i)
        for (std::int64_t j = 0; j < g.dims[1]; ++j)
            for (std::int64_t k = 0; k < g.dims[2]; ++k, ++idx) {
                const Vec3 p = g.pos(i, j, k);
                text += format_g17(p.x);
                text += ',';
                text += format_g17(p.y);
                text += ',';
                text += format_g17(p.z);
                text += ',';
                text += format_g17(field.values[idx]);
                text += '\n';
            }
    write_all(path, text);
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) text += ',';
        text += columns[c];
    }
    text += '\n';
    for (const std::vector<double>& row : rows) {
        if (row.size() != columns.size()) fail_internal("csv row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) text += ',';
            text += format_g17(row[c]);
        }
        text += '\n';
    }
    write_all(path, text);
}

std::string trace_json_line(const CollapseTrace& trace) {
    nlohmann::json j;
    j["index"] = trace.index;
    j["seed"] = trace.seed;
    j["final_state"] = trace.final_state;
    j["total_time"] = trace.total_time;
    nlohmann::json events = nlohmann::json::array();
    for (const CollapseEvent& e : trace.events) {
        nlohmann::json je;
        je["time"] = e.time;
        je["area"] = e.area_id;
        je["kappa"] = e.kappa;
        je["survivors"] = e.survivors;
        events.push_back(std::move(je));
    }
    j["events"] = std::move(events);
    return j.dump();
}

void write_traces_jsonl(const std::string& path, const std::vector<CollapseTrace>& traces) {
    std::string text;
    for (const CollapseTrace& t : traces) {
        text += trace_json_line(t);
        text += '\n';
    }
    write_all(path, text);
}

std::string born_report_json(const BornReport& report) {
    nlohmann::json j;
    j["n_traces"] = report.n_traces;
    j["chi_square"] = report.chi_square;
    j["dof"] = report.dof;
    j["p_value"] = report.p_value;
    j["z_limit"] = report.z_limit;
    j["p_limit"] = report.p_limit;
    j["pass"] = report.pass;
    nlohmann::json states = nlohmann::json::array();
    for (const BornStateReport& s : report.states) {
        nlohmann::json js;
        js["state"] = s.state;
        js["count"] = s.count;
        js["expected_probability"] = s.expected_probability;
        js["frequency"] = s.frequency;
        js["sigma"] = s.sigma;
        js["z"] = std::isfinite(s.z) ? nlohmann::json(s.z) : nlohmann::json();
        states.push_back(std::move(js));
    }
    j["states"] = std::move(states);
    return j.dump(2);
}

}  // namespace dpc
