#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <bit>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <string>

#include "checks.hpp"
#include "doctest.h"
#include "serialize.hpp"

namespace fs = std::filesystem;
using dpc::ScalarField;

namespace {

fs::path tmp_path(const std::string& name) {
    return fs::temp_directory_path() / ("dpc_test_" + name);
}

struct FileGuard {
    fs::path p;
    ~FileGuard() { std::error_code ec; fs::remove(p, ec); }
};

}  // namespace

TEST_CASE("format_g17 round-trips doubles exactly") {
    const double cases[] = {0.0,       -0.0,   0.1,    1.0 / 3.0, 6.67430e-11, 1e308,
                            5e-324,    -2.5,   1e-300, 3.141592653589793,
                            0.30000000000000004};
    for (double v : cases) {
        const std::string s = dpc::format_g17(v);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
    }
}

TEST_CASE("fnv1a64 matches the reference vectors") {
    CHECK(dpc::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(dpc::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(dpc::fnv1a64("foobar") == 0x85944171f73967e8ULL);
    // embedded NUL bytes hash too
    CHECK(dpc::fnv1a64(std::string_view("\0", 1)) != dpc::fnv1a64(""));
}

TEST_CASE("binary field files round-trip bitwise") {
    dpc::GridSpec g;
    g.dims = {5, 4, 3};
    g.spacing = 0.375;
    g.origin = {-1.0, 0.25, 2.5};

    ScalarField f(g);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (double& v : f.values) v = u(rng);
    f.values[0] = -0.0;
    f.values[1] = 5e-324;
    f.values[2] = 1e308;

    const fs::path p = tmp_path("roundtrip.bin");
    FileGuard guard{p};
    dpc::write_field_binary(p.string(), f);
    CHECK(fs::file_size(p) == 56 + 60 * 8);

    const ScalarField back = dpc::read_field_binary(p.string());
    CHECK(back.grid == g);
    REQUIRE(back.values.size() == f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(back.values[i]) ==
              std::bit_cast<std::uint64_t>(f.values[i]));
}

TEST_CASE("binary field reader rejects damaged files") {
    expect_error([&] { dpc::read_field_binary(tmp_path("missing.bin").string()); },
                 dpc::ErrorCategory::io, "cannot open for reading");

    const fs::path short_p = tmp_path("short.bin");
    FileGuard g1{short_p};
    std::ofstream(short_p, std::ios::binary) << "not a field";
    expect_error([&] { dpc::read_field_binary(short_p.string()); }, dpc::ErrorCategory::io,
                 "too short");

    // valid header for 2x2x2 but a truncated payload
    dpc::GridSpec g;
    g.dims = {2, 2, 2};
    g.spacing = 1.0;
    ScalarField f(g);
    const fs::path trunc_p = tmp_path("trunc.bin");
    FileGuard g2{trunc_p};
    dpc::write_field_binary(trunc_p.string(), f);
    fs::resize_file(trunc_p, 56 + 7 * 8);
    expect_error([&] { dpc::read_field_binary(trunc_p.string()); }, dpc::ErrorCategory::io,
                 "size mismatch");
}

TEST_CASE("field csv lists nodes z fastest at full precision") {
    dpc::GridSpec g;
    g.dims = {2, 1, 2};
    g.spacing = 0.5;
    g.origin = {0.1, 0.2, 0.3};
    ScalarField f(g);
    f.values = {1.5, 0.1, -2.0, 4.0};

    const fs::path p = tmp_path("field.csv");
    FileGuard guard{p};
    dpc::write_field_csv(p.string(), f);

    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y,z,value");
    std::getline(in, line);
    CHECK(line == dpc::format_g17(0.1) + "," + dpc::format_g17(0.2) + "," +
                      dpc::format_g17(0.3) + "," + dpc::format_g17(1.5));
    std::getline(in, line);  // z advances first
    CHECK(line == dpc::format_g17(0.1) + "," + dpc::format_g17(0.2) + "," +
                      dpc::format_g17(0.8) + "," + dpc::format_g17(0.1));
    int rows = 2;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("generic csv writer enforces the row width") {
    const fs::path p = tmp_path("table.csv");
    FileGuard guard{p};
    dpc::write_csv(p.string(), {"t", "value"}, {{0.0, 1.0}, {0.5, 0.25}});

    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,value");
    std::getline(in, line);
    CHECK(line == "0,1");
    std::getline(in, line);
    CHECK(line == "0.5,0.25");

    expect_error([&] { dpc::write_csv(p.string(), {"a", "b"}, {{1.0}}); },
                 dpc::ErrorCategory::internal, "row width");
}

TEST_CASE("trace json line is stable") {
    dpc::CollapseTrace t;
    t.seed = 7;
    t.index = 3;
    t.final_state = 1;
    t.total_time = 2.5;
    dpc::CollapseEvent e;
    e.time = 1.25;
    e.area_id = "D1";
    e.kappa = 0;
    e.survivors = {1, 2};
    t.events.push_back(e);

    CHECK(dpc::trace_json_line(t) ==
          R"({"events":[{"area":"D1","kappa":0,"survivors":[1,2],"time":1.25}],)"
          R"("final_state":1,"index":3,"seed":7,"total_time":2.5})");

    const fs::path p = tmp_path("traces.jsonl");
    FileGuard guard{p};
    dpc::write_traces_jsonl(p.string(), {t, t});
    std::ifstream in(p);
    std::string l1, l2, rest;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1 == dpc::trace_json_line(t));
    CHECK(l2 == l1);
    CHECK(!std::getline(in, rest));
}

TEST_CASE("born report json survives a parse and encodes infinite z as null") {
    dpc::BornReport r;
    r.n_traces = 1000;
    r.chi_square = 1.5;
    r.dof = 1;
    r.p_value = 0.22;
    r.pass = true;
    dpc::BornStateReport s0;
    s0.state = 0;
    s0.count = 740;
    s0.expected_probability = 0.75;
    s0.frequency = 0.74;
    s0.sigma = 0.0137;
    s0.z = -0.73;
    dpc::BornStateReport s1 = s0;
    s1.state = 1;
    s1.count = 260;
    s1.expected_probability = 0.0;
    s1.frequency = 0.26;
    s1.sigma = 0.0;
    s1.z = std::numeric_limits<double>::infinity();
    r.states = {s0, s1};

    const std::string text = dpc::born_report_json(r);
    const nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j["n_traces"] == 1000);
    CHECK(j["pass"] == true);
    CHECK(j["dof"] == 1);
    CHECK(j["states"].size() == 2);
    CHECK(j["states"][0]["z"].get<double>() == doctest::Approx(-0.73));
    CHECK(j["states"][1]["z"].is_null());
    CHECK(j["states"][1]["count"] == 260);
    CHECK(text.substr(0, 2) == "{\n");  // pretty-printed
}
