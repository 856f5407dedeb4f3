#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpcollapse.h"

namespace dpcli {

using nlohmann::json;

// carries the exit code; message goes to stderr
struct CliError {
    int code;
    std::string message;
};

[[noreturn]] inline void bad_config(const std::string& msg) {
    throw CliError{DPC_ERR_CONFIG, msg};
}

// raises the library's last error with its category as the exit code
inline void ck(int status) {
    if (status != DPC_OK) throw CliError{status, dpc_last_error()};
}

template <typename T, void (*Free)(T*)>
class Handle {
public:
    Handle() = default;
    explicit Handle(T* p) : p_(p) {}
    ~Handle() { reset(); }
    Handle(Handle&& o) noexcept : p_(o.p_) { o.p_ = nullptr; }
    Handle& operator=(Handle&& o) noexcept {
        if (this != &o) {
            reset();
            p_ = o.p_;
            o.p_ = nullptr;
        }
        return *this;
    }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;

    T* get() const { return p_; }
    T** slot() {
        reset();
        return &p_;
    }
    explicit operator bool() const { return p_ != nullptr; }

private:
    void reset() {
        if (p_) Free(p_);
        p_ = nullptr;
    }
    T* p_ = nullptr;
};

using Dist = Handle<dpc_dist, dpc_dist_free>;
using Field = Handle<dpc_field, dpc_field_free>;
using Spec = Handle<dpc_spec, dpc_spec_free>;
using Timeline = Handle<dpc_timeline, dpc_timeline_free>;
using Bundles = Handle<dpc_bundles, dpc_bundles_free>;
using Cascade = Handle<dpc_cascade, dpc_cascade_free>;
using Traces = Handle<dpc_traces, dpc_traces_free>;

// one named body flattened to homogeneous balls
struct BodyDef {
    bool smeared_points = false;
    std::vector<double> centers;  // 3 per ball
    std::vector<double> radii;
    std::vector<double> masses;
};

struct SimulationParams {
    std::uint64_t trials = 1000;
    std::uint64_t master_seed = 1;
    int max_events = 0;
    bool allow_many_bundles = false;
    std::vector<double> intensities;      // empty: take the superposition's
    std::vector<double> detector_energy;  // empty: derive the cascade from bundles
};

struct DecohereParams {
    double e1 = 0.0, e2 = 0.0;
    std::optional<double> e_g12;     // absent: derive from the superposition
    std::optional<double> rho_re, rho_im;
    std::optional<double> t_max;     // absent: five decay times
    std::int64_t samples = 201;
    std::vector<double> times;       // explicit grid wins over t_max/samples
};

struct SweepParams {
    std::string parameter;  // JSON pointer into the config
    std::vector<double> values;
    std::string subcommand;
};

// Parsed and validated configuration. Handle builders compose bodies into
// library objects on demand.
class Scenario {
public:
    explicit Scenario(const json& cfg);

    dpc_constants constants{};
    std::optional<dpc_grid> grid;
    std::map<std::string, BodyDef> bodies;

    std::vector<double> intensities;
    std::vector<std::vector<std::string>> state_bodies;
    std::vector<std::array<double, 3>> state_displacement;
    std::vector<std::optional<double>> rest_energy;

    std::vector<std::string> area_ids;
    std::vector<double> area_lo, area_hi;  // 3 per area

    std::vector<double> tl_times;
    std::vector<std::vector<std::string>> tl_snap1, tl_snap2;
    std::vector<std::array<double, 3>> tl_disp1, tl_disp2;
    double tl_w1 = 0.5, tl_w2 = 0.5;

    SimulationParams sim;
    DecohereParams deco;
    std::optional<SweepParams> sweep;

    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "jsonl"};

    bool has_superposition() const { return !intensities.empty(); }
    bool has_grid() const { return grid.has_value(); }
    bool has_areas() const { return !area_ids.empty(); }
    bool has_timeline() const { return !tl_times.empty(); }
    bool wants(const std::string& format) const;

    const dpc_grid& need_grid(const char* surface) const;
    void need_two_states(const char* surface) const;

    Dist make_dist(const std::vector<std::string>& names,
                   const std::array<double, 3>& displacement) const;
    Dist make_state_dist(std::size_t state) const;
    Spec make_spec() const;
    Timeline make_timeline() const;
};

// file bytes + parsed json; throws CliError on IO or parse failure
json load_config(const std::string& path, std::string& raw_bytes);

// flag overrides folded into the config before Scenario parses it
struct FlagOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<double> xi;
    bool allow_many_bundles = false;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};
void apply_overrides(json& cfg, const FlagOverrides& flags);

}  // namespace dpcli
