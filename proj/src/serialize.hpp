#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "collapse.hpp"
#include "grid.hpp"

namespace dpc {

// shortest exact decimal form: %.17g round-trips every double
std::string format_g17(double v);

// FNV-1a 64-bit hash, used to fingerprint config files in run manifests
std::uint64_t fnv1a64(std::string_view bytes);

// Little-endian binary field: dims as 3 x int64, spacing, origin as
// 3 x double, then the node values row-major (z fastest).
void write_field_binary(const std::string& path, const ScalarField& field);
ScalarField read_field_binary(const std::string& path);

// x,y,z,value rows at full precision, one line per node, z fastest
void write_field_csv(const std::string& path, const ScalarField& field);

// generic numeric table, %.17g cells
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

// one JSON object per trace: index, seed, final_state, total_time, events
std::string trace_json_line(const CollapseTrace& trace);
void write_traces_jsonl(const std::string& path, const std::vector<CollapseTrace>& traces);

std::string born_report_json(const BornReport& report);

}  // namespace dpc
