#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lavlev/lav.hpp"
#include "lavlev/leverage.hpp"
#include "lavlev/power.hpp"
#include "lavlev/projection_stats.hpp"

// Text formats. Every parser throws Error(kParse) with "source:line:col"
// context for malformed JSON and a field path for schema violations.
// serialize(parse(serialize(x))) == serialize(x) for every type here.
// Non-finite numbers are written as the strings "inf", "-inf" and "nan".
namespace lavlev::io {

std::string read_text(const std::filesystem::path& path);

// Model: {"labels": [...], "state_labels": [...], "H": [[...], ...],
//         "z": [...], "true_states": [...]}
// H is required; labels default to m1..mM and z to zeros. Ragged H rows
// are rejected.
MeasurementModel parse_model(std::string_view text, std::string_view source = "<model>");
std::string serialize_model(const MeasurementModel& model);

// Network: {"name", "buses", "reference_bus", "lines": [{"from", "to", "x",
// "r"}], "measurements": [{"kind", "from", "to" | "bus", "label"}]}
NetworkModel parse_network(std::string_view text, std::string_view source = "<network>");
std::string serialize_network(const NetworkModel& net);

// {"partitions": [{"name", "measurements": [label | index, ...],
//                  "fixed_states": [state label | column, ...]}]}
std::vector<PartitionSpec> parse_partitions(std::string_view text,
                                            std::string_view source = "<partitions>");
std::string serialize_partitions(const std::vector<PartitionSpec>& specs);

LavSolution parse_lav_solution(std::string_view text, std::string_view source = "<solution>");
std::string serialize_lav_solution(const LavSolution& solution);

LeverageReport parse_leverage_report(std::string_view text, std::string_view source = "<report>");
std::string serialize_leverage_report(const LeverageReport& report);

PartitionedReport parse_partitioned_report(std::string_view text,
                                           std::string_view source = "<report>");
std::string serialize_partitioned_report(const PartitionedReport& report);

PsReport parse_ps_report(std::string_view text, std::string_view source = "<ps>");
std::string serialize_ps_report(const PsReport& report);

// Plain CSV matrix: one row per line, comma separated, no header. Blank
// lines are ignored.
Matrix read_csv_matrix(std::istream& in, std::string_view source = "<csv>");
void write_csv_matrix(std::ostream& out, const Eigen::Ref<const Matrix>& matrix);

}  // namespace lavlev::io
