#pragma once

// Interchange formats. Agent indices are 1-based in every file; doubles use
// the shortest decimal form that round-trips.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dwsim/adversarial.hpp"
#include "dwsim/analysis.hpp"
#include "dwsim/controller.hpp"
#include "dwsim/model.hpp"

namespace dw {

/// Output could not be written (exit code 3).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSchemaVersion = "1.0";
inline constexpr int kSchemaMajor = 1;

std::string format_double(double v);

/// t,agent,x1..xd; one row per (snapshot, agent).
std::string trace_csv(const SimulationTrace& trace);
/// t,edges_added,edges_removed; tokens "i>j" joined by ';'.
std::string events_csv(const SimulationTrace& trace);

std::string run_report_json(const RunReport& report, const AgentParams& params, std::uint64_t master_seed,
                            std::uint64_t run_index);
std::string batch_summary_json(const BatchSummary& summary);
std::string merge_trace_json(const MergeTrace& trace, const OpinionState& final_state);
std::string slow_report_json(const SlowInstance& inst, const SlowVerification& v);

/// Reads the schema_version of a report document; throws InvalidParameter
/// for malformed documents and unknown major versions.
int check_report_schema(std::string_view json_text);

void write_text(const std::filesystem::path& path, std::string_view content);
void ensure_directory(const std::filesystem::path& dir);

}  // namespace dw
