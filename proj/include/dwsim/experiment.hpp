#pragma once

// Experiment configuration, per-run setup, batch execution and the figure
// presets (n = 20 agents in the unit square with scaled-uniform bounds and
// weighting factors).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dwsim/analysis.hpp"
#include "dwsim/model.hpp"

namespace dw {

/// Malformed or invalid configuration (exit code 2). The message names the
/// offending field, and the line/column for JSON syntax errors.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// value_i = scale * u_i with u_i uniform on (0,1).
struct ScaledUniform {
    double scale;
};
struct Homogeneous {
    double value;
};
using VectorSpec = std::variant<std::vector<double>, ScaledUniform, Homogeneous>;

struct UniformBox {
    double low;
    double high;
};
using InitSpec = std::variant<Matrix, UniformBox>;

struct ExperimentConfig {
    std::size_t n = 0;
    std::size_t d = 0;
    VectorSpec r;
    VectorSpec mu;
    InitSpec init;
    std::uint64_t horizon = 10'000'000;
    StopRule stop;
    std::vector<double> tau_eps;
    std::uint64_t master_seed = 0;
    std::size_t run_count = 1;
    /// Snapshot stride; 0 selects n(n-1)/2.
    std::uint64_t record_stride = 0;
};

/// Parses and validates a JSON document. Throws ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
/// Throws ConfigError, or IoError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything a run needs. Run `k` uses stream = master.substream(k) for the
/// dynamics; random bounds, factors and initial opinions come from its
/// substreams 0, 1 and 2 so that cells sharing a seed share their draws.
struct RunSetup {
    AgentParams params;
    OpinionState initial;
    RandomStream dynamics;
};
RunSetup setup_run(const ExperimentConfig& cfg, std::size_t run_index);

struct RunResult {
    RunReport report;
    AgentParams params;
    /// Kept only when requested.
    std::optional<SimulationTrace> trace;
};

RunResult execute_run(const ExperimentConfig& cfg, std::size_t run_index, bool keep_trace);

/// Runs every seed of the config on `threads` workers (0 = hardware
/// concurrency). Results are stored by run index. When out_dir is set, runs
/// whose index is below `trace_runs` write run_XXXX/{trace.csv, events.csv},
/// and every run writes run_XXXX/report.json.
std::vector<RunResult> run_batch(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                                 std::size_t trace_runs, unsigned threads = 0);

struct PresetCell {
    std::string name;
    double m_bar_r = 0.0;
    std::optional<double> m_bar_u;
    std::optional<double> mu_star;
    ExperimentConfig config;
};

/// "fig1": m_bar_r in {0.5, 1} x m_bar_u in {0.25, 0.5, 0.75, 1}.
/// "fig2": m_bar_r in {0.5, 1} x homogeneous mu* in {0.125, 0.25, 0.375, 0.5},
/// so that each mu* equals m_bar_u / 2 of the matching fig1 column.
std::vector<PresetCell> figure_preset(std::string_view figure, std::size_t seeds, std::uint64_t master_seed = 2024);

struct CellResult {
    PresetCell cell;
    std::vector<RunResult> runs;
    BatchSummary summary;
};

/// Runs every cell of a preset. With out_dir set, writes <cell>/run_0000
/// trajectories, per-run reports, <cell>/summary.json and summary.csv.
std::vector<CellResult> run_figure(std::string_view figure, std::size_t seeds,
                                   const std::optional<std::filesystem::path>& out_dir,
                                   std::uint64_t master_seed = 2024, unsigned threads = 0);

/// One row per cell: name, m_bar_r, m_bar_u, mu_star, counts and tau(eps_0) statistics.
std::string figure_summary_csv(const std::vector<CellResult>& cells);

}  // namespace dw
