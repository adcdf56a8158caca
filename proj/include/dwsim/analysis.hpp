#pragma once

// Convergence detection on finite traces, tau(eps), limit separation and
// batch summaries.
//
// tau convention: times start at 1. tau(eps) is the first t >= 1 from which
// every later state of the trace stays within eps of the limits, so a
// constant trajectory has tau = 1.

#include <cstdint>
#include <optional>
#include <vector>

#include "dwsim/core.hpp"
#include "dwsim/model.hpp"
#include "dwsim/topology.hpp"

namespace dw {

struct TauEntry {
    double eps = 0.0;
    /// Absent when the trace ends outside the eps band (censored).
    std::optional<std::uint64_t> tau;
};

struct SeparationCheck {
    bool ok = true;
    /// Cross-cluster pairs whose distance is within tol of max{r_p, r_q}.
    std::vector<UnorderedPair> boundary;
    std::vector<UnorderedPair> violations;
};

struct RunReport {
    bool converged = false;
    std::uint64_t steps = 0;
    /// Final opinions; components are collapsed to within diam_tol when converged.
    Matrix limits;
    std::vector<TauEntry> tau_table;
    TopologyStats xi;
    /// Mutual-edge components of the final state.
    std::vector<ClusterSet> final_partition;
    bool separation_ok = false;
    std::vector<UnorderedPair> boundary_pairs;
    std::vector<UnorderedPair> separation_violations;

    bool consensus() const { return converged && final_partition.size() == 1; }
};

/// Converged iff no edge event happened in the trailing freeze_window steps
/// (clipped to the trace) and every undirected edge component of the final
/// state has diameter <= diam_tol. The partition uses mutual-edge components. tau and the separation check are filled in for
/// converged traces; for the rest tau is censored and separation_ok false.
RunReport detect_convergence(const SimulationTrace& trace, const StopRule& rule,
                             const std::vector<double>& tau_eps = {}, double separation_tol = 1e-6);

/// tau for each eps from one replay of the trace.
std::vector<TauEntry> tau_table(const SimulationTrace& trace, const Matrix& limits, const std::vector<double>& eps);
std::optional<std::uint64_t> tau_epsilon(const SimulationTrace& trace, const Matrix& limits, double eps);

/// Same-cluster pairs must lie within tol; cross-cluster pairs must coincide
/// within tol or be at least max{r_p, r_q} - tol apart. Pairs within tol of
/// the bound are reported as boundary pairs, not violations.
SeparationCheck check_limit_separation(const Matrix& limits, const std::vector<ClusterSet>& partition,
                                       const AgentParams& params, double tol);

double median(std::vector<double> values);

struct TauSummary {
    double eps = 0.0;
    std::size_t defined = 0;
    std::size_t censored = 0;
    std::optional<double> mean;
    std::optional<double> median;
};

struct BatchSummary {
    std::size_t runs = 0;
    std::size_t converged = 0;
    std::size_t consensus = 0;
    double consensus_frequency = 0.0;
    std::vector<TauSummary> tau;
    double xi_mean = 0.0;
    double xi_median = 0.0;
    std::uint64_t xi_max = 0;
};

/// Aggregates reports in the given order (callers pass run-index order).
/// Throws InvalidParameter on empty input.
BatchSummary batch_stats(const std::vector<RunReport>& reports);

struct FreezeSummary {
    std::size_t runs = 0;
    /// (value, fraction of runs with xi <= value), one entry per distinct value.
    std::vector<std::pair<std::uint64_t, double>> xi_cdf;
    /// Same for last_change over runs that had one.
    std::vector<std::pair<std::uint64_t, double>> last_change_cdf;
    std::size_t runs_without_change = 0;
    /// Empirical fraction of runs with xi <= T.
    double fraction_xi_within = 0.0;
};

FreezeSummary estimate_topology_freeze(const std::vector<RunReport>& reports, std::uint64_t T);

}  // namespace dw
