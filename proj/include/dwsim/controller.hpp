#pragma once

// DW-control system: pair selections chosen by a controller instead of at
// random. Provides the hub-consensus schedule, the constructive merge of two
// connected eps-clusters, and the lexicographic global merge scheduler.

#include <cstdint>
#include <vector>

#include "dwsim/core.hpp"
#include "dwsim/model.hpp"
#include "dwsim/topology.hpp"

namespace dw {

struct ControlSchedule {
    std::vector<UnorderedPair> steps;
    std::uint64_t origin_t = 0;

    std::size_t size() const { return steps.size(); }
};

/// Admissible eps for cluster merging:
///   min_i min{ (r_i/4)(1-mu_i)^(1 + ceil(log_{1-mu_i}(r_min/r_i))), mu_i r_i / 2 }.
double eps_upper_bound(const AgentParams& params);

/// Bookkeeping of a single merge.
///
/// Every agent k of the union is tracked as x_k(t) = o + lambda_k v + delta_k,
/// where o = x_hub(0) and v = x_partner(0) - x_hub(0). The coefficients follow
/// the same convex recurrences as the opinions, so the decomposition residual
/// stays at rounding level.
struct MergeTrace {
    ControlSchedule schedule;
    AgentIndex hub = 0;      ///< larger-bound endpoint of the bridging pair
    AgentIndex partner = 0;  ///< the other endpoint
    IndexSet members;        ///< union of both clusters, sorted
    double eps = 0.0;

    /// Coefficients at every phase boundary, indexed like `members`.
    std::vector<std::vector<double>> lambda;
    /// max_k ||delta_k|| at every phase boundary.
    std::vector<double> delta_norm_max;
    /// Delta_lambda = max lambda - min lambda at every phase boundary.
    std::vector<double> delta_lambda;
    /// Elapsed steps at t_1, t_1 + t_2, ..., T (= end of the lambda phase).
    std::vector<std::uint64_t> phase_times;
    /// Extremal agent chosen in each Steps 3-4 round.
    std::vector<AgentIndex> round_targets;
    /// Number of Steps 3-4 rounds (M - 1 in the proof's numbering).
    std::size_t rounds = 0;
    std::uint64_t t_lambda_end = 0;  ///< T
    std::uint64_t t_final = 0;       ///< t*
    /// Diameter of the union before each Step 6 forced pair and at the end.
    std::vector<double> step6_diameters;

    /// Precomputed upper bound on the schedule length.
    std::uint64_t length_bound = 0;
    /// Rounds bound and Step 6 bound used to build length_bound.
    std::uint64_t rounds_bound = 0;
    std::uint64_t step6_bound = 0;

    // Checks evaluated during the run.
    double max_decomposition_residual = 0.0;
    bool step1_landing_ok = true;    ///< hub reached the partner's bound before its last Step 1 move
    bool step4_reach_ok = true;      ///< after every round all members within r_hub of the hub
    bool round_contraction_ok = true;///< max_k |lambda_hub - lambda_k| <= (1 - 2 eps / r_hub) Delta_lambda
    bool delta_lambda_monotone = true;
    bool step6_contraction_ok = true;///< Step 6 pair/side distances respect their contraction factors
};

struct MergeResult {
    OpinionState state;
    MergeTrace trace;
};

/// Merges two disjoint eps-clusters that are joined by at least one edge into
/// one eps-cluster. Agents outside A u B are never selected. Throws
/// InvalidParameter on violated preconditions (the message names the eps
/// bound) and std::logic_error if contraction does not happen within ten
/// times the precomputed bound.
MergeResult merge_eps_clusters(const OpinionState& state, const AgentParams& params, const ClusterSet& a,
                               const ClusterSet& b, double eps);

/// `rounds` windows of length window_t; each window pairs the hub with every
/// other member (in subset order) and fills remaining slots with the first
/// pairing.
ControlSchedule hub_consensus_schedule(std::span<const AgentIndex> subset, AgentIndex hub, std::size_t window_t,
                                       std::size_t rounds);

struct GlobalMergeResult {
    OpinionState state;
    std::vector<MergeTrace> merges;
    /// Final eps-clusters, ordered by least member.
    std::vector<IndexSet> clusters;
};

/// Starts from singleton clusters and repeatedly merges the lexicographically
/// smallest pair of clusters joined by an edge. A merged cluster keeps the
/// smaller index.
GlobalMergeResult global_merge_schedule(const OpinionState& state, const AgentParams& params, double eps);

/// Applies each forced pair in order; same trace contract as run_simulation.
SimulationTrace apply_schedule(const OpinionState& state, const AgentParams& params, const ControlSchedule& schedule,
                               const TraceOptions& options = {});

}  // namespace dw
