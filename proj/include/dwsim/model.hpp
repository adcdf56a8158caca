#pragma once

// The DW update rule, uniform pair selection and the simulation loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dwsim/core.hpp"
#include "dwsim/random_stream.hpp"
#include "dwsim/topology.hpp"

namespace dw {

/// Number of unordered pairs n(n-1)/2.
constexpr std::uint64_t pair_count(std::size_t n) { return static_cast<std::uint64_t>(n) * (n - 1) / 2; }

/// Lexicographic enumeration of pairs (i<j): index 0 -> (0,1), 1 -> (0,2), ...
UnorderedPair pair_from_index(std::uint64_t index, std::size_t n);

/// One uniform draw mapped through pair_from_index. Throws for n < 2.
UnorderedPair sample_pair(RandomStream& stream, std::size_t n);

/// Which members of the pair moved in a step.
struct Interaction {
    bool moved_i = false;
    bool moved_j = false;
    bool any() const { return moved_i || moved_j; }
};

/// Applies the DW rule to rows pair.i / pair.j of x in place. The bound test
/// ||x_j - x_i|| <= r is exact.
Interaction apply_pair(Matrix& x, const AgentParams& params, UnorderedPair pair);

struct StepResult {
    OpinionState state;
    Interaction interaction;
};

/// Pure form of apply_pair: returns X(t+1) and the two interaction flags.
StepResult dw_step(const OpinionState& state, const AgentParams& params, UnorderedPair pair);

/// Finite-run convergence criterion: the edge set has not changed during the
/// trailing freeze_window steps (clipped to the run length) and every
/// undirected edge component has diameter <= diam_tol.
struct StopRule {
    std::uint64_t freeze_window = 1;
    double diam_tol = 1e-9;
    std::uint64_t horizon_cap = 10'000'000;
    /// The rule cannot fire before this many steps, even on an event-free run.
    std::uint64_t min_steps = 0;

    /// W = 10 n^2, tol = 1e-9, cap = 1e7.
    static StopRule defaults(std::size_t n);
    void validate() const;
};

struct TraceOptions {
    bool record_pairs = true;
    /// 0 selects n(n-1)/2.
    std::uint64_t snapshot_stride = 0;
};

struct PairRecord {
    std::uint64_t t;
    UnorderedPair pair;
    Interaction interaction;
};

/// Step s changed the edge set: E_X(s+1) != E_X(s).
struct EdgeEvent {
    std::uint64_t t;
    std::vector<DirectedEdge> added;
    std::vector<DirectedEdge> removed;
};

struct SimulationTrace {
    OpinionState initial;
    AgentParams params;
    /// Stream position at t = 0; absent for forced schedules.
    std::optional<RandomStream> stream_start;
    bool pairs_recorded = true;
    std::vector<PairRecord> pairs;
    std::uint64_t snapshot_stride = 1;
    /// Snapshots at multiples of the stride, plus the final state.
    std::vector<OpinionState> snapshots;
    std::vector<EdgeEvent> edge_events;
    bool stopped_by_rule = false;

    const OpinionState& final_state() const { return snapshots.back(); }
    std::uint64_t steps() const { return final_state().t - initial.t; }
};

/// Samples and applies pairs until `horizon` steps (capped by the rule's
/// horizon_cap) or until the stop rule fires. The rule is evaluated on every
/// state, including the initial one.
SimulationTrace run_simulation(const OpinionState& initial, const AgentParams& params, RandomStream stream,
                               std::uint64_t horizon, const std::optional<StopRule>& stop = std::nullopt,
                               const TraceOptions& options = {});

/// Visits every state X(t0), X(t0+1), ..., X(T) of the trace in order, with
/// the pair applied to reach it (absent for the first). Pairs come from the
/// record when present, otherwise they are regenerated from stream_start.
using StateVisitor = std::function<void(const OpinionState&, const std::optional<PairRecord>&)>;
void replay(const SimulationTrace& trace, const StateVisitor& visit);

/// Engine shared by random and forced runs: applies pairs, maintains the edge
/// set incrementally and records the trace.
class TraceRecorder {
public:
    TraceRecorder(const OpinionState& initial, const AgentParams& params, std::optional<RandomStream> stream_start,
                  const TraceOptions& options);

    Interaction step(UnorderedPair pair);
    const OpinionState& current() const { return state_; }
    const EdgeSet& edges() const { return edges_; }
    /// Last step index that changed the edge set.
    std::optional<std::uint64_t> last_event() const {
        if (trace_.edge_events.empty()) return std::nullopt;
        return trace_.edge_events.back().t;
    }
    /// Agents moved by the most recent step.
    const std::vector<AgentIndex>& last_moved() const { return moved_; }
    bool last_step_changed_edges() const { return last_changed_; }

    SimulationTrace finish(bool stopped_by_rule);

private:
    OpinionState state_;
    EdgeSet edges_;
    SimulationTrace trace_;
    std::vector<AgentIndex> moved_;
    bool last_changed_ = false;
};

}  // namespace dw
