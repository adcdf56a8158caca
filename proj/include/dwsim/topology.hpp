#pragma once

// Influence topology: the directed edge set E_X, complete subsets,
// epsilon-clusters, undirected components and edge-change counting.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dwsim/core.hpp"

namespace dw {

struct SimulationTrace;

/// Directed edge (from, to): agent `from` lies within agent `to`'s bound.
struct DirectedEdge {
    AgentIndex from;
    AgentIndex to;
    auto operator<=>(const DirectedEdge&) const = default;
};

/// Dense n x n boolean relation. (i,j) present iff ||x_i - x_j|| <= r_j.
class EdgeSet {
public:
    EdgeSet() = default;
    explicit EdgeSet(std::size_t n) : n_(n), bits_(n * n, 0) {}

    std::size_t n() const { return n_; }
    bool has(AgentIndex from, AgentIndex to) const { return bits_[from * n_ + to] != 0; }
    void set(AgentIndex from, AgentIndex to, bool on) { bits_[from * n_ + to] = on ? 1 : 0; }
    std::size_t size() const;
    std::vector<DirectedEdge> edges() const;

    bool operator==(const EdgeSet&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Edge count statistics over a window of a trace.
struct TopologyStats {
    std::uint64_t xi = 0;
    std::optional<std::uint64_t> last_change;
};

/// Set of agents whose opinion diameter was <= eps when constructed.
struct ClusterSet {
    IndexSet members;
    double eps = 0.0;

    /// Validates non-emptiness, index range and the diameter bound.
    static ClusterSet make(const OpinionState& state, std::span<const AgentIndex> members, double eps);
};

EdgeSet edge_set(const OpinionState& state, const AgentParams& params);

/// Recomputes only the rows and columns incident to `touched`, in place.
/// Returns the edges added and removed.
struct EdgeDelta {
    std::vector<DirectedEdge> added;
    std::vector<DirectedEdge> removed;
    bool empty() const { return added.empty() && removed.empty(); }
};
EdgeDelta update_edges(EdgeSet& es, const Matrix& x, const AgentParams& params,
                       std::span<const AgentIndex> touched);

bool is_complete_subset(const EdgeSet& es, std::span<const AgentIndex> subset);
bool no_edges_between(const EdgeSet& es, std::span<const AgentIndex> a, std::span<const AgentIndex> b);
bool is_epsilon_cluster(const OpinionState& state, std::span<const AgentIndex> subset, double eps);

/// Connected components of the symmetrized relation, each sorted, ordered by
/// least member.
std::vector<IndexSet> undirected_components(const EdgeSet& es);

/// Components using only mutual edges ((i,j) and (j,i) both present).
std::vector<IndexSet> mutual_components(const EdgeSet& es);

/// xi and last change over the steps s >= from_t recorded in the trace.
TopologyStats count_edge_changes(const SimulationTrace& trace, std::uint64_t from_t);

}  // namespace dw
