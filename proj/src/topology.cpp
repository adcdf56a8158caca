#include "dwsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dwsim/model.hpp"

namespace dw {

namespace {

void check_subset(std::span<const AgentIndex> subset, std::size_t n, const char* what) {
    if (subset.empty()) throw InvalidParameter(std::string(what) + ": subset must be non-empty");
    for (AgentIndex k : subset)
        if (k >= n) throw InvalidParameter(std::string(what) + ": agent index " + std::to_string(k + 1) +
                                           " out of range");
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

std::vector<IndexSet> components(const EdgeSet& es, bool mutual_only) {
    const std::size_t n = es.n();
    DisjointSets sets(n);
    for (AgentIndex a = 0; a < n; ++a)
        for (AgentIndex b = a + 1; b < n; ++b) {
            const bool ab = es.has(a, b), ba = es.has(b, a);
            if (mutual_only ? (ab && ba) : (ab || ba)) sets.unite(a, b);
        }
    std::vector<IndexSet> out;
    std::vector<std::size_t> slot(n, SIZE_MAX);
    for (AgentIndex k = 0; k < n; ++k) {
        const std::size_t root = sets.find(k);
        if (slot[root] == SIZE_MAX) {
            slot[root] = out.size();
            out.emplace_back();
        }
        out[slot[root]].push_back(k);
    }
    return out;
}

}  // namespace

std::size_t EdgeSet::size() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<DirectedEdge> EdgeSet::edges() const {
    std::vector<DirectedEdge> out;
    for (AgentIndex a = 0; a < n_; ++a)
        for (AgentIndex b = 0; b < n_; ++b)
            if (has(a, b)) out.push_back({a, b});
    return out;
}

ClusterSet ClusterSet::make(const OpinionState& state, std::span<const AgentIndex> members, double eps) {
    if (!std::isfinite(eps) || eps < 0.0) throw InvalidParameter("cluster eps must be finite and >= 0");
    IndexSet sorted = normalized_subset(members, state.n());
    if (sorted.empty()) throw InvalidParameter("cluster must be non-empty");
    const double diam = diameter(state, sorted);
    if (diam > eps)
        throw InvalidParameter("subset is not an eps-cluster: diameter " + std::to_string(diam) + " > eps " +
                               std::to_string(eps));
    return {std::move(sorted), eps};
}

EdgeSet edge_set(const OpinionState& state, const AgentParams& params) {
    state.check_conforms(params);
    const std::size_t n = params.n();
    EdgeSet es(n);
    for (AgentIndex a = 0; a < n; ++a)
        for (AgentIndex b = a + 1; b < n; ++b) {
            const double dist = distance(state.x.row(a), state.x.row(b));
            es.set(a, b, dist <= params.r(b));
            es.set(b, a, dist <= params.r(a));
        }
    return es;
}

namespace {

// Same outcome as distance(a, b) <= r; the square root is taken only when the
// squared distance is close to r^2.
bool within_bound(double sq, double r) {
    const double r2 = r * r;
    if (sq < r2 * (1.0 - 1e-9)) return true;
    if (sq > r2 * (1.0 + 1e-9)) return false;
    return std::sqrt(sq) <= r;
}

}  // namespace

EdgeDelta update_edges(EdgeSet& es, const Matrix& x, const AgentParams& params,
                       std::span<const AgentIndex> touched) {
    EdgeDelta delta;
    const std::size_t n = es.n();
    const std::size_t d = x.cols();
    auto refresh = [&](AgentIndex from, AgentIndex to, bool now) {
        if (now == es.has(from, to)) return;
        es.set(from, to, now);
        (now ? delta.added : delta.removed).push_back({from, to});
    };
    for (std::size_t pos = 0; pos < touched.size(); ++pos) {
        const AgentIndex a = touched[pos];
        const auto xa = x.row(a);
        for (AgentIndex b = 0; b < n; ++b) {
            if (b == a) continue;
            // pairs among touched agents are visited once
            bool seen = false;
            for (std::size_t q = 0; q < pos; ++q) seen = seen || touched[q] == b;
            if (seen) continue;
            const auto xb = x.row(b);
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double g = xb[c] - xa[c];
                sq += g * g;
            }
            refresh(a, b, within_bound(sq, params.r(b)));
            refresh(b, a, within_bound(sq, params.r(a)));
        }
    }
    std::sort(delta.added.begin(), delta.added.end());
    std::sort(delta.removed.begin(), delta.removed.end());
    return delta;
}

bool is_complete_subset(const EdgeSet& es, std::span<const AgentIndex> subset) {
    check_subset(subset, es.n(), "is_complete_subset");
    for (AgentIndex a : subset)
        for (AgentIndex b : subset)
            if (a != b && !es.has(a, b)) return false;
    return true;
}

bool no_edges_between(const EdgeSet& es, std::span<const AgentIndex> a, std::span<const AgentIndex> b) {
    check_subset(a, es.n(), "no_edges_between");
    check_subset(b, es.n(), "no_edges_between");
    for (AgentIndex p : a)
        for (AgentIndex q : b)
            if (p == q) throw InvalidParameter("no_edges_between: subsets overlap at agent " + std::to_string(p + 1));
    for (AgentIndex p : a)
        for (AgentIndex q : b)
            if (es.has(p, q) || es.has(q, p)) return false;
    return true;
}

bool is_epsilon_cluster(const OpinionState& state, std::span<const AgentIndex> subset, double eps) {
    if (!std::isfinite(eps)) throw InvalidParameter("is_epsilon_cluster: eps must be finite");
    return diameter(state, subset) <= eps;
}

std::vector<IndexSet> undirected_components(const EdgeSet& es) { return components(es, false); }

std::vector<IndexSet> mutual_components(const EdgeSet& es) { return components(es, true); }

TopologyStats count_edge_changes(const SimulationTrace& trace, std::uint64_t from_t) {
    const std::uint64_t end_t = trace.final_state().t;
    if (from_t > end_t)
        throw InvalidParameter("count_edge_changes: from_t " + std::to_string(from_t) + " beyond trace end " +
                               std::to_string(end_t));
    TopologyStats stats;
    for (const EdgeEvent& ev : trace.edge_events) {
        if (ev.t < from_t) continue;
        ++stats.xi;
        stats.last_change = ev.t;
    }
    return stats;
}

}  // namespace dw
