#include "dwsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dw {

UnorderedPair pair_from_index(std::uint64_t index, std::size_t n) {
    if (n < 2) throw InvalidParameter("pair selection needs n >= 2, got " + std::to_string(n));
    if (index >= pair_count(n)) throw InvalidParameter("pair index out of range");
    AgentIndex i = 0;
    std::uint64_t row = n - 1;  // pairs starting at agent i
    while (index >= row) {
        index -= row;
        ++i;
        --row;
    }
    UnorderedPair p;
    p.i = i;
    p.j = i + 1 + static_cast<AgentIndex>(index);
    return p;
}

UnorderedPair sample_pair(RandomStream& stream, std::size_t n) {
    if (n < 2) throw InvalidParameter("pair selection needs n >= 2, got " + std::to_string(n));
    return pair_from_index(stream.uniform_index(pair_count(n)), n);
}

Interaction apply_pair(Matrix& x, const AgentParams& params, UnorderedPair pair) {
    if (x.rows() != params.n() || x.cols() != params.d())
        throw InvalidParameter("dw_step: state shape does not match params");
    if (!pair.valid_for(params.n())) throw InvalidParameter("dw_step: pair out of range");
    auto xi = x.row(pair.i);
    auto xj = x.row(pair.j);
    const double dist = distance(xi, xj);
    Interaction out{dist <= params.r(pair.i), dist <= params.r(pair.j)};
    if (!out.any()) return out;
    const double mi = out.moved_i ? params.mu(pair.i) : 0.0;
    const double mj = out.moved_j ? params.mu(pair.j) : 0.0;
    for (std::size_t c = 0; c < xi.size(); ++c) {
        const double g = xj[c] - xi[c];
        if (out.moved_i) xi[c] = xi[c] + mi * g;
        if (out.moved_j) xj[c] = xj[c] - mj * g;
    }
    return out;
}

StepResult dw_step(const OpinionState& state, const AgentParams& params, UnorderedPair pair) {
    state.check_conforms(params);
    StepResult out{state, {}};
    out.interaction = apply_pair(out.state.x, params, pair);
    ++out.state.t;
    return out;
}

StopRule StopRule::defaults(std::size_t n) {
    StopRule rule;
    rule.freeze_window = 10 * static_cast<std::uint64_t>(n) * n;
    rule.diam_tol = 1e-9;
    rule.horizon_cap = 10'000'000;
    return rule;
}

void StopRule::validate() const {
    if (freeze_window < 1) throw InvalidParameter("stop rule: freeze_window must be >= 1");
    if (!(diam_tol > 0.0) || !std::isfinite(diam_tol)) throw InvalidParameter("stop rule: diam_tol must be > 0");
}

TraceRecorder::TraceRecorder(const OpinionState& initial, const AgentParams& params,
                             std::optional<RandomStream> stream_start, const TraceOptions& options)
    : state_(initial),
      edges_(edge_set(initial, params)),
      trace_{initial, params, stream_start, options.record_pairs, {}, 1, {}, {}, false} {
    trace_.snapshot_stride =
        options.snapshot_stride != 0 ? options.snapshot_stride : std::max<std::uint64_t>(1, pair_count(params.n()));
    trace_.snapshots.push_back(state_);
}

Interaction TraceRecorder::step(UnorderedPair pair) {
    const std::uint64_t t = state_.t;
    const Interaction hit = apply_pair(state_.x, trace_.params, pair);
    ++state_.t;
    moved_.clear();
    if (hit.moved_i) moved_.push_back(pair.i);
    if (hit.moved_j) moved_.push_back(pair.j);
    last_changed_ = false;
    if (!moved_.empty()) {
        EdgeDelta delta = update_edges(edges_, state_.x, trace_.params, moved_);
        if (!delta.empty()) {
            last_changed_ = true;
            trace_.edge_events.push_back({t, std::move(delta.added), std::move(delta.removed)});
        }
    }
    if (trace_.pairs_recorded) trace_.pairs.push_back({t, pair, hit});
    if ((state_.t - trace_.initial.t) % trace_.snapshot_stride == 0) trace_.snapshots.push_back(state_);
    return hit;
}

SimulationTrace TraceRecorder::finish(bool stopped_by_rule) {
    if (trace_.snapshots.back().t != state_.t) trace_.snapshots.push_back(state_);
    trace_.stopped_by_rule = stopped_by_rule;
    return std::move(trace_);
}

namespace {

// Tracks whether every undirected edge component has collapsed below the
// tolerance. Components are rebuilt lazily after edge events; diameters are
// recomputed only for components whose members moved.
class CollapseMonitor {
public:
    CollapseMonitor(double tol, std::size_t n) : tol_(tol), comp_of_(n) {}

    void edges_changed() { stale_ = true; }

    void touched(const std::vector<AgentIndex>& moved) {
        if (stale_) return;
        for (AgentIndex k : moved) dirty_[comp_of_[k]] = true;
    }

    bool collapsed(const EdgeSet& es, const Matrix& x) {
        if (stale_) rebuild(es);
        for (std::size_t c = 0; c < comps_.size(); ++c) {
            if (!dirty_[c]) continue;
            dirty_[c] = false;
            const bool wide = exceeds(x, comps_[c]);
            if (wide != wide_[c]) {
                wide_[c] = wide;
                wide_count_ += wide ? 1 : -1;
            }
        }
        return wide_count_ == 0;
    }

private:
    void rebuild(const EdgeSet& es) {
        comps_ = undirected_components(es);
        for (std::size_t c = 0; c < comps_.size(); ++c)
            for (AgentIndex k : comps_[c]) comp_of_[k] = c;
        dirty_.assign(comps_.size(), true);
        wide_.assign(comps_.size(), false);
        wide_count_ = 0;
        stale_ = false;
    }

    bool exceeds(const Matrix& x, const IndexSet& comp) const {
        for (std::size_t a = 0; a < comp.size(); ++a)
            for (std::size_t b = a + 1; b < comp.size(); ++b)
                if (distance(x.row(comp[a]), x.row(comp[b])) > tol_) return true;
        return false;
    }

    double tol_;
    bool stale_ = true;
    std::vector<std::size_t> comp_of_;
    std::vector<IndexSet> comps_;
    std::vector<bool> dirty_;
    std::vector<bool> wide_;
    long wide_count_ = 0;
};

// pair_from_index for every index, so sampling is a table lookup
std::vector<UnorderedPair> pair_table(std::size_t n) {
    std::vector<UnorderedPair> out;
    out.reserve(pair_count(n));
    for (AgentIndex i = 0; i < n; ++i)
        for (AgentIndex j = i + 1; j < n; ++j) out.emplace_back(i, j);
    return out;
}

bool window_quiet(std::optional<std::uint64_t> last_event, std::uint64_t t0, std::uint64_t t, std::uint64_t window) {
    if (!last_event) return true;
    const std::uint64_t elapsed = t - t0;
    if (elapsed <= window) return false;  // an event exists inside the clipped window
    return *last_event < t - window;
}

}  // namespace

SimulationTrace run_simulation(const OpinionState& initial, const AgentParams& params, RandomStream stream,
                               std::uint64_t horizon, const std::optional<StopRule>& stop,
                               const TraceOptions& options) {
    initial.check_conforms(params);
    if (stop) {
        stop->validate();
        horizon = std::min(horizon, stop->horizon_cap);
    }
    TraceRecorder rec(initial, params, stream, options);
    std::optional<CollapseMonitor> monitor;
    if (stop) monitor.emplace(stop->diam_tol, params.n());

    const std::vector<UnorderedPair> pairs = pair_table(params.n());
    for (std::uint64_t k = 0;; ++k) {
        if (monitor && k >= stop->min_steps &&
            window_quiet(rec.last_event(), initial.t, rec.current().t, stop->freeze_window) &&
            monitor->collapsed(rec.edges(), rec.current().x))
            return rec.finish(true);
        if (k == horizon) break;
        rec.step(pairs[stream.uniform_index(pairs.size())]);
        if (monitor) {
            if (rec.last_step_changed_edges())
                monitor->edges_changed();
            else
                monitor->touched(rec.last_moved());
        }
    }
    return rec.finish(false);
}

void replay(const SimulationTrace& trace, const StateVisitor& visit) {
    OpinionState state = trace.initial;
    visit(state, std::nullopt);
    const std::uint64_t steps = trace.steps();
    if (trace.pairs_recorded) {
        for (const PairRecord& rec : trace.pairs) {
            apply_pair(state.x, trace.params, rec.pair);
            ++state.t;
            visit(state, rec);
        }
        return;
    }
    if (!trace.stream_start) throw InvalidParameter("replay: trace has neither pairs nor a stream");
    RandomStream stream = *trace.stream_start;
    const std::vector<UnorderedPair> pairs = pair_table(trace.params.n());
    for (std::uint64_t k = 0; k < steps; ++k) {
        const std::uint64_t t = state.t;
        const UnorderedPair pair = pairs[stream.uniform_index(pairs.size())];
        const Interaction hit = apply_pair(state.x, trace.params, pair);
        ++state.t;
        visit(state, PairRecord{t, pair, hit});
    }
}

}  // namespace dw
