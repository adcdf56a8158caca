#include "dwsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dw {

namespace {

template <class T>
std::vector<std::pair<T, double>> empirical_cdf(std::vector<T> values, std::size_t total) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<T, double>> out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k + 1 < values.size() && values[k + 1] == values[k]) continue;
        out.emplace_back(values[k], static_cast<double>(k + 1) / static_cast<double>(total));
    }
    return out;
}

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidParameter("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<TauEntry> tau_table(const SimulationTrace& trace, const Matrix& limits, const std::vector<double>& eps) {
    const std::size_t n = trace.params.n();
    if (limits.rows() != n || limits.cols() != trace.params.d())
        throw InvalidParameter("tau_table: limits shape does not match the trace");
    for (double e : eps)
        if (!(e >= 0.0)) throw InvalidParameter("tau_table: eps must be nonnegative");

    const std::uint64_t t0 = trace.initial.t;
    std::vector<double> dev(n);
    std::vector<std::optional<std::uint64_t>> last_bad(eps.size());
    double worst = 0.0;
    auto refresh = [&](const OpinionState& s, AgentIndex k) { dev[k] = distance(s.x.row(k), limits.row(k)); };
    auto note = [&](std::uint64_t rel) {
        worst = *std::max_element(dev.begin(), dev.end());
        for (std::size_t e = 0; e < eps.size(); ++e)
            if (worst > eps[e]) last_bad[e] = rel;
    };

    replay(trace, [&](const OpinionState& s, const std::optional<PairRecord>& rec) {
        if (!rec) {
            for (AgentIndex k = 0; k < n; ++k) refresh(s, k);
        } else if (rec->interaction.any()) {
            refresh(s, rec->pair.i);
            refresh(s, rec->pair.j);
        } else {
            for (std::size_t e = 0; e < eps.size(); ++e)
                if (worst > eps[e]) last_bad[e] = s.t - t0;
            return;
        }
        note(s.t - t0);
    });

    const std::uint64_t final_rel = trace.steps();
    std::vector<TauEntry> out;
    for (std::size_t e = 0; e < eps.size(); ++e) {
        TauEntry entry{eps[e], std::nullopt};
        if (!last_bad[e])
            entry.tau = 1;
        else if (*last_bad[e] < final_rel)
            entry.tau = *last_bad[e] + 1;
        out.push_back(entry);
    }
    return out;
}

std::optional<std::uint64_t> tau_epsilon(const SimulationTrace& trace, const Matrix& limits, double eps) {
    return tau_table(trace, limits, {eps}).front().tau;
}

SeparationCheck check_limit_separation(const Matrix& limits, const std::vector<ClusterSet>& partition,
                                       const AgentParams& params, double tol) {
    const std::size_t n = params.n();
    std::vector<std::size_t> cluster_of(n, SIZE_MAX);
    for (std::size_t c = 0; c < partition.size(); ++c)
        for (AgentIndex k : partition[c].members) cluster_of.at(k) = c;
    if (std::find(cluster_of.begin(), cluster_of.end(), SIZE_MAX) != cluster_of.end())
        throw InvalidParameter("check_limit_separation: partition does not cover every agent");

    SeparationCheck out;
    for (AgentIndex p = 0; p < n; ++p)
        for (AgentIndex q = p + 1; q < n; ++q) {
            const double dist = distance(limits.row(p), limits.row(q));
            if (cluster_of[p] == cluster_of[q]) {
                if (dist > tol) out.violations.emplace_back(p, q);
                continue;
            }
            const double bound = std::max(params.r(p), params.r(q));
            if (std::abs(dist - bound) <= tol)
                out.boundary.emplace_back(p, q);
            else if (dist < bound - tol && dist > tol)
                out.violations.emplace_back(p, q);
        }
    out.ok = out.violations.empty();
    return out;
}

RunReport detect_convergence(const SimulationTrace& trace, const StopRule& rule, const std::vector<double>& tau_eps,
                             double separation_tol) {
    rule.validate();
    RunReport rep;
    const OpinionState& fin = trace.final_state();
    rep.steps = trace.steps();
    rep.limits = fin.x;
    rep.xi = count_edge_changes(trace, trace.initial.t);

    bool quiet = rep.steps >= rule.min_steps;
    if (quiet && rep.xi.last_change) quiet = rep.steps > rule.freeze_window && *rep.xi.last_change < fin.t - rule.freeze_window;

    const EdgeSet es = edge_set(fin, trace.params);
    // one-way edges join undirected components, so a cluster still drifting
    // toward a neighbor it cannot see back never counts as collapsed
    bool collapsed = true;
    for (const IndexSet& comp : undirected_components(es)) collapsed = collapsed && diameter(fin, comp) <= rule.diam_tol;
    for (const IndexSet& comp : mutual_components(es)) rep.final_partition.push_back(ClusterSet{comp, diameter(fin, comp)});
    rep.converged = quiet && collapsed;

    if (rep.converged) {
        rep.tau_table = tau_table(trace, rep.limits, tau_eps);
        SeparationCheck sep = check_limit_separation(rep.limits, rep.final_partition, trace.params, separation_tol);
        rep.separation_ok = sep.ok;
        rep.boundary_pairs = std::move(sep.boundary);
        rep.separation_violations = std::move(sep.violations);
    } else {
        for (double e : tau_eps) rep.tau_table.push_back({e, std::nullopt});
    }
    return rep;
}

BatchSummary batch_stats(const std::vector<RunReport>& reports) {
    if (reports.empty()) throw InvalidParameter("batch_stats: no reports");
    BatchSummary out;
    out.runs = reports.size();
    std::vector<double> xis;
    for (const RunReport& r : reports) {
        out.converged += r.converged ? 1 : 0;
        out.consensus += r.consensus() ? 1 : 0;
        xis.push_back(static_cast<double>(r.xi.xi));
        out.xi_max = std::max(out.xi_max, r.xi.xi);
    }
    out.consensus_frequency = static_cast<double>(out.consensus) / static_cast<double>(out.runs);
    out.xi_mean = std::accumulate(xis.begin(), xis.end(), 0.0) / static_cast<double>(xis.size());
    out.xi_median = median(xis);

    for (std::size_t e = 0; e < reports.front().tau_table.size(); ++e) {
        TauSummary ts;
        ts.eps = reports.front().tau_table[e].eps;
        std::vector<double> taus;
        for (const RunReport& r : reports) {
            if (e >= r.tau_table.size() || r.tau_table[e].eps != ts.eps)
                throw InvalidParameter("batch_stats: reports use different tau eps lists");
            const auto& tau = r.tau_table[e].tau;
            if (r.converged && tau)
                taus.push_back(static_cast<double>(*tau));
            else
                ++ts.censored;
        }
        ts.defined = taus.size();
        if (!taus.empty()) {
            ts.mean = std::accumulate(taus.begin(), taus.end(), 0.0) / static_cast<double>(taus.size());
            ts.median = median(taus);
        }
        out.tau.push_back(ts);
    }
    return out;
}

FreezeSummary estimate_topology_freeze(const std::vector<RunReport>& reports, std::uint64_t T) {
    if (reports.empty()) throw InvalidParameter("estimate_topology_freeze: no reports");
    FreezeSummary out;
    out.runs = reports.size();
    std::vector<std::uint64_t> xis, lasts;
    std::size_t within = 0;
    for (const RunReport& r : reports) {
        xis.push_back(r.xi.xi);
        within += r.xi.xi <= T ? 1 : 0;
        if (r.xi.last_change)
            lasts.push_back(*r.xi.last_change);
        else
            ++out.runs_without_change;
    }
    out.xi_cdf = empirical_cdf(xis, out.runs);
    out.last_change_cdf = empirical_cdf(lasts, lasts.size());
    out.fraction_xi_within = static_cast<double>(within) / static_cast<double>(out.runs);
    return out;
}

}  // namespace dw
