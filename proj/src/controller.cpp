#include "dwsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dw {

namespace {

constexpr double kCheckSlack = 1e-12;
constexpr double kContractionSlack = 1e-10;

/// ceil(log_{1-mu}(ratio)) for ratio in (0,1]; 0 when ratio >= 1.
std::uint64_t shrink_steps(double mu, double ratio) {
    if (ratio >= 1.0) return 0;
    const double v = std::ceil(std::log(ratio) / std::log1p(-mu));
    return v <= 0.0 ? 0 : static_cast<std::uint64_t>(v);
}

std::uint64_t ceil_log_ratio(double target, double factor) {
    if (target >= 1.0) return 0;
    return static_cast<std::uint64_t>(std::ceil(std::log(target) / std::log(factor)));
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Carries out one merge on a private copy of the opinions.
class Merger {
public:
    Merger(const OpinionState& state, const AgentParams& params, IndexSet members, AgentIndex hub,
           AgentIndex partner, const IndexSet& hub_cluster, double eps)
        : params_(params), state_(state), pos_(params.n(), kAbsent), d_(params.d()) {
        tr_.hub = hub;
        tr_.partner = partner;
        tr_.members = std::move(members);
        tr_.eps = eps;
        const std::size_t m = tr_.members.size();
        for (std::size_t p = 0; p < m; ++p) pos_[tr_.members[p]] = p;

        origin_.assign(state.x.row(hub).begin(), state.x.row(hub).end());
        axis_.resize(d_);
        for (std::size_t c = 0; c < d_; ++c) axis_[c] = state.x(partner, c) - origin_[c];

        // x_k(0) = o + lambda_k v + delta_k
        lambda_.assign(m, 0.0);
        delta_ = Matrix(m, d_);
        for (std::size_t p = 0; p < m; ++p) {
            const AgentIndex k = tr_.members[p];
            const bool in_hub_cluster = std::binary_search(hub_cluster.begin(), hub_cluster.end(), k);
            lambda_[p] = in_hub_cluster ? 0.0 : 1.0;
            for (std::size_t c = 0; c < d_; ++c)
                delta_(p, c) = state.x(k, c) - origin_[c] - lambda_[p] * axis_[c];
        }
        compute_bounds();
    }

    MergeResult run() {
        step1();
        lambda_phase();
        tr_.t_lambda_end = elapsed();
        step6();
        tr_.t_final = elapsed();
        return {std::move(state_), std::move(tr_)};
    }

private:
    static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

    std::uint64_t elapsed() const { return tr_.schedule.steps.size(); }
    double dist(AgentIndex a, AgentIndex b) const { return distance(state_.x.row(a), state_.x.row(b)); }

    void compute_bounds() {
        const AgentIndex i = tr_.hub;
        const double mu_i = params_.mu(i), r_i = params_.r(i), eps = tr_.eps;
        double mu_lo = 1.0, mu_hi = 0.0, rho = 0.0;
        for (AgentIndex k : tr_.members) {
            mu_lo = std::min(mu_lo, params_.mu(k));
            mu_hi = std::max(mu_hi, params_.mu(k));
            rho = std::max(rho, std::sqrt(1.0 - params_.mu(k) + params_.mu(k) * params_.mu(k)));
            for (AgentIndex l : tr_.members)
                if (k < l) rho = std::max(rho, std::abs(1.0 - params_.mu(k) - params_.mu(l)));
        }
        const std::uint64_t shrink = shrink_steps(mu_i, params_.r_min() / r_i);
        // one extra step per phase absorbs a rounding-level miss of the
        // ceil(log) prediction
        per_phase_ = shrink + 2;
        const double q_min = std::pow(1.0 - mu_i, static_cast<double>(shrink + 1));
        const double c = std::min({mu_lo * std::pow(1.0 - mu_i, static_cast<double>(shrink)), q_min, 1.0 - mu_hi}) / 4.0;
        const double target = (params_.r_min() - 2.0 * eps) / r_i;
        const std::uint64_t n = tr_.members.size();
        tr_.rounds_bound = n * (ceil_log_ratio(target, 1.0 - c) + 1);
        tr_.step6_bound = (n / 2) * ceil_log_ratio(eps / params_.r_min(), rho);
        tr_.length_bound = per_phase_ * (1 + tr_.rounds_bound) + tr_.step6_bound;
    }

    // Forced selection of {a,b}; keeps lambda/delta in step with the opinions.
    Interaction force(AgentIndex a, AgentIndex b) {
        if (elapsed() >= 10 * tr_.length_bound + 10)
            throw std::logic_error("merge_eps_clusters: schedule exceeded ten times its precomputed bound");
        const UnorderedPair pair(a, b);
        const std::size_t pi = pos_[pair.i], pj = pos_[pair.j];
        const double li = lambda_[pi], lj = lambda_[pj];
        std::vector<double> di(delta_.row(pi).begin(), delta_.row(pi).end());
        std::vector<double> dj(delta_.row(pj).begin(), delta_.row(pj).end());

        const Interaction hit = apply_pair(state_.x, params_, pair);
        ++state_.t;
        tr_.schedule.steps.push_back(pair);

        if (hit.moved_i) {
            const double m = params_.mu(pair.i);
            lambda_[pi] = (1.0 - m) * li + m * lj;
            for (std::size_t c = 0; c < d_; ++c) delta_(pi, c) = (1.0 - m) * di[c] + m * dj[c];
        }
        if (hit.moved_j) {
            const double m = params_.mu(pair.j);
            lambda_[pj] = (1.0 - m) * lj + m * li;
            for (std::size_t c = 0; c < d_; ++c) delta_(pj, c) = (1.0 - m) * dj[c] + m * di[c];
        }
        // report in (a,b) order
        return a == pair.i ? hit : Interaction{hit.moved_j, hit.moved_i};
    }

    double delta_lambda() const {
        auto [lo, hi] = std::minmax_element(lambda_.begin(), lambda_.end());
        return *hi - *lo;
    }

    void record_boundary() {
        double residual = 0.0, dmax = 0.0;
        for (std::size_t p = 0; p < tr_.members.size(); ++p) {
            double sq = 0.0, dn = 0.0;
            for (std::size_t c = 0; c < d_; ++c) {
                const double model = origin_[c] + lambda_[p] * axis_[c] + delta_(p, c);
                const double e = state_.x(tr_.members[p], c) - model;
                sq += e * e;
                dn += delta_(p, c) * delta_(p, c);
            }
            residual = std::max(residual, std::sqrt(sq));
            dmax = std::max(dmax, std::sqrt(dn));
        }
        tr_.max_decomposition_residual = std::max(tr_.max_decomposition_residual, residual);
        const double dl = delta_lambda();
        if (!tr_.delta_lambda.empty() && dl > tr_.delta_lambda.back() + kCheckSlack) tr_.delta_lambda_monotone = false;
        tr_.lambda.push_back(lambda_);
        tr_.delta_norm_max.push_back(dmax);
        tr_.delta_lambda.push_back(dl);
        tr_.phase_times.push_back(elapsed());
    }

    // Move the hub towards `target` until the target also moves once.
    std::uint64_t drag(AgentIndex target) {
        std::uint64_t count = 0;
        for (;;) {
            const Interaction hit = force(tr_.hub, target);
            ++count;
            if (!hit.moved_i)
                throw std::logic_error("merge_eps_clusters: hub left its own confidence range during a drag");
            if (hit.moved_j) return count;
            if (count > per_phase_ * 10)
                throw std::logic_error("merge_eps_clusters: drag did not reach the target's bound");
        }
    }

    void step1() {
        const AgentIndex i = tr_.hub, j = tr_.partner;
        const double gap = dist(i, j);
        const std::uint64_t t1_formula = gap <= params_.r(j) ? 1 : 1 + shrink_steps(params_.mu(i), params_.r(j) / gap);
        const std::uint64_t t1 = drag(j);
        tr_.step1_landing_ok = t1 <= t1_formula;
        record_boundary();
    }

    void lambda_phase() {
        const AgentIndex i = tr_.hub;
        const double r_i = params_.r(i);
        const double stop_at = (params_.r_min() - 2.0 * tr_.eps) / r_i + kCheckSlack;
        const double factor = 1.0 - 2.0 * tr_.eps / r_i;
        const std::size_t hub_pos = pos_[i];
        for (;;) {
            const double before = tr_.delta_lambda.back();
            if (before <= stop_at) break;
            if (tr_.rounds >= 10 * tr_.rounds_bound + 10)
                throw std::logic_error("merge_eps_clusters: lambda spread did not contract within ten times the bound");

            // extremal agent relative to the hub, lowest index on ties
            std::size_t best = hub_pos;
            double best_gap = -1.0;
            for (std::size_t p = 0; p < lambda_.size(); ++p) {
                const double g = std::abs(lambda_[p] - lambda_[hub_pos]);
                if (g > best_gap) {
                    best_gap = g;
                    best = p;
                }
            }
            const AgentIndex m1 = tr_.members[best];
            tr_.round_targets.push_back(m1);
            drag(m1);
            ++tr_.rounds;

            double hub_spread = 0.0;
            for (double l : lambda_) hub_spread = std::max(hub_spread, std::abs(lambda_[hub_pos] - l));
            if (hub_spread > factor * before + kCheckSlack) tr_.round_contraction_ok = false;
            for (AgentIndex k : tr_.members)
                if (dist(i, k) > r_i + kCheckSlack) tr_.step4_reach_ok = false;
            record_boundary();
        }
    }

    void step6() {
        const auto& mem = tr_.members;
        for (;;) {
            AgentIndex k = mem.front(), l = mem.front();
            double diam = 0.0;
            for (std::size_t a = 0; a < mem.size(); ++a)
                for (std::size_t b = a + 1; b < mem.size(); ++b) {
                    const double dd = dist(mem[a], mem[b]);
                    if (dd > diam) {
                        diam = dd;
                        k = mem[a];
                        l = mem[b];
                    }
                }
            tr_.step6_diameters.push_back(diam);
            if (diam <= tr_.eps) return;
            if (tr_.step6_diameters.size() > 10 * tr_.step6_bound + 10)
                throw std::logic_error("merge_eps_clusters: diameter did not reach eps within ten times the bound");

            const Interaction hit = force(k, l);
            if (!hit.moved_i || !hit.moved_j)
                throw std::logic_error("merge_eps_clusters: maximal pair exceeded a confidence bound in Step 6");
            const double mk = params_.mu(k), ml = params_.mu(l);
            if (std::abs(dist(k, l) - std::abs(1.0 - mk - ml) * diam) > kContractionSlack)
                tr_.step6_contraction_ok = false;
            const double side_k = std::sqrt(1.0 - mk + mk * mk) * diam + kContractionSlack;
            const double side_l = std::sqrt(1.0 - ml + ml * ml) * diam + kContractionSlack;
            for (AgentIndex m : mem) {
                if (m == k || m == l) continue;
                if (dist(m, k) > side_k || dist(m, l) > side_l) tr_.step6_contraction_ok = false;
            }
        }
    }

    const AgentParams& params_;
    OpinionState state_;
    std::vector<std::size_t> pos_;
    std::size_t d_;
    std::vector<double> origin_;
    std::vector<double> axis_;
    std::vector<double> lambda_;
    Matrix delta_;
    std::uint64_t per_phase_ = 1;
    MergeTrace tr_;
};

bool clusters_touch(const OpinionState& state, const AgentParams& params, const IndexSet& a, const IndexSet& b) {
    for (AgentIndex p : a)
        for (AgentIndex q : b) {
            const double dd = distance(state.x.row(p), state.x.row(q));
            if (dd <= params.r(p) || dd <= params.r(q)) return true;
        }
    return false;
}

}  // namespace

double eps_upper_bound(const AgentParams& params) {
    double best = std::numeric_limits<double>::infinity();
    for (AgentIndex i = 0; i < params.n(); ++i) {
        const double mu = params.mu(i), r = params.r(i);
        const auto exponent = static_cast<double>(1 + shrink_steps(mu, params.r_min() / r));
        const double drag_term = r / 4.0 * std::pow(1.0 - mu, exponent);
        const double step_term = mu * r / 2.0;
        best = std::min({best, drag_term, step_term});
    }
    return best;
}

MergeResult merge_eps_clusters(const OpinionState& state, const AgentParams& params, const ClusterSet& a,
                               const ClusterSet& b, double eps) {
    state.check_conforms(params);
    const double bound = eps_upper_bound(params);
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw InvalidParameter("merge_eps_clusters: eps must be positive and finite");
    if (eps > bound)
        throw InvalidParameter("merge_eps_clusters: eps " + fmt(eps) + " exceeds the admissible bound " + fmt(bound));
    const IndexSet ma = normalized_subset(a.members, params.n());
    const IndexSet mb = normalized_subset(b.members, params.n());
    if (ma.empty() || mb.empty()) throw InvalidParameter("merge_eps_clusters: clusters must be non-empty");
    IndexSet members;
    std::set_union(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(members));
    if (members.size() != ma.size() + mb.size()) throw InvalidParameter("merge_eps_clusters: clusters overlap");
    if (diameter(state, ma) > eps || diameter(state, mb) > eps)
        throw InvalidParameter("merge_eps_clusters: inputs must be eps-clusters for eps " + fmt(eps) +
                               " (admissible bound " + fmt(bound) + ")");

    // bridging pair with the largest max bound, lexicographic on ties
    bool found = false;
    UnorderedPair bridge;
    double bridge_r = -1.0;
    for (AgentIndex p : ma)
        for (AgentIndex q : mb) {
            const double rmax = std::max(params.r(p), params.r(q));
            if (distance(state.x.row(p), state.x.row(q)) > rmax) continue;
            const UnorderedPair cand(p, q);
            if (!found || rmax > bridge_r || (rmax == bridge_r && cand < bridge)) {
                bridge = cand;
                bridge_r = rmax;
                found = true;
            }
        }
    if (!found) throw InvalidParameter("merge_eps_clusters: no edge joins the two clusters");

    const bool i_first = params.r(bridge.i) >= params.r(bridge.j);
    const AgentIndex hub = i_first ? bridge.i : bridge.j;
    const AgentIndex partner = i_first ? bridge.j : bridge.i;
    const IndexSet& hub_cluster = std::binary_search(ma.begin(), ma.end(), hub) ? ma : mb;

    Merger merger(state, params, std::move(members), hub, partner, hub_cluster, eps);
    MergeResult out = merger.run();
    out.trace.schedule.origin_t = state.t;
    return out;
}

ControlSchedule hub_consensus_schedule(std::span<const AgentIndex> subset, AgentIndex hub, std::size_t window_t,
                                       std::size_t rounds) {
    if (subset.size() < 2) throw InvalidParameter("hub_consensus_schedule: subset needs at least two agents");
    if (std::find(subset.begin(), subset.end(), hub) == subset.end())
        throw InvalidParameter("hub_consensus_schedule: hub must belong to the subset");
    if (window_t < subset.size() - 1)
        throw InvalidParameter("hub_consensus_schedule: window " + std::to_string(window_t) +
                               " is shorter than |subset| - 1 = " + std::to_string(subset.size() - 1));
    std::vector<UnorderedPair> window;
    for (AgentIndex k : subset)
        if (k != hub) window.emplace_back(hub, k);
    const UnorderedPair first = window.front();
    while (window.size() < window_t) window.push_back(first);

    ControlSchedule out;
    out.steps.reserve(window_t * rounds);
    for (std::size_t r = 0; r < rounds; ++r) out.steps.insert(out.steps.end(), window.begin(), window.end());
    return out;
}

GlobalMergeResult global_merge_schedule(const OpinionState& state, const AgentParams& params, double eps) {
    state.check_conforms(params);
    const double bound = eps_upper_bound(params);
    if (!(eps > 0.0) || eps > bound)
        throw InvalidParameter("global_merge_schedule: eps " + fmt(eps) + " outside (0, " + fmt(bound) + "]");

    GlobalMergeResult out{state, {}, {}};
    std::vector<IndexSet> clusters(params.n());
    for (AgentIndex k = 0; k < params.n(); ++k) clusters[k] = {k};

    for (;;) {
        // live clusters are the non-empty slots, indexed by their least member
        std::optional<std::pair<std::size_t, std::size_t>> next;
        for (std::size_t c1 = 0; c1 < clusters.size() && !next; ++c1) {
            if (clusters[c1].empty()) continue;
            for (std::size_t c2 = c1 + 1; c2 < clusters.size(); ++c2) {
                if (clusters[c2].empty()) continue;
                if (clusters_touch(out.state, params, clusters[c1], clusters[c2])) {
                    next = std::make_pair(c1, c2);
                    break;
                }
            }
        }
        if (!next) break;
        auto [c1, c2] = *next;
        const ClusterSet a{clusters[c1], eps};
        const ClusterSet b{clusters[c2], eps};
        MergeResult merged = merge_eps_clusters(out.state, params, a, b, eps);
        out.state = std::move(merged.state);
        out.merges.push_back(std::move(merged.trace));
        IndexSet joined;
        std::set_union(clusters[c1].begin(), clusters[c1].end(), clusters[c2].begin(), clusters[c2].end(),
                       std::back_inserter(joined));
        clusters[c1] = std::move(joined);
        clusters[c2].clear();
    }
    for (auto& c : clusters)
        if (!c.empty()) out.clusters.push_back(std::move(c));
    return out;
}

SimulationTrace apply_schedule(const OpinionState& state, const AgentParams& params, const ControlSchedule& schedule,
                               const TraceOptions& options) {
    state.check_conforms(params);
    TraceRecorder rec(state, params, std::nullopt, options);
    for (const UnorderedPair& pair : schedule.steps) rec.step(pair);
    return rec.finish(false);
}

}  // namespace dw
