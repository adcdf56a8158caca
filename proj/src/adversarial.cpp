#include "dwsim/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dwsim/analysis.hpp"

namespace dw {

namespace {

constexpr double kLandingTol = 1e-9;
constexpr double kTelescopeTol = 1e-10;

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidParameter("build_slow_instance: violated " + what);
}

// beta^K, flushed to zero below 1e-300 instead of producing subnormals
double power_or_zero(double beta, std::uint64_t K) {
    const double log_value = static_cast<double>(K) * std::log(beta);
    return log_value < std::log(1e-300) ? 0.0 : std::exp(log_value);
}

AgentParams slow_agent_params(const SlowParams& p) {
    std::vector<double> r{p.r_i, p.r_j, p.r_k};
    std::vector<double> mu{p.mu_i, p.mu_j, p.mu_k};
    r.resize(3 + p.padding, p.r_k);
    mu.resize(3 + p.padding, p.mu_k);
    return AgentParams(p.d, std::move(r), std::move(mu));
}

}  // namespace

SlowInstance build_slow_instance(const SlowParams& p, std::uint64_t K) {
    require(K >= 1, "K >= 1");
    require(p.d >= 1, "d >= 1");
    AgentParams params = slow_agent_params(p);
    require(p.r_k <= p.r_i && p.r_i < p.r_j, "condition 1: r_k <= r_i < r_j");
    require((p.mu_i < 0.5 && p.mu_j <= 0.5) || (p.mu_i <= 0.5 && p.mu_j < 0.5),
            "condition 2: mu_i < 1/2, mu_j <= 1/2 or mu_i <= 1/2, mu_j < 1/2");

    const double cap_gap = (p.r_j - p.r_i) * p.mu_j;
    const double cap_mix = p.r_i * p.mu_i * p.mu_j / (p.mu_i + p.mu_j);
    const double eps = 0.5 * std::min(cap_gap, cap_mix);
    require(eps < cap_gap, "eps < (r_j - r_i) mu_j");
    require(eps <= cap_mix, "eps <= r_i mu_i mu_j / (mu_i + mu_j)");

    const double beta = 1.0 - p.mu_i - p.mu_j;
    const double bK = power_or_zero(beta, K);
    const double a = p.r_j + eps * (1.0 - bK) / (p.mu_i + p.mu_j * bK);
    // strict in exact arithmetic; equality is reached once beta^K drops below rounding
    require(a <= p.r_j + eps / p.mu_i, "a < r_j + eps / mu_i");

    const double r_max = std::max({p.r_i, p.r_j, p.r_k});
    const double x_i = p.r_j - eps / p.mu_j;
    require(3.0 * r_max > a + r_max, "3 r_max > a + r_max");
    require(a - x_i < p.r_i, "a - (r_j - eps / mu_j) < r_i");
    require(x_i > p.r_i, "r_j - eps / mu_j > r_i");

    Matrix x(params.n(), p.d, 0.0);
    x(SlowInstance::kI, 0) = x_i;
    x(SlowInstance::kJ, 0) = a;
    for (std::size_t q = 0; q < p.padding; ++q)
        x(3 + q, 0) = 3.0 * r_max + a + 1.0 + static_cast<double>(q) * (2.0 * r_max + 1.0);

    ControlSchedule forced;
    forced.steps.assign(K + 1, UnorderedPair(SlowInstance::kI, SlowInstance::kJ));
    return SlowInstance{std::move(params), eps, a, K, OpinionState(0, std::move(x)), std::move(forced)};
}

SlowVerification check_slow_instance(const SlowInstance& inst) {
    constexpr AgentIndex i = SlowInstance::kI, j = SlowInstance::kJ, k = SlowInstance::kK;
    const AgentParams& params = inst.params;
    const double r_j = params.r(j);
    const double beta = 1.0 - params.mu(i) - params.mu(j);
    std::vector<double> gap0(params.d());
    for (std::size_t c = 0; c < params.d(); ++c) gap0[c] = inst.initial.x(j, c) - inst.initial.x(i, c);

    // x_j(h) - x_j(K) = mu_j g0 (beta^h - beta^K) / (mu_i + mu_j), from mu_j x_i + mu_i x_j being conserved
    const double g0 = inst.initial.x(j, 0) - inst.initial.x(i, 0);
    auto margin = [&](std::uint64_t h) {
        const double tail = 1.0 - std::pow(beta, static_cast<double>(inst.K - h));
        return params.mu(j) * g0 * std::pow(beta, static_cast<double>(h)) * tail / (params.mu(i) + params.mu(j));
    };

    SlowVerification out;
    Matrix x = inst.initial.x;
    auto check_state = [&](std::uint64_t h) {
        if (h <= inst.K) {
            const double scale = std::pow(beta, static_cast<double>(h));
            double sq = 0.0;
            for (std::size_t c = 0; c < params.d(); ++c) {
                const double e = (x(j, c) - x(i, c)) - scale * gap0[c];
                sq += e * e;
            }
            out.max_telescoping_error = std::max(out.max_telescoping_error, std::sqrt(sq));
        }
        if (h < inst.K) {
            const double dik = distance(x.row(i), x.row(k));
            const double djk = distance(x.row(j), x.row(k));
            const double dij = distance(x.row(i), x.row(j));
            bool j_clear = djk > r_j;
            if (!j_clear && std::abs(djk - r_j) <= 4.0 * std::numeric_limits<double>::epsilon() * r_j &&
                margin(h) > 0.0) {
                j_clear = true;
                ++out.rounding_resolved;
            }
            const bool k_apart = dik > params.r(i) && dik > params.r(k) && j_clear && djk > params.r(k);
            const bool ij_linked = dij <= params.r(i) && dij <= r_j;
            if (!k_apart || !ij_linked) out.no_early_edge = false;
            if (h >= 1 && !j_clear) out.tau_certificate_ok = false;
        }
        if (h == inst.K) {
            double sq = 0.0;
            for (std::size_t c = 0; c < params.d(); ++c) {
                const double target = c == 0 ? r_j : 0.0;
                sq += (x(j, c) - target) * (x(j, c) - target);
            }
            out.landing_deviation = std::sqrt(sq);
            out.landing_ok = out.landing_deviation < kLandingTol;
            out.boundary_gap = std::abs(distance(x.row(j), x.row(k)) - r_j);
            out.boundary_edge_ok = out.boundary_gap <= kLandingTol;
        }
    };

    check_state(0);
    for (std::uint64_t h = 1; h <= inst.forced.size(); ++h) {
        apply_pair(x, params, inst.forced.steps[h - 1]);
        check_state(h);
    }
    out.telescoping_ok = out.max_telescoping_error <= kTelescopeTol;
    for (AgentIndex q = 3; q < params.n(); ++q)
        if (!std::equal(x.row(q).begin(), x.row(q).end(), inst.initial.x.row(q).begin())) out.padding_fixed = false;
    return out;
}

SlowVerification verify_slow_instance(const SlowInstance& inst) {
    SlowVerification v = check_slow_instance(inst);
    if (v.passed()) return v;
    std::ostringstream os;
    os.precision(17);
    os << "slow instance (K=" << inst.K << ") failed:";
    if (!v.no_early_edge) os << " early edge between k and {i,j} or broken i-j link;";
    if (!v.landing_ok) os << " x_j missed r_j e1 by " << v.landing_deviation << ";";
    if (!v.boundary_edge_ok) os << " ||x_j - x_k|| differs from r_j by " << v.boundary_gap << ";";
    if (!v.tau_certificate_ok) os << " k entered j's reach before step K;";
    if (!v.telescoping_ok) os << " telescoping error " << v.max_telescoping_error << ";";
    if (!v.padding_fixed) os << " a padding agent moved;";
    throw VerificationFailed(os.str());
}

std::vector<TauCurveRow> slow_tau_curve(const SlowParams& base, const std::vector<std::uint64_t>& Ks,
                                        std::size_t seeds, std::uint64_t master_seed) {
    std::vector<TauCurveRow> rows;
    const RandomStream master(master_seed);
    for (std::uint64_t K : Ks) {
        const SlowInstance inst = build_slow_instance(base, K);
        StopRule rule = StopRule::defaults(inst.params.n());
        rule.freeze_window = std::max<std::uint64_t>(rule.freeze_window, 10'000);
        // i and j collapse long before step K without any edge event; an
        // event-free prefix must not count as frozen
        rule.min_steps = rule.freeze_window;
        rule.horizon_cap = 1'000'000;
        const double eps = inst.params.r(SlowInstance::kJ) / 2.0;

        TauCurveRow row;
        row.K = K;
        row.runs = seeds;
        std::vector<double> taus;
        const RandomStream per_k = master.substream(K);
        for (std::size_t s = 0; s < seeds; ++s) {
            const SimulationTrace trace = run_simulation(inst.initial, inst.params, per_k.substream(s),
                                                         rule.horizon_cap, rule, TraceOptions{false, 0});
            const RunReport rep = detect_convergence(trace, rule, {eps});
            const auto& tau = rep.tau_table.front().tau;
            if (rep.converged && tau)
                taus.push_back(static_cast<double>(*tau));
            else
                ++row.censored;
        }
        if (!taus.empty()) row.median_tau = median(taus);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dw
