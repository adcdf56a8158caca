#pragma once

// Slow-convergence instances: three agents i, j, k where a forced run of
// {i,j} interactions walks x_j down onto the boundary of k's reach after
// exactly K interactions. Random dynamics on the same instance need about K
// selections of {i,j} before k is reached, so tau grows without bound in K.

#include <cstdint>
#include <optional>
#include <vector>

#include "dwsim/controller.hpp"
#include "dwsim/core.hpp"
#include "dwsim/model.hpp"

namespace dw {

struct SlowParams {
    double r_i = 1.0;
    double r_j = 2.0;
    double r_k = 1.0;
    double mu_i = 0.4;
    double mu_j = 0.4;
    double mu_k = 0.4;
    std::size_t d = 1;
    /// Extra far-away agents (bound r_k, factor mu_k).
    std::size_t padding = 0;
};

/// Agents are ordered i = 0, j = 1, k = 2, then padding.
struct SlowInstance {
    static constexpr AgentIndex kI = 0;
    static constexpr AgentIndex kJ = 1;
    static constexpr AgentIndex kK = 2;

    AgentParams params;
    double epsilon;
    double a;
    std::uint64_t K;
    OpinionState initial;
    /// K + 1 consecutive {i,j} selections.
    ControlSchedule forced;
};

/// Validates the parameter conditions (r_k <= r_i < r_j; mu_i < 1/2 with
/// mu_j <= 1/2 or the mirror; the eps caps; the sanity inequalities) and
/// builds the instance. The message of the InvalidParameter names the
/// violated inequality.
SlowInstance build_slow_instance(const SlowParams& p, std::uint64_t K);

struct SlowVerification {
    /// States 0..K-1: no edge between k and {i,j}, i and j mutually linked.
    bool no_early_edge = true;
    /// State K: x_j = r_j e_1 within 1e-9.
    bool landing_ok = true;
    /// State K: ||x_j - x_k|| equals r_j within 1e-9, so (k,j) sits on the boundary.
    bool boundary_edge_ok = true;
    /// k is out of j's reach at every state 1..K-1, so tau(r_j/2) >= K on this prefix.
    bool tau_certificate_ok = true;
    /// Gap x_j - x_i equals (1 - mu_i - mu_j)^h times the initial gap within 1e-10, h <= K.
    bool telescoping_ok = true;
    /// Padding agents never moved.
    bool padding_fixed = true;

    double landing_deviation = 0.0;
    double max_telescoping_error = 0.0;
    double boundary_gap = 0.0;
    /// Prefix states where ||x_j - x_k|| rounded onto r_j and the side was taken
    /// from the closed-form margin of x_j over its landing value.
    std::uint64_t rounding_resolved = 0;

    bool passed() const {
        return no_early_edge && landing_ok && boundary_edge_ok && tau_certificate_ok && telescoping_ok &&
               padding_fixed;
    }
};

/// Applies the forced schedule and evaluates every check without throwing.
SlowVerification check_slow_instance(const SlowInstance& inst);

/// Same as check_slow_instance but throws VerificationFailed with the failing
/// checks and deviations.
SlowVerification verify_slow_instance(const SlowInstance& inst);

struct TauCurveRow {
    std::uint64_t K = 0;
    std::size_t runs = 0;
    std::size_t censored = 0;
    std::optional<double> median_tau;
};

/// Random (not forced) dynamics on build_slow_instance(base, K) for every K,
/// `seeds` runs each; tau(r_j / 2) from the stop-rule limits. Run s of value
/// K uses RandomStream(master_seed).substream(K).substream(s).
std::vector<TauCurveRow> slow_tau_curve(const SlowParams& base, const std::vector<std::uint64_t>& Ks,
                                        std::size_t seeds, std::uint64_t master_seed = 0);

}  // namespace dw
