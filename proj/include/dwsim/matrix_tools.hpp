#pragma once

// Row-stochastic matrix machinery: pair-update matrices P(s), window
// products, spread contraction and stationary distributions.

#include <cstddef>
#include <span>
#include <vector>

#include "dwsim/core.hpp"

namespace dw {

/// Square matrix with nonnegative entries and unit row sums (within 1e-12).
class StochasticMatrix {
public:
    /// Throws InvalidParameter if `m` is not square, has a negative entry or a
    /// row sum off by more than `tol`.
    explicit StochasticMatrix(Matrix m, double tol = 1e-12);

    std::size_t size() const { return m_.rows(); }
    double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
    const Matrix& matrix() const { return m_; }

    /// Product of two stochastic matrices; row sums re-checked at 1e-10.
    friend StochasticMatrix operator*(const StochasticMatrix& a, const StochasticMatrix& b);

private:
    struct Unchecked {};
    StochasticMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}
    Matrix m_;
};

/// Largest |row sum - 1| over all rows.
double max_row_sum_error(const Matrix& m);

/// Identity except rows pos_a / pos_b:
///   row a = (1-mu_a) e_a + mu_a e_b,  row b = mu_b e_a + (1-mu_b) e_b.
StochasticMatrix pair_update_matrix(std::size_t size, std::size_t pos_a, std::size_t pos_b, double mu_a,
                                    double mu_b);

/// P(s) for agent pair `pair` restricted to `subset` (positions follow the
/// order of `subset`). Pairs not contained in the subset give the identity.
StochasticMatrix pair_update_matrix(std::span<const AgentIndex> subset, UnorderedPair pair,
                                    std::span<const double> mu);

/// Phi = P(last) ... P(first) for a window of pairs.
StochasticMatrix window_product(std::span<const AgentIndex> subset, std::span<const UnorderedPair> window,
                                std::span<const double> mu);

/// max_{i,j} ||Row_i - Row_j||; 0 for a single row.
double spread(const Matrix& rows);

/// Strong connectivity of the positive-entry graph.
bool is_irreducible(const StochasticMatrix& p);
/// Period of an irreducible chain (gcd of cycle lengths); 1 means aperiodic.
std::size_t period(const StochasticMatrix& p);
bool is_ergodic(const StochasticMatrix& p);

struct StationaryResult {
    std::vector<double> pi;
    std::size_t iterations = 0;
    /// ||pi P - pi||_inf
    double residual = 0.0;
};

/// Power iteration from the uniform vector; stops when successive iterates
/// differ by < 1e-13 in max norm or after 1e6 iterations. Throws NotErgodic
/// for reducible or periodic input.
StationaryResult stationary_distribution(const StochasticMatrix& p);

struct SpreadReport {
    std::size_t k = 0;
    double spread = 0.0;
    /// spread(P^k Z) / spread(P^{k-1} Z); 0 when the previous spread is 0.
    double ratio = 0.0;
};

/// Empirical geometric envelope spread(P^k Z) <= spread(P^{k0} Z) * alpha^(k-k0).
/// This is a fitted stand-in; it does not estimate any theoretical constants.
struct SpreadEnvelope {
    std::vector<SpreadReport> sequence;
    std::size_t k0 = 0;
    double alpha = 0.0;
    bool monotone = true;
    bool envelope_ok = true;
};

/// Computes spread(P^k Z) for k = 1..k_max, checks monotone non-increase and
/// fits the envelope (k0 <= k_max/2, alpha < 1, slack 1e-6). Throws
/// NotErgodic for non-ergodic P and VerificationFailed if a check fails.
SpreadEnvelope verify_spread_contraction(const StochasticMatrix& p, const Matrix& z, std::size_t k_max);

struct App1Check {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// For ||x-y|| = r, ||x-z|| <= r, ||y-z|| <= r (1e-12 slack) and mu in (0,1):
/// lhs = ||z - ((1-mu)x + mu y)||, rhs = r sqrt(1 - mu + mu^2).
App1Check check_app1_bound(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                           double mu, double r);

/// Lower bound on window products whose pairs have diagonal entries >=
/// 1 - mu_max: delta_T = ((1 - mu_max)^2 / 2)^(T-1).
double window_delta(double mu_max, std::size_t window_len);

struct HubColumnCheck {
    bool holds = true;
    /// Smallest ratio entry / bound over the checked entries.
    double worst_ratio = 0.0;
};

/// For a window in which `hub` (position in subset) meets every other member:
/// Phi(l,hub) >= delta_T mu_l for l != hub and Phi(hub,hub) >= delta_T T (1 - mu_hub).
HubColumnCheck check_hub_column_bound(const StochasticMatrix& phi, std::span<const AgentIndex> subset,
                                      std::size_t hub_pos, std::span<const double> mu, double mu_max,
                                      std::size_t window_len);

}  // namespace dw
