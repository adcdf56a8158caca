#include "dwsim/matrix_tools.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace dw {

namespace {

constexpr double kProductRowTol = 1e-10;

std::size_t position_in(std::span<const AgentIndex> subset, AgentIndex agent) {
    auto it = std::find(subset.begin(), subset.end(), agent);
    return it == subset.end() ? subset.size() : static_cast<std::size_t>(it - subset.begin());
}

std::vector<std::size_t> bfs_levels(const StochasticMatrix& p, bool transpose) {
    const std::size_t m = p.size();
    std::vector<std::size_t> level(m, SIZE_MAX);
    std::queue<std::size_t> todo;
    level[0] = 0;
    todo.push(0);
    while (!todo.empty()) {
        const std::size_t u = todo.front();
        todo.pop();
        for (std::size_t v = 0; v < m; ++v) {
            const double w = transpose ? p(v, u) : p(u, v);
            if (w > 0.0 && level[v] == SIZE_MAX) {
                level[v] = level[u] + 1;
                todo.push(v);
            }
        }
    }
    return level;
}

Matrix multiply_rows(const StochasticMatrix& p, const Matrix& z) { return p.matrix() * z; }

double max_abs(const Matrix& z) {
    double best = 0.0;
    for (double v : z.data()) best = std::max(best, std::abs(v));
    return best;
}

}  // namespace

double max_row_sum_error(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (double v : m.row(r)) sum += v;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

StochasticMatrix::StochasticMatrix(Matrix m, double tol) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw InvalidParameter("stochastic matrix must be square and non-empty");
    for (double v : m_.data())
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("stochastic matrix has a negative or non-finite entry");
    const double err = max_row_sum_error(m_);
    if (err > tol) throw InvalidParameter("stochastic matrix row sum off by " + std::to_string(err));
}

StochasticMatrix operator*(const StochasticMatrix& a, const StochasticMatrix& b) {
    Matrix prod = a.m_ * b.m_;
    if (max_row_sum_error(prod) > kProductRowTol)
        throw VerificationFailed("product of stochastic matrices lost row-sum normalization");
    return StochasticMatrix(std::move(prod), StochasticMatrix::Unchecked{});
}

StochasticMatrix pair_update_matrix(std::size_t size, std::size_t pos_a, std::size_t pos_b, double mu_a,
                                    double mu_b) {
    if (pos_a >= size || pos_b >= size || pos_a == pos_b)
        throw InvalidParameter("pair_update_matrix: positions must be distinct and < " + std::to_string(size));
    if (!(mu_a > 0.0 && mu_a < 1.0) || !(mu_b > 0.0 && mu_b < 1.0))
        throw InvalidParameter("pair_update_matrix: weighting factors must lie in (0,1)");
    Matrix m = Matrix::identity(size);
    m(pos_a, pos_a) = 1.0 - mu_a;
    m(pos_a, pos_b) = mu_a;
    m(pos_b, pos_b) = 1.0 - mu_b;
    m(pos_b, pos_a) = mu_b;
    return StochasticMatrix(std::move(m));
}

StochasticMatrix pair_update_matrix(std::span<const AgentIndex> subset, UnorderedPair pair,
                                    std::span<const double> mu) {
    const std::size_t pa = position_in(subset, pair.i);
    const std::size_t pb = position_in(subset, pair.j);
    if (pa == subset.size() || pb == subset.size()) return StochasticMatrix(Matrix::identity(subset.size()));
    return pair_update_matrix(subset.size(), pa, pb, mu[pair.i], mu[pair.j]);
}

StochasticMatrix window_product(std::span<const AgentIndex> subset, std::span<const UnorderedPair> window,
                                std::span<const double> mu) {
    StochasticMatrix phi(Matrix::identity(subset.size()));
    for (const UnorderedPair& pair : window) phi = pair_update_matrix(subset, pair, mu) * phi;
    return phi;
}

double spread(const Matrix& rows) {
    double best = 0.0;
    for (std::size_t a = 0; a < rows.rows(); ++a)
        for (std::size_t b = a + 1; b < rows.rows(); ++b) best = std::max(best, distance(rows.row(a), rows.row(b)));
    return best;
}

bool is_irreducible(const StochasticMatrix& p) {
    auto fwd = bfs_levels(p, false);
    auto bwd = bfs_levels(p, true);
    return std::none_of(fwd.begin(), fwd.end(), [](std::size_t l) { return l == SIZE_MAX; }) &&
           std::none_of(bwd.begin(), bwd.end(), [](std::size_t l) { return l == SIZE_MAX; });
}

std::size_t period(const StochasticMatrix& p) {
    const std::size_t m = p.size();
    for (std::size_t k = 0; k < m; ++k)
        if (p(k, k) > 0.0) return 1;
    // gcd over edges u->v of level(u) + 1 - level(v), levels from BFS at vertex 0
    auto level = bfs_levels(p, false);
    std::size_t g = 0;
    for (std::size_t u = 0; u < m; ++u)
        for (std::size_t v = 0; v < m; ++v) {
            if (!(p(u, v) > 0.0) || level[u] == SIZE_MAX || level[v] == SIZE_MAX) continue;
            const long diff = static_cast<long>(level[u]) + 1 - static_cast<long>(level[v]);
            g = std::gcd(g, static_cast<std::size_t>(std::labs(diff)));
        }
    return g == 0 ? 1 : g;
}

bool is_ergodic(const StochasticMatrix& p) { return is_irreducible(p) && period(p) == 1; }

StationaryResult stationary_distribution(const StochasticMatrix& p) {
    if (!is_irreducible(p)) throw NotErgodic("stationary_distribution: matrix is reducible");
    if (period(p) != 1) throw NotErgodic("stationary_distribution: matrix is periodic");
    const std::size_t m = p.size();
    StationaryResult out;
    out.pi.assign(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);
    constexpr std::size_t kMaxIter = 1'000'000;
    auto step = [&](const std::vector<double>& from, std::vector<double>& to) {
        std::fill(to.begin(), to.end(), 0.0);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) to[c] += from[r] * p(r, c);
    };
    for (out.iterations = 1; out.iterations <= kMaxIter; ++out.iterations) {
        step(out.pi, next);
        double diff = 0.0;
        for (std::size_t k = 0; k < m; ++k) diff = std::max(diff, std::abs(next[k] - out.pi[k]));
        out.pi.swap(next);
        if (diff < 1e-13) break;
    }
    const double total = std::accumulate(out.pi.begin(), out.pi.end(), 0.0);
    for (double& v : out.pi) v /= total;
    step(out.pi, next);
    out.residual = 0.0;
    for (std::size_t k = 0; k < m; ++k) out.residual = std::max(out.residual, std::abs(next[k] - out.pi[k]));
    return out;
}

SpreadEnvelope verify_spread_contraction(const StochasticMatrix& p, const Matrix& z, std::size_t k_max) {
    if (!is_ergodic(p)) throw NotErgodic("verify_spread_contraction: matrix is not ergodic");
    if (z.rows() != p.size()) throw InvalidParameter("verify_spread_contraction: Z has wrong row count");
    if (k_max < 1) throw InvalidParameter("verify_spread_contraction: k_max must be >= 1");

    // Rounding noise floor: spreads below it are treated as zero.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, max_abs(z));

    SpreadEnvelope env;
    Matrix y = z;
    double prev = spread(z);
    for (std::size_t k = 1; k <= k_max; ++k) {
        y = multiply_rows(p, y);
        const double s = spread(y);
        env.sequence.push_back({k, s, prev > 0.0 ? s / prev : 0.0});
        if (s > prev * (1.0 + 1e-12) && s > floor) env.monotone = false;
        prev = s;
    }

    const auto& seq = env.sequence;
    const std::size_t k0_max = std::max<std::size_t>(1, k_max / 2);
    env.envelope_ok = false;
    for (std::size_t k0 = 1; k0 <= k0_max && !env.envelope_ok; ++k0) {
        const double base = seq[k0 - 1].spread;
        double alpha = 0.0;
        if (base > floor) {
            for (std::size_t k = k0 + 1; k <= k_max; ++k) {
                if (seq[k - 1].spread <= floor) continue;
                alpha = std::max(alpha, std::pow(seq[k - 1].spread / base, 1.0 / static_cast<double>(k - k0)));
            }
        }
        if (alpha >= 1.0) continue;
        bool ok = true;
        for (std::size_t k = k0; k <= k_max && ok; ++k) {
            const double bound = base * std::pow(alpha, static_cast<double>(k - k0)) * (1.0 + 1e-6);
            ok = seq[k - 1].spread <= std::max(bound, floor);
        }
        if (ok) {
            env.k0 = k0;
            env.alpha = alpha;
            env.envelope_ok = true;
        }
    }
    if (!env.monotone) throw VerificationFailed("spread(P^k Z) increased along the sequence");
    if (!env.envelope_ok) throw VerificationFailed("no geometric envelope with alpha < 1 fits the spread sequence");
    return env;
}

App1Check check_app1_bound(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                           double mu, double r) {
    constexpr double kSlack = 1e-12;
    if (x.size() != y.size() || x.size() != z.size() || x.empty())
        throw InvalidParameter("check_app1_bound: vectors must share a positive dimension");
    if (!(mu > 0.0 && mu < 1.0)) throw InvalidParameter("check_app1_bound: mu must lie in (0,1)");
    if (!(r > 0.0)) throw InvalidParameter("check_app1_bound: r must be positive");
    if (std::abs(distance(x, y) - r) > kSlack) throw InvalidParameter("check_app1_bound: ||x-y|| must equal r");
    if (distance(x, z) > r + kSlack || distance(y, z) > r + kSlack)
        throw InvalidParameter("check_app1_bound: z must lie within r of both x and y");
    std::vector<double> xs(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) xs[c] = (1.0 - mu) * x[c] + mu * y[c];
    App1Check out;
    out.lhs = distance(z, xs);
    out.rhs = r * std::sqrt(1.0 - mu + mu * mu);
    out.holds = out.lhs <= out.rhs + kSlack;
    return out;
}

double window_delta(double mu_max, std::size_t window_len) {
    if (window_len == 0) throw InvalidParameter("window_delta: window must be non-empty");
    const double base = (1.0 - mu_max) * (1.0 - mu_max) / 2.0;
    return std::pow(base, static_cast<double>(window_len - 1));
}

HubColumnCheck check_hub_column_bound(const StochasticMatrix& phi, std::span<const AgentIndex> subset,
                                      std::size_t hub_pos, std::span<const double> mu, double mu_max,
                                      std::size_t window_len) {
    if (hub_pos >= subset.size() || phi.size() != subset.size())
        throw InvalidParameter("check_hub_column_bound: hub position or matrix size mismatch");
    const double delta = window_delta(mu_max, window_len);
    HubColumnCheck out;
    out.worst_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < subset.size(); ++l) {
        const double bound = l == hub_pos ? delta * static_cast<double>(window_len) * (1.0 - mu[subset[hub_pos]])
                                          : delta * mu[subset[l]];
        const double entry = phi(l, hub_pos);
        out.worst_ratio = std::min(out.worst_ratio, entry / bound);
        if (entry < bound) out.holds = false;
    }
    return out;
}

}  // namespace dw
