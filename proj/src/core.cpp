#include "dwsim/core.hpp"

#include <algorithm>
#include <cmath>

namespace dw {

Matrix Matrix::identity(std::size_t m) {
    Matrix out(m, m);
    for (std::size_t k = 0; k < m; ++k) out(k, k) = 1.0;
    return out;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix out(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != out.cols())
            throw InvalidParameter("ragged matrix: row " + std::to_string(r + 1) + " has " +
                                   std::to_string(rows[r].size()) + " entries, expected " +
                                   std::to_string(out.cols()));
        std::copy(rows[r].begin(), rows[r].end(), out.row(r).begin());
    }
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidParameter("matrix product: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double s = a(r, k);
            if (s == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += s * b(k, c);
        }
    return out;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double g = b[k] - a[k];
        acc += g * g;
    }
    return std::sqrt(acc);
}

double norm(std::span<const double> v) {
    double acc = 0.0;
    for (double c : v) acc += c * c;
    return std::sqrt(acc);
}

AgentParams::AgentParams(std::size_t d, std::vector<double> r, std::vector<double> mu)
    : d_(d), r_(std::move(r)), mu_(std::move(mu)) {
    if (r_.size() < 3) throw InvalidParameter("agent count n must be >= 3, got " + std::to_string(r_.size()));
    if (d_ < 1) throw InvalidParameter("opinion dimension d must be >= 1");
    if (mu_.size() != r_.size())
        throw InvalidParameter("mu has " + std::to_string(mu_.size()) + " entries, r has " +
                               std::to_string(r_.size()));
    for (std::size_t i = 0; i < r_.size(); ++i) {
        if (!(r_[i] > 0.0) || !std::isfinite(r_[i]))
            throw InvalidParameter("confidence bound r_" + std::to_string(i + 1) + " must be positive and finite");
        if (!(mu_[i] > 0.0 && mu_[i] < 1.0))
            throw InvalidParameter("weighting factor mu_" + std::to_string(i + 1) + " must lie in (0,1)");
    }
    auto [rlo, rhi] = std::minmax_element(r_.begin(), r_.end());
    auto [mlo, mhi] = std::minmax_element(mu_.begin(), mu_.end());
    r_min_ = *rlo;
    r_max_ = *rhi;
    mu_min_ = *mlo;
    mu_max_ = *mhi;
}

OpinionState::OpinionState(std::uint64_t time, Matrix opinions) : t(time), x(std::move(opinions)) {
    for (double v : x.data())
        if (!std::isfinite(v)) throw InvalidParameter("opinion entries must be finite");
}

void OpinionState::check_conforms(const AgentParams& params) const {
    if (x.rows() != params.n() || x.cols() != params.d())
        throw InvalidParameter("state is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                               ", params expect " + std::to_string(params.n()) + "x" +
                               std::to_string(params.d()));
}

UnorderedPair::UnorderedPair(AgentIndex a, AgentIndex b) : i(std::min(a, b)), j(std::max(a, b)) {
    if (a == b) throw InvalidParameter("pair members must differ");
}

IndexSet normalized_subset(std::span<const AgentIndex> subset, std::size_t n) {
    IndexSet out(subset.begin(), subset.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (!out.empty() && out.back() >= n)
        throw InvalidParameter("agent index " + std::to_string(out.back() + 1) + " out of range");
    return out;
}

double diameter(const OpinionState& state, std::span<const AgentIndex> subset) {
    if (subset.empty()) throw InvalidParameter("diameter of an empty subset");
    for (AgentIndex k : subset)
        if (k >= state.n()) throw InvalidParameter("agent index " + std::to_string(k + 1) + " out of range");
    double best = 0.0;
    for (std::size_t a = 0; a < subset.size(); ++a)
        for (std::size_t b = a + 1; b < subset.size(); ++b)
            best = std::max(best, distance(state.x.row(subset[a]), state.x.row(subset[b])));
    return best;
}

}  // namespace dw
