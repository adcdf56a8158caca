#pragma once

// Basic value types for the heterogeneous Deffuant-Weisbuch model: agent
// parameters, opinion state, agent pairs, and the error hierarchy shared by
// every module.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dw {

/// Raised when an operation's preconditions are violated.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by verification routines when a checked property does not hold.
class VerificationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a stochastic matrix is reducible or periodic.
class NotErgodic : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 0-based agent index. Interchange files use 1-based indices.
using AgentIndex = std::size_t;
using IndexSet = std::vector<AgentIndex>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t m);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

double distance(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// Per-agent confidence bounds and weighting factors.
///
/// Invariants: n >= 3, d >= 1, every r_i > 0, every mu_i in (0,1). The
/// constructor throws InvalidParameter otherwise.
class AgentParams {
public:
    AgentParams(std::size_t d, std::vector<double> r, std::vector<double> mu);

    std::size_t n() const { return r_.size(); }
    std::size_t d() const { return d_; }
    double r(AgentIndex i) const { return r_[i]; }
    double mu(AgentIndex i) const { return mu_[i]; }
    const std::vector<double>& r() const { return r_; }
    const std::vector<double>& mu() const { return mu_; }

    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    double mu_min() const { return mu_min_; }
    double mu_max() const { return mu_max_; }

private:
    std::size_t d_;
    std::vector<double> r_;
    std::vector<double> mu_;
    double r_min_, r_max_, mu_min_, mu_max_;
};

/// Opinion matrix X(t) (n rows, d columns) at time t.
struct OpinionState {
    std::uint64_t t = 0;
    Matrix x;

    OpinionState() = default;
    OpinionState(std::uint64_t time, Matrix opinions);

    std::size_t n() const { return x.rows(); }
    std::size_t d() const { return x.cols(); }
    std::span<const double> opinion(AgentIndex i) const { return x.row(i); }

    /// Throws InvalidParameter when the shape does not match params.
    void check_conforms(const AgentParams& params) const;

    bool operator==(const OpinionState&) const = default;
};

/// Unordered agent pair, stored with i < j.
struct UnorderedPair {
    AgentIndex i = 0;
    AgentIndex j = 1;

    UnorderedPair() = default;
    /// Normalizes the order; throws InvalidParameter when a == b.
    UnorderedPair(AgentIndex a, AgentIndex b);

    bool valid_for(std::size_t n) const { return i < j && j < n; }
    bool contains(AgentIndex k) const { return k == i || k == j; }

    auto operator<=>(const UnorderedPair&) const = default;
};

/// Max pairwise Euclidean distance over `subset`. Singleton gives 0; an empty
/// subset or an out-of-range index throws InvalidParameter.
double diameter(const OpinionState& state, std::span<const AgentIndex> subset);

/// Sorted, de-duplicated copy; throws on out-of-range indices.
IndexSet normalized_subset(std::span<const AgentIndex> subset, std::size_t n);

}  // namespace dw
