#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace topowave {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Error hierarchy. Every failure surfaced to a user derives from Error so the
// CLI can map it onto an exit code in one place.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LoadError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Raised when a Vietoris-Rips construction would exceed the simplex budget.
class BudgetError : public Error {
public:
    BudgetError(int order, std::size_t projected, std::size_t budget);
    int order() const { return order_; }
    std::size_t projected() const { return projected_; }

private:
    int order_;
    std::size_t projected_;
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(int epoch);
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

enum class Orientation { unoriented, oriented };

std::string to_string(Orientation o);
Orientation parse_orientation(const std::string& s);

// Number of worker threads used by parallel loops. Defaults to hardware
// concurrency; the CLI overrides it from --threads.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks, one per
/// worker; callers that need determinism write into pre-sized slots indexed
/// by i and merge afterwards in index order.
template <typename Body>
void parallel_for(std::size_t n, Body&& body);

}  // namespace topowave

#include "topowave/detail/parallel.hpp"
