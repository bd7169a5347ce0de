#pragma once

#include <cstdint>
#include <vector>

#include "topowave/common.hpp"

namespace topowave {

/// One learnable feature-weight vector per view.
struct ViewWeights {
    std::vector<Vector> alpha;

    /// 1 + U[-0.01, 0.01] per entry, drawn from `seed`.
    static ViewWeights init(int num_views, Eigen::Index dim, std::uint64_t seed);
    static ViewWeights identity(int num_views, Eigen::Index dim);

    int num_views() const { return static_cast<int>(alpha.size()); }
};

/// Sparse symmetric Gaussian affinities. Only pairs at or above the cutoff are
/// stored; the diagonal is always stored as 1.
struct AffinityGraph {
    Eigen::Index n = 0;
    SparseMatrix weights;

    /// Upper-triangle pairs (i < j) with affinity >= threshold, in (i, j)
    /// lexicographic order.
    std::vector<std::pair<std::int32_t, std::int32_t>> edges(double threshold) const;
};

/// Elementwise reweighting: row i of the result is alpha .* points.row(i).
Matrix reweight(const Matrix& points, const Vector& alpha);

/// exp(-|x_i - x_j|^2 / (2 sigma^2)) for every pair whose affinity reaches
/// `cutoff`.
AffinityGraph kernel_affinity(const Matrix& points, double sigma, double cutoff);

/// Euclidean radius equivalent to an affinity threshold: sigma * sqrt(-2 ln eps).
double affinity_radius(double sigma, double epsilon);

}  // namespace topowave
