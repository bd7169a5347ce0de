#include "topowave/views.hpp"

#include <cmath>
#include <random>

namespace topowave {

ViewWeights ViewWeights::init(int num_views, Eigen::Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    ViewWeights w;
    for (int v = 0; v < num_views; ++v) {
        Vector a(dim);
        for (Eigen::Index c = 0; c < dim; ++c) a(c) = 1.0 + noise(rng);
        w.alpha.push_back(std::move(a));
    }
    return w;
}

ViewWeights ViewWeights::identity(int num_views, Eigen::Index dim) {
    ViewWeights w;
    w.alpha.assign(static_cast<std::size_t>(num_views), Vector::Ones(dim));
    return w;
}

std::vector<std::pair<std::int32_t, std::int32_t>> AffinityGraph::edges(double threshold) const {
    std::vector<std::pair<std::int32_t, std::int32_t>> out;
    // Bucket by row so the output comes out sorted by (i, j).
    std::vector<std::vector<std::int32_t>> upper(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < weights.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(weights, j); it; ++it) {
            if (it.row() < j && it.value() >= threshold)
                upper[static_cast<std::size_t>(it.row())].push_back(static_cast<std::int32_t>(j));
        }
    }
    for (std::size_t i = 0; i < upper.size(); ++i)
        for (std::int32_t j : upper[i]) out.emplace_back(static_cast<std::int32_t>(i), j);
    return out;
}

Matrix reweight(const Matrix& points, const Vector& alpha) {
    if (alpha.size() != points.cols())
        throw DimensionError("reweight: weight vector has length " + std::to_string(alpha.size()) +
                             " but the cloud has " + std::to_string(points.cols()) + " features");
    return points * alpha.asDiagonal();
}

double affinity_radius(double sigma, double epsilon) {
    return sigma * std::sqrt(-2.0 * std::log(epsilon));
}

AffinityGraph kernel_affinity(const Matrix& points, double sigma, double cutoff) {
    if (!(sigma > 0)) throw ConfigError("kernel bandwidth must be positive");
    if (!(cutoff >= 0 && cutoff < 1)) throw ConfigError("affinity cutoff must lie in [0, 1)");
    const Eigen::Index n = points.rows();
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    // Row-major copy so each point is contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x = points;
    const Eigen::Index d = x.cols();

    std::vector<std::vector<Triplet>> rows(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
        const auto i = static_cast<Eigen::Index>(ui);
        auto& out = rows[ui];
        const double* xi = x.data() + i * d;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double* xj = x.data() + j * d;
            double dist2 = 0;
            for (Eigen::Index c = 0; c < d; ++c) {
                const double diff = xi[c] - xj[c];
                dist2 += diff * diff;
            }
            const double a = std::exp(-dist2 * inv_two_sigma2);
            if (a >= cutoff && a > 0) out.emplace_back(i, j, a);
        }
    });

    std::vector<Triplet> triplets;
    std::size_t total = static_cast<std::size_t>(n);
    for (const auto& r : rows) total += 2 * r.size();
    triplets.reserve(total);
    for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
    for (const auto& r : rows) {
        for (const auto& t : r) {
            triplets.push_back(t);
            triplets.emplace_back(t.col(), t.row(), t.value());
        }
    }
    AffinityGraph g;
    g.n = n;
    g.weights.resize(n, n);
    g.weights.setFromTriplets(triplets.begin(), triplets.end());
    return g;
}

}  // namespace topowave
