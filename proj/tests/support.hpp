#pragma once

// Independent reference implementations used as oracles by the unit tests and
// the acceptance runner. Everything here is written the slow, obvious way and
// shares no code with the library beyond the basic data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "topowave/common.hpp"

namespace topowave::oracle {

inline Matrix uniform_cloud(std::mt19937_64& rng, int n, int d, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix x(n, d);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) x(i, c) = u(rng);
    return x;
}

inline Matrix gaussian_cloud(std::mt19937_64& rng, int n, int d, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    Matrix x(n, d);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) x(i, c) = g(rng);
    return x;
}

inline double gaussian_affinity(const Matrix& x, Eigen::Index i, Eigen::Index j, double sigma) {
    double d2 = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) d2 += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

/// Every vertex subset of size <= max_order + 1 whose pairs all reach eps,
/// grouped by order. Subsets are enumerated by bitmask.
inline std::vector<std::set<std::vector<std::int32_t>>> brute_force_vr(const Matrix& x, double sigma, double eps,
                                                                       int max_order) {
    const int n = static_cast<int>(x.rows());
    std::vector<std::set<std::vector<std::int32_t>>> out(static_cast<std::size_t>(max_order) + 1);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const int size = __builtin_popcount(mask);
        if (size > max_order + 1) continue;
        std::vector<std::int32_t> s;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) s.push_back(i);
        bool ok = true;
        for (std::size_t a = 0; a < s.size() && ok; ++a)
            for (std::size_t b = a + 1; b < s.size() && ok; ++b)
                ok = gaussian_affinity(x, s[a], s[b], sigma) >= eps;
        if (ok) out[static_cast<std::size_t>(size) - 1].insert(s);
    }
    return out;
}

/// Dense boundary matrix between two explicit simplex lists.
inline Matrix dense_boundary(const std::vector<std::vector<std::int32_t>>& faces,
                             const std::vector<std::vector<std::int32_t>>& cells, bool oriented) {
    Matrix b = Matrix::Zero(static_cast<Eigen::Index>(faces.size()), static_cast<Eigen::Index>(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j)
        for (std::size_t p = 0; p < cells[j].size(); ++p) {
            auto face = cells[j];
            face.erase(face.begin() + static_cast<std::ptrdiff_t>(p));
            const auto it = std::find(faces.begin(), faces.end(), face);
            if (it == faces.end()) continue;
            b(it - faces.begin(), static_cast<Eigen::Index>(j)) = oriented ? (p % 2 == 0 ? 1.0 : -1.0) : 1.0;
        }
    return b;
}

/// P = |L| D^{-1} with zero-degree columns replaced by e_i, densely.
inline Matrix dense_walk(const Matrix& laplacian) {
    const Matrix a = laplacian.cwiseAbs();
    Matrix p = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double deg = a.col(j).sum();
        if (deg == 0.0) p(j, j) = 1.0;
        else p.col(j) = a.col(j) / deg;
    }
    return p;
}

inline Matrix matrix_power(const Matrix& p, long e) {
    Matrix r = Matrix::Identity(p.rows(), p.cols());
    for (long i = 0; i < e; ++i) r = p * r;
    return r;
}

/// Mean-pooled first- and second-order scattering of one order, computed
/// with explicit dense powers and loops; block order raw, low, s1, s2.
inline std::vector<double> two_loop_scattering(const Matrix& p, const Matrix& x, int J) {
    std::vector<double> out;
    const Eigen::Index n = x.rows(), d = x.cols();
    auto pool = [&](const Matrix& m) {
        for (Eigen::Index c = 0; c < d; ++c) {
            double s = 0;
            for (Eigen::Index i = 0; i < n; ++i) s += m(i, c);
            out.push_back(n > 0 ? s / static_cast<double>(n) : 0.0);
        }
    };
    auto psi = [&](int j) { return Matrix(matrix_power(p, 1L << j) - matrix_power(p, 1L << (j - 1))); };
    pool(x);
    pool(matrix_power(p, 1L << J) * x);
    for (int j = 1; j <= J; ++j) pool((psi(j) * x).cwiseAbs());
    for (int j = 1; j <= J; ++j)
        for (int jp = j + 1; jp <= J; ++jp) pool((psi(jp) * (psi(j) * x).cwiseAbs()).cwiseAbs());
    return out;
}

/// Merge heights of single-linkage clustering, computed by repeatedly merging
/// the two closest clusters (O(n^3)); returned in ascending order.
inline std::vector<double> single_linkage_heights(const Matrix& x) {
    const Eigen::Index n = x.rows();
    std::vector<int> cluster(static_cast<std::size_t>(n));
    std::iota(cluster.begin(), cluster.end(), 0);
    std::vector<double> heights;
    for (Eigen::Index merges = 0; merges + 1 < n; ++merges) {
        double best = std::numeric_limits<double>::infinity();
        int ca = -1, cb = -1;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (cluster[static_cast<std::size_t>(i)] == cluster[static_cast<std::size_t>(j)]) continue;
                const double dist = (x.row(i) - x.row(j)).norm();
                if (dist < best) best = dist, ca = cluster[static_cast<std::size_t>(i)], cb = cluster[static_cast<std::size_t>(j)];
            }
        heights.push_back(best);
        for (auto& c : cluster)
            if (c == cb) c = ca;
    }
    std::sort(heights.begin(), heights.end());
    return heights;
}

/// Area under the ROC curve by counting all positive/negative pairs.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[i] != 1 || labels[j] != 0) continue;
            den += 1;
            if (scores[i] > scores[j]) num += 1;
            else if (scores[i] == scores[j]) num += 0.5;
        }
    return num / den;
}

/// |a - n| / max(|a|, |n|, floor), maximised over entries.
inline double max_relative_error(const Matrix& analytic, const Matrix& numeric, double floor = 1e-8) {
    double worst = 0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic.data()[i], m = numeric.data()[i];
        worst = std::max(worst, std::abs(a - m) / std::max({std::abs(a), std::abs(m), floor}));
    }
    return worst;
}

}  // namespace topowave::oracle
