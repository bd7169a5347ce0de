#pragma once

#include <vector>

#include "topowave/common.hpp"

namespace topowave {

struct PersistencePair {
    double birth = 0.0;
    double death = 0.0;
    double lifetime() const { return death - birth; }
};

/// Zero-dimensional persistence of the Euclidean edge filtration.
struct PersistenceSummary {
    std::vector<PersistencePair> finite;  // one per merge, in merge order
    PersistencePair essential;            // dies at the filtration maximum

    static constexpr int kTopLifetimes = 8;
    static constexpr int kLength = 4 + kTopLifetimes;

    /// [finite count, mean, max, total persistence, 8 longest lifetimes
    /// (descending, zero-padded)].
    Vector vector() const;
};

/// Kruskal order over all pairwise distances, ties broken by (i, j);
/// every class is born at 0 and dies at its merge distance.
PersistenceSummary h0_persistence(const Matrix& points);

/// Number of connected components of the graph joining points closer than
/// `radius` (inclusive).
int count_components(const Matrix& points, double radius);

/// H1 barcode of the Vietoris-Rips filtration over GF(2) by standard column
/// reduction. Cubic cost; restricted to at most 40 points.
std::vector<PersistencePair> h1_persistence(const Matrix& points);

}  // namespace topowave
