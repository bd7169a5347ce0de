#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "topowave/common.hpp"
#include "topowave/views.hpp"

namespace topowave {

using Edge = std::pair<std::int32_t, std::int32_t>;

/// Simplices of orders 0..K stored as flat vertex tuples. Each tuple is
/// strictly increasing and each per-order list is sorted lexicographically, so
/// a simplex's index is found by binary search.
class SimplicialComplex {
public:
    SimplicialComplex() = default;
    SimplicialComplex(std::int32_t num_vertices, int max_order, Orientation orientation);

    /// Clique complex of an undirected graph on `num_vertices` vertices, capped
    /// at `max_order`. Edges may be given in any order but must satisfy i != j.
    static SimplicialComplex clique_complex(std::int32_t num_vertices, std::vector<Edge> edges,
                                            int max_order, Orientation orientation,
                                            std::size_t budget = 5'000'000);

    /// Closure of an explicit simplex list (each simplex any vertex order).
    static SimplicialComplex from_simplices(std::int32_t num_vertices,
                                            const std::vector<std::vector<std::int32_t>>& simplices,
                                            int max_order, Orientation orientation);

    int max_order() const { return static_cast<int>(flat_.size()) - 1; }
    std::int32_t num_vertices() const { return num_vertices_; }
    Orientation orientation() const { return orientation_; }

    std::size_t count(int k) const;
    std::size_t total_count() const;
    std::span<const std::int32_t> simplex(int k, std::size_t i) const;
    const std::vector<std::int32_t>& flat(int k) const { return flat_.at(static_cast<std::size_t>(k)); }

    /// Index of a sorted vertex tuple, if stored.
    std::optional<std::size_t> index_of(std::span<const std::int32_t> vertices) const;

    /// Every face of every stored simplex is stored one order down.
    bool is_face_closed() const;

    /// Highest order with at least one simplex.
    int top_order() const;

    void dump(std::ostream& out) const;

private:
    std::int32_t num_vertices_ = 0;
    Orientation orientation_ = Orientation::unoriented;
    std::vector<std::vector<std::int32_t>> flat_;
};

/// Vietoris-Rips complex: vertices are all points, edges are pairs whose
/// affinity reaches `epsilon`, higher simplices are cliques of that graph.
SimplicialComplex build_vr_complex(const AffinityGraph& graph, double epsilon, int max_order,
                                   Orientation orientation = Orientation::unoriented,
                                   std::size_t budget = 5'000'000);

/// B_1..B_K. maps[k] has shape N_{k-1} x N_k; maps[0] is an empty 0 x N_0
/// placeholder so that every order has a well-defined column count.
struct BoundaryMatrices {
    std::vector<SparseMatrix> maps;

    int max_order() const { return static_cast<int>(maps.size()) - 1; }
    const SparseMatrix& operator[](int k) const { return maps.at(static_cast<std::size_t>(k)); }
    Eigen::Index count(int k) const { return maps.at(static_cast<std::size_t>(k)).cols(); }
};

/// Entry (i, j) of B_k is (-1)^p (oriented) or 1 (unoriented) when the i-th
/// (k-1)-simplex is the j-th k-simplex with its p-th vertex removed.
BoundaryMatrices boundary_matrices(const SimplicialComplex& complex);

/// X_0 = vertex features; X_{k+1} = B_{k+1}^T X_k for k < K.
std::vector<Matrix> lift_features(const BoundaryMatrices& boundaries, const Matrix& vertex_features);

}  // namespace topowave
