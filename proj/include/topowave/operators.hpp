#pragma once

#include <iosfwd>
#include <vector>

#include "topowave/common.hpp"
#include "topowave/complex.hpp"

namespace topowave {

/// Delta_k = B_k^T B_k + B_{k+1} B_{k+1}^T. The lower term vanishes at k = 0
/// and the upper term at k = K.
SparseMatrix hodge_laplacian(const BoundaryMatrices& boundaries, int k);

/// Column-stochastic walk P = |Delta| D^{-1}, D = diag(|Delta| 1). Columns with
/// zero degree (isolated simplices) become absorbing self-loops.
struct RandomWalk {
    SparseMatrix transition;
    SparseMatrix transition_t;  // cached transpose for reverse-mode products
    Vector degree;

    Eigen::Index size() const { return transition.rows(); }
};

RandomWalk random_walk(const SparseMatrix& laplacian, Orientation orientation);

/// [P^{2^0} X, P^{2^1} X, ..., P^{2^J} X] by repeated sparse application
/// (2^J products in total; no matrix powers are formed).
std::vector<Matrix> dyadic_diffuse(const SparseMatrix& transition, const Matrix& x, int num_scales);

/// Largest Laplacian handled by the dense heat solver.
inline constexpr Eigen::Index kDenseHeatCap = 2000;

/// exp(-t Delta) u0 via a symmetric eigendecomposition. Verification-only;
/// the learning path never exponentiates Delta.
Vector heat_solve(const SparseMatrix& laplacian, const Vector& u0, double t);

/// Reusable eigendecomposition for many (u0, t) queries on one Laplacian.
class HeatSolver {
public:
    explicit HeatSolver(const SparseMatrix& laplacian);
    Vector solve(const Vector& u0, double t) const;
    const Vector& eigenvalues() const { return eigenvalues_; }

private:
    Vector eigenvalues_;
    Matrix eigenvectors_;
};

/// Graph whose vertices are all simplices (ascending order, then index) and
/// whose edges join upper- or lower-adjacent simplices of equal order. Each
/// edge carries the signed contribution of its shared face and of its shared
/// coface; each vertex carries its face count plus coface count. The
/// resulting Laplacian is assembled from this adjacency alone, without
/// touching the boundary matrices.
struct SimplicialGraph {
    struct Link {
        std::size_t a = 0, b = 0;   // global vertex ids, a < b
        double lower = 0.0;         // sign product through the shared face
        double upper = 0.0;         // sign product through the shared coface
        bool lower_adjacent = false;
        bool upper_adjacent = false;
    };

    std::vector<std::size_t> offsets;  // offsets[k] = first global id of order k
    std::vector<Link> links;
    Vector self_weight;
    SparseMatrix laplacian;

    std::size_t size() const { return offsets.empty() ? 0 : offsets.back(); }
    int order_of(std::size_t id) const;
};

SimplicialGraph simplicial_graph(const SimplicialComplex& complex);

/// One "row col value" line per stored entry.
void dump_triplets(std::ostream& out, const SparseMatrix& m);

/// Everything the scattering stage needs for one complex.
struct ComplexOperators {
    BoundaryMatrices boundaries;
    std::vector<SparseMatrix> laplacians;
    std::vector<RandomWalk> walks;
};

ComplexOperators assemble_operators(const SimplicialComplex& complex);

}  // namespace topowave
