#include "topowave/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <Eigen/Eigenvalues>

namespace topowave {

SparseMatrix hodge_laplacian(const BoundaryMatrices& b, int k) {
    if (k < 0 || k > b.max_order())
        throw DimensionError("hodge_laplacian: order " + std::to_string(k) + " outside [0, " +
                             std::to_string(b.max_order()) + "]");
    const Eigen::Index n = b.count(k);
    SparseMatrix delta(n, n);
    if (k >= 1) delta = SparseMatrix(b[k].transpose()) * b[k];
    if (k + 1 <= b.max_order()) {
        SparseMatrix up = b[k + 1] * SparseMatrix(b[k + 1].transpose());
        delta = k >= 1 ? SparseMatrix(delta + up) : up;
    }
    delta.prune(0.0);  // oriented cancellations leave explicit zeros
    delta.makeCompressed();
    return delta;
}

RandomWalk random_walk(const SparseMatrix& laplacian, Orientation orientation) {
    const Eigen::Index n = laplacian.rows();
    RandomWalk rw;
    rw.degree = Vector::Zero(n);
    SparseMatrix abs_delta = laplacian;
    if (orientation == Orientation::oriented) abs_delta = laplacian.cwiseAbs();
    // Column sums equal row sums because Delta is symmetric.
    for (Eigen::Index j = 0; j < abs_delta.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(abs_delta, j); it; ++it) rw.degree(j) += it.value();

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(abs_delta.nonZeros() + n));
    for (Eigen::Index j = 0; j < abs_delta.outerSize(); ++j) {
        if (rw.degree(j) == 0.0) {
            triplets.emplace_back(j, j, 1.0);
            continue;
        }
        const double inv = 1.0 / rw.degree(j);
        for (SparseMatrix::InnerIterator it(abs_delta, j); it; ++it)
            triplets.emplace_back(it.row(), j, it.value() * inv);
    }
    rw.transition.resize(n, n);
    rw.transition.setFromTriplets(triplets.begin(), triplets.end());
    rw.transition_t = rw.transition.transpose();
    return rw;
}

std::vector<Matrix> dyadic_diffuse(const SparseMatrix& p, const Matrix& x, int num_scales) {
    if (x.rows() != p.cols())
        throw DimensionError("dyadic_diffuse: signal has " + std::to_string(x.rows()) + " rows, operator is " +
                             std::to_string(p.cols()) + " wide");
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(num_scales) + 1);
    out.push_back(p * x);
    Matrix cur = out.back();
    for (int j = 1; j <= num_scales; ++j) {
        // From power 2^{j-1} to 2^j: 2^{j-1} more applications.
        const long steps = 1L << (j - 1);
        for (long s = 0; s < steps; ++s) cur = p * cur;
        out.push_back(cur);
    }
    return out;
}

HeatSolver::HeatSolver(const SparseMatrix& laplacian) {
    if (laplacian.rows() > kDenseHeatCap)
        throw DimensionError("heat_solve: " + std::to_string(laplacian.rows()) +
                             " simplices exceeds the dense verification cap of " + std::to_string(kDenseHeatCap) +
                             "; use the sparse random-walk diffusion path instead");
    const Matrix dense = Matrix(laplacian);
    Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
    if (es.info() != Eigen::Success) throw Error("heat_solve: eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
}

Vector HeatSolver::solve(const Vector& u0, double t) const {
    if (u0.size() != eigenvalues_.size()) throw DimensionError("heat_solve: initial condition has wrong length");
    if (!(t >= 0)) throw ConfigError("heat_solve: time must be non-negative");
    if (t == 0) return u0;
    const Vector coeff = eigenvectors_.transpose() * u0;
    const Vector decay = (-t * eigenvalues_.array()).exp().matrix();
    return eigenvectors_ * coeff.cwiseProduct(decay);
}

Vector heat_solve(const SparseMatrix& laplacian, const Vector& u0, double t) {
    if (t == 0) {
        if (u0.size() != laplacian.rows()) throw DimensionError("heat_solve: initial condition has wrong length");
        return u0;
    }
    return HeatSolver(laplacian).solve(u0, t);
}

int SimplicialGraph::order_of(std::size_t id) const {
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), id);
    return static_cast<int>(it - offsets.begin()) - 1;
}

SimplicialGraph simplicial_graph(const SimplicialComplex& complex) {
    const int K = complex.max_order();
    const bool oriented = complex.orientation() == Orientation::oriented;
    SimplicialGraph g;
    g.offsets.resize(static_cast<std::size_t>(K) + 2, 0);
    for (int k = 0; k <= K; ++k) g.offsets[static_cast<std::size_t>(k) + 1] = g.offsets[static_cast<std::size_t>(k)] + complex.count(k);
    const std::size_t total = g.offsets.back();
    g.self_weight = Vector::Zero(static_cast<Eigen::Index>(total));

    // faces_of[k][i] = (index of face, orientation sign) for the i-th k-simplex.
    struct Incidence {
        std::size_t face;
        double sign;
    };
    std::vector<std::vector<std::vector<Incidence>>> faces_of(static_cast<std::size_t>(K) + 1);
    std::vector<std::int32_t> face;
    for (int k = 1; k <= K; ++k) {
        auto& fk = faces_of[static_cast<std::size_t>(k)];
        fk.resize(complex.count(k));
        for (std::size_t i = 0; i < complex.count(k); ++i) {
            const auto s = complex.simplex(k, i);
            for (int p = 0; p <= k; ++p) {
                face.assign(s.begin(), s.end());
                face.erase(face.begin() + p);
                const auto idx = complex.index_of(face);
                if (!idx) throw Error("simplicial_graph: complex is not face-closed");
                fk[i].push_back({*idx, oriented && (p % 2) ? -1.0 : 1.0});
            }
        }
    }

    std::map<std::pair<std::size_t, std::size_t>, SimplicialGraph::Link> links;
    auto link = [&](std::size_t a, std::size_t b) -> SimplicialGraph::Link& {
        if (a > b) std::swap(a, b);
        auto& l = links[{a, b}];
        l.a = a;
        l.b = b;
        return l;
    };

    for (int k = 0; k <= K; ++k) {
        const std::size_t base = g.offsets[static_cast<std::size_t>(k)];
        // Self weight: number of faces (k >= 1) plus number of cofaces.
        if (k >= 1)
            for (std::size_t i = 0; i < complex.count(k); ++i)
                g.self_weight(static_cast<Eigen::Index>(base + i)) += static_cast<double>(k + 1);
        if (k + 1 <= K) {
            for (const auto& cofaces : faces_of[static_cast<std::size_t>(k) + 1])
                for (const auto& inc : cofaces) g.self_weight(static_cast<Eigen::Index>(base + inc.face)) += 1.0;
        }
        // Upper adjacency: two faces of a common (k+1)-simplex.
        if (k + 1 <= K) {
            for (const auto& cofaces : faces_of[static_cast<std::size_t>(k) + 1]) {
                for (std::size_t x = 0; x < cofaces.size(); ++x) {
                    for (std::size_t y = x + 1; y < cofaces.size(); ++y) {
                        auto& l = link(base + cofaces[x].face, base + cofaces[y].face);
                        l.upper_adjacent = true;
                        l.upper += cofaces[x].sign * cofaces[y].sign;
                    }
                }
            }
        }
        // Lower adjacency: two k-simplices sharing a (k-1)-face.
        if (k >= 1) {
            std::vector<std::vector<Incidence>> cofaces_of(complex.count(k - 1));
            const auto& fk = faces_of[static_cast<std::size_t>(k)];
            for (std::size_t i = 0; i < fk.size(); ++i)
                for (const auto& inc : fk[i]) cofaces_of[inc.face].push_back({i, inc.sign});
            for (const auto& group : cofaces_of) {
                for (std::size_t x = 0; x < group.size(); ++x) {
                    for (std::size_t y = x + 1; y < group.size(); ++y) {
                        auto& l = link(base + group[x].face, base + group[y].face);
                        l.lower_adjacent = true;
                        l.lower += group[x].sign * group[y].sign;
                    }
                }
            }
        }
    }

    std::vector<Triplet> triplets;
    for (std::size_t i = 0; i < total; ++i) {
        const double w = g.self_weight(static_cast<Eigen::Index>(i));
        if (w != 0.0) triplets.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), w);
    }
    g.links.reserve(links.size());
    for (auto& [key, l] : links) {
        const double w = l.lower + l.upper;
        if (w != 0.0) {
            triplets.emplace_back(static_cast<Eigen::Index>(l.a), static_cast<Eigen::Index>(l.b), w);
            triplets.emplace_back(static_cast<Eigen::Index>(l.b), static_cast<Eigen::Index>(l.a), w);
        }
        g.links.push_back(l);
    }
    g.laplacian.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    g.laplacian.setFromTriplets(triplets.begin(), triplets.end());
    return g;
}

void dump_triplets(std::ostream& out, const SparseMatrix& m) {
    for (Eigen::Index j = 0; j < m.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(m, j); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

ComplexOperators assemble_operators(const SimplicialComplex& complex) {
    ComplexOperators ops;
    ops.boundaries = boundary_matrices(complex);
    const int K = complex.max_order();
    for (int k = 0; k <= K; ++k) {
        ops.laplacians.push_back(hodge_laplacian(ops.boundaries, k));
        ops.walks.push_back(random_walk(ops.laplacians.back(), complex.orientation()));
    }
    return ops;
}

}  // namespace topowave
