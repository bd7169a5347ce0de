#include "topowave/complex.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace topowave {

namespace {

// Lexicographic comparison of the i-th tuple in a flat array against `key`.
bool tuple_less(const std::int32_t* a, const std::int32_t* b, std::size_t width) {
    return std::lexicographical_compare(a, a + width, b, b + width);
}

// Sorted intersection of two ascending ranges, appended to `out`.
void intersect_into(std::span<const std::int32_t> a, std::span<const std::int32_t> b,
                    std::vector<std::int32_t>& out) {
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
}

// Candidate sets stored CSR style: cand(i) = data[offsets[i], offsets[i+1]).
struct CandidateLists {
    std::vector<std::size_t> offsets{0};
    std::vector<std::int32_t> data;

    std::span<const std::int32_t> at(std::size_t i) const {
        return {data.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }
    std::size_t total() const { return data.size(); }
};

}  // namespace

SimplicialComplex::SimplicialComplex(std::int32_t num_vertices, int max_order, Orientation orientation)
    : num_vertices_(num_vertices), orientation_(orientation) {
    if (max_order < 0) throw ConfigError("maximum simplex order must be >= 0");
    flat_.resize(static_cast<std::size_t>(max_order) + 1);
    flat_[0].resize(static_cast<std::size_t>(num_vertices));
    for (std::int32_t v = 0; v < num_vertices; ++v) flat_[0][static_cast<std::size_t>(v)] = v;
}

std::size_t SimplicialComplex::count(int k) const {
    if (k < 0 || k > max_order()) return 0;
    return flat_[static_cast<std::size_t>(k)].size() / static_cast<std::size_t>(k + 1);
}

std::size_t SimplicialComplex::total_count() const {
    std::size_t n = 0;
    for (int k = 0; k <= max_order(); ++k) n += count(k);
    return n;
}

std::span<const std::int32_t> SimplicialComplex::simplex(int k, std::size_t i) const {
    const std::size_t w = static_cast<std::size_t>(k) + 1;
    return {flat_[static_cast<std::size_t>(k)].data() + i * w, w};
}

std::optional<std::size_t> SimplicialComplex::index_of(std::span<const std::int32_t> vertices) const {
    if (vertices.empty()) return std::nullopt;
    const int k = static_cast<int>(vertices.size()) - 1;
    if (k > max_order()) return std::nullopt;
    const std::size_t w = vertices.size();
    const auto& data = flat_[static_cast<std::size_t>(k)];
    std::size_t lo = 0, hi = data.size() / w;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (tuple_less(data.data() + mid * w, vertices.data(), w)) lo = mid + 1;
        else hi = mid;
    }
    if (lo < data.size() / w && std::equal(vertices.begin(), vertices.end(), data.begin() + static_cast<std::ptrdiff_t>(lo * w)))
        return lo;
    return std::nullopt;
}

bool SimplicialComplex::is_face_closed() const {
    std::vector<std::int32_t> face;
    for (int k = 1; k <= max_order(); ++k) {
        for (std::size_t i = 0; i < count(k); ++i) {
            const auto s = simplex(k, i);
            for (int p = 0; p <= k; ++p) {
                face.clear();
                for (int q = 0; q <= k; ++q)
                    if (q != p) face.push_back(s[static_cast<std::size_t>(q)]);
                if (!index_of(face)) return false;
            }
        }
    }
    return true;
}

int SimplicialComplex::top_order() const {
    int top = 0;
    for (int k = 0; k <= max_order(); ++k)
        if (count(k) > 0) top = k;
    return top;
}

void SimplicialComplex::dump(std::ostream& out) const {
    for (int k = 0; k <= max_order(); ++k) {
        for (std::size_t i = 0; i < count(k); ++i) {
            out << k;
            for (auto v : simplex(k, i)) out << '\t' << v;
            out << '\n';
        }
    }
}

SimplicialComplex SimplicialComplex::clique_complex(std::int32_t num_vertices, std::vector<Edge> edges,
                                                    int max_order, Orientation orientation,
                                                    std::size_t budget) {
    SimplicialComplex sc(num_vertices, max_order, orientation);
    if (static_cast<std::size_t>(num_vertices) > budget)
        throw BudgetError(0, static_cast<std::size_t>(num_vertices), budget);
    if (max_order == 0) return sc;

    for (auto& e : edges) {
        if (e.first == e.second) throw Error("clique_complex: self-loop edge");
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (edges.size() > budget) throw BudgetError(1, edges.size(), budget);

    // Upper neighbour lists (neighbours with a larger index), ascending.
    CandidateLists upper;
    {
        std::vector<std::size_t> deg(static_cast<std::size_t>(num_vertices) + 1, 0);
        for (const auto& [i, j] : edges) ++deg[static_cast<std::size_t>(i) + 1];
        upper.offsets.assign(static_cast<std::size_t>(num_vertices) + 1, 0);
        for (std::size_t v = 0; v < static_cast<std::size_t>(num_vertices); ++v)
            upper.offsets[v + 1] = upper.offsets[v] + deg[v + 1];
        upper.data.resize(edges.size());
        std::vector<std::size_t> fill(upper.offsets.begin(), upper.offsets.end() - 1);
        for (const auto& [i, j] : edges) upper.data[fill[static_cast<std::size_t>(i)]++] = j;
    }

    auto& e1 = sc.flat_[1];
    e1.reserve(edges.size() * 2);
    for (const auto& [i, j] : edges) {
        e1.push_back(i);
        e1.push_back(j);
    }
    if (max_order == 1) return sc;

    // Ordered extension: a k-simplex is only extended by common upper
    // neighbours of all its vertices, so every clique is produced once and in
    // lexicographic order.
    CandidateLists cand;
    cand.data.reserve(edges.size());
    for (const auto& [i, j] : edges) {
        intersect_into(upper.at(static_cast<std::size_t>(i)), upper.at(static_cast<std::size_t>(j)), cand.data);
        cand.offsets.push_back(cand.data.size());
    }

    for (int k = 1; k < max_order; ++k) {
        const std::size_t projected = cand.total();
        if (projected > budget) throw BudgetError(k + 1, projected, budget);
        const std::size_t n_k = sc.count(k);
        auto& next = sc.flat_[static_cast<std::size_t>(k) + 1];
        next.reserve(projected * static_cast<std::size_t>(k + 2));
        const bool extend_again = k + 1 < max_order;
        CandidateLists next_cand;
        for (std::size_t s = 0; s < n_k; ++s) {
            const auto base = sc.simplex(k, s);
            const auto c = cand.at(s);
            for (std::size_t t = 0; t < c.size(); ++t) {
                next.insert(next.end(), base.begin(), base.end());
                next.push_back(c[t]);
                if (extend_again) {
                    // Candidates after c[t] that are also neighbours of c[t].
                    intersect_into(c.subspan(t + 1), upper.at(static_cast<std::size_t>(c[t])), next_cand.data);
                    next_cand.offsets.push_back(next_cand.data.size());
                }
            }
        }
        if (!extend_again) break;
        cand = std::move(next_cand);
    }
    return sc;
}

SimplicialComplex SimplicialComplex::from_simplices(std::int32_t num_vertices,
                                                    const std::vector<std::vector<std::int32_t>>& simplices,
                                                    int max_order, Orientation orientation) {
    SimplicialComplex sc(num_vertices, max_order, orientation);
    std::vector<std::set<std::vector<std::int32_t>>> by_order(static_cast<std::size_t>(max_order) + 1);
    for (auto s : simplices) {
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw Error("simplex has repeated vertices");
        if (s.empty() || s.back() >= num_vertices || s.front() < 0) throw Error("simplex vertex out of range");
        const int k = static_cast<int>(s.size()) - 1;
        if (k > max_order) throw Error("simplex order exceeds the complex's maximum order");
        // Every non-empty subset is a face.
        const std::size_t m = s.size();
        for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
            std::vector<std::int32_t> face;
            for (std::size_t b = 0; b < m; ++b)
                if (mask & (1u << b)) face.push_back(s[b]);
            if (face.size() >= 2) by_order[face.size() - 1].insert(face);
        }
    }
    for (int k = 1; k <= max_order; ++k) {
        auto& dst = sc.flat_[static_cast<std::size_t>(k)];
        for (const auto& s : by_order[static_cast<std::size_t>(k)]) dst.insert(dst.end(), s.begin(), s.end());
    }
    return sc;
}

SimplicialComplex build_vr_complex(const AffinityGraph& graph, double epsilon, int max_order,
                                   Orientation orientation, std::size_t budget) {
    if (max_order < 0) throw ConfigError("maximum simplex order must be >= 0");
    if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("VR threshold must lie in (0, 1)");
    return SimplicialComplex::clique_complex(static_cast<std::int32_t>(graph.n), graph.edges(epsilon),
                                             max_order, orientation, budget);
}

BoundaryMatrices boundary_matrices(const SimplicialComplex& complex) {
    BoundaryMatrices out;
    const int K = complex.max_order();
    out.maps.resize(static_cast<std::size_t>(K) + 1);
    out.maps[0].resize(0, static_cast<Eigen::Index>(complex.count(0)));
    const bool oriented = complex.orientation() == Orientation::oriented;
    std::vector<std::int32_t> face;
    for (int k = 1; k <= K; ++k) {
        const std::size_t n_k = complex.count(k);
        std::vector<Triplet> triplets;
        triplets.reserve(n_k * static_cast<std::size_t>(k + 1));
        for (std::size_t j = 0; j < n_k; ++j) {
            const auto s = complex.simplex(k, j);
            for (int p = 0; p <= k; ++p) {
                face.clear();
                for (int q = 0; q <= k; ++q)
                    if (q != p) face.push_back(s[static_cast<std::size_t>(q)]);
                const auto i = complex.index_of(face);
                if (!i) throw Error("boundary_matrices: face missing from complex (not face-closed)");
                const double sign = oriented && (p % 2 == 1) ? -1.0 : 1.0;
                triplets.emplace_back(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(j), sign);
            }
        }
        SparseMatrix& b = out.maps[static_cast<std::size_t>(k)];
        b.resize(static_cast<Eigen::Index>(complex.count(k - 1)), static_cast<Eigen::Index>(n_k));
        b.setFromTriplets(triplets.begin(), triplets.end());
    }
    return out;
}

std::vector<Matrix> lift_features(const BoundaryMatrices& boundaries, const Matrix& vertex_features) {
    if (vertex_features.rows() != boundaries.count(0))
        throw DimensionError("lift_features: vertex feature rows (" + std::to_string(vertex_features.rows()) +
                             ") do not match N_0 (" + std::to_string(boundaries.count(0)) + ")");
    std::vector<Matrix> x;
    x.reserve(static_cast<std::size_t>(boundaries.max_order()) + 1);
    x.push_back(vertex_features);
    for (int k = 1; k <= boundaries.max_order(); ++k)
        x.push_back(boundaries[k].transpose() * x.back());
    return x;
}

}  // namespace topowave
