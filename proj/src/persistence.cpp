#include "topowave/persistence.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <tuple>

namespace topowave {

namespace {

struct WeightedEdge {
    double length;
    std::int32_t i, j;
};

std::vector<WeightedEdge> sorted_edges(const Matrix& points) {
    const Eigen::Index n = points.rows();
    std::vector<WeightedEdge> edges;
    edges.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            edges.push_back({(points.row(i) - points.row(j)).norm(), static_cast<std::int32_t>(i),
                             static_cast<std::int32_t>(j)});
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return std::tie(a.length, a.i, a.j) < std::tie(b.length, b.i, b.j);
    });
    return edges;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<int> rank_;
};

}  // namespace

Vector PersistenceSummary::vector() const {
    Vector v = Vector::Zero(kLength);
    std::vector<double> life;
    for (const auto& p : finite) life.push_back(p.lifetime());
    std::sort(life.begin(), life.end(), std::greater<>());
    v(0) = static_cast<double>(life.size());
    if (!life.empty()) {
        const double total = std::accumulate(life.begin(), life.end(), 0.0);
        v(1) = total / static_cast<double>(life.size());
        v(2) = life.front();
        v(3) = total;
    }
    for (int k = 0; k < kTopLifetimes && k < static_cast<int>(life.size()); ++k) v(4 + k) = life[static_cast<std::size_t>(k)];
    return v;
}

PersistenceSummary h0_persistence(const Matrix& points) {
    if (points.rows() < 1) throw DimensionError("h0_persistence: empty cloud");
    PersistenceSummary s;
    const auto edges = sorted_edges(points);
    UnionFind uf(static_cast<std::size_t>(points.rows()));
    for (const auto& e : edges)
        if (uf.unite(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j))) s.finite.push_back({0.0, e.length});
    s.essential = {0.0, edges.empty() ? 0.0 : edges.back().length};
    return s;
}

int count_components(const Matrix& points, double radius) {
    const Eigen::Index n = points.rows();
    UnionFind uf(static_cast<std::size_t>(n));
    int components = static_cast<int>(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if ((points.row(i) - points.row(j)).norm() <= radius &&
                uf.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
                --components;
    return components;
}

std::vector<PersistencePair> h1_persistence(const Matrix& points) {
    const Eigen::Index n = points.rows();
    if (n > 40) throw DimensionError("h1_persistence: limited to 40 points");
    // Filtration: vertices at 0, edges at their length, triangles at their
    // longest edge. Ties: lower dimension first, then lexicographic.
    struct Cell {
        double value;
        int dim;
        std::vector<int> v;
    };
    std::vector<Cell> cells;
    Matrix dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = (points.row(i) - points.row(j)).norm();
    for (int i = 0; i < n; ++i) cells.push_back({0.0, 0, {i}});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) cells.push_back({dist(i, j), 1, {i, j}});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                cells.push_back({std::max({dist(i, j), dist(i, k), dist(j, k)}), 2, {i, j, k}});
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return std::tie(a.value, a.dim, a.v) < std::tie(b.value, b.dim, b.v);
    });
    std::map<std::vector<int>, int> index;
    for (std::size_t c = 0; c < cells.size(); ++c) index[cells[c].v] = static_cast<int>(c);

    // Columns as sorted index lists; reduce with the standard pivot rule.
    std::vector<std::vector<int>> cols(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& v = cells[c].v;
        if (v.size() < 2) continue;
        for (std::size_t p = 0; p < v.size(); ++p) {
            std::vector<int> f;
            for (std::size_t q = 0; q < v.size(); ++q)
                if (q != p) f.push_back(v[q]);
            cols[c].push_back(index.at(f));
        }
        std::sort(cols[c].begin(), cols[c].end());
    }
    std::vector<int> pivot_owner(cells.size(), -1);
    std::vector<PersistencePair> out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto& col = cols[c];
        while (!col.empty() && pivot_owner[static_cast<std::size_t>(col.back())] >= 0) {
            const auto& other = cols[static_cast<std::size_t>(pivot_owner[static_cast<std::size_t>(col.back())])];
            std::vector<int> sum;
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(sum));
            col = std::move(sum);
        }
        if (!col.empty()) {
            pivot_owner[static_cast<std::size_t>(col.back())] = static_cast<int>(c);
            const auto& birth = cells[static_cast<std::size_t>(col.back())];
            if (birth.dim == 1 && cells[c].value > birth.value) out.push_back({birth.value, cells[c].value});
        }
    }
    return out;
}

}  // namespace topowave
