#include <doctest.h>

#include <random>
#include <set>

#include "support.hpp"
#include "topowave/complex.hpp"
#include "topowave/views.hpp"

using namespace topowave;

namespace {

std::set<std::vector<std::int32_t>> simplices_of(const SimplicialComplex& c, int k) {
    std::set<std::vector<std::int32_t>> out;
    for (std::size_t i = 0; i < c.count(k); ++i) {
        const auto s = c.simplex(k, i);
        out.emplace(s.begin(), s.end());
    }
    return out;
}

std::vector<std::vector<std::int32_t>> list_of(const SimplicialComplex& c, int k) {
    std::vector<std::vector<std::int32_t>> out;
    for (std::size_t i = 0; i < c.count(k); ++i) {
        const auto s = c.simplex(k, i);
        out.emplace_back(s.begin(), s.end());
    }
    return out;
}

}  // namespace

TEST_CASE("three mutually close points give a full triangle") {
    Matrix x(3, 2);
    x << 0, 0, 0.1, 0, 0, 0.1;
    const auto c = build_vr_complex(kernel_affinity(x, 1.0, 0.5), 0.5, 2);
    CHECK(c.count(0) == 3);
    CHECK(c.count(1) == 3);
    CHECK(c.count(2) == 1);
}

TEST_CASE("collinear points with a missing edge give no triangle") {
    Matrix x(3, 1);
    x << 0, 1, 2;
    // radius sqrt(-2 ln 0.5) ~ 1.177: consecutive pairs pass, the outer pair does not
    const auto c = build_vr_complex(kernel_affinity(x, 1.0, 0.5), 0.5, 2);
    CHECK(c.count(0) == 3);
    CHECK(c.count(1) == 2);
    CHECK(c.count(2) == 0);
}

TEST_CASE("random 10-point cloud matches brute-force subset enumeration") {
    std::mt19937_64 rng(10);
    const Matrix x = oracle::uniform_cloud(rng, 10, 2);
    const double sigma = 0.5, eps = 0.5;
    const auto c = build_vr_complex(kernel_affinity(x, sigma, eps), eps, 3);
    const auto truth = oracle::brute_force_vr(x, sigma, eps, 3);
    for (int k = 0; k <= 3; ++k) CHECK(simplices_of(c, k) == truth[static_cast<std::size_t>(k)]);
    CHECK(c.count(2) > 0);
}

TEST_CASE("VR complex equals brute force over seeded small clouds") {
    for (int s = 0; s < 30; ++s) {
        std::mt19937_64 rng(100 + s);
        std::uniform_int_distribution<int> size(2, 12);
        const int n = size(rng);
        const int K = s % 4;
        const Matrix x = oracle::uniform_cloud(rng, n, 3);
        const auto c = build_vr_complex(kernel_affinity(x, 0.6, 0.4), 0.4, K);
        const auto truth = oracle::brute_force_vr(x, 0.6, 0.4, K);
        for (int k = 0; k <= K; ++k) CHECK(simplices_of(c, k) == truth[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("simplex lists are sorted, face closed and index_of finds every simplex") {
    std::mt19937_64 rng(11);
    const Matrix x = oracle::uniform_cloud(rng, 20, 3);
    const auto c = build_vr_complex(kernel_affinity(x, 0.6, 0.3), 0.3, 3);
    CHECK(c.is_face_closed());
    CHECK(c.count(0) == 20);
    for (int k = 0; k <= 3; ++k) {
        const auto l = list_of(c, k);
        CHECK(std::is_sorted(l.begin(), l.end()));
        for (std::size_t i = 0; i < l.size(); ++i) {
            CHECK(std::is_sorted(l[i].begin(), l[i].end()));
            CHECK(std::adjacent_find(l[i].begin(), l[i].end()) == l[i].end());
            CHECK(c.index_of(l[i]) == i);
        }
    }
    // Explicit faces, checked independently of is_face_closed.
    for (int k = 1; k <= 3; ++k)
        for (const auto& s : list_of(c, k))
            for (std::size_t p = 0; p < s.size(); ++p) {
                auto f = s;
                f.erase(f.begin() + static_cast<std::ptrdiff_t>(p));
                CHECK(c.index_of(f).has_value());
            }
}

TEST_CASE("relabelling points gives an isomorphic complex") {
    std::mt19937_64 rng(12);
    const Matrix x = oracle::uniform_cloud(rng, 15, 2);
    std::vector<std::int32_t> perm(15);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(15, 2);
    for (int i = 0; i < 15; ++i) xp.row(perm[static_cast<std::size_t>(i)]) = x.row(i);
    const auto a = build_vr_complex(kernel_affinity(x, 0.5, 0.4), 0.4, 2);
    const auto b = build_vr_complex(kernel_affinity(xp, 0.5, 0.4), 0.4, 2);
    for (int k = 0; k <= 2; ++k) {
        std::set<std::vector<std::int32_t>> mapped;
        for (auto s : list_of(a, k)) {
            for (auto& v : s) v = perm[static_cast<std::size_t>(v)];
            std::sort(s.begin(), s.end());
            mapped.insert(s);
        }
        CHECK(mapped == simplices_of(b, k));
    }
}

TEST_CASE("budget guard raises instead of truncating") {
    Matrix x = Matrix::Zero(30, 2);  // complete graph
    CHECK_THROWS_AS(build_vr_complex(kernel_affinity(x, 1.0, 0.5), 0.5, 3, Orientation::unoriented, 1000), BudgetError);
    try {
        (void)build_vr_complex(kernel_affinity(x, 1.0, 0.5), 0.5, 3, Orientation::unoriented, 1000);
    } catch (const BudgetError& e) {
        CHECK(e.projected() > 1000);
    }
    CHECK_NOTHROW(build_vr_complex(kernel_affinity(x, 1.0, 0.5), 0.5, 3, Orientation::unoriented, 100000));
}

TEST_CASE("boundary of a single oriented edge") {
    const auto c = SimplicialComplex::from_simplices(2, {{0, 1}}, 1, Orientation::oriented);
    const Matrix b1(boundary_matrices(c)[1]);
    CHECK(b1.rows() == 2);
    CHECK(b1.cols() == 1);
    CHECK(b1(0, 0) == -1.0);
    CHECK(b1(1, 0) == 1.0);
}

TEST_CASE("triangle boundaries: oriented composition vanishes, unoriented entries are ones") {
    const auto co = SimplicialComplex::from_simplices(3, {{0, 1, 2}}, 2, Orientation::oriented);
    const auto bo = boundary_matrices(co);
    CHECK(Matrix(bo[1] * bo[2]).cwiseAbs().maxCoeff() == 0.0);

    const auto cu = SimplicialComplex::from_simplices(3, {{2, 0, 1}}, 2, Orientation::unoriented);
    const Matrix b2(boundary_matrices(cu)[2]);
    CHECK(b2.cols() == 1);
    CHECK(b2 == Matrix::Ones(3, 1));
}

TEST_CASE("boundary matrices agree with a dense oracle and have k+1 entries per column") {
    std::mt19937_64 rng(13);
    const Matrix x = oracle::uniform_cloud(rng, 14, 3);
    for (auto orientation : {Orientation::oriented, Orientation::unoriented}) {
        const auto c = build_vr_complex(kernel_affinity(x, 0.6, 0.3), 0.3, 3, orientation);
        const auto b = boundary_matrices(c);
        CHECK(b.max_order() == 3);
        for (int k = 1; k <= 3; ++k) {
            const Matrix dense(b[k]);
            CHECK(dense == oracle::dense_boundary(list_of(c, k - 1), list_of(c, k), orientation == Orientation::oriented));
            for (Eigen::Index j = 0; j < dense.cols(); ++j) CHECK((dense.col(j).array() != 0).count() == k + 1);
            CHECK(b[k].nonZeros() == static_cast<Eigen::Index>((k + 1) * c.count(k)));
        }
    }
}

TEST_CASE("lifted features: unsigned sums and signed differences") {
    Matrix x(3, 2);
    x << 1, 10, 2, 20, 4, 40;
    const auto cu = SimplicialComplex::from_simplices(3, {{0, 1, 2}}, 2, Orientation::unoriented);
    const auto lu = lift_features(boundary_matrices(cu), x);
    CHECK(lu[1].row(0) == x.row(0) + x.row(1));  // edge (0,1)
    CHECK(lu[2].row(0) == 2.0 * (x.row(0) + x.row(1) + x.row(2)));

    const auto co = SimplicialComplex::from_simplices(2, {{0, 1}}, 1, Orientation::oriented);
    const auto lo = lift_features(boundary_matrices(co), x.topRows(2));
    CHECK(lo[1].row(0) == x.row(1) - x.row(0));
}

TEST_CASE("complex dump lists one simplex per line") {
    const auto c = SimplicialComplex::from_simplices(3, {{0, 1}, {2}}, 1, Orientation::unoriented);
    std::ostringstream out;
    c.dump(out);
    const std::string s = out.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 4);
    CHECK(s.find("1\t0\t1") != std::string::npos);
}
