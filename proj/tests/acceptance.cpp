// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "support.hpp"
#include "topowave/bench.hpp"
#include "topowave/learn.hpp"
#include "topowave/synthetic.hpp"
#include "topowave/verify.hpp"

using namespace topowave;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Seeded clouds with n <= 30 and K <= 3, all oriented.
std::vector<SimplicialComplex> battery() {
    std::vector<SimplicialComplex> out;
    for (int s = 0; s < 50; ++s) {
        std::mt19937_64 rng(1000 + s);
        std::uniform_int_distribution<int> size(5, 30);
        const int n = size(rng);
        const Matrix x = oracle::uniform_cloud(rng, n, 3);
        out.push_back(build_vr_complex(kernel_affinity(x, 0.6, 0.3), 0.3, 1 + s % 3, Orientation::oriented));
    }
    return out;
}

Outcome boundary_squared() {
    double worst = 0;
    std::size_t products = 0, cells = 0;
    for (const auto& c : battery()) {
        const auto b = boundary_matrices(c);
        for (int k = 1; k < c.max_order(); ++k) {
            const SparseMatrix prod = b[k] * b[k + 1];
            for (Eigen::Index j = 0; j < prod.outerSize(); ++j)
                for (SparseMatrix::InnerIterator it(prod, j); it; ++it) worst = std::max(worst, std::abs(it.value()));
            ++products;
            cells += c.count(k + 1);
        }
    }
    return {worst == 0.0 && products > 0 && cells > 0,
            fmt("%zu products over %zu cells, max |entry| %g", products, cells, worst)};
}

Outcome vr_oracle() {
    int mismatches = 0;
    std::size_t simplices = 0;
    for (int s = 0; s < 50; ++s) {
        std::mt19937_64 rng(2000 + s);
        std::uniform_int_distribution<int> size(2, 12);
        const int n = size(rng);
        const int K = s % 4;
        const Matrix x = oracle::uniform_cloud(rng, n, 3);
        const auto c = build_vr_complex(kernel_affinity(x, 0.6, 0.3), 0.3, K, Orientation::oriented);
        const auto truth = oracle::brute_force_vr(x, 0.6, 0.3, K);
        for (int k = 0; k <= K; ++k) {
            std::set<std::vector<std::int32_t>> built;
            for (std::size_t i = 0; i < c.count(k); ++i) {
                const auto sp = c.simplex(k, i);
                built.emplace(sp.begin(), sp.end());
            }
            simplices += built.size();
            if (built != truth[static_cast<std::size_t>(k)]) ++mismatches;
        }
    }
    return {mismatches == 0, fmt("%zu simplices, %d mismatched orders", simplices, mismatches)};
}

Outcome stochasticity() {
    double worst = 0;
    std::size_t columns = 0;
    for (const auto& c : battery()) {
        const auto ops = assemble_operators(c);
        for (const auto& w : ops.walks) {
            if (w.size() == 0) continue;
            const Matrix p(w.transition);
            worst = std::max(worst, (p.colwise().sum().array() - 1.0).abs().maxCoeff());
            columns += static_cast<std::size_t>(p.cols());
        }
    }
    return {worst <= 1e-12, fmt("%zu columns, max |sum - 1| %.3g", columns, worst)};
}

Outcome theorem1() {
    const auto r = verify_theorem1();
    return {r.at("pass").get<bool>(), fmt("heat leakage %.3g, walk leakage %.3g", r.at("max_heat_leakage").get<double>(),
                                          r.at("max_walk_leakage").get<double>())};
}

Outcome theorem2() {
    const auto r = verify_theorem2();
    return {r.at("pass").get<bool>(), fmt("max deviation %.3g, cross-order nonzeros %d", r.at("max_deviation").get<double>(),
                                          r.at("cross_order_nonzeros").get<int>())};
}

Outcome theorem3() {
    const auto r = verify_theorem3();
    return {r.at("pass").get<bool>(), fmt("median relative error %.4f at t=%.4g", r.at("median_relative_error").get<double>(),
                                          r.at("best_t").get<double>())};
}

Outcome telescoping() {
    double worst = 0;
    int cases = 0;
    for (int s = 0; s < 20; ++s) {
        std::mt19937_64 rng(3000 + s);
        const Matrix pts = oracle::uniform_cloud(rng, 30, 3);
        const auto c = build_vr_complex(kernel_affinity(pts, 0.6, 0.3), 0.3, 2,
                                        s % 2 ? Orientation::oriented : Orientation::unoriented);
        const auto ops = assemble_operators(c);
        for (const auto& w : ops.walks) {
            if (w.size() == 0) continue;
            const Matrix x = oracle::gaussian_cloud(rng, static_cast<int>(w.size()), 3);
            for (int J : {2, 3, 4}) {
                const auto d = dyadic_diffuse(w.transition, x, J);
                Matrix sum = Matrix::Zero(x.rows(), x.cols());
                for (int j = 1; j <= J; ++j) sum += wavelet_transform(d, j);
                const Matrix px = w.transition * x;
                worst = std::max(worst, (sum - (d[static_cast<std::size_t>(J)] - px)).cwiseAbs().maxCoeff());
                ++cases;
            }
        }
    }
    return {worst <= 1e-10, fmt("%d cases, max deviation %.3g", cases, worst)};
}

Outcome gradient() {
    const auto r = oracle::gradient_check();
    std::string per;
    for (const auto& [name, err] : r.max_relative) per += fmt(" %s=%.2g", name.c_str(), err);
    return {r.worst <= 1e-4, fmt("%ld parameters, max relative error %.3g;%s", r.entries, r.worst, per.c_str())};
}

Outcome permutation() {
    const RunConfig cfg;
    double worst = 0;
    for (int s = 0; s < 20; ++s) {
        std::mt19937_64 rng(4000 + s);
        const Matrix x = oracle::gaussian_cloud(rng, 80, 5, 0.7);
        std::vector<int> perm(80);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix xp(80, 5);
        for (int i = 0; i < 80; ++i) xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        const auto w = ViewWeights::init(cfg.num_views, 5, static_cast<std::uint64_t>(s));
        worst = std::max(worst, (cloud_features(x, w, cfg) - cloud_features(xp, w, cfg)).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-9, fmt("20 clouds, max |Phi - Phi_perm| %.3g", worst)};
}

Outcome classification() {
    const Cohort cohort = mixture_cohort({});
    const RunConfig cfg;
    const auto split = experiment_split(cohort, cfg);
    const auto r = train(split.fit, split.val, cfg);
    const Metrics test = evaluate(split.test, r.model);
    return {test.accuracy >= 0.9, fmt("test accuracy %.3f on %zu clouds (best epoch %d of %d)", test.accuracy,
                                      split.test.size(), r.best_epoch, cfg.epochs)};
}

Outcome regression() {
    const Cohort cohort = persistence_cohort({});
    const RunConfig cfg;
    const auto split = experiment_split(cohort, cfg);
    const auto r = train(split.fit, split.val, cfg);
    const Metrics test = evaluate(split.test, r.model);
    return {test.variance_ratio <= 0.5,
            fmt("test MSE / mean target variance %.3f (per-dimension average %.3f), best epoch %d", test.variance_ratio,
                test.normalized_mse, r.best_epoch)};
}

Outcome multiview() {
    double sum1 = 0, sum4 = 0;
    std::string per;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        MixtureCohortOptions o;
        o.seed = seed;
        const Cohort cohort = two_subset_cohort(o);
        double acc[2];
        for (int i = 0; i < 2; ++i) {
            RunConfig cfg;
            cfg.num_views = i == 0 ? 1 : 4;
            cfg.seed = seed;
            const auto split = experiment_split(cohort, cfg);
            acc[i] = evaluate(split.test, train(split.fit, split.val, cfg).model).accuracy;
        }
        sum1 += acc[0];
        sum4 += acc[1];
        per += fmt(" %.3f/%.3f", acc[0], acc[1]);
    }
    return {sum4 >= sum1, fmt("mean test accuracy V=1 %.3f, V=4 %.3f; per seed V1/V4:%s", sum1 / 5, sum4 / 5, per.c_str())};
}

Outcome complexity() {
    BenchOptions o;
    o.pipeline = false;
    const auto r = run_bench(RunConfig{}, o);
    const double e = r.at("construction_exponent").get<double>();
    return {e >= 1.8 && e <= 2.4, fmt("construction exponent %.3f over n = 250..2000", e)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double limit_seconds;  // 0: no limit
    };
    const std::vector<Criterion> criteria{
        {1, "boundary of boundary is zero", boundary_squared, 10},
        {2, "VR complex equals brute force", vr_oracle, 30},
        {3, "walks are column stochastic", stochasticity, 0},
        {4, "heat stays on its component", theorem1, 0},
        {5, "simplicial graph heat agrees", theorem2, 0},
        {6, "geodesics from the heat kernel", theorem3, 60},
        {7, "wavelets telescope", telescoping, 0},
        {8, "gradient check", gradient, 0},
        {9, "permutation invariance", permutation, 0},
        {10, "synthetic classification", classification, 600},
        {11, "persistence regression", regression, 600},
        {12, "multi-view ablation", multiview, 0},
        {13, "construction complexity", complexity, 0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        const bool in_time = c.limit_seconds == 0 || secs < c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::printf("%s %2d %-32s %8.2fs%s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    in_time ? "" : fmt(" (limit %.0fs)", c.limit_seconds).c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
