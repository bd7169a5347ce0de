#include "topowave/bench.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "topowave/scattering.hpp"

namespace topowave {

using json = nlohmann::json;

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

template <typename F>
double fastest(double min_seconds, F&& f) {
    using clock = std::chrono::steady_clock;
    double best = std::numeric_limits<double>::infinity(), spent = 0;
    int runs = 0;
    while (runs < 3 || spent < min_seconds) {
        const auto t0 = clock::now();
        f();
        const double s = std::chrono::duration<double>(clock::now() - t0).count();
        best = std::min(best, s);
        spent += s;
        ++runs;
    }
    return best;
}

}  // namespace

json run_bench(const RunConfig& cfg, const BenchOptions& o) {
    std::vector<double> ns, construct, pipeline;
    json rows = json::array();
    const auto options = ScatteringOptions::from(cfg);
    for (int n : o.sizes) {
        std::mt19937_64 rng(o.seed + static_cast<std::uint64_t>(n));
        std::normal_distribution<double> g(0.0, 1.0);
        Matrix x(n, o.dim);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < o.dim; ++c) x(i, c) = g(rng);

        std::size_t simplices = 0;
        const double tc = fastest(o.min_seconds, [&] {
            const auto graph = kernel_affinity(x, cfg.bandwidth, cfg.vr_threshold);
            const auto complex = SimplicialComplex::clique_complex(n, graph.edges(cfg.vr_threshold), cfg.max_order,
                                                                   cfg.orientation, cfg.simplex_budget);
            simplices = complex.total_count();
        });
        json row{{"n", n}, {"construction_seconds", tc}, {"simplices", simplices}};
        ns.push_back(n);
        construct.push_back(tc);

        if (o.pipeline) {
            double cost = static_cast<double>(n) * n;
            const auto s = build_view_structure(x, cfg);
            for (const auto& w : s.ops.walks)
                cost += cfg.num_views * std::pow(cfg.num_scales, 2) * static_cast<double>(w.transition.nonZeros());
            const double tp = fastest(o.min_seconds, [&] {
                const auto st = build_view_structure(x, cfg);
                (void)scatter_view(st, x, options);
            });
            row["view_pipeline_seconds"] = tp;
            row["cost_model"] = cost;
            pipeline.push_back(tp);
        }
        rows.push_back(row);
    }
    json r;
    r["dim"] = o.dim;
    r["max_order"] = cfg.max_order;
    r["sigma"] = cfg.bandwidth;
    r["epsilon"] = cfg.vr_threshold;
    r["rows"] = rows;
    r["construction_exponent"] = loglog_slope(ns, construct);
    if (o.pipeline) r["view_pipeline_exponent"] = loglog_slope(ns, pipeline);
    return r;
}

}  // namespace topowave
