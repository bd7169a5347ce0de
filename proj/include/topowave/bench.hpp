#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "topowave/config.hpp"

namespace topowave {

struct BenchOptions {
    std::vector<int> sizes{250, 500, 1000, 2000};
    int dim = 10;
    double min_seconds = 0.2;  // repeat each measurement at least this long, keep the fastest
    std::uint64_t seed = 0;
    bool pipeline = true;      // also time one full view (operators and scattering)
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Wall time of complex construction (affinities, thresholding, cliques) on
/// standard Gaussian clouds, with the fitted exponent in n. The pipeline
/// timings come with the cost model N0^2 + V J^2 sum_k D_k N_k, where D_k is
/// the mean number of stored entries per column of P_k.
nlohmann::json run_bench(const RunConfig& cfg, const BenchOptions& o = {});

}  // namespace topowave
