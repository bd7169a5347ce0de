#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "topowave/complex.hpp"
#include "topowave/operators.hpp"

namespace topowave {

/// Seeded complexes with exactly two connected components, each the VR
/// complex of a small random cluster; orders and orientations vary by seed.
std::vector<SimplicialComplex> two_component_battery(int count, std::uint64_t seed);

/// Component id of every vertex from the 1-skeleton.
std::vector<int> vertex_components(const SimplicialComplex& complex);

struct Theorem1Options {
    int complexes = 20;
    std::uint64_t seed = 0;
    std::vector<double> times{0.1, 1.0, 10.0};
    double tolerance = 1e-12;
    int walk_steps = 16;
};

/// Heat started on one component never reaches another, both for
/// exp(-t Delta_k) and for random-walk powers (which must leak exactly 0).
nlohmann::json verify_theorem1(const Theorem1Options& o = {});

struct Theorem2Options {
    int complexes = 20;
    std::uint64_t seed = 0;
    std::vector<double> times{0.1, 1.0, 10.0};
    double tolerance = 1e-10;
};

/// Heat on the simplicial graph agrees with order-wise heat on the complex;
/// cross-order blocks of the graph Laplacian are exactly zero.
nlohmann::json verify_theorem2(const Theorem2Options& o = {});

struct Theorem3Options {
    int points = 200;
    std::uint64_t seed = 0;
    double sigma = 0.2;
    double epsilon = 0.1353352832366127;  // e^{-2}: joins chords up to 2 sigma
    std::vector<double> t_grid;          // empty: 31 log-spaced values in [3e-3, 1]
    double tolerance = 0.15;
};

/// Geodesic recovery on the unit circle from the oriented order-0 heat
/// kernel via Varadhan's formula.
nlohmann::json verify_theorem3(const Theorem3Options& o = {});

/// exp(-t L) for a graph Laplacian L with non-negative off-diagonal
/// complement, by uniformization: sum_k Poisson(k; t r) (I - L/r)^k with r the
/// largest diagonal entry. Every term is entrywise non-negative, so small
/// kernel values keep full relative precision. One matrix per entry of `times`.
std::vector<Matrix> heat_kernel_uniformized(const SparseMatrix& laplacian, const std::vector<double>& times);

/// Union-find component count at radius sigma*sqrt(-2 ln eps) against the
/// number of zero eigenvalues of oriented Delta_0, over seeded clouds.
nlohmann::json verify_component_spectrum(int clouds = 20, std::uint64_t seed = 0);

/// All of the above; "pass" is the conjunction.
nlohmann::json verify_all(std::uint64_t seed = 0);

}  // namespace topowave
