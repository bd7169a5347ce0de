#pragma once

#include <cstdint>

#include "topowave/data.hpp"

namespace topowave {

/// Single-Gaussian clouds (class 0) against two-Gaussian mixtures (class 1).
/// Each cloud gets its own random centre; mixtures split their points between
/// two sub-centres offset along a random direction.
struct MixtureCohortOptions {
    int clouds_per_class = 30;
    int points = 200;
    int dim = 10;
    double center_spread = 0.7;   // sd of per-cloud centres
    double within_spread = 0.45;  // sd of points around a (sub-)centre
    double separation = 2.0;      // distance between mixture sub-centres
    // Split direction: random signs on every feature, scaled to unit length
    // (true), or an isotropic random unit vector (false).
    bool sign_direction = true;
    std::uint64_t seed = 0;
};

Cohort mixture_cohort(const MixtureCohortOptions& o);

/// Same clouds as mixture_cohort with the 12-dim H0 persistence summary of
/// each (normalised) cloud as the regression target.
Cohort persistence_cohort(const MixtureCohortOptions& o);

/// Two classes whose difference lives in one of two disjoint feature subsets
/// per cloud: class 1 clouds are split into two sub-blobs along a direction
/// drawn inside subset A (features [0, dim/4)) or subset B
/// ([dim/4, dim/2)); the remaining features carry only noise.
Cohort two_subset_cohort(const MixtureCohortOptions& o);

/// n points uniformly at random on the unit circle, with their angles.
Matrix circle_points(int n, std::uint64_t seed, Vector* angles = nullptr);

}  // namespace topowave
