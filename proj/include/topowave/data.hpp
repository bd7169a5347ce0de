#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "topowave/common.hpp"

namespace topowave {

struct PointCloud {
    std::string id;
    Matrix points;  // n rows (points) x d columns (features)

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

enum class Task { classification, regression };

std::string to_string(Task t);
Task parse_task(const std::string& s);

/// Per-column affine map applied at load time: x -> (x - mean) / scale, with
/// scale == 0 marking a constant column that is mapped to 0.
struct Normalization {
    Vector mean;
    Vector scale;

    Matrix apply(const Matrix& points) const;
};

struct Cohort {
    Task task = Task::classification;
    std::vector<PointCloud> clouds;
    std::vector<int> classes;       // classification labels in [0, C)
    std::vector<Vector> targets;    // regression targets, one vector per cloud
    Normalization normalization;

    std::size_t size() const { return clouds.size(); }
    Eigen::Index dim() const { return clouds.empty() ? 0 : clouds.front().dim(); }
    int num_classes() const;
    Eigen::Index target_dim() const { return targets.empty() ? 0 : targets.front().size(); }

    /// Copy holding only the listed clouds, in the given order.
    Cohort subset(const std::vector<std::size_t>& indices) const;

    /// Throws LoadError when the shape or label invariants do not hold.
    void validate() const;
};

/// Computes cohort-global z-scoring statistics over the union of all points.
Normalization fit_normalization(const std::vector<PointCloud>& clouds);

/// Reads a JSON manifest, loads every matrix file relative to the manifest's
/// directory and z-scores features over the union of all points.
Cohort load_cohort(const std::filesystem::path& manifest_path);

/// Same as above but applies a previously fitted normalization (e.g. the one
/// stored with a trained checkpoint) instead of fitting a new one.
Cohort load_cohort(const std::filesystem::path& manifest_path, const Normalization& norm);

/// Assembles a cohort from in-memory clouds and normalizes it.
Cohort make_cohort(Task task, std::vector<PointCloud> clouds, std::vector<int> classes,
                   std::vector<Vector> targets);

/// Deterministic train/test split. Classification splits are stratified: each
/// class contributes round(train_fraction * size) clouds to the training set
/// (halves round up). Regression uses a plain seeded shuffle.
std::pair<Cohort, Cohort> split_cohort(const Cohort& cohort, double train_fraction,
                                       std::uint64_t seed);

/// Index form of split_cohort; indices are returned in ascending order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const Cohort& cohort, double train_fraction, std::uint64_t seed);

/// Stable binary serialization used for reproducibility checks.
std::string serialize_cohort(const Cohort& cohort);

/// Writes each cloud as an HPMX file and a manifest referencing them.
void write_cohort(const Cohort& cohort, const std::filesystem::path& dir,
                  const std::string& manifest_name = "manifest.json");

}  // namespace topowave
