#pragma once

#include <string>
#include <vector>

#include "topowave/common.hpp"
#include "topowave/complex.hpp"
#include "topowave/config.hpp"
#include "topowave/operators.hpp"
#include "topowave/views.hpp"

namespace topowave {

struct ScatteringOptions {
    int num_scales = 4;
    Pooling pooling = Pooling::mean;
    bool include_lowpass = true;
    bool include_raw = true;

    static ScatteringOptions from(const RunConfig& cfg);
};

/// Psi_j X = P^{2^j} X - P^{2^{j-1}} X from a dyadic_diffuse list.
Matrix wavelet_transform(const std::vector<Matrix>& diffused, int j);

/// |Psi_j X| for j = 1..J.
std::vector<Matrix> scatter_order1(const Matrix& x, const SparseMatrix& transition, int num_scales);

/// |Psi_j' |Psi_j X|| for 1 <= j < j' <= J, ordered by (j, j').
std::vector<Matrix> scatter_order2(const Matrix& x, const SparseMatrix& transition, int num_scales);

/// Reduces an N x d block over rows. Output is ordered by feature column, then
/// statistic (mean before max). An empty block pools to zeros.
Vector pool_block(const Matrix& block, Pooling pooling);

/// blocks[v][k][b] with b in layout order (raw, low, s1_j..., s2_jj'...).
Vector pool_and_concat(const std::vector<std::vector<std::vector<Matrix>>>& blocks, Pooling pooling);

/// Position of every entry of Phi.
struct FeatureLayout {
    enum class Kind : std::uint8_t {
        linear,      // raw or low-pass block, additive statistic
        linear_max,  // raw or low-pass block, max statistic
        magnitude,   // first- or second-order block (after abs)
    };

    int num_views = 0;
    int max_order = 0;
    Eigen::Index dim = 0;
    ScatteringOptions options;

    int blocks_per_order() const;
    Eigen::Index block_width() const { return dim * pooling_stats(options.pooling); }
    Eigen::Index per_order() const { return blocks_per_order() * block_width(); }
    Eigen::Index per_view() const { return (max_order + 1) * per_order(); }
    Eigen::Index size() const { return num_views * per_view(); }

    /// Feature column and kind of the i-th entry of one view's slice.
    std::vector<Eigen::Index> column;
    std::vector<Kind> kind;

    static FeatureLayout make(int num_views, int max_order, Eigen::Index dim, const ScatteringOptions& options);
    std::vector<std::string> names() const;
};

/// Combinatorial structure of one view: the thresholded edge list, the clique
/// complex and its operators.
struct ViewStructure {
    std::vector<Edge> edges;
    SimplicialComplex complex;
    ComplexOperators ops;
};

ViewStructure build_view_structure(const Matrix& reweighted_points, const RunConfig& cfg);

/// Intermediates kept for reverse mode.
struct ViewTape {
    struct Order {
        std::vector<Matrix> diffused;               // P^{2^i} X_k, i = 0..J
        std::vector<std::vector<Matrix>> second;    // second[j-1][i] = P^{2^i} |Psi_j X_k|
        std::vector<std::vector<Eigen::Index>> argmax;  // per block, per column (max pooling)
    };
    std::vector<Order> orders;
};

/// Pooled features of one view given its structure and vertex features.
/// When `minima` is non-null, linear max entries also get the matching
/// column minimum written at the same position.
Vector scatter_view(const ViewStructure& s, const Matrix& vertex_features, const ScatteringOptions& options,
                    ViewTape* tape = nullptr, Vector* minima = nullptr);

/// Gradient of <grad, scatter_view(X)> with respect to the vertex features X,
/// with the structure held fixed. Subgradient of |.| at 0 is 0.
Matrix scatter_view_backward(const ViewStructure& s, const ViewTape& tape, const Vector& grad,
                             const ScatteringOptions& options);

/// Phi for one cloud: every view is reweighted, rebuilt and scattered.
Vector cloud_features(const Matrix& points, const ViewWeights& weights, const RunConfig& cfg);

}  // namespace topowave
