#include "topowave/scattering.hpp"

#include <algorithm>
#include <cmath>

namespace topowave {

namespace {

Matrix signum(const Matrix& m) {
    return m.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

// Reverse of dyadic_diffuse: given gradients for every stored power, returns
// the gradient with respect to the diffused input.
Matrix diffuse_backward(const SparseMatrix& transition_t, std::vector<Matrix>& grads) {
    const int J = static_cast<int>(grads.size()) - 1;
    Matrix acc = std::move(grads[static_cast<std::size_t>(J)]);
    for (int i = J; i >= 1; --i) {
        const long steps = 1L << (i - 1);
        for (long s = 0; s < steps; ++s) acc = transition_t * acc;
        acc += grads[static_cast<std::size_t>(i) - 1];
    }
    return transition_t * acc;
}

}  // namespace

ScatteringOptions ScatteringOptions::from(const RunConfig& cfg) {
    ScatteringOptions o;
    o.num_scales = cfg.num_scales;
    o.pooling = cfg.pooling;
    o.include_lowpass = cfg.include_lowpass;
    o.include_raw = cfg.include_raw;
    return o;
}

Matrix wavelet_transform(const std::vector<Matrix>& diffused, int j) {
    const int J = static_cast<int>(diffused.size()) - 1;
    if (j < 1 || j > J)
        throw DimensionError("wavelet scale " + std::to_string(j) + " outside [1, " + std::to_string(J) + "]");
    return diffused[static_cast<std::size_t>(j)] - diffused[static_cast<std::size_t>(j) - 1];
}

std::vector<Matrix> scatter_order1(const Matrix& x, const SparseMatrix& transition, int num_scales) {
    const auto diffused = dyadic_diffuse(transition, x, num_scales);
    std::vector<Matrix> out;
    for (int j = 1; j <= num_scales; ++j) out.push_back(wavelet_transform(diffused, j).cwiseAbs());
    return out;
}

std::vector<Matrix> scatter_order2(const Matrix& x, const SparseMatrix& transition, int num_scales) {
    const auto first = scatter_order1(x, transition, num_scales);
    std::vector<Matrix> out;
    for (int j = 1; j < num_scales; ++j) {
        const auto inner = dyadic_diffuse(transition, first[static_cast<std::size_t>(j) - 1], num_scales);
        for (int jp = j + 1; jp <= num_scales; ++jp) out.push_back(wavelet_transform(inner, jp).cwiseAbs());
    }
    return out;
}

Vector pool_block(const Matrix& block, Pooling pooling) {
    const int stats = pooling_stats(pooling);
    const Eigen::Index d = block.cols();
    Vector out = Vector::Zero(d * stats);
    if (block.rows() == 0) return out;
    for (Eigen::Index c = 0; c < d; ++c) {
        switch (pooling) {
            case Pooling::mean: out(c) = block.col(c).mean(); break;
            case Pooling::sum: out(c) = block.col(c).sum(); break;
            case Pooling::mean_max:
                out(2 * c) = block.col(c).mean();
                out(2 * c + 1) = block.col(c).maxCoeff();
                break;
        }
    }
    return out;
}

Vector pool_and_concat(const std::vector<std::vector<std::vector<Matrix>>>& blocks, Pooling pooling) {
    std::vector<Vector> parts;
    Eigen::Index total = 0;
    for (const auto& view : blocks)
        for (const auto& order : view)
            for (const auto& b : order) {
                parts.push_back(pool_block(b, pooling));
                total += parts.back().size();
            }
    Vector out(total);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.segment(at, p.size()) = p;
        at += p.size();
    }
    return out;
}

int FeatureLayout::blocks_per_order() const {
    const int J = options.num_scales;
    return J + J * (J - 1) / 2 + (options.include_raw ? 1 : 0) + (options.include_lowpass ? 1 : 0);
}

FeatureLayout FeatureLayout::make(int num_views, int max_order, Eigen::Index dim, const ScatteringOptions& options) {
    if (num_views < 1) throw ConfigError("number of views must be positive");
    if (options.num_scales < 1) throw ConfigError("number of scales must be positive");
    FeatureLayout l;
    l.num_views = num_views;
    l.max_order = max_order;
    l.dim = dim;
    l.options = options;
    const int stats = pooling_stats(options.pooling);
    const int linear_blocks = (options.include_raw ? 1 : 0) + (options.include_lowpass ? 1 : 0);
    for (int k = 0; k <= max_order; ++k) {
        for (int b = 0; b < l.blocks_per_order(); ++b) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                for (int s = 0; s < stats; ++s) {
                    l.column.push_back(c);
                    if (b >= linear_blocks) l.kind.push_back(Kind::magnitude);
                    else if (options.pooling == Pooling::mean_max && s == 1) l.kind.push_back(Kind::linear_max);
                    else l.kind.push_back(Kind::linear);
                }
            }
        }
    }
    return l;
}

std::vector<std::string> FeatureLayout::names() const {
    std::vector<std::string> blocks;
    const int J = options.num_scales;
    if (options.include_raw) blocks.push_back("raw_0");
    if (options.include_lowpass) blocks.push_back("low_" + std::to_string(J));
    for (int j = 1; j <= J; ++j) blocks.push_back("s1_" + std::to_string(j));
    for (int j = 1; j < J; ++j)
        for (int jp = j + 1; jp <= J; ++jp) blocks.push_back("s2_" + std::to_string(j) + "_" + std::to_string(jp));

    std::vector<std::string> stat_names;
    switch (options.pooling) {
        case Pooling::mean: stat_names = {"mean"}; break;
        case Pooling::sum: stat_names = {"sum"}; break;
        case Pooling::mean_max: stat_names = {"mean", "max"}; break;
    }
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (int v = 0; v < num_views; ++v)
        for (int k = 0; k <= max_order; ++k)
            for (const auto& b : blocks)
                for (Eigen::Index c = 0; c < dim; ++c)
                    for (const auto& s : stat_names)
                        out.push_back("v" + std::to_string(v) + "_k" + std::to_string(k) + "_" + b + "_f" +
                                      std::to_string(c) + "_" + s);
    return out;
}

ViewStructure build_view_structure(const Matrix& reweighted_points, const RunConfig& cfg) {
    if (!(cfg.vr_threshold > 0 && cfg.vr_threshold < 1)) throw ConfigError("VR threshold must lie in (0, 1)");
    ViewStructure s;
    const auto graph = kernel_affinity(reweighted_points, cfg.bandwidth, cfg.vr_threshold);
    s.edges = graph.edges(cfg.vr_threshold);
    s.complex = SimplicialComplex::clique_complex(static_cast<std::int32_t>(reweighted_points.rows()), s.edges,
                                                  cfg.max_order, cfg.orientation, cfg.simplex_budget);
    s.ops = assemble_operators(s.complex);
    return s;
}

Vector scatter_view(const ViewStructure& s, const Matrix& vertex_features, const ScatteringOptions& options,
                    ViewTape* tape, Vector* minima) {
    const int K = s.complex.max_order();
    const int J = options.num_scales;
    const auto layout = FeatureLayout::make(1, K, vertex_features.cols(), options);
    const auto lifted = lift_features(s.ops.boundaries, vertex_features);
    const bool with_max = options.pooling == Pooling::mean_max;
    const Eigen::Index d = vertex_features.cols();

    Vector out = Vector::Zero(layout.per_view());
    if (minima) *minima = Vector::Zero(layout.per_view());
    if (tape) tape->orders.assign(static_cast<std::size_t>(K) + 1, {});

    for (int k = 0; k <= K; ++k) {
        const Matrix& xk = lifted[static_cast<std::size_t>(k)];
        const SparseMatrix& p = s.ops.walks[static_cast<std::size_t>(k)].transition;
        Eigen::Index at = k * layout.per_order();
        ViewTape::Order* rec = tape ? &tape->orders[static_cast<std::size_t>(k)] : nullptr;

        auto emit = [&](const Matrix& block, bool linear) {
            out.segment(at, layout.block_width()) = pool_block(block, options.pooling);
            if (with_max && block.rows() > 0) {
                if (rec) {
                    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
                    for (Eigen::Index c = 0; c < d; ++c) block.col(c).maxCoeff(&idx[static_cast<std::size_t>(c)]);
                    rec->argmax.push_back(std::move(idx));
                }
                if (minima && linear)
                    for (Eigen::Index c = 0; c < d; ++c) (*minima)(at + 2 * c + 1) = block.col(c).minCoeff();
            }
            at += layout.block_width();
        };

        if (xk.rows() == 0) continue;  // empty order pools to zero
        auto diffused = dyadic_diffuse(p, xk, J);
        if (options.include_raw) emit(xk, true);
        if (options.include_lowpass) emit(diffused[static_cast<std::size_t>(J)], true);
        std::vector<Matrix> first;
        for (int j = 1; j <= J; ++j) {
            first.push_back(wavelet_transform(diffused, j).cwiseAbs());
            emit(first.back(), false);
        }
        std::vector<std::vector<Matrix>> second;
        for (int j = 1; j < J; ++j) {
            second.push_back(dyadic_diffuse(p, first[static_cast<std::size_t>(j) - 1], J));
            for (int jp = j + 1; jp <= J; ++jp) emit(wavelet_transform(second.back(), jp).cwiseAbs(), false);
        }
        if (rec) {
            rec->diffused = std::move(diffused);
            rec->second = std::move(second);
        }
    }
    return out;
}

Matrix scatter_view_backward(const ViewStructure& s, const ViewTape& tape, const Vector& grad,
                             const ScatteringOptions& options) {
    const int K = s.complex.max_order();
    const int J = options.num_scales;
    const auto& b = s.ops.boundaries;
    const auto unit = FeatureLayout::make(1, K, 1, options);
    const Eigen::Index dim = grad.size() / unit.per_view();
    const auto layout = FeatureLayout::make(1, K, dim, options);
    if (grad.size() != layout.per_view()) throw DimensionError("scatter_view_backward: gradient has wrong length");
    const int stats = pooling_stats(options.pooling);

    std::vector<Matrix> grad_x(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) grad_x[static_cast<std::size_t>(k)] = Matrix::Zero(b.count(k), dim);

    for (int k = 0; k <= K; ++k) {
        const auto& rec = tape.orders[static_cast<std::size_t>(k)];
        const Eigen::Index n = b.count(k);
        if (n == 0) continue;
        const SparseMatrix& pt = s.ops.walks[static_cast<std::size_t>(k)].transition_t;
        Eigen::Index at = k * layout.per_order();
        std::size_t block_index = 0;

        // Gradient of one pooled block with respect to the block itself.
        auto unpool = [&]() {
            Matrix g = Matrix::Zero(n, dim);
            for (Eigen::Index c = 0; c < dim; ++c) {
                for (int st = 0; st < stats; ++st) {
                    const double gv = grad(at + c * stats + st);
                    if (gv == 0.0) continue;
                    if (options.pooling == Pooling::sum) g.col(c).array() += gv;
                    else if (st == 0) g.col(c).array() += gv / static_cast<double>(n);
                    else g(rec.argmax[block_index][static_cast<std::size_t>(c)], c) += gv;
                }
            }
            at += layout.block_width();
            ++block_index;
            return g;
        };

        std::vector<Matrix> g_diffused(static_cast<std::size_t>(J) + 1, Matrix::Zero(n, dim));
        if (options.include_raw) grad_x[static_cast<std::size_t>(k)] += unpool();
        if (options.include_lowpass) g_diffused[static_cast<std::size_t>(J)] += unpool();

        std::vector<Matrix> masks(static_cast<std::size_t>(J) + 1);
        std::vector<Matrix> g_first(static_cast<std::size_t>(J) + 1);
        for (int j = 1; j <= J; ++j) {
            masks[static_cast<std::size_t>(j)] = signum(wavelet_transform(rec.diffused, j));
            g_first[static_cast<std::size_t>(j)] = unpool();
        }
        for (int j = 1; j < J; ++j) {
            const auto& inner = rec.second[static_cast<std::size_t>(j) - 1];
            std::vector<Matrix> g_inner(static_cast<std::size_t>(J) + 1, Matrix::Zero(n, dim));
            for (int jp = j + 1; jp <= J; ++jp) {
                const Matrix g = signum(wavelet_transform(inner, jp)).cwiseProduct(unpool());
                g_inner[static_cast<std::size_t>(jp)] += g;
                g_inner[static_cast<std::size_t>(jp) - 1] -= g;
            }
            g_first[static_cast<std::size_t>(j)] += diffuse_backward(pt, g_inner);
        }
        for (int j = 1; j <= J; ++j) {
            const Matrix g = masks[static_cast<std::size_t>(j)].cwiseProduct(g_first[static_cast<std::size_t>(j)]);
            g_diffused[static_cast<std::size_t>(j)] += g;
            g_diffused[static_cast<std::size_t>(j) - 1] -= g;
        }
        grad_x[static_cast<std::size_t>(k)] += diffuse_backward(pt, g_diffused);
    }

    // X_{k+1} = B_{k+1}^T X_k, so dX_k += B_{k+1} dX_{k+1}.
    for (int k = K - 1; k >= 0; --k)
        grad_x[static_cast<std::size_t>(k)] += b[k + 1] * grad_x[static_cast<std::size_t>(k) + 1];
    return grad_x[0];
}

Vector cloud_features(const Matrix& points, const ViewWeights& weights, const RunConfig& cfg) {
    const auto options = ScatteringOptions::from(cfg);
    const auto layout = FeatureLayout::make(weights.num_views(), cfg.max_order, points.cols(), options);
    Vector phi(layout.size());
    std::vector<Vector> parts(static_cast<std::size_t>(weights.num_views()));
    parallel_for(parts.size(), [&](std::size_t v) {
        const Matrix x = reweight(points, weights.alpha[v]);
        const auto structure = build_view_structure(x, cfg);
        parts[v] = scatter_view(structure, x, options);
    });
    for (std::size_t v = 0; v < parts.size(); ++v)
        phi.segment(static_cast<Eigen::Index>(v) * layout.per_view(), layout.per_view()) = parts[v];
    return phi;
}

}  // namespace topowave
