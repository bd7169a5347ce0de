#pragma once

// Central finite differences of the training loss on a small frozen-structure
// toy, compared with the analytic gradients used by the trainer. The numeric
// side recomputes Phi directly through scatter_view on the reweighted points,
// never through the cached rescaling used by training.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "topowave/learn.hpp"

namespace topowave::oracle {

struct GradCheck {
    std::map<std::string, double> max_relative;  // per tensor
    double worst = 0.0;
    long entries = 0;
};

struct GradCheckOptions {
    Task task = Task::classification;
    Pooling pooling = Pooling::mean;
    std::uint64_t seed = 0;
    int clouds = 4;
    double step = 1e-5;
    double floor = 1e-6;  // denominator floor for gradients that are ~0
};

inline GradCheck gradient_check(const GradCheckOptions& o = {}) {
    RunConfig cfg;
    cfg.num_views = 2;
    cfg.max_order = 2;
    cfg.num_scales = 3;
    cfg.hidden_width = 8;
    cfg.pooling = o.pooling;
    cfg.orientation = Orientation::oriented;
    cfg.seed = o.seed;

    std::mt19937_64 rng(o.seed + 17);
    std::vector<PointCloud> clouds;
    std::vector<int> labels;
    std::vector<Vector> targets;
    for (int c = 0; c < o.clouds; ++c) {
        clouds.push_back({"toy" + std::to_string(c), gaussian_cloud(rng, 20, 3)});
        labels.push_back(c % 2);
        targets.push_back(gaussian_cloud(rng, 2, 1).col(0));
    }
    const Cohort cohort = o.task == Task::classification
                              ? make_cohort(o.task, std::move(clouds), std::move(labels), {})
                              : make_cohort(o.task, std::move(clouds), {}, std::move(targets));
    Model model = Model::init(cfg, o.task, 3, 2);
    const auto opt = ScatteringOptions::from(cfg);
    const int V = cfg.num_views;

    // Structure frozen at the initial weights.
    std::vector<std::vector<ViewStructure>> frozen(cohort.size());
    for (std::size_t c = 0; c < cohort.size(); ++c)
        for (int v = 0; v < V; ++v)
            frozen[c].push_back(build_view_structure(reweight(cohort.clouds[c].points, model.alpha.row(v).transpose()), cfg));

    auto direct_phi = [&](const Matrix& alpha) {
        const Eigen::Index per_view = model.layout().per_view();
        Matrix phi(V * per_view, static_cast<Eigen::Index>(cohort.size()));
        for (std::size_t c = 0; c < cohort.size(); ++c)
            for (int v = 0; v < V; ++v)
                phi.block(v * per_view, static_cast<Eigen::Index>(c), per_view, 1) =
                    scatter_view(frozen[c][static_cast<std::size_t>(v)],
                                 reweight(cohort.clouds[c].points, alpha.row(v).transpose()), opt);
        return phi;
    };

    const Matrix phi0 = direct_phi(model.alpha);
    model.phi_mean = phi0.rowwise().mean();
    model.phi_inv_scale = Vector::Ones(phi0.rows());
    for (Eigen::Index r = 0; r < phi0.rows(); ++r) {
        const double sd = std::sqrt((phi0.row(r).array() - model.phi_mean(r)).square().mean());
        if (sd > 1e-8) model.phi_inv_scale(r) = 1.0 / sd;
    }
    if (o.task == Task::regression) {
        model.target_mean = Vector::Zero(2);
        model.target_scale = Vector::Ones(2);
        for (const auto& t : cohort.targets) model.target_mean += t / static_cast<double>(cohort.size());
    }
    std::vector<std::size_t> idx(cohort.size());
    std::iota(idx.begin(), idx.end(), 0);

    auto loss_at = [&](const Model& m) { return head_loss(m, standardize_features(m, direct_phi(m.alpha)), cohort, idx); };

    // Analytic side, exactly as the trainer does it.
    FeatureCache cache(cfg, 3, cohort.size());
    Matrix phi(phi0.rows(), phi0.cols());
    for (std::size_t c = 0; c < cohort.size(); ++c)
        phi.col(static_cast<Eigen::Index>(c)) = cache.features(c, cohort.clouds[c].points, model.view_weights());
    MlpTape tape;
    Matrix g_out;
    head_loss(model, standardize_features(model, phi), cohort, idx, &tape, &g_out);
    const MlpGrad g = mlp_backward(model, tape, g_out);
    const Matrix g_phi = (g.input.array().colwise() * model.phi_inv_scale.array()).matrix();
    Matrix g_alpha = Matrix::Zero(model.alpha.rows(), model.alpha.cols());
    for (std::size_t c = 0; c < cohort.size(); ++c)
        g_alpha += cache.alpha_gradient(c, model.view_weights(), g_phi.col(static_cast<Eigen::Index>(c)));
    const std::map<std::string, const Matrix*> analytic{
        {"alpha", &g_alpha}, {"w1", &g.w1}, {"b1", &g.b1}, {"w2", &g.w2}, {"b2", &g.b2}};

    GradCheck out;
    for (auto& [name, param] : model.parameters()) {
        Matrix numeric(param->rows(), param->cols());
        for (Eigen::Index i = 0; i < param->size(); ++i) {
            const double keep = param->data()[i];
            param->data()[i] = keep + o.step;
            const double up = loss_at(model);
            param->data()[i] = keep - o.step;
            const double down = loss_at(model);
            param->data()[i] = keep;
            numeric.data()[i] = (up - down) / (2 * o.step);
        }
        const double err = max_relative_error(*analytic.at(name), numeric, o.floor);
        out.max_relative[name] = err;
        out.worst = std::max(out.worst, err);
        out.entries += param->size();
    }
    return out;
}

}  // namespace topowave::oracle
