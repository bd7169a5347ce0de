#include "topowave/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "topowave/matrix_io.hpp"

namespace topowave {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Feature cache

FeatureCache::FeatureCache(const RunConfig& cfg, Eigen::Index dim, std::size_t num_clouds)
    : cfg_(cfg),
      layout_(FeatureLayout::make(cfg.num_views, cfg.max_order, dim, ScatteringOptions::from(cfg))),
      entries_(num_clouds, std::vector<Entry>(static_cast<std::size_t>(cfg.num_views))) {}

Vector FeatureCache::features(std::size_t cloud, const Matrix& points, const ViewWeights& weights, bool rebuild) {
    if (weights.num_views() != layout_.num_views) throw DimensionError("view count differs from the configuration");
    const auto options = ScatteringOptions::from(cfg_);
    Vector phi(layout_.size());
    auto& row = entries_.at(cloud);
    for (int v = 0; v < layout_.num_views; ++v) {
        const Vector& a = weights.alpha[static_cast<std::size_t>(v)];
        Entry& e = row[static_cast<std::size_t>(v)];
        if (rebuild || !e.valid) {
            const Matrix x = reweight(points, a);
            auto edges = kernel_affinity(x, cfg_.bandwidth, cfg_.vr_threshold).edges(cfg_.vr_threshold);
            if (!e.valid || edges != e.edges) {
                ViewStructure s;
                s.edges = std::move(edges);
                s.complex = SimplicialComplex::clique_complex(static_cast<std::int32_t>(points.rows()), s.edges,
                                                              cfg_.max_order, cfg_.orientation, cfg_.simplex_budget);
                s.ops = assemble_operators(s.complex);
                e.unit = scatter_view(s, points, options, nullptr, &e.minima);
                e.edges = std::move(s.edges);
                e.valid = true;
                ++rebuilds_;
            }
        }
        const Eigen::Index base = v * layout_.per_view();
        for (Eigen::Index i = 0; i < layout_.per_view(); ++i) {
            const double ac = a(layout_.column[static_cast<std::size_t>(i)]);
            double out = 0;
            switch (layout_.kind[static_cast<std::size_t>(i)]) {
                case FeatureLayout::Kind::linear: out = ac * e.unit(i); break;
                case FeatureLayout::Kind::linear_max: out = ac * (ac >= 0 ? e.unit(i) : e.minima(i)); break;
                case FeatureLayout::Kind::magnitude: out = std::abs(ac) * e.unit(i); break;
            }
            phi(base + i) = out;
        }
    }
    return phi;
}

Matrix FeatureCache::alpha_gradient(std::size_t cloud, const ViewWeights& weights, const Vector& grad_phi) const {
    Matrix g = Matrix::Zero(layout_.num_views, layout_.dim);
    const auto& row = entries_.at(cloud);
    for (int v = 0; v < layout_.num_views; ++v) {
        const Entry& e = row[static_cast<std::size_t>(v)];
        if (!e.valid) throw Error("alpha_gradient: features for this cloud were never computed");
        const Vector& a = weights.alpha[static_cast<std::size_t>(v)];
        const Eigen::Index base = v * layout_.per_view();
        for (Eigen::Index i = 0; i < layout_.per_view(); ++i) {
            const Eigen::Index c = layout_.column[static_cast<std::size_t>(i)];
            const double ac = a(c);
            double d = 0;
            switch (layout_.kind[static_cast<std::size_t>(i)]) {
                case FeatureLayout::Kind::linear: d = e.unit(i); break;
                case FeatureLayout::Kind::linear_max: d = ac >= 0 ? e.unit(i) : e.minima(i); break;
                case FeatureLayout::Kind::magnitude: d = (ac > 0 ? 1.0 : (ac < 0 ? -1.0 : 0.0)) * e.unit(i); break;
            }
            g(v, c) += d * grad_phi(base + i);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Model and head

Model Model::init(const RunConfig& cfg, Task task, Eigen::Index dim, int out_dim) {
    cfg.validate();
    Model m;
    m.config = cfg;
    m.task = task;
    m.dim = dim;
    m.out_dim = out_dim;
    const auto w = ViewWeights::init(cfg.num_views, dim, cfg.seed);
    m.alpha.resize(cfg.num_views, dim);
    for (int v = 0; v < cfg.num_views; ++v) m.alpha.row(v) = w.alpha[static_cast<std::size_t>(v)].transpose();

    const Eigen::Index f = m.layout().size();
    const Eigen::Index h = cfg.hidden_width;
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
    std::mt19937_64 rng(cfg.seed ^ 0x6d6c70u);
    auto fill = [&](Matrix& x, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in) {
        std::uniform_real_distribution<double> u(-1.0 / std::sqrt(double(fan_in)), 1.0 / std::sqrt(double(fan_in)));
        x.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = u(rng);
    };
    fill(m.w1, h, f, f);
    fill(m.b1, h, 1, f);
    fill(m.w2, out_dim, h, h);
    fill(m.b2, out_dim, 1, h);
    return m;
}

ViewWeights Model::view_weights() const {
    ViewWeights w;
    for (Eigen::Index v = 0; v < alpha.rows(); ++v) w.alpha.push_back(alpha.row(v).transpose());
    return w;
}

FeatureLayout Model::layout() const {
    return FeatureLayout::make(config.num_views, config.max_order, dim, ScatteringOptions::from(config));
}

std::vector<std::pair<std::string, Matrix*>> Model::parameters() {
    return {{"alpha", &alpha}, {"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}};
}

std::vector<std::pair<std::string, const Matrix*>> Model::parameters() const {
    return {{"alpha", &alpha}, {"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}};
}

Matrix mlp_forward(const Model& m, const Matrix& input, MlpTape* tape) {
    Matrix pre = m.w1 * input;
    pre.colwise() += m.b1.col(0);
    Matrix hidden = pre.cwiseMax(0.0);
    Matrix out = m.w2 * hidden;
    out.colwise() += m.b2.col(0);
    if (tape) {
        tape->input = input;
        tape->hidden_pre = std::move(pre);
        tape->hidden = std::move(hidden);
    }
    return out;
}

MlpGrad mlp_backward(const Model& m, const MlpTape& tape, const Matrix& grad_out) {
    MlpGrad g;
    g.w2 = grad_out * tape.hidden.transpose();
    g.b2 = grad_out.rowwise().sum();
    Matrix gh = m.w2.transpose() * grad_out;
    gh = gh.cwiseProduct((tape.hidden_pre.array() > 0.0).cast<double>().matrix());
    g.w1 = gh * tape.input.transpose();
    g.b1 = gh.rowwise().sum();
    g.input = m.w1.transpose() * gh;
    return g;
}

Matrix standardize_features(const Model& m, const Matrix& phi) {
    if (phi.rows() != m.phi_mean.size()) throw DimensionError("feature length differs from the model's");
    return ((phi.colwise() - m.phi_mean).array().colwise() * m.phi_inv_scale.array()).matrix();
}

Matrix softmax_columns(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const double mx = logits.col(j).maxCoeff();
        p.col(j) = (logits.col(j).array() - mx).exp().matrix();
        p.col(j) /= p.col(j).sum();
    }
    return p;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels, Matrix* grad) {
    const Eigen::Index b = logits.cols();
    if (static_cast<Eigen::Index>(labels.size()) != b) throw DimensionError("cross_entropy: label count mismatch");
    double loss = 0;
    Matrix p = softmax_columns(logits);
    for (Eigen::Index j = 0; j < b; ++j) {
        const double mx = logits.col(j).maxCoeff();
        const double lse = mx + std::log((logits.col(j).array() - mx).exp().sum());
        loss += lse - logits(labels[static_cast<std::size_t>(j)], j);
    }
    if (grad) {
        *grad = p;
        for (Eigen::Index j = 0; j < b; ++j) (*grad)(labels[static_cast<std::size_t>(j)], j) -= 1.0;
        *grad /= static_cast<double>(b);
    }
    return loss / static_cast<double>(b);
}

double squared_error(const Matrix& output, const Matrix& target, Matrix* grad) {
    const Matrix r = output - target;
    const double count = static_cast<double>(r.size());
    if (grad) *grad = 2.0 * r / count;
    return r.squaredNorm() / count;
}

Matrix standardized_targets(const Model& m, const Cohort& cohort, const std::vector<std::size_t>& idx) {
    Matrix t(m.out_dim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const Vector& y = cohort.targets.at(idx[j]);
        for (Eigen::Index r = 0; r < m.out_dim; ++r)
            t(r, static_cast<Eigen::Index>(j)) =
                m.target_scale(r) > 0 ? (y(r) - m.target_mean(r)) / m.target_scale(r) : 0.0;
    }
    return t;
}

double head_loss(const Model& m, const Matrix& input, const Cohort& cohort, const std::vector<std::size_t>& idx,
                 MlpTape* tape, Matrix* grad_out) {
    const Matrix out = mlp_forward(m, input, tape);
    if (m.task == Task::classification) {
        std::vector<int> labels;
        for (auto i : idx) labels.push_back(cohort.classes.at(i));
        return cross_entropy(out, labels, grad_out);
    }
    return squared_error(out, standardized_targets(m, cohort, idx), grad_out);
}

// ---------------------------------------------------------------------------
// Optimiser

void AdamW::step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
                 const std::vector<bool>& decay) {
    if (m_.empty()) {
        for (auto* p : params) {
            m_.push_back(Matrix::Zero(p->rows(), p->cols()));
            v_.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = *grads[i];
        if (decay[i]) p *= 1.0 - opt_.learning_rate * opt_.weight_decay;
        m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
        v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g.cwiseAbs2();
        const auto mhat = m_[i].array() / c1;
        const auto vhat = v_[i].array() / c2;
        p.array() -= opt_.learning_rate * mhat / (vhat.sqrt() + opt_.eps);
    }
}

// ---------------------------------------------------------------------------
// Metrics

std::optional<double> auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos = 0, neg = 0, rank_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 1) {
            ++pos;
            rank_sum += rank[i];
        } else {
            ++neg;
        }
    }
    if (pos == 0 || neg == 0) return std::nullopt;
    return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

Matrix predict_from_features(const Model& m, const Matrix& phi) {
    const Matrix out = mlp_forward(m, standardize_features(m, phi));
    if (m.task == Task::classification) return softmax_columns(out);
    Matrix y = out;
    for (Eigen::Index r = 0; r < y.rows(); ++r) y.row(r) = y.row(r) * m.target_scale(r) + Matrix::Constant(1, y.cols(), m.target_mean(r));
    return y;
}

Metrics compute_metrics(const Model& m, const Matrix& phi, const Cohort& cohort) {
    Metrics r;
    r.task = m.task;
    r.count = cohort.size();
    if (cohort.size() == 0) return r;
    std::vector<std::size_t> idx(cohort.size());
    std::iota(idx.begin(), idx.end(), 0);
    const Matrix input = standardize_features(m, phi);
    r.loss = head_loss(m, input, cohort, idx);
    const Matrix pred = predict_from_features(m, phi);
    if (m.task == Task::classification) {
        const int c = m.out_dim;
        r.class_total.assign(static_cast<std::size_t>(c), 0);
        r.class_correct.assign(static_cast<std::size_t>(c), 0);
        long correct = 0;
        for (Eigen::Index j = 0; j < pred.cols(); ++j) {
            Eigen::Index arg = 0;
            pred.col(j).maxCoeff(&arg);
            const int y = cohort.classes[static_cast<std::size_t>(j)];
            ++r.class_total[static_cast<std::size_t>(y)];
            if (arg == y) {
                ++correct;
                ++r.class_correct[static_cast<std::size_t>(y)];
            }
        }
        r.accuracy = static_cast<double>(correct) / static_cast<double>(pred.cols());
        if (c == 2) {
            std::vector<double> scores;
            for (Eigen::Index j = 0; j < pred.cols(); ++j) scores.push_back(pred(1, j));
            r.auc = auc_roc(scores, cohort.classes);
            if (!r.auc) spdlog::warn("AUC undefined: only one class present in the evaluated cohort");
        }
        return r;
    }
    const Eigen::Index t = m.out_dim;
    Matrix y(t, static_cast<Eigen::Index>(cohort.size()));
    for (std::size_t j = 0; j < cohort.size(); ++j) y.col(static_cast<Eigen::Index>(j)) = cohort.targets[j];
    const Matrix err = pred - y;
    r.mse = err.squaredNorm() / static_cast<double>(err.size());
    double acc = 0;
    double total_var = 0;
    int dims = 0;
    for (Eigen::Index d = 0; d < t; ++d) {
        const double mean = y.row(d).mean();
        const double var = (y.row(d).array() - mean).square().mean();
        total_var += var;
        if (var <= 1e-24 * std::max(1.0, mean * mean)) {
            r.dim_normalized_mse.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        r.dim_normalized_mse.push_back(err.row(d).squaredNorm() / static_cast<double>(y.cols()) / var);
        acc += r.dim_normalized_mse.back();
        ++dims;
    }
    r.normalized_mse = dims > 0 ? acc / dims : 0.0;
    r.variance_ratio = total_var > 0 ? r.mse / (total_var / static_cast<double>(t)) : 0.0;
    return r;
}

Matrix cohort_features(const Cohort& cohort, const ViewWeights& weights, const RunConfig& cfg) {
    const auto layout = FeatureLayout::make(weights.num_views(), cfg.max_order, cohort.dim(), ScatteringOptions::from(cfg));
    Matrix phi(layout.size(), static_cast<Eigen::Index>(cohort.size()));
    parallel_for(cohort.size(), [&](std::size_t i) {
        phi.col(static_cast<Eigen::Index>(i)) = cloud_features(cohort.clouds[i].points, weights, cfg);
    });
    return phi;
}

Metrics evaluate(const Cohort& cohort, const Model& m) {
    return compute_metrics(m, cohort_features(cohort, m.view_weights(), m.config), cohort);
}

// ---------------------------------------------------------------------------
// Training

namespace {

Matrix cached_features(FeatureCache& cache, const Cohort& cohort, const std::vector<std::size_t>& idx,
                       const ViewWeights& w, bool rebuild) {
    Matrix phi(cache.layout().size(), static_cast<Eigen::Index>(idx.size()));
    parallel_for(idx.size(), [&](std::size_t j) {
        phi.col(static_cast<Eigen::Index>(j)) = cache.features(idx[j], cohort.clouds[idx[j]].points, w, rebuild);
    });
    return phi;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

void fit_standardization(Model& m, const Matrix& phi) {
    const Eigen::Index f = phi.rows();
    m.phi_mean = phi.rowwise().mean();
    m.phi_inv_scale = Vector::Zero(f);
    for (Eigen::Index i = 0; i < f; ++i) {
        const double var = (phi.row(i).array() - m.phi_mean(i)).square().mean();
        const double sd = std::sqrt(var);
        if (sd > 1e-12 * std::max(1.0, std::abs(m.phi_mean(i)))) m.phi_inv_scale(i) = 1.0 / sd;
    }
}

void fit_targets(Model& m, const Cohort& c) {
    const Eigen::Index t = m.out_dim;
    m.target_mean = Vector::Zero(t);
    m.target_scale = Vector::Zero(t);
    if (c.size() == 0) return;
    for (const auto& y : c.targets) m.target_mean += y;
    m.target_mean /= static_cast<double>(c.size());
    for (Eigen::Index r = 0; r < t; ++r) {
        double var = 0;
        for (const auto& y : c.targets) var += (y(r) - m.target_mean(r)) * (y(r) - m.target_mean(r));
        const double sd = std::sqrt(var / static_cast<double>(c.size()));
        m.target_scale(r) = sd > 1e-12 * std::max(1.0, std::abs(m.target_mean(r))) ? sd : 0.0;
    }
}

bool better(Task task, const EpochLog& a, const EpochLog& b) {
    if (task == Task::classification) {
        if (a.val_metric != b.val_metric) return a.val_metric > b.val_metric;
        return a.val_loss < b.val_loss;
    }
    return a.val_loss < b.val_loss;
}

}  // namespace

ExperimentSplit experiment_split(const Cohort& cohort, const RunConfig& cfg) {
    ExperimentSplit s;
    auto [train_part, test] = split_cohort(cohort, cfg.train_fraction, cfg.seed);
    s.test = std::move(test);
    if (cfg.val_fraction > 0) {
        auto [fit, val] = split_cohort(train_part, 1.0 - cfg.val_fraction, cfg.seed + 1);
        s.fit = std::move(fit);
        s.val = std::move(val);
    } else {
        s.fit = std::move(train_part);
        s.val = s.fit.subset({});
    }
    return s;
}

TrainResult train(const Cohort& train_set, const Cohort& val, const RunConfig& cfg, const EpochCallback& on_epoch) {
    if (train_set.size() == 0) throw ConfigError("training cohort is empty");
    const int out = train_set.task == Task::classification ? std::max(2, train_set.num_classes())
                                                          : static_cast<int>(train_set.target_dim());
    Model m = Model::init(cfg, train_set.task, train_set.dim(), out);
    m.input_norm = train_set.normalization;
    return train(std::move(m), train_set, val, on_epoch);
}

TrainResult train(Model model, const Cohort& train_set, const Cohort& val, const EpochCallback& on_epoch) {
    const RunConfig& cfg = model.config;
    if (train_set.size() == 0) throw ConfigError("training cohort is empty");
    if (train_set.dim() != model.dim) throw DimensionError("training cohort feature count differs from the model's");
    if (train_set.task != model.task) throw ConfigError("training cohort task differs from the model's");

    FeatureCache train_cache(cfg, model.dim, train_set.size());
    FeatureCache val_cache(cfg, model.dim, val.size());
    const auto train_idx = all_indices(train_set.size());
    const auto val_idx = all_indices(val.size());

    if (model.phi_mean.size() == 0) {
        fit_standardization(model, cached_features(train_cache, train_set, train_idx, model.view_weights(), true));
    }
    if (model.task == Task::regression && model.target_mean.size() == 0) fit_targets(model, train_set);

    AdamW opt({cfg.learning_rate, cfg.weight_decay, 0.9, 0.999, 1e-8});
    std::mt19937_64 rng(cfg.seed + 0x5eedu);
    const std::size_t batch = static_cast<std::size_t>(std::max(1, cfg.batch_size));

    TrainResult result;
    result.model = model;
    std::optional<EpochLog> best;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const bool rebuild = !(cfg.freeze_structure && epoch > 1);
        auto order = train_idx;
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

        double total = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch)));
            const ViewWeights w = model.view_weights();
            const Matrix phi = cached_features(train_cache, train_set, idx, w, rebuild);
            MlpTape tape;
            Matrix g_out;
            const double loss = head_loss(model, standardize_features(model, phi), train_set, idx, &tape, &g_out);
            if (!std::isfinite(loss)) throw DivergenceError(epoch);
            total += loss * static_cast<double>(idx.size());

            MlpGrad g = mlp_backward(model, tape, g_out);
            const Matrix g_phi = (g.input.array().colwise() * model.phi_inv_scale.array()).matrix();
            Matrix g_alpha = Matrix::Zero(model.alpha.rows(), model.alpha.cols());
            for (std::size_t j = 0; j < idx.size(); ++j)
                g_alpha += train_cache.alpha_gradient(idx[j], w, g_phi.col(static_cast<Eigen::Index>(j)));

            opt.step({&model.alpha, &model.w1, &model.b1, &model.w2, &model.b2},
                     {&g_alpha, &g.w1, &g.b1, &g.w2, &g.b2}, {false, true, false, true, false});
            if (!model.alpha.allFinite() || !model.w1.allFinite() || !model.w2.allFinite())
                throw DivergenceError(epoch);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = total / static_cast<double>(order.size());
        const ViewWeights w = model.view_weights();
        Metrics mv;
        if (val.size() > 0) {
            mv = compute_metrics(model, cached_features(val_cache, val, val_idx, w, rebuild), val);
        } else {
            mv = compute_metrics(model, cached_features(train_cache, train_set, train_idx, w, rebuild), train_set);
        }
        log.val_loss = mv.loss;
        log.val_metric = model.task == Task::classification ? mv.accuracy : mv.normalized_mse;
        if (!std::isfinite(log.train_loss) || !std::isfinite(log.val_loss)) throw DivergenceError(epoch);
        result.history.push_back(log);
        if (!best || better(model.task, log, *best)) {
            best = log;
            result.model = model;
            result.best_epoch = epoch;
        }
        if (on_epoch) on_epoch(log);
    }
    if (cfg.epochs == 0) result.model = model;
    result.structure_rebuilds = train_cache.rebuilds() + val_cache.rebuilds();
    return result;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochLog>& history) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "epoch,train_loss,val_loss,val_metric\n";
    for (const auto& h : history)
        out << h.epoch << ',' << h.train_loss << ',' << h.val_loss << ',' << h.val_metric << '\n';
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kCheckpointMagic[4] = {'H', 'P', 'C', 'K'};

Matrix as_column(const Vector& v) { return Matrix(v); }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& m, int epoch, const std::vector<EpochLog>& history) {
    std::vector<std::pair<std::string, Matrix>> tensors;
    for (const auto& [name, p] : m.parameters()) tensors.emplace_back(name, *p);
    tensors.emplace_back("phi_mean", as_column(m.phi_mean));
    tensors.emplace_back("phi_inv_scale", as_column(m.phi_inv_scale));
    tensors.emplace_back("target_mean", as_column(m.target_mean));
    tensors.emplace_back("target_scale", as_column(m.target_scale));
    tensors.emplace_back("input_mean", as_column(m.input_norm.mean));
    tensors.emplace_back("input_scale", as_column(m.input_norm.scale));

    json header;
    header["format"] = "topowave-checkpoint";
    header["version"] = 1;
    header["config"] = config_to_map(m.config);
    header["task"] = to_string(m.task);
    header["dim"] = m.dim;
    header["out_dim"] = m.out_dim;
    header["epoch"] = epoch;
    json metrics = json::array();
    for (const auto& h : history)
        metrics.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_loss", h.val_loss},
                           {"val_metric", h.val_metric}});
    header["metrics"] = metrics;
    json list = json::array();
    for (const auto& [name, t] : tensors) list.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
    header["tensors"] = list;

    const std::string text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(kCheckpointMagic, 4);
    const auto len = static_cast<std::uint32_t>(text.size());
    const unsigned char le[4] = {static_cast<unsigned char>(len), static_cast<unsigned char>(len >> 8),
                                 static_cast<unsigned char>(len >> 16), static_cast<unsigned char>(len >> 24)};
    out.write(reinterpret_cast<const char*>(le), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : tensors) write_hpmx(out, t);
    if (!out) throw Error("failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path, int* epoch) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open checkpoint " + path.string());
    char magic[4];
    unsigned char le[4];
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(le), 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw LoadError(path.string() + ": not a checkpoint");
    const std::uint32_t len = le[0] | (le[1] << 8) | (le[2] << 16) | (static_cast<std::uint32_t>(le[3]) << 24);
    std::string text(len, '\0');
    in.read(text.data(), len);
    if (!in) throw LoadError(path.string() + ": truncated header");
    json header;
    try {
        header = json::parse(text);
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": malformed header: " + e.what());
    }

    Model m;
    for (const auto& [k, v] : header.at("config").items()) set_config_value(m.config, k, v.get<std::string>());
    m.task = parse_task(header.at("task").get<std::string>());
    m.dim = header.at("dim").get<Eigen::Index>();
    m.out_dim = header.at("out_dim").get<int>();
    if (epoch) *epoch = header.at("epoch").get<int>();

    std::map<std::string, Matrix> tensors;
    for (const auto& t : header.at("tensors")) {
        const auto name = t.at("name").get<std::string>();
        Matrix x = read_hpmx(in, path.string() + ":" + name);
        if (x.rows() != t.at("rows").get<Eigen::Index>() || x.cols() != t.at("cols").get<Eigen::Index>())
            throw LoadError(path.string() + ": tensor " + name + " has unexpected shape");
        tensors[name] = std::move(x);
    }
    auto take = [&](const std::string& name) -> Matrix {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw LoadError(path.string() + ": missing tensor " + name);
        return it->second;
    };
    for (auto& [name, p] : m.parameters()) *p = take(name);
    m.phi_mean = take("phi_mean").col(0);
    m.phi_inv_scale = take("phi_inv_scale").col(0);
    auto vec = [&](const std::string& name) -> Vector {
        Matrix x = take(name);
        return x.size() == 0 ? Vector() : Vector(x.col(0));
    };
    m.target_mean = vec("target_mean");
    m.target_scale = vec("target_scale");
    m.input_norm.mean = vec("input_mean");
    m.input_norm.scale = vec("input_scale");
    return m;
}

}  // namespace topowave
