#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "topowave/config.hpp"
#include "topowave/data.hpp"
#include "topowave/scattering.hpp"

namespace topowave {

/// Per-cloud, per-view scattering features computed on the unweighted points
/// over the structure induced by the current view weights. Scattering acts on
/// each feature column separately, is linear before the first |.| and
/// positively homogeneous after it, so Phi for any alpha that induces the same
/// edge set is an exact per-column rescaling of these values.
class FeatureCache {
public:
    FeatureCache(const RunConfig& cfg, Eigen::Index dim, std::size_t num_clouds);

    const FeatureLayout& layout() const { return layout_; }

    /// Phi for one cloud. The structure of each view is re-derived from
    /// `weights` and the cached values recomputed only when its edge set
    /// changed; with `rebuild` false an existing entry is reused as is.
    Vector features(std::size_t cloud, const Matrix& points, const ViewWeights& weights, bool rebuild = true);

    /// d Phi^T grad / d alpha for the structure cached for `cloud`, as a
    /// V x d matrix.
    Matrix alpha_gradient(std::size_t cloud, const ViewWeights& weights, const Vector& grad_phi) const;

    std::size_t rebuilds() const { return rebuilds_.load(); }

private:
    struct Entry {
        bool valid = false;
        std::vector<Edge> edges;
        Vector unit;
        Vector minima;
    };

    RunConfig cfg_;
    FeatureLayout layout_;
    std::vector<std::vector<Entry>> entries_;
    std::atomic<std::size_t> rebuilds_{0};
};

/// All trainable and fitted state of a model.
struct Model {
    RunConfig config;
    Task task = Task::classification;
    Eigen::Index dim = 0;
    int out_dim = 0;

    Matrix alpha;  // V x d view weights
    Matrix w1, b1; // H x F, H x 1
    Matrix w2, b2; // out x H, out x 1

    // Fixed input standardisation of Phi (fitted on the training cohort at
    // the initial view weights) and, for regression, of the targets.
    Vector phi_mean, phi_inv_scale;
    Vector target_mean, target_scale;
    // Cohort-level z-scoring of the raw point features, reused at eval time.
    Normalization input_norm;

    static Model init(const RunConfig& cfg, Task task, Eigen::Index dim, int out_dim);

    ViewWeights view_weights() const;
    FeatureLayout layout() const;

    /// Named parameter tensors in a fixed order: alpha, w1, b1, w2, b2.
    std::vector<std::pair<std::string, Matrix*>> parameters();
    std::vector<std::pair<std::string, const Matrix*>> parameters() const;
};

/// Hidden activations kept for the backward pass; columns are samples.
struct MlpTape {
    Matrix input, hidden_pre, hidden;
};

/// Raw head outputs (logits or standardised regression values), out x B.
Matrix mlp_forward(const Model& m, const Matrix& input, MlpTape* tape = nullptr);

struct MlpGrad {
    Matrix w1, b1, w2, b2, input;
};

MlpGrad mlp_backward(const Model& m, const MlpTape& tape, const Matrix& grad_out);

/// Standardised inputs for the head: (phi - mean) * inv_scale, one column per
/// cloud.
Matrix standardize_features(const Model& m, const Matrix& phi_columns);

/// Mean softmax cross-entropy over columns. Writes d loss / d logits.
double cross_entropy(const Matrix& logits, const std::vector<int>& labels, Matrix* grad = nullptr);
/// Mean over columns and rows of squared error. Writes d loss / d output.
double squared_error(const Matrix& output, const Matrix& target, Matrix* grad = nullptr);

Matrix softmax_columns(const Matrix& logits);

/// Loss of a head on given standardised inputs; the training objective.
double head_loss(const Model& m, const Matrix& input, const Cohort& cohort, const std::vector<std::size_t>& idx,
                 MlpTape* tape = nullptr, Matrix* grad_out = nullptr);

/// Standardised regression targets of the selected clouds, one column each.
Matrix standardized_targets(const Model& m, const Cohort& cohort, const std::vector<std::size_t>& idx);

/// AdamW with decoupled decay, one moment pair per tensor.
class AdamW {
public:
    struct Options {
        double learning_rate = 1e-4;
        double weight_decay = 1e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    explicit AdamW(Options o) : opt_(o) {}

    /// `decay[i]` selects which tensors receive weight decay.
    void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
              const std::vector<bool>& decay);
    long steps() const { return t_; }

private:
    Options opt_;
    long t_ = 0;
    std::vector<Matrix> m_, v_;
};

struct Metrics {
    Task task = Task::classification;
    double loss = 0.0;
    // Classification.
    double accuracy = 0.0;
    std::vector<long> class_total, class_correct;
    std::optional<double> auc;
    // Regression (raw target units).
    double mse = 0.0;             // over all entries
    double variance_ratio = 0.0;  // mse / mean over dims of Var_d
    double normalized_mse = 0.0;  // mean over non-constant dims of MSE_d / Var_d
    std::vector<double> dim_normalized_mse;  // MSE_d / Var_d per dim; NaN for constant dims
    std::size_t count = 0;
};

/// Area under the ROC curve from the rank statistic with average ranks for
/// ties. Empty if either class is absent.
std::optional<double> auc_roc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Outputs in user units: class probabilities or de-standardised targets.
Matrix predict_from_features(const Model& m, const Matrix& phi_columns);

Metrics compute_metrics(const Model& m, const Matrix& phi_columns, const Cohort& cohort);

/// Phi of every cloud under the model's view weights, one column per cloud.
Matrix cohort_features(const Cohort& cohort, const ViewWeights& weights, const RunConfig& cfg);

Metrics evaluate(const Cohort& cohort, const Model& m);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_metric = 0.0;  // accuracy (classification) or normalised MSE (regression)
};

struct TrainResult {
    Model model;  // best validation parameters
    int best_epoch = 0;
    std::vector<EpochLog> history;
    std::size_t structure_rebuilds = 0;
};

/// Test split by train_fraction; the training split is divided again by
/// val_fraction (seed + 1) into the clouds that are fitted and the clouds that
/// select the best epoch. With val_fraction 0 the validation cohort is empty.
struct ExperimentSplit {
    Cohort fit, val, test;
};
ExperimentSplit experiment_split(const Cohort& cohort, const RunConfig& cfg);

using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains from Model::init. `val` may be empty, in which case selection uses
/// the training loss.
TrainResult train(const Cohort& train_set, const Cohort& val, const RunConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Continues from an existing model (standardisation kept as is).
TrainResult train(Model model, const Cohort& train_set, const Cohort& val, const EpochCallback& on_epoch = {});

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochLog>& history);

/// "HPCK" + u32 header length + JSON header + one HPMX block per tensor.
void save_checkpoint(const std::filesystem::path& path, const Model& m, int epoch, const std::vector<EpochLog>& history);
Model load_checkpoint(const std::filesystem::path& path, int* epoch = nullptr);

}  // namespace topowave
