// Command-line entry point: build, features, train, eval, persistence, verify, bench.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "topowave/bench.hpp"
#include "topowave/config.hpp"
#include "topowave/data.hpp"
#include "topowave/learn.hpp"
#include "topowave/persistence.hpp"
#include "topowave/scattering.hpp"
#include "topowave/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace topowave;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::string out = ".";
    std::vector<std::string> overrides;  // key=value

    // Named knobs; applied after the config file and before --set.
    std::optional<int> views, order, scales, epochs, batch_size, hidden;
    std::optional<double> sigma, epsilon, lr, weight_decay, train_fraction, val_fraction;
    std::optional<std::string> pooling, orientation;
    bool freeze = false;
};

RunConfig resolve_config(const Globals& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = load_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.views) cfg.num_views = *g.views;
    if (g.order) cfg.max_order = *g.order;
    if (g.scales) cfg.num_scales = *g.scales;
    if (g.epochs) cfg.epochs = *g.epochs;
    if (g.batch_size) cfg.batch_size = *g.batch_size;
    if (g.hidden) cfg.hidden_width = *g.hidden;
    if (g.sigma) cfg.bandwidth = *g.sigma;
    if (g.epsilon) cfg.vr_threshold = *g.epsilon;
    if (g.lr) cfg.learning_rate = *g.lr;
    if (g.weight_decay) cfg.weight_decay = *g.weight_decay;
    if (g.train_fraction) cfg.train_fraction = *g.train_fraction;
    if (g.val_fraction) cfg.val_fraction = *g.val_fraction;
    if (g.pooling) cfg.pooling = parse_pooling(*g.pooling);
    if (g.orientation) cfg.orientation = parse_orientation(*g.orientation);
    if (g.freeze) cfg.freeze_structure = true;
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

fs::path out_dir(const Globals& g) {
    fs::path p(g.out);
    fs::create_directories(p);
    return p;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json metrics_json(const Metrics& m) {
    json j;
    j["task"] = to_string(m.task);
    j["count"] = m.count;
    j["loss"] = m.loss;
    if (m.task == Task::classification) {
        j["accuracy"] = m.accuracy;
        j["class_total"] = m.class_total;
        j["class_correct"] = m.class_correct;
        j["auc"] = m.auc ? json(*m.auc) : json(nullptr);
    } else {
        j["mse"] = m.mse;
        j["normalized_mse"] = m.normalized_mse;
        j["variance_ratio"] = m.variance_ratio;
        json per_dim = json::array();
        for (double v : m.dim_normalized_mse) per_dim.push_back(std::isnan(v) ? json(nullptr) : json(v));
        j["dim_normalized_mse"] = per_dim;
    }
    return j;
}

int cmd_build(const Globals& g, const std::string& manifest) {
    const RunConfig cfg = resolve_config(g);
    const Cohort cohort = load_cohort(manifest);
    const auto weights = ViewWeights::identity(cfg.num_views, cohort.dim());
    json clouds = json::array();
    std::size_t peak = 0;
    for (const auto& pc : cohort.clouds) {
        // Identity weights make every view identical, so one build suffices.
        const auto s = build_view_structure(reweight(pc.points, weights.alpha[0]), cfg);
        std::vector<std::size_t> counts;
        for (int k = 0; k <= cfg.max_order; ++k) counts.push_back(s.complex.count(k));
        const double n = static_cast<double>(pc.size());
        const double density = n > 1 ? static_cast<double>(s.edges.size()) / (n * (n - 1) / 2) : 0.0;
        peak = std::max(peak, s.complex.total_count());
        clouds.push_back({{"id", pc.id}, {"counts", counts}, {"edge_density", density},
                          {"budget_headroom", static_cast<double>(cfg.simplex_budget) -
                                                  static_cast<double>(*std::max_element(counts.begin(), counts.end()))}});
        std::cout << pc.id;
        for (int k = 0; k <= cfg.max_order; ++k) std::cout << "\tN" << k << '=' << counts[static_cast<std::size_t>(k)];
        std::cout << "\tdensity=" << density << '\n';
    }
    json report{{"config", config_to_map(cfg)}, {"clouds", clouds}, {"largest_complex", peak},
                {"simplex_budget", cfg.simplex_budget}};
    write_json(out_dir(g) / "build.json", report);
    return 0;
}

int cmd_features(const Globals& g, const std::string& manifest, const std::string& checkpoint) {
    RunConfig cfg = resolve_config(g);
    ViewWeights weights;
    Cohort cohort;
    if (!checkpoint.empty()) {
        const Model m = load_checkpoint(checkpoint);
        cfg = m.config;
        weights = m.view_weights();
        cohort = m.input_norm.mean.size() > 0 ? load_cohort(manifest, m.input_norm) : load_cohort(manifest);
    } else {
        cohort = load_cohort(manifest);
        weights = ViewWeights::identity(cfg.num_views, cohort.dim());
    }
    const Matrix phi = cohort_features(cohort, weights, cfg);
    const auto names = FeatureLayout::make(cfg.num_views, cfg.max_order, cohort.dim(), ScatteringOptions::from(cfg)).names();
    const fs::path path = out_dir(g) / "features.csv";
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "id";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        out << cohort.clouds[i].id;
        for (Eigen::Index r = 0; r < phi.rows(); ++r) out << ',' << phi(r, static_cast<Eigen::Index>(i));
        out << '\n';
    }
    std::cout << "wrote " << cohort.size() << " rows x " << names.size() << " features to " << path.string() << '\n';
    return 0;
}

int cmd_train(const Globals& g, const std::string& manifest) {
    const RunConfig cfg = resolve_config(g);
    const Cohort cohort = load_cohort(manifest);
    const auto split = experiment_split(cohort, cfg);
    spdlog::info("fitting {} clouds, validating on {}, holding out {}", split.fit.size(), split.val.size(),
                 split.test.size());
    const auto result = train(split.fit, split.val, cfg, [](const EpochLog& e) {
        spdlog::info("epoch {:3d}  train_loss {:.6f}  val_loss {:.6f}  val_metric {:.4f}", e.epoch, e.train_loss,
                     e.val_loss, e.val_metric);
    });
    const fs::path dir = out_dir(g);
    save_checkpoint(dir / "checkpoint.hpck", result.model, result.best_epoch, result.history);
    write_metrics_csv(dir / "metrics.csv", result.history);
    json report;
    report["best_epoch"] = result.best_epoch;
    report["structure_rebuilds"] = result.structure_rebuilds;
    report["train"] = metrics_json(evaluate(split.fit, result.model));
    if (split.val.size() > 0) report["val"] = metrics_json(evaluate(split.val, result.model));
    if (split.test.size() > 0) report["test"] = metrics_json(evaluate(split.test, result.model));
    write_json(dir / "train_report.json", report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_eval(const Globals& g, const std::string& manifest, const std::string& checkpoint, const std::string& split) {
    if (checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
    const Model m = load_checkpoint(checkpoint);
    const Cohort cohort = m.input_norm.mean.size() > 0 ? load_cohort(manifest, m.input_norm) : load_cohort(manifest);
    Cohort target = cohort;
    if (split != "all") {
        const auto parts = experiment_split(cohort, m.config);
        target = split == "train" ? parts.fit : split == "val" ? parts.val : parts.test;
    }
    const json report = metrics_json(evaluate(target, m));
    write_json(out_dir(g) / "eval.json", report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_persistence(const Globals& g, const std::string& manifest) {
    const Cohort cohort = load_cohort(manifest);
    const fs::path dir = out_dir(g);
    std::ofstream out(dir / "persistence.csv");
    if (!out) throw Error("cannot write persistence.csv");
    out.precision(17);
    out << "id,finite_pairs,mean_persistence,max_persistence,total_persistence";
    for (int k = 1; k <= PersistenceSummary::kTopLifetimes; ++k) out << ",lifetime_" << k;
    out << '\n';
    Cohort regression = cohort;
    regression.task = Task::regression;
    regression.classes.clear();
    regression.targets.assign(cohort.size(), Vector());
    parallel_for(cohort.size(), [&](std::size_t i) {
        regression.targets[i] = h0_persistence(cohort.clouds[i].points).vector();
    });
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        out << cohort.clouds[i].id;
        for (Eigen::Index c = 0; c < regression.targets[i].size(); ++c) out << ',' << regression.targets[i](c);
        out << '\n';
    }
    write_cohort(regression, dir / "persistence_cohort");
    std::cout << "wrote targets for " << cohort.size() << " clouds to " << (dir / "persistence.csv").string()
              << " and a regression manifest under " << (dir / "persistence_cohort").string() << '\n';
    return 0;
}

int cmd_verify(const Globals& g) {
    const RunConfig cfg = resolve_config(g);
    const json report = verify_all(cfg.seed);
    write_json(out_dir(g) / "verify.json", report);
    for (const auto& [k, v] : report.items())
        if (v.is_object()) std::cout << (v.at("pass").get<bool>() ? "PASS " : "FAIL ") << v.at("name").get<std::string>() << '\n';
    return report.at("pass").get<bool>() ? 0 : 1;
}

int cmd_bench(const Globals& g, const std::vector<int>& sizes, int dim) {
    const RunConfig cfg = resolve_config(g);
    BenchOptions o;
    if (!sizes.empty()) o.sizes = sizes;
    o.dim = dim;
    o.seed = cfg.seed;
    const json report = run_bench(cfg, o);
    write_json(out_dir(g) / "bench.json", report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological scattering features and models for cohorts of point clouds"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--threads", g.threads, "worker threads (default: logical cores)");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--views", g.views, "number of views V");
    app.add_option("--sigma", g.sigma, "kernel bandwidth");
    app.add_option("--epsilon", g.epsilon, "VR affinity threshold in (0, 1)");
    app.add_option("--order", g.order, "maximum simplex order K");
    app.add_option("--scales", g.scales, "number of wavelet scales J");
    app.add_option("--pooling", g.pooling, "mean | sum | mean+max");
    app.add_option("--orientation", g.orientation, "unoriented | oriented");
    app.add_option("--epochs", g.epochs, "training epochs");
    app.add_option("--lr", g.lr, "learning rate");
    app.add_option("--weight-decay", g.weight_decay, "decoupled weight decay");
    app.add_option("--batch-size", g.batch_size, "clouds per optimiser step");
    app.add_option("--hidden", g.hidden, "hidden layer width");
    app.add_option("--train-fraction", g.train_fraction, "share of clouds used for training");
    app.add_option("--val-fraction", g.val_fraction, "share of the training clouds used for model selection");
    app.add_flag("--freeze-structure", g.freeze, "keep the complexes from the first epoch");
    app.add_option("--set", g.overrides, "override any configuration key (key=value)");

    std::string manifest, checkpoint, split = "all";
    std::vector<int> sizes;
    int bench_dim = 10;

    auto* build = app.add_subcommand("build", "complex statistics per cloud");
    build->add_option("manifest", manifest)->required();
    auto* features = app.add_subcommand("features", "scattering feature matrix as CSV");
    features->add_option("manifest", manifest)->required();
    features->add_option("--checkpoint", checkpoint, "take view weights from a trained model");
    auto* train_cmd = app.add_subcommand("train", "train on a split of the cohort");
    train_cmd->add_option("manifest", manifest)->required();
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("manifest", manifest)->required();
    eval->add_option("--checkpoint", checkpoint)->required();
    eval->add_option("--split", split, "all | train | val | test (split from the checkpoint's seed)")
        ->check(CLI::IsMember({"all", "train", "val", "test"}));
    auto* persistence = app.add_subcommand("persistence", "H0 persistence summaries as regression targets");
    persistence->add_option("manifest", manifest)->required();
    auto* verify = app.add_subcommand("verify", "run the theorem checks");
    auto* bench = app.add_subcommand("bench", "construction timing against n");
    bench->add_option("--sizes", sizes, "point counts");
    bench->add_option("--dim", bench_dim, "feature dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (g.threads > 0) set_num_threads(g.threads);
        if (*build) return cmd_build(g, manifest);
        if (*features) return cmd_features(g, manifest, checkpoint);
        if (*train_cmd) return cmd_train(g, manifest);
        if (*eval) return cmd_eval(g, manifest, checkpoint, split);
        if (*persistence) return cmd_persistence(g, manifest);
        if (*verify) return cmd_verify(g);
        if (*bench) return cmd_bench(g, sizes, bench_dim);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
