#include "topowave/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "topowave/matrix_io.hpp"

namespace topowave {

using nlohmann::json;

std::string to_string(Task t) { return t == Task::classification ? "classification" : "regression"; }

Task parse_task(const std::string& s) {
    if (s == "classification") return Task::classification;
    if (s == "regression") return Task::regression;
    throw LoadError("unknown task '" + s + "' (expected classification|regression)");
}

Matrix Normalization::apply(const Matrix& points) const {
    if (points.cols() != mean.size())
        throw DimensionError("normalization expects " + std::to_string(mean.size()) +
                             " features, got " + std::to_string(points.cols()));
    Matrix out(points.rows(), points.cols());
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        if (scale(c) == 0.0) {
            out.col(c).setZero();
        } else {
            out.col(c) = (points.col(c).array() - mean(c)) / scale(c);
        }
    }
    return out;
}

int Cohort::num_classes() const {
    if (classes.empty()) return 0;
    return *std::max_element(classes.begin(), classes.end()) + 1;
}

Cohort Cohort::subset(const std::vector<std::size_t>& indices) const {
    Cohort out;
    out.task = task;
    out.normalization = normalization;
    for (std::size_t i : indices) {
        out.clouds.push_back(clouds.at(i));
        if (task == Task::classification) out.classes.push_back(classes.at(i));
        else out.targets.push_back(targets.at(i));
    }
    return out;
}

void Cohort::validate() const {
    if (clouds.empty()) throw LoadError("cohort is empty");
    const Eigen::Index d = clouds.front().dim();
    for (const auto& c : clouds) {
        if (c.size() < 1 || c.dim() < 1) throw LoadError(c.id + ": point cloud must be non-empty");
        if (c.dim() != d)
            throw LoadError(c.id + ": has " + std::to_string(c.dim()) + " features, expected " +
                            std::to_string(d) + " (inconsistent d across clouds)");
        if (!c.points.allFinite()) throw LoadError(c.id + ": contains non-finite values");
    }
    if (task == Task::classification) {
        if (classes.size() != clouds.size()) throw LoadError("label count does not match cloud count");
        for (int y : classes)
            if (y < 0) throw LoadError("class labels must be non-negative integers");
    } else {
        if (targets.size() != clouds.size()) throw LoadError("target count does not match cloud count");
        for (const auto& t : targets) {
            if (t.size() != targets.front().size() || t.size() == 0)
                throw LoadError("regression targets must share one non-zero dimension");
            if (!t.allFinite()) throw LoadError("regression targets must be finite");
        }
    }
}

Normalization fit_normalization(const std::vector<PointCloud>& clouds) {
    const Eigen::Index d = clouds.front().dim();
    Normalization norm;
    norm.mean = Vector::Zero(d);
    norm.scale = Vector::Zero(d);
    double count = 0;
    for (const auto& c : clouds) {
        norm.mean += c.points.colwise().sum().transpose();
        count += static_cast<double>(c.size());
    }
    norm.mean /= count;
    Vector var = Vector::Zero(d);
    for (const auto& c : clouds)
        var += (c.points.rowwise() - norm.mean.transpose()).array().square().colwise().sum().matrix().transpose();
    var /= count;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double sd = std::sqrt(var(j));
        // Residual spread at round-off level of the mean counts as constant.
        const double floor = 1e-12 * std::max(1.0, std::abs(norm.mean(j)));
        norm.scale(j) = sd > floor ? sd : 0.0;
    }
    return norm;
}

namespace {

struct ManifestItem {
    std::filesystem::path file;
    std::string id;
    json label;
};

struct Manifest {
    Task task;
    std::vector<ManifestItem> items;
};

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(path.string() + ": manifest not found or unreadable");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ": invalid JSON: " + e.what());
    }
    Manifest m;
    const json* items = nullptr;
    if (doc.is_array()) {
        m.task = Task::classification;
        items = &doc;
    } else if (doc.is_object()) {
        m.task = parse_task(doc.value("task", std::string("classification")));
        if (!doc.contains("items") || !doc["items"].is_array())
            throw LoadError(path.string() + ": manifest needs an \"items\" array");
        items = &doc["items"];
    } else {
        throw LoadError(path.string() + ": manifest must be an object or an array");
    }
    const auto base = path.parent_path();
    for (std::size_t i = 0; i < items->size(); ++i) {
        const json& it = (*items)[i];
        if (!it.is_object() || !it.contains("file") || !it["file"].is_string() || !it.contains("label"))
            throw LoadError(path.string() + ": item " + std::to_string(i) +
                            " needs \"file\" (string) and \"label\"");
        ManifestItem item;
        std::filesystem::path f = it["file"].get<std::string>();
        item.file = f.is_absolute() ? f : base / f;
        item.id = it.contains("id") && it["id"].is_string() ? it["id"].get<std::string>()
                                                           : f.stem().string();
        item.label = it["label"];
        m.items.push_back(std::move(item));
    }
    if (m.items.empty()) throw LoadError(path.string() + ": manifest lists no items");
    return m;
}

Cohort load_unnormalized(const std::filesystem::path& manifest_path) {
    const Manifest manifest = read_manifest(manifest_path);
    Cohort cohort;
    cohort.task = manifest.task;
    const std::size_t count = manifest.items.size();
    cohort.clouds.resize(count);
    parallel_for(count, [&](std::size_t i) {
        cohort.clouds[i].id = manifest.items[i].id;
        cohort.clouds[i].points = read_matrix_file(manifest.items[i].file);
    });
    for (std::size_t i = 0; i < count; ++i) {
        const json& label = manifest.items[i].label;
        const std::string where = manifest.items[i].file.string();
        if (cohort.task == Task::classification) {
            if (!label.is_number_integer() && !(label.is_number() && std::floor(label.get<double>()) == label.get<double>()))
                throw LoadError(where + ": classification label must be an integer");
            const auto y = label.get<long long>();
            if (y < 0) throw LoadError(where + ": class label must be non-negative");
            cohort.classes.push_back(static_cast<int>(y));
        } else {
            Vector t;
            if (label.is_number()) {
                t = Vector::Constant(1, label.get<double>());
            } else if (label.is_array()) {
                t.resize(static_cast<Eigen::Index>(label.size()));
                for (std::size_t j = 0; j < label.size(); ++j) {
                    if (!label[j].is_number()) throw LoadError(where + ": regression target must be numeric");
                    t(static_cast<Eigen::Index>(j)) = label[j].get<double>();
                }
            } else {
                throw LoadError(where + ": regression label must be a number or an array of numbers");
            }
            cohort.targets.push_back(std::move(t));
        }
    }
    cohort.validate();
    return cohort;
}

}  // namespace

Cohort load_cohort(const std::filesystem::path& manifest_path) {
    Cohort cohort = load_unnormalized(manifest_path);
    cohort.normalization = fit_normalization(cohort.clouds);
    for (auto& c : cohort.clouds) c.points = cohort.normalization.apply(c.points);
    return cohort;
}

Cohort load_cohort(const std::filesystem::path& manifest_path, const Normalization& norm) {
    Cohort cohort = load_unnormalized(manifest_path);
    cohort.normalization = norm;
    for (auto& c : cohort.clouds) c.points = norm.apply(c.points);
    return cohort;
}

Cohort make_cohort(Task task, std::vector<PointCloud> clouds, std::vector<int> classes,
                   std::vector<Vector> targets) {
    Cohort cohort;
    cohort.task = task;
    cohort.clouds = std::move(clouds);
    cohort.classes = std::move(classes);
    cohort.targets = std::move(targets);
    cohort.validate();
    cohort.normalization = fit_normalization(cohort.clouds);
    for (auto& c : cohort.clouds) c.points = cohort.normalization.apply(c.points);
    return cohort;
}

namespace {

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

std::size_t rounded_share(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const Cohort& cohort, double train_fraction, std::uint64_t seed) {
    if (cohort.size() < 2) throw Error("split_cohort needs at least 2 clouds");
    if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train_fraction must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train, test;
    if (cohort.task == Task::classification) {
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < cohort.size(); ++i) by_class[cohort.classes[i]].push_back(i);
        for (auto& [label, members] : by_class) {
            if (members.size() == 1) {
                spdlog::warn("class {} has a single member; assigning it to the training split", label);
                train.push_back(members.front());
                continue;
            }
            shuffle(members, rng);
            const std::size_t k = std::min(members.size(), rounded_share(train_fraction, members.size()));
            train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
            test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(k), members.end());
        }
    } else {
        std::vector<std::size_t> all(cohort.size());
        std::iota(all.begin(), all.end(), 0);
        shuffle(all, rng);
        const std::size_t k = std::min(all.size(), rounded_share(train_fraction, all.size()));
        train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
        test.assign(all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

std::pair<Cohort, Cohort> split_cohort(const Cohort& cohort, double train_fraction, std::uint64_t seed) {
    auto [train, test] = split_indices(cohort, train_fraction, seed);
    return {cohort.subset(train), cohort.subset(test)};
}

std::string serialize_cohort(const Cohort& cohort) {
    std::ostringstream out(std::ios::binary);
    out << to_string(cohort.task) << '\n' << cohort.size() << '\n';
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        out << cohort.clouds[i].id << '\n';
        write_hpmx(out, cohort.clouds[i].points);
        if (cohort.task == Task::classification) {
            out << cohort.classes[i] << '\n';
        } else {
            write_hpmx(out, Matrix(cohort.targets[i].transpose()));
        }
    }
    return out.str();
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& dir, const std::string& manifest_name) {
    std::filesystem::create_directories(dir);
    json items = json::array();
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const std::string file = cohort.clouds[i].id + ".hpmx";
        write_hpmx_file(dir / file, cohort.clouds[i].points);
        json item = {{"file", file}, {"id", cohort.clouds[i].id}};
        if (cohort.task == Task::classification) {
            item["label"] = cohort.classes[i];
        } else {
            const Vector& t = cohort.targets[i];
            item["label"] = std::vector<double>(t.data(), t.data() + t.size());
        }
        items.push_back(std::move(item));
    }
    json doc = {{"task", to_string(cohort.task)}, {"items", std::move(items)}};
    std::ofstream out(dir / manifest_name);
    if (!out) throw Error("cannot write manifest in " + dir.string());
    out << doc.dump(2) << '\n';
}

}  // namespace topowave
