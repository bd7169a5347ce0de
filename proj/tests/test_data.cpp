#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "topowave/config.hpp"
#include "topowave/data.hpp"
#include "topowave/matrix_io.hpp"
#include "topowave/views.hpp"

using namespace topowave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("topowave_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
}

Cohort labelled_cohort(int per_class, int classes) {
    std::mt19937_64 rng(3);
    std::vector<PointCloud> clouds;
    std::vector<int> labels;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            clouds.push_back({"c" + std::to_string(c) + "_" + std::to_string(i), oracle::gaussian_cloud(rng, 4, 2)});
            labels.push_back(c);
        }
    return make_cohort(Task::classification, std::move(clouds), std::move(labels), {});
}

}  // namespace

TEST_CASE("manifest with two clouds of different sizes") {
    const auto dir = scratch("manifest");
    std::mt19937_64 rng(1);
    write_hpmx_file(dir / "a.hpmx", oracle::gaussian_cloud(rng, 5, 3));
    std::ostringstream csv;
    write_csv_matrix(csv, oracle::gaussian_cloud(rng, 7, 3));
    write_text(dir / "b.csv", csv.str());
    write_text(dir / "m.json",
               R"({"task": "classification", "items": [{"file": "a.hpmx", "label": 0}, {"file": "b.csv", "label": 1, "id": "second"}]})");
    const Cohort c = load_cohort(dir / "m.json");
    CHECK(c.size() == 2);
    CHECK(c.dim() == 3);
    CHECK(c.clouds[0].size() == 5);
    CHECK(c.clouds[1].size() == 7);
    CHECK(c.clouds[0].id == "a");
    CHECK(c.clouds[1].id == "second");
    CHECK(c.classes == std::vector<int>{0, 1});
}

TEST_CASE("NaN at row 4 is reported with its row") {
    const auto dir = scratch("nan");
    write_text(dir / "x.csv", "a,b\n1,2\n3,4\n5,6\n7,nan\n9,10\n");
    write_text(dir / "m.json", R"({"task": "classification", "items": [{"file": "x.csv", "label": 0}]})");
    try {
        (void)load_cohort(dir / "m.json");
        FAIL("expected a load error");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("row 4") != std::string::npos);
    }
}

TEST_CASE("ragged and missing inputs are load errors") {
    const auto dir = scratch("ragged");
    write_text(dir / "x.csv", "1,2\n3\n");
    write_text(dir / "m.json", R"({"task": "classification", "items": [{"file": "x.csv", "label": 0}]})");
    CHECK_THROWS_AS((void)load_cohort(dir / "m.json"), LoadError);
    CHECK_THROWS_AS((void)load_cohort(dir / "absent.json"), LoadError);
}

TEST_CASE("clouds with different feature counts are rejected") {
    std::mt19937_64 rng(2);
    std::vector<PointCloud> clouds{{"a", oracle::gaussian_cloud(rng, 3, 2)}, {"b", oracle::gaussian_cloud(rng, 3, 3)}};
    CHECK_THROWS_AS(make_cohort(Task::classification, clouds, {0, 1}, {}), LoadError);
}

TEST_CASE("constant column normalizes to zeros and the rest to unit variance") {
    std::mt19937_64 rng(4);
    std::vector<PointCloud> clouds;
    for (int i = 0; i < 3; ++i) {
        Matrix x = oracle::gaussian_cloud(rng, 6 + i, 3, 2.5);
        x.col(1).setConstant(7.0);
        x.col(2).array() += 40.0;
        clouds.push_back({"c" + std::to_string(i), x});
    }
    const Cohort c = make_cohort(Task::classification, clouds, {0, 1, 0}, {});
    Matrix all(0, 3);
    for (const auto& pc : c.clouds) {
        Matrix grown(all.rows() + pc.size(), 3);
        grown << all, pc.points;
        all = grown;
    }
    CHECK(all.col(1).cwiseAbs().maxCoeff() == 0.0);
    for (int col : {0, 2}) {
        const double mean = all.col(col).mean();
        const double sd = std::sqrt((all.col(col).array() - mean).square().mean());
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(sd - 1.0) <= 1e-9);
    }
}

TEST_CASE("stratified split: 10 clouds, fraction 0.8") {
    const Cohort c = labelled_cohort(5, 2);
    const auto [train, test] = split_cohort(c, 0.8, 7);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);
    CHECK(std::count(train.classes.begin(), train.classes.end(), 0) == 4);
    CHECK(std::count(train.classes.begin(), train.classes.end(), 1) == 4);
    CHECK(std::count(test.classes.begin(), test.classes.end(), 0) == 1);
    CHECK(std::count(test.classes.begin(), test.classes.end(), 1) == 1);

    const auto again = split_indices(c, 0.8, 7);
    CHECK(again == split_indices(c, 0.8, 7));
}

TEST_CASE("fraction 0.5 on three clouds of one class rounds half up") {
    const Cohort c = labelled_cohort(3, 1);
    const auto [train, test] = split_cohort(c, 0.5, 1);
    CHECK(train.size() == 2);
    CHECK(test.size() == 1);
}

TEST_CASE("load then split is byte-identical across runs") {
    const auto dir = scratch("determinism");
    const Cohort c = labelled_cohort(4, 2);
    write_cohort(c, dir);
    const Cohort a = load_cohort(dir / "manifest.json");
    const Cohort b = load_cohort(dir / "manifest.json");
    CHECK(serialize_cohort(a) == serialize_cohort(b));
    CHECK(serialize_cohort(split_cohort(a, 0.75, 11).first) == serialize_cohort(split_cohort(b, 0.75, 11).first));
}

TEST_CASE("HPMX round trip preserves every bit") {
    std::mt19937_64 rng(5);
    const Matrix x = oracle::gaussian_cloud(rng, 9, 4);
    std::stringstream buf;
    write_hpmx(buf, x);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "HPMX");
    CHECK(bytes.size() == 12 + 9 * 4 * 8);
    CHECK(read_hpmx(buf, "mem") == x);
}

TEST_CASE("config text parsing and validation") {
    RunConfig cfg;
    apply_config_text(cfg, "# comment\nnum_views = 2\nvr_threshold = 0.3  # trailing\npooling = mean_max\n", "t");
    CHECK(cfg.num_views == 2);
    CHECK(cfg.vr_threshold == doctest::Approx(0.3));
    CHECK(cfg.pooling == Pooling::mean_max);
    CHECK_THROWS_AS(apply_config_text(cfg, "no_such_key = 1\n", "t"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(cfg, "epochs = many\n", "t"), ConfigError);
    RunConfig bad;
    bad.vr_threshold = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    const RunConfig defaults;
    CHECK(defaults.learning_rate == 1e-4);
    CHECK(defaults.weight_decay == 1e-4);
    CHECK(defaults.epochs == 100);
    CHECK(defaults.vr_threshold == 0.5);
    CHECK(defaults.bandwidth == 1.0);
    CHECK(defaults.num_views == 4);
    CHECK(defaults.max_order == 1);
    CHECK(defaults.num_scales == 4);

    RunConfig round;
    for (const auto& [k, v] : config_to_map(defaults)) set_config_value(round, k, v);
    CHECK(config_to_map(round) == config_to_map(defaults));
}

TEST_CASE("reweighting") {
    const Matrix x = (Matrix(2, 2) << 1, 2, 3, 4).finished();
    CHECK(reweight(x, Vector::Ones(2)) == x);
    CHECK(reweight(x, (Vector(2) << 2, 0.5).finished()) == (Matrix(2, 2) << 2, 1, 6, 2).finished());
    const Matrix e1 = reweight(x, (Vector(2) << 1, 0).finished());
    CHECK(e1.col(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(e1.col(0) == x.col(0));

    // Linearity in alpha: bit-exact on integer data, where every product and
    // sum is representable, and to rounding on general data.
    std::mt19937_64 rng(6);
    const Matrix yi = oracle::uniform_cloud(rng, 10, 5, -20, 20).array().round().matrix();
    const Vector ai = oracle::uniform_cloud(rng, 5, 1, -9, 9).col(0).array().round().matrix();
    const Vector bi = oracle::uniform_cloud(rng, 5, 1, -9, 9).col(0).array().round().matrix();
    CHECK(reweight(yi, ai + bi) == reweight(yi, ai) + reweight(yi, bi));
    const Matrix y = oracle::gaussian_cloud(rng, 10, 5);
    const Vector a = oracle::gaussian_cloud(rng, 5, 1).col(0), b = oracle::gaussian_cloud(rng, 5, 1).col(0);
    CHECK((reweight(y, a + b) - reweight(y, a) - reweight(y, b)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("view weight initialisation stays within 0.01 of one") {
    const auto w = ViewWeights::init(4, 6, 9);
    CHECK(w.num_views() == 4);
    for (const auto& a : w.alpha) CHECK((a.array() - 1.0).abs().maxCoeff() <= 0.01);
    CHECK(ViewWeights::init(4, 6, 9).alpha[2] == w.alpha[2]);
}

TEST_CASE("Gaussian affinity values and sparsity") {
    const double sigma = 0.7;
    const double r = sigma * std::sqrt(2.0 * std::log(2.0));
    Matrix x(3, 2);
    x << 0, 0, 0, 0, r, 0;
    x.row(1) = x.row(0);
    const auto g = kernel_affinity(x, sigma, 0.4);
    CHECK(g.weights.coeff(0, 1) == 1.0);
    CHECK(g.weights.coeff(0, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.weights.coeff(1, 1) == 1.0);

    Matrix far(2, 2);
    far << 0, 0, 50, 0;
    const auto h = kernel_affinity(far, 1.0, 0.5);
    CHECK(h.weights.nonZeros() == 2);  // diagonal only
    CHECK(h.edges(0.5).empty());
    CHECK(affinity_radius(1.0, std::exp(-0.5)) == doctest::Approx(1.0));
}

TEST_CASE("affinity is symmetric and equivariant under permutation") {
    std::mt19937_64 rng(8);
    const Matrix x = oracle::gaussian_cloud(rng, 25, 3);
    const auto g = kernel_affinity(x, 1.0, 0.3);
    const Matrix w(g.weights);
    CHECK(w == w.transpose());
    CHECK(Matrix(kernel_affinity(reweight(x, Vector::Ones(3)), 1.0, 0.3).weights) == w);

    std::vector<int> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(25, 3);
    for (int i = 0; i < 25; ++i) xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    const Matrix wp(kernel_affinity(xp, 1.0, 0.3).weights);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j) CHECK(wp(i, j) == w(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
}
