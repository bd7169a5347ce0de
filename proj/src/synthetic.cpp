#include "topowave/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "topowave/persistence.hpp"

namespace topowave {

namespace {

Vector gaussian_vector(std::mt19937_64& rng, Eigen::Index d, double sd) {
    std::normal_distribution<double> g(0.0, sd);
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = g(rng);
    return v;
}

Vector unit_direction(std::mt19937_64& rng, Eigen::Index d, Eigen::Index begin, Eigen::Index end) {
    Vector u = Vector::Zero(d);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = begin; i < end; ++i) u(i) = g(rng);
    return u / u.norm();
}

Matrix blob(std::mt19937_64& rng, int n, const Vector& center, double sd) {
    Matrix x(n, center.size());
    for (int i = 0; i < n; ++i) x.row(i) = (center + gaussian_vector(rng, center.size(), sd)).transpose();
    return x;
}

Matrix two_blobs(std::mt19937_64& rng, int n, const Vector& center, const Vector& dir, double gap, double sd) {
    Matrix x(n, center.size());
    const int first = n / 2;
    x.topRows(first) = blob(rng, first, center - 0.5 * gap * dir, sd);
    x.bottomRows(n - first) = blob(rng, n - first, center + 0.5 * gap * dir, sd);
    return x;
}

Vector sign_direction(std::mt19937_64& rng, Eigen::Index d, Eigen::Index begin, Eigen::Index end) {
    Vector u = Vector::Zero(d);
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = begin; i < end; ++i) u(i) = coin(rng) ? 1.0 : -1.0;
    return u / u.norm();
}

Vector split_direction(std::mt19937_64& rng, const MixtureCohortOptions& o, Eigen::Index begin, Eigen::Index end) {
    return o.sign_direction ? sign_direction(rng, o.dim, begin, end) : unit_direction(rng, o.dim, begin, end);
}

}  // namespace

Cohort mixture_cohort(const MixtureCohortOptions& o) {
    std::mt19937_64 rng(o.seed);
    std::vector<PointCloud> clouds;
    std::vector<int> classes;
    for (int i = 0; i < 2 * o.clouds_per_class; ++i) {
        const int label = i % 2;
        const Vector c = gaussian_vector(rng, o.dim, o.center_spread);
        PointCloud pc;
        pc.id = "cloud" + std::to_string(i);
        pc.points = label == 0 ? blob(rng, o.points, c, o.within_spread)
                               : two_blobs(rng, o.points, c, split_direction(rng, o, 0, o.dim), o.separation, o.within_spread);
        clouds.push_back(std::move(pc));
        classes.push_back(label);
    }
    return make_cohort(Task::classification, std::move(clouds), std::move(classes), {});
}

Cohort persistence_cohort(const MixtureCohortOptions& o) {
    Cohort c = mixture_cohort(o);
    c.task = Task::regression;
    c.targets.clear();
    for (const auto& pc : c.clouds) c.targets.push_back(h0_persistence(pc.points).vector());
    c.classes.clear();
    c.validate();
    return c;
}

Cohort two_subset_cohort(const MixtureCohortOptions& o) {
    std::mt19937_64 rng(o.seed);
    const Eigen::Index q = std::max<Eigen::Index>(1, o.dim / 4);
    std::vector<PointCloud> clouds;
    std::vector<int> classes;
    for (int i = 0; i < 2 * o.clouds_per_class; ++i) {
        const int label = i % 2;
        const Vector c = gaussian_vector(rng, o.dim, o.center_spread);
        PointCloud pc;
        pc.id = "cloud" + std::to_string(i);
        if (label == 0) {
            pc.points = blob(rng, o.points, c, o.within_spread);
        } else {
            const bool subset_a = (i / 2) % 2 == 0;
            const Vector u = subset_a ? split_direction(rng, o, 0, q) : split_direction(rng, o, q, 2 * q);
            pc.points = two_blobs(rng, o.points, c, u, o.separation, o.within_spread);
        }
        clouds.push_back(std::move(pc));
        classes.push_back(label);
    }
    return make_cohort(Task::classification, std::move(clouds), std::move(classes), {});
}

Matrix circle_points(int n, std::uint64_t seed, Vector* angles) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    Matrix x(n, 2);
    Vector theta(n);
    for (int i = 0; i < n; ++i) {
        theta(i) = u(rng);
        x(i, 0) = std::cos(theta(i));
        x(i, 1) = std::sin(theta(i));
    }
    if (angles) *angles = theta;
    return x;
}

}  // namespace topowave
