// Writes the synthetic cohorts used by the benchmarks as HPMX files plus a
// manifest.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "topowave/synthetic.hpp"

using namespace topowave;

int main(int argc, char** argv) {
    CLI::App app{"Synthetic point-cloud cohorts"};
    std::string kind = "mixture", out = "cohort";
    MixtureCohortOptions o;
    app.add_option("kind", kind, "mixture | persistence | two-subset")
        ->check(CLI::IsMember({"mixture", "persistence", "two-subset"}));
    app.add_option("--out", out, "output directory");
    app.add_option("--clouds-per-class", o.clouds_per_class);
    app.add_option("--points", o.points);
    app.add_option("--dim", o.dim);
    app.add_option("--center-spread", o.center_spread);
    app.add_option("--within-spread", o.within_spread);
    app.add_option("--separation", o.separation);
    app.add_option("--seed", o.seed);
    app.add_option("--sign-direction", o.sign_direction, "split mixtures along a random sign vector");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        const Cohort c = kind == "mixture" ? mixture_cohort(o)
                         : kind == "persistence" ? persistence_cohort(o)
                                                 : two_subset_cohort(o);
        write_cohort(c, out);
        std::cout << "wrote " << c.size() << " clouds to " << out << "/manifest.json\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
