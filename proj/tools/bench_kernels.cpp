#include "pcf/flow.hpp"
#include "pcf/parallel.hpp"
#include "../tests/ref_kernels.hpp"

#include <chrono>
#include <cstdio>
#include <memory>

using namespace pcf;

namespace {

double wall() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <class F>
double time_best(F&& fn, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = wall();
        fn();
        best = std::min(best, wall() - t0);
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    int N = 16;
    if (argc > 1) N = std::atoi(argv[1]);
    ComplexLattice lat = ComplexLattice::make(2, {N, N, N, N}, {M_PI, M_PI, M_PI, M_PI});
    auto bg = std::make_shared<FlowBackground>(make_torus_background(lat));
    VectorField a0 = random_pluriclosed_perturbation(*bg->lattice, bg->ghat, 7u, 0.2, 2);
    MetricField g = metric_from_oneform(bg->ghat, a0, true, bg->eps_pos);
    FlowState s = make_oneform_state(bg, a0);

    std::printf("lattice %d^4 (%td points), max threads %d\n", N, lat.points, max_threads());
    std::printf("%-24s %12s %12s %8s\n", "kernel", "serial [ms]", "openmp [ms]", "speedup");

    TorsionField T = chern_torsion(g);

    struct Row {
        const char* name;
        double serial, parallel;
    };
    std::vector<Row> rows;

    rows.push_back({"chern_torsion",
                    time_best([&] { (void)ref::chern_torsion(g); }),
                    time_best([&] { (void)chern_torsion(g); })});
    rows.push_back({"chern_connection",
                    time_best([&] { (void)ref::chern_connection(g); }),
                    time_best([&] { (void)chern_connection(g); })});
    rows.push_back({"torsion_Q",
                    time_best([&] { (void)ref::torsion_Q(g, T); }),
                    time_best([&] { (void)torsion_Q(g, T); })});
    rows.push_back({"torsion_norm2",
                    time_best([&] { (void)ref::torsion_norm2(g, T); }),
                    time_best([&] { (void)torsion_norm2(g, T); })});
    {
        const int save = max_threads();
        set_threads(1);
        const double t1 = time_best([&] { (void)reduced_oneform_rhs(s.alpha, s, true); });
        set_threads(save);
        const double tp = time_best([&] { (void)reduced_oneform_rhs(s.alpha, s, true); });
        rows.push_back({"reduced_oneform_rhs", t1, tp});
    }
    {
        const int save = max_threads();
        set_threads(1);
        const double t1 = time_best([&] { (void)pcf_metric_rhs(g, false, true); });
        set_threads(save);
        const double tp = time_best([&] { (void)pcf_metric_rhs(g, false, true); });
        rows.push_back({"pcf_metric_rhs", t1, tp});
    }

    for (const auto& r : rows)
        std::printf("%-24s %12.2f %12.2f %8.2f\n", r.name, 1e3 * r.serial, 1e3 * r.parallel,
                    r.serial / r.parallel);
    return 0;
}
