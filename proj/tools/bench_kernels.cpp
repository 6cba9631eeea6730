// Times the OpenMP reduction kernels against the serial reference
// implementations on teacher-generated data.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "convexity/data_io.hpp"
#include "convexity/loss.hpp"
#include "convexity/ref.hpp"
#include "convexity/rng.hpp"

namespace {

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double start = omp_get_wtime();
        fn();
        best = std::min(best, omp_get_wtime() - start);
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int n = 4096;
    int reps = 5;
    if (argc > 1) n = std::atoi(argv[1]);
    if (argc > 2) reps = std::atoi(argv[2]);
    if (n < 1 || reps < 1) {
        std::fprintf(stderr, "usage: bench_kernels [samples] [reps]\n");
        return 1;
    }

    const cvx::Architecture arch({16, 32, 32, 1});
    cvx::io::TeacherSpec spec{arch, 0.8, 0.01, n, 42, 1.0};
    const auto gen = cvx::io::gen_teacher(spec);
    const cvx::Weights w = cvx::Weights::gaussian(arch, 7, 0.5);
    const cvx::Weights x = cvx::Weights::gaussian(arch, 8, 1.0);
    const double lambda = 1e-3;

    std::printf("samples=%d params=%d threads=%d reps=%d (best-of)\n", n, arch.param_count(),
                omp_get_max_threads(), reps);
    std::printf("%-20s %12s %12s %8s\n", "kernel", "serial[ms]", "parallel[ms]", "speedup");

    volatile double sink = 0.0;
    const auto row = [&](const char* name, auto serial, auto parallel) {
        const double ts = time_best_of(reps, serial);
        const double tp = time_best_of(reps, parallel);
        std::printf("%-20s %12.3f %12.3f %8.2fx\n", name, ts * 1e3, tp * 1e3, ts / tp);
    };

    row(
        "loss value", [&] { sink = cvx::ref::loss_value(arch, w, gen.data); },
        [&] { sink = cvx::loss::value(arch, w, gen.data); });
    row(
        "gradient", [&] { sink = cvx::ref::gradient(arch, w, gen.data, lambda).norm(); },
        [&] { sink = cvx::loss::gradient(arch, w, gen.data, lambda).norm(); });
    row(
        "hvp", [&] { sink = cvx::ref::hvp(arch, w, gen.data, lambda, x).norm(); },
        [&] { sink = cvx::loss::hvp(arch, w, gen.data, lambda, x).norm(); });
    row(
        "laplacian", [&] { sink = cvx::ref::laplacian(arch, w, gen.data); },
        [&] { sink = cvx::loss::laplacian(arch, w, gen.data); });
    (void)sink;
    return 0;
}
