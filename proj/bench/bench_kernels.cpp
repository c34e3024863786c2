// Parallel sweeps against the serial reference, plus one full gradient and projection.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fractv/grid_ops.hpp"
#include "fractv/lp_geometry.hpp"

using namespace fractv;

namespace {

std::vector<double> noise(std::size_t n) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(gen);
    return v;
}

template <bool Parallel>
void BM_sweep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Axis axis = state.range(1) ? Axis::y : Axis::x;
    const AxisStencil st(FracOrder(1.5), Side::left, 1.0, n);
    const auto in = noise(static_cast<std::size_t>(n) * n);
    std::vector<double> out(in.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::sweep(in, out, n, n, axis, st, false);
        } else {
            kernels::serial::sweep(in, out, n, n, axis, st, false);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}

void BM_frac_grad(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Image img(n, n, 1.0, noise(static_cast<std::size_t>(n) * n));
    for (auto _ : state) benchmark::DoNotOptimize(frac_grad(img, FracOrder(1.3)));
}

void BM_project(benchmark::State& state) {
    const LpExponent p(static_cast<double>(state.range(0)) / 10.0);
    auto v = noise(2 * 4096);
    std::vector<double> w(2);
    for (auto _ : state) {
        for (std::size_t i = 0; i < v.size(); i += 2) {
            w[0] = v[i];
            w[1] = 3.0 * v[i + 1];
            project_ball_inplace(w, p, 1.0);
            benchmark::DoNotOptimize(w.data());
        }
    }
    state.SetItemsProcessed(state.iterations() * 4096);
}

}  // namespace

BENCHMARK(BM_sweep<false>)->ArgsProduct({{64, 256, 1024}, {0, 1}})->Name("sweep/serial");
BENCHMARK(BM_sweep<true>)->ArgsProduct({{64, 256, 1024}, {0, 1}})->Name("sweep/openmp");
BENCHMARK(BM_frac_grad)->Arg(256)->Arg(1024);
BENCHMARK(BM_project)->Arg(10)->Arg(15)->Arg(20)->Arg(35);

BENCHMARK_MAIN();
