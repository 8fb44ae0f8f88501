/// @file bench_main.cpp
/// @brief Microbenchmarks for the hot paths (grown alongside the modules).

#include <benchmark/benchmark.h>

#include <random>

#include "kinetics/collision.hpp"
#include "kinetics/frames.hpp"
#include "kinetics/macro_micro.hpp"
#include "kinetics/spatial_grid.hpp"
#include "kinetics/trajectories.hpp"
#include "kinetics/velocity_grid.hpp"

using namespace kinetics;

static void BM_moments(benchmark::State& state) {
    const VelocityGrid grid = VelocityGrid::make(static_cast<int>(state.range(0)), 6.0);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = maxwellian_mu(grid.nodes[i]);
    for (auto _ : state) {
        MacroState m = moments(f, grid);
        benchmark::DoNotOptimize(m);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_moments)->Arg(15)->Arg(25);

static void BM_advance_free_batch(benchmark::State& state) {
    SimParams params;
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<PhasePoint> pts(1000);
    for (auto& p : pts) p = {{u(gen), u(gen), u(gen)}, {u(gen), u(gen), u(gen)}};
    const double span = params.tau_horizon();
    for (auto _ : state) {
        for (const auto& p : pts)
            benchmark::DoNotOptimize(advance_free(p, 0.0, 0.37 * span, params));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_advance_free_batch);

static void BM_backward_path(benchmark::State& state) {
    SimParams params;
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<PhasePoint> pts(100);
    for (auto& p : pts) p = {{u(gen), u(gen), u(gen)}, {1.0 + u(gen), u(gen), u(gen)}};
    const double tau0 = 0.9 * params.tau_horizon();
    for (auto _ : state) {
        for (const auto& p : pts) benchmark::DoNotOptimize(BackwardPath(tau0, p, params));
    }
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_backward_path);

static void BM_kernel_matvec(benchmark::State& state) {
    const VelocityGrid grid = VelocityGrid::make(static_cast<int>(state.range(0)), 6.0);
    const KernelMatrix km = build_kernel_matrix(grid);
    std::vector<double> u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        u[i] = (0.3 + grid.nodes[i].x) * maxwellian_mu_sqrt(grid.nodes[i]);
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_L(u, km));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()) *
                            static_cast<long>(grid.size()));
}
BENCHMARK(BM_kernel_matvec)->Arg(11)->Arg(15);

static void BM_apply_L_direct(benchmark::State& state) {
    const VelocityGrid grid = VelocityGrid::make(static_cast<int>(state.range(0)), 6.0);
    std::vector<double> u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        u[i] = (0.3 + grid.nodes[i].x) * maxwellian_mu_sqrt(grid.nodes[i]);
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_L_direct(u, grid));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()) *
                            static_cast<long>(grid.size()));
}
BENCHMARK(BM_apply_L_direct)->Arg(11);

static void BM_poisson_neumann(benchmark::State& state) {
    const SpatialGrid grid = SpatialGrid::make(static_cast<std::size_t>(state.range(0)));
    std::vector<double> src(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) src[i] = 12.0 - 20.0 * norm2(grid.nodes[i]);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_poisson_neumann(src, grid));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_poisson_neumann)->Arg(17)->Arg(25)->Unit(benchmark::kMillisecond);

static void BM_decompose(benchmark::State& state) {
    SimParams params;
    const SpatialGrid sgrid = SpatialGrid::make(9);
    const VelocityGrid vgrid = VelocityGrid::make(static_cast<int>(state.range(0)), 6.0);
    std::vector<double> u(sgrid.size() * vgrid.size());
    for (std::size_t s = 0; s < sgrid.size(); ++s)
        for (std::size_t v = 0; v < vgrid.size(); ++v)
            u[s * vgrid.size() + v] =
                (1.0 + 0.2 * sgrid.nodes[s].x) * maxwellian_mu_sqrt(vgrid.nodes[v]);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decompose(u, sgrid, vgrid, params));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(u.size()));
}
BENCHMARK(BM_decompose)->Arg(11)->Arg(15)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
