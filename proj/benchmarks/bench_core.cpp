// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "rme/grid.hpp"
#include "rme/network.hpp"
#include "rme/random.hpp"
#include "rme/sampling.hpp"
#include "rme/synthgen.hpp"
#include "rme/traditional.hpp"

using namespace rme;

namespace {

std::vector<Measurement> random_obs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Measurement> m;
    for (std::size_t i = 0; i < n; ++i)
        m.push_back({{uniform_real(rng, 0.0, 19.2), uniform_real(rng, 0.0, 19.2)}, uniform_real(rng, -90.0, -40.0)});
    return m;
}

Tensor random_input(std::size_t channels, std::size_t side) {
    Rng rng(3);
    Tensor t = Tensor::zeros(channels, side, side);
    for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = standard_normal(rng);
    return t;
}

}  // namespace

static void BM_KrigingFitPredictGrid(benchmark::State& state) {
    const auto obs = random_obs(static_cast<std::size_t>(state.range(0)), 1);
    const auto spec = patch_grid_spec({0.0, 0.0}, 19.2, 1.2);
    const auto points = grid_locations(spec);
    const KrigingParams p{0.26, 300.0, 1.0};
    for (auto _ : state) {
        const KrigingModel model(obs, p);
        double s = 0.0;
        for (const auto& x : points) s += model.predict(x);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_KrigingFitPredictGrid)->Arg(10)->Arg(50)->Arg(100)->Arg(400);

static void BM_KrrFit(benchmark::State& state) {
    const auto obs = random_obs(static_cast<std::size_t>(state.range(0)), 2);
    const KrrParams p{1e-3, KernelKind::Gaussian, 50.0};
    for (auto _ : state) benchmark::DoNotOptimize(krr_fit(obs, p));
}
BENCHMARK(BM_KrrFit)->Arg(10)->Arg(50)->Arg(100)->Arg(400);

static void BM_KnnGrid(benchmark::State& state) {
    const auto obs = random_obs(static_cast<std::size_t>(state.range(0)), 3);
    const auto points = grid_locations(patch_grid_spec({0.0, 0.0}, 19.2, 1.2));
    for (auto _ : state) {
        double s = 0.0;
        for (const auto& x : points) s += knn_estimate(obs, {5}, x);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_KnnGrid)->Arg(10)->Arg(100)->Arg(1000);

static void BM_NetworkForward(benchmark::State& state) {
    const auto channels = static_cast<std::size_t>(state.range(0));
    const auto x = random_input(channels, 16);
    const auto w = NetworkWeights::random(channels, 1);
    for (auto _ : state) benchmark::DoNotOptimize(network_forward(x, w));
}
BENCHMARK(BM_NetworkForward)->Arg(2)->Arg(5);

static void BM_NetworkGradient(benchmark::State& state) {
    const auto channels = static_cast<std::size_t>(state.range(0));
    const auto x = random_input(channels, 16);
    const auto w = NetworkWeights::random(channels, 1);
    const Matrix target = Matrix::Zero(16, 16);
    const Mask mask = Mask::Ones(16, 16);
    std::vector<double> grad;
    for (auto _ : state) benchmark::DoNotOptimize(masked_mse_gradient(x, target, mask, w, grad));
}
BENCHMARK(BM_NetworkGradient)->Arg(2)->Arg(5);

static void BM_Quantize(benchmark::State& state) {
    PropagationConfig p;
    p.fading_enabled = true;
    const Region region{54.0, 54.0};
    const auto set = sample_measurements(generate_map(region, p), lawnmower_locations(region, 1.2, 0.27));
    const auto [nx, ny] = region_grid_size(region, 1.2);
    const GridSpec spec{ny, nx, 1.2, {0.0, 0.0}};
    for (auto _ : state) benchmark::DoNotOptimize(quantize(set.measurements(), spec, CombiningMode::DbMean));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(set.size()));
}
BENCHMARK(BM_Quantize);

static void BM_ShadowingMap(benchmark::State& state) {
    PropagationConfig p;
    p.shadow_variance = 9.0;
    p.shadow_half_distance = 20.0;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        p.seed = ++seed;
        benchmark::DoNotOptimize(generate_map({54.0, 54.0}, p));
    }
}
BENCHMARK(BM_ShadowingMap);

BENCHMARK_MAIN();
