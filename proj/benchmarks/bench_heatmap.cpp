#include <benchmark/benchmark.h>

#include "luvli/heatmap.hpp"

using namespace luvli;

namespace {

const Heatmap& rendered() {
    static const Heatmap h = render_gaussian({31.3, 40.7}, 1.5, 64, 64);
    return h;
}

void BM_RenderGaussian(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(render_gaussian({31.3, 40.7}, 1.5, 64, 64));
    }
}
BENCHMARK(BM_RenderGaussian);

void BM_SpatialMeanRelu(benchmark::State& state) {
    const Heatmap& h = rendered();
    for (auto _ : state) {
        benchmark::DoNotOptimize(spatial_mean(h, SigmaKind::relu()));
    }
}
BENCHMARK(BM_SpatialMeanRelu);

void BM_SpatialMeanSoftmax(benchmark::State& state) {
    const Heatmap& h = rendered();
    for (auto _ : state) {
        benchmark::DoNotOptimize(spatial_mean(h, SigmaKind::softmax()));
    }
}
BENCHMARK(BM_SpatialMeanSoftmax);

void BM_SpatialMeanGrad(benchmark::State& state) {
    const Heatmap& h = rendered();
    for (auto _ : state) {
        benchmark::DoNotOptimize(spatial_mean_grad(h, SigmaKind::relu()));
    }
}
BENCHMARK(BM_SpatialMeanGrad);

void BM_ArgmaxQuarterOffset(benchmark::State& state) {
    const Heatmap& h = rendered();
    for (auto _ : state) {
        benchmark::DoNotOptimize(argmax_quarter_offset(h));
    }
}
BENCHMARK(BM_ArgmaxQuarterOffset);

}  // namespace
