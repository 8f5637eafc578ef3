#include <benchmark/benchmark.h>

#include "luvli/fitting.hpp"
#include "luvli/likelihood.hpp"
#include "luvli/rng.hpp"

using namespace luvli;

namespace {

const GroundTruthLandmark kGt = GroundTruthLandmark::visible_at({33.1, 38.6});
const LandmarkPrediction kPred{{32.0, 40.0}, {2.0, 1.0, 1.0}, 0.9};

void BM_LossGaussian(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(luvli_loss(LikelihoodKind::kGaussian, kGt, kPred));
    }
}
BENCHMARK(BM_LossGaussian);

void BM_LossLaplacian(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(luvli_loss(LikelihoodKind::kLaplacian, kGt, kPred));
    }
}
BENCHMARK(BM_LossLaplacian);

void BM_GradGaussian(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(luvli_grad(LikelihoodKind::kGaussian, kGt, kPred));
    }
}
BENCHMARK(BM_GradGaussian);

void BM_GradLaplacian(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(luvli_grad(LikelihoodKind::kLaplacian, kGt, kPred));
    }
}
BENCHMARK(BM_GradLaplacian);

void BM_SampleGaussian(benchmark::State& state) {
    RngStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sample(LikelihoodKind::kGaussian, kPred.mean, kPred.chol, rng));
    }
}
BENCHMARK(BM_SampleGaussian);

void BM_SampleLaplacian(benchmark::State& state) {
    RngStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sample(LikelihoodKind::kLaplacian, kPred.mean, kPred.chol, rng));
    }
}
BENCHMARK(BM_SampleLaplacian);

void BM_FitMle(benchmark::State& state) {
    SyntheticScenario scenario;
    scenario.kind = LikelihoodKind::kGaussian;
    scenario.num_samples = static_cast<int>(state.range(0));
    scenario.seed = 17;
    scenario.landmarks.push_back({{32.0, 40.0}, {4.0, 1.0, 2.0}, 0.8, false});
    const auto samples = generate(scenario);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_mle(samples[0], scenario.kind));
    }
}
BENCHMARK(BM_FitMle)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
