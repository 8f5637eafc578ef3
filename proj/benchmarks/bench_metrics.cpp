#include <benchmark/benchmark.h>

#include <vector>

#include "luvli/calibration.hpp"
#include "luvli/likelihood.hpp"
#include "luvli/metrics.hpp"
#include "luvli/rng.hpp"

using namespace luvli;

namespace {

std::vector<double> random_nmes(int n) {
    RngStream rng(23);
    std::vector<double> values;
    values.reserve(n);
    for (int i = 0; i < n; ++i) values.push_back(14.0 * rng.uniform());
    return values;
}

FaceEvalRecord random_face(int landmarks) {
    RngStream rng(29);
    FaceEvalRecord rec;
    rec.bbox = BBox{0.0, 0.0, 200.0, 200.0};
    for (int k = 0; k < landmarks; ++k) {
        const Point2 t{200.0 * rng.uniform(), 200.0 * rng.uniform()};
        rec.truth.push_back(GroundTruthLandmark::visible_at(t));
        rec.predictions.push_back(
            {{t.x + rng.normal(), t.y + rng.normal()}, {1.5, 0.3, 1.2}, 0.9});
    }
    return rec;
}

void BM_Auc(benchmark::State& state) {
    const auto values = random_nmes(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(auc(values, 7.0));
    }
}
BENCHMARK(BM_Auc)->Arg(100)->Arg(1000);

void BM_Nme68(benchmark::State& state) {
    const FaceEvalRecord rec = random_face(68);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nme(rec, NormalizerKind::kBox));
    }
}
BENCHMARK(BM_Nme68);

void BM_Standardize(benchmark::State& state) {
    RngStream rng(31);
    std::vector<ResidualRecord> records;
    for (int i = 0; i < 10000; ++i) {
        const CholeskyCovariance chol{0.7 + rng.uniform(), -1.0 + 2.0 * rng.uniform(),
                                      0.7 + rng.uniform()};
        records.push_back(
            {sample(LikelihoodKind::kGaussian, {0.0, 0.0}, chol, rng), to_covariance(chol)});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(standardize(records));
    }
}
BENCHMARK(BM_Standardize)->Unit(benchmark::kMillisecond);

void BM_KlVsStandardLaplacian(benchmark::State& state) {
    RngStream rng(37);
    std::vector<Point2> points;
    for (int i = 0; i < 10000; ++i) {
        points.push_back(
            sample(LikelihoodKind::kLaplacian, {0.0, 0.0}, SymMatrix2::identity(), rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(kl_vs_standard_laplacian(points));
    }
}
BENCHMARK(BM_KlVsStandardLaplacian)->Unit(benchmark::kMillisecond);

}  // namespace
