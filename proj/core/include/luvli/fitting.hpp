#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "luvli/likelihood.hpp"

namespace luvli {

// True generating parameters for one landmark in a synthetic scenario.
// Visible samples are labeled with `occluded_class` (externally occluded
// landmarks still carry locations; the flag only affects annotation output).
struct ScenarioLandmark {
    Point2 mean;
    SymMatrix2 covariance = SymMatrix2::identity();
    double visibility_rate = 1.0;
    bool externally_occluded = false;
};

struct SyntheticScenario {
    std::vector<ScenarioLandmark> landmarks;
    LikelihoodKind kind = LikelihoodKind::kGaussian;
    int num_samples = 1;
    std::uint64_t seed = 0;
    std::optional<BBox> bbox;  // attached to every generated face when present
};

// Draws num_samples ground-truth landmarks per scenario landmark. Each sample
// is visible with probability visibility_rate; visible samples carry a
// location drawn from the scenario's likelihood. Output is indexed
// [landmark][sample] and is bit-identical for a given seed.
std::vector<std::vector<GroundTruthLandmark>> generate(const SyntheticScenario& scenario);

struct FitConfig {
    double step = 1e-2;
    int max_iterations = 10000;
    double grad_tolerance = 1e-8;
};

struct FitResult {
    LandmarkPrediction prediction;
    double final_loss = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Maximum-likelihood fit of (mean, Cholesky factor, visibility) for one
// landmark group by minimizing the mean per-sample loss with an adaptive
// first-order optimizer. Parameters are optimized pre-activation (raw
// Cholesky entries, visibility logit) so the search is unconstrained. The
// step size is halved whenever a step would increase the loss, so the loss
// trace is non-increasing.
//
// With no visible samples only the visibility is fitted. With at least one
// visible sample but fewer than two distinct visible locations the
// covariance is unidentifiable and DegenerateError is thrown.
FitResult fit_mle(const std::vector<GroundTruthLandmark>& samples, LikelihoodKind kind,
                  const FitConfig& config = {});

// A scalar function with its analytic gradient, for gradient verification.
struct DifferentiableLoss {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

// Compares the analytic gradient against central finite differences and
// returns the worst elementwise relative error, with an absolute floor of
// 1e-8 in the denominator.
double finite_difference_check(const DifferentiableLoss& f, std::vector<double> params,
                               double h = 1e-5);

// Max finite-difference relative error of the per-landmark loss gradient
// over `trials` random configurations (random gt, mean, Cholesky factor and
// logit; roughly a quarter of the configurations are invisible).
double luvli_gradient_check(LikelihoodKind kind, int trials, std::uint64_t seed,
                            double h = 1e-5);

}  // namespace luvli
