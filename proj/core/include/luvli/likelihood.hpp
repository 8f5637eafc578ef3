#pragma once

#include <optional>
#include <vector>

#include "luvli/errors.hpp"
#include "luvli/geometry.hpp"
#include "luvli/rng.hpp"

namespace luvli {

enum class LikelihoodKind { kGaussian, kLaplacian };

// Three-way annotation class. Unoccluded and externally occluded landmarks
// are visible (they carry a labeled location); self-occluded ones are not.
enum class VisibilityClass { kUnoccluded, kExternallyOccluded, kSelfOccluded };

inline bool is_visible(VisibilityClass c) { return c != VisibilityClass::kSelfOccluded; }

// A labeled landmark. Visibility is derived from the presence of the
// location, so the two can never disagree.
struct GroundTruthLandmark {
    std::optional<Point2> location;

    bool visible() const { return location.has_value(); }

    static GroundTruthLandmark visible_at(Point2 p) { return {p}; }
    static GroundTruthLandmark invisible() { return {std::nullopt}; }
};

// Model output for one landmark: mean location, covariance as a Cholesky
// factor, and visibility probability (strictly inside (0,1)).
struct LandmarkPrediction {
    Point2 mean;
    CholeskyCovariance chol;
    double visibility = 0.5;
};

// Per-stage weights for the multi-stage total loss.
struct StageLossConfig {
    std::vector<double> weights;
};

// Gradient of the per-landmark loss with respect to the mean, the three
// Cholesky entries, and the pre-sigmoid visibility logit.
struct LuvliGradient {
    Point2 d_mean;
    double d_l11 = 0.0;
    double d_l21 = 0.0;
    double d_l22 = 0.0;
    double d_logit = 0.0;
};

// The Laplacian location term has a cusp at p = mu. kThrow surfaces it as
// NonDifferentiablePointError; kSubgradientZero zeroes the cusped term (a
// valid subgradient) and keeps the smooth log-determinant part.
enum class CuspPolicy { kThrow, kSubgradientZero };

inline constexpr double kVisibilityClamp = 1e-7;
inline constexpr double kCholeskyDiagShift = 1.0 + 1e-4;
inline constexpr double kCuspThreshold = 1e-18;

// Negative log-density of the location model at p.
//   Gaussian:  log(2pi)   + 1/2 log|S| + 1/2 d'S^(-1)d
//   Laplacian: log(2pi/3) + 1/2 log|S| + sqrt(3 d'S^(-1)d)
double location_nll(LikelihoodKind kind, Point2 p, Point2 mu, const CholeskyCovariance& chol);
double location_nll(LikelihoodKind kind, Point2 p, Point2 mu, const SymMatrix2& sigma);

// Joint visibility + location negative log-likelihood for one landmark:
// binary cross-entropy on visibility plus, for visible landmarks, the
// location term. An invisible landmark contributes no location term.
double luvli_loss(LikelihoodKind kind, const GroundTruthLandmark& gt,
                  const LandmarkPrediction& pred);

// Weighted multi-stage aggregate: sum over stages of weight x mean
// per-landmark loss. preds_per_stage is indexed [stage][landmark].
double total_loss(LikelihoodKind kind, const StageLossConfig& cfg,
                  const std::vector<GroundTruthLandmark>& gts,
                  const std::vector<std::vector<LandmarkPrediction>>& preds_per_stage);

// Analytic gradient of luvli_loss. The visibility gradient is taken with
// respect to the logit (sigmoid-BCE identity: d/dlogit = vhat - v).
LuvliGradient luvli_grad(LikelihoodKind kind, const GroundTruthLandmark& gt,
                         const LandmarkPrediction& pred,
                         CuspPolicy policy = CuspPolicy::kThrow);

double elu(double x);
double elu_derivative(double x);

// Maps raw network outputs to a valid Cholesky factor: diagonals through
// ELU(x) + 1 + 1e-4 (always positive), off-diagonal passed through.
CholeskyCovariance cholesky_activation(double raw_l11, double raw_l21, double raw_l22);

// Sigmoid clamped to [1e-7, 1 - 1e-7].
double visibility_activation(double raw);

// Draws one point from the location model. Both samplers are exact (no
// rejection) and fully determined by the stream state.
Point2 sample(LikelihoodKind kind, Point2 mu, const CholeskyCovariance& chol, RngStream& rng);
Point2 sample(LikelihoodKind kind, Point2 mu, const SymMatrix2& sigma, RngStream& rng);

}  // namespace luvli
