#include "luvli/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace luvli {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2PiOver3 = 0.73926477774123579216;
constexpr double kSqrt3 = 1.7320508075688772935;

void require_valid_chol(const CholeskyCovariance& chol) {
    if (!chol.valid()) {
        throw NonPositiveDefiniteError("Cholesky factor has non-positive diagonal");
    }
}

// Triangular solves shared by the loss and its gradient. u solves L u = d,
// w solves L' w = u (so w = Sigma^(-1) d), m = u.u is the Mahalanobis square.
struct Solves {
    double u1, u2;
    double w1, w2;
    double m;
};

Solves solve(Point2 d, const CholeskyCovariance& chol) {
    Solves s;
    s.u1 = d.x / chol.l11;
    s.u2 = (d.y - chol.l21 * s.u1) / chol.l22;
    s.w2 = s.u2 / chol.l22;
    s.w1 = (s.u1 - chol.l21 * s.w2) / chol.l11;
    s.m = s.u1 * s.u1 + s.u2 * s.u2;
    return s;
}

double clamp_visibility(double v) {
    return std::clamp(v, kVisibilityClamp, 1.0 - kVisibilityClamp);
}

}  // namespace

double location_nll(LikelihoodKind kind, Point2 p, Point2 mu, const CholeskyCovariance& chol) {
    require_valid_chol(chol);
    const Solves s = solve(p - mu, chol);
    const double half_logdet = std::log(chol.l11) + std::log(chol.l22);
    if (kind == LikelihoodKind::kGaussian) {
        return kLog2Pi + half_logdet + 0.5 * s.m;
    }
    return kLog2PiOver3 + half_logdet + kSqrt3 * std::sqrt(s.m);
}

double location_nll(LikelihoodKind kind, Point2 p, Point2 mu, const SymMatrix2& sigma) {
    return location_nll(kind, p, mu, cholesky(sigma));
}

double luvli_loss(LikelihoodKind kind, const GroundTruthLandmark& gt,
                  const LandmarkPrediction& pred) {
    const double vhat = clamp_visibility(pred.visibility);
    if (!gt.visible()) {
        return -std::log(1.0 - vhat);
    }
    return -std::log(vhat) + location_nll(kind, *gt.location, pred.mean, pred.chol);
}

double total_loss(LikelihoodKind kind, const StageLossConfig& cfg,
                  const std::vector<GroundTruthLandmark>& gts,
                  const std::vector<std::vector<LandmarkPrediction>>& preds_per_stage) {
    if (cfg.weights.size() != preds_per_stage.size()) {
        throw DimensionMismatchError("total_loss: stage count does not match weight count");
    }
    if (gts.empty()) throw DimensionMismatchError("total_loss: no landmarks");
    bool any_positive = false;
    for (double w : cfg.weights) {
        if (w < 0.0) throw InvalidArgumentError("total_loss: negative stage weight");
        if (w > 0.0) any_positive = true;
    }
    if (!any_positive) throw InvalidArgumentError("total_loss: all stage weights are zero");
    double total = 0.0;
    for (std::size_t i = 0; i < preds_per_stage.size(); ++i) {
        if (preds_per_stage[i].size() != gts.size()) {
            throw DimensionMismatchError("total_loss: stage " + std::to_string(i) +
                                         " has wrong landmark count");
        }
        double stage = 0.0;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            stage += luvli_loss(kind, gts[j], preds_per_stage[i][j]);
        }
        total += cfg.weights[i] * stage / static_cast<double>(gts.size());
    }
    return total;
}

LuvliGradient luvli_grad(LikelihoodKind kind, const GroundTruthLandmark& gt,
                         const LandmarkPrediction& pred, CuspPolicy policy) {
    const double vhat = clamp_visibility(pred.visibility);
    LuvliGradient g;
    g.d_logit = vhat - (gt.visible() ? 1.0 : 0.0);
    if (!gt.visible()) {
        return g;
    }
    require_valid_chol(pred.chol);
    const Solves s = solve(*gt.location - pred.mean, pred.chol);
    g.d_l11 = 1.0 / pred.chol.l11;
    g.d_l22 = 1.0 / pred.chol.l22;
    if (kind == LikelihoodKind::kGaussian) {
        g.d_mean = -Point2{s.w1, s.w2};
        g.d_l11 -= s.w1 * s.u1;
        g.d_l21 = -s.w2 * s.u1;
        g.d_l22 -= s.w2 * s.u2;
        return g;
    }
    if (s.m < kCuspThreshold) {
        if (policy == CuspPolicy::kThrow) {
            throw NonDifferentiablePointError(
                "Laplacian location term is not differentiable at p = mu");
        }
        return g;  // subgradient 0 for the cusped term, log-det part kept
    }
    const double scale = kSqrt3 / std::sqrt(s.m);
    g.d_mean = -Point2{s.w1, s.w2} * scale;
    g.d_l11 -= scale * s.w1 * s.u1;
    g.d_l21 = -scale * s.w2 * s.u1;
    g.d_l22 -= scale * s.w2 * s.u2;
    return g;
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

double elu_derivative(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

CholeskyCovariance cholesky_activation(double raw_l11, double raw_l21, double raw_l22) {
    CholeskyCovariance chol;
    chol.l11 = elu(raw_l11) + kCholeskyDiagShift;
    chol.l21 = raw_l21;
    chol.l22 = elu(raw_l22) + kCholeskyDiagShift;
    return chol;
}

double visibility_activation(double raw) {
    return clamp_visibility(1.0 / (1.0 + std::exp(-raw)));
}

Point2 sample(LikelihoodKind kind, Point2 mu, const CholeskyCovariance& chol, RngStream& rng) {
    require_valid_chol(chol);
    double z1, z2;
    if (kind == LikelihoodKind::kGaussian) {
        rng.normal_pair(z1, z2);
    } else {
        // Radius ~ Gamma(2, sqrt(3)) as the sum of two exponentials, angle
        // uniform; this gives the Laplacian density unit sample covariance.
        const double theta = 2.0 * 3.14159265358979323846 * rng.uniform();
        const double r = -(std::log(rng.uniform()) + std::log(rng.uniform())) / kSqrt3;
        z1 = r * std::cos(theta);
        z2 = r * std::sin(theta);
    }
    return {mu.x + chol.l11 * z1, mu.y + chol.l21 * z1 + chol.l22 * z2};
}

Point2 sample(LikelihoodKind kind, Point2 mu, const SymMatrix2& sigma, RngStream& rng) {
    return sample(kind, mu, cholesky(sigma), rng);
}

}  // namespace luvli
