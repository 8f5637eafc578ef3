#include "luvli/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace luvli {

std::vector<std::vector<GroundTruthLandmark>> generate(const SyntheticScenario& scenario) {
    if (scenario.num_samples < 1) {
        throw InvalidArgumentError("generate: num_samples must be at least 1");
    }
    RngStream root(scenario.seed);
    std::vector<std::vector<GroundTruthLandmark>> out;
    out.reserve(scenario.landmarks.size());
    for (const ScenarioLandmark& lm : scenario.landmarks) {
        if (!(lm.visibility_rate >= 0.0 && lm.visibility_rate <= 1.0)) {
            throw InvalidArgumentError("generate: visibility rate outside [0,1]");
        }
        const CholeskyCovariance chol = cholesky(lm.covariance);
        RngStream stream = root.split();
        std::vector<GroundTruthLandmark> samples;
        samples.reserve(scenario.num_samples);
        for (int i = 0; i < scenario.num_samples; ++i) {
            if (stream.uniform() <= lm.visibility_rate) {
                samples.push_back(GroundTruthLandmark::visible_at(
                    sample(scenario.kind, lm.mean, chol, stream)));
            } else {
                samples.push_back(GroundTruthLandmark::invisible());
            }
        }
        out.push_back(std::move(samples));
    }
    return out;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2PiOver3 = 0.73926477774123579216;
constexpr double kSqrt3 = 1.7320508075688772935;

// Parameter order throughout: mu_x, mu_y, raw l11, raw l21, raw l22, logit.
using Params = std::array<double, 6>;

struct GroupData {
    std::vector<Point2> visible;
    int total = 0;

    double rate() const { return static_cast<double>(visible.size()) / total; }
};

double bce(double vhat, double rate) {
    return -(1.0 - rate) * std::log(1.0 - vhat) - rate * std::log(vhat);
}

// Mean per-sample loss over the group. The log-determinant and BCE parts are
// sample-independent, so only the Mahalanobis part loops over samples.
double group_loss(const GroupData& data, LikelihoodKind kind, const Params& p) {
    const CholeskyCovariance chol = cholesky_activation(p[2], p[3], p[4]);
    const double vhat = visibility_activation(p[5]);
    double loss = bce(vhat, data.rate());
    if (data.visible.empty()) return loss;

    const double inv_a = 1.0 / chol.l11, inv_c = 1.0 / chol.l22, b = chol.l21;
    const bool gaussian = kind == LikelihoodKind::kGaussian;
    double acc = 0.0;
    for (const Point2& q : data.visible) {
        const double u1 = (q.x - p[0]) * inv_a;
        const double u2 = (q.y - p[1] - b * u1) * inv_c;
        const double m = u1 * u1 + u2 * u2;
        acc += gaussian ? 0.5 * m : kSqrt3 * std::sqrt(m);
    }
    const double n = static_cast<double>(data.visible.size());
    const double constant = gaussian ? kLog2Pi : kLog2PiOver3;
    const double half_logdet = std::log(chol.l11) + std::log(chol.l22);
    return loss + (n * (constant + half_logdet) + acc) / data.total;
}

// Gradient of group_loss with respect to the six raw parameters. The
// Laplacian cusp (m below threshold) contributes a zero subgradient for the
// square-root term only.
Params group_grad(const GroupData& data, LikelihoodKind kind, const Params& p) {
    const CholeskyCovariance chol = cholesky_activation(p[2], p[3], p[4]);
    const double vhat = visibility_activation(p[5]);
    Params g{};
    g[5] = vhat - data.rate();
    if (data.visible.empty()) return g;

    const double inv_a = 1.0 / chol.l11, inv_c = 1.0 / chol.l22, b = chol.l21;
    const bool gaussian = kind == LikelihoodKind::kGaussian;
    double sw1 = 0.0, sw2 = 0.0, sw1u1 = 0.0, sw2u1 = 0.0, sw2u2 = 0.0;
    for (const Point2& q : data.visible) {
        const double u1 = (q.x - p[0]) * inv_a;
        const double u2 = (q.y - p[1] - b * u1) * inv_c;
        const double m = u1 * u1 + u2 * u2;
        const double w2 = u2 * inv_c;
        const double w1 = (u1 - b * w2) * inv_a;
        double scale;
        if (gaussian) {
            scale = 1.0;
        } else if (m < kCuspThreshold) {
            continue;
        } else {
            scale = kSqrt3 / std::sqrt(m);
        }
        sw1 += scale * w1;
        sw2 += scale * w2;
        sw1u1 += scale * w1 * u1;
        sw2u1 += scale * w2 * u1;
        sw2u2 += scale * w2 * u2;
    }
    const double n = static_cast<double>(data.visible.size());
    const double inv_total = 1.0 / data.total;
    g[0] = -sw1 * inv_total;
    g[1] = -sw2 * inv_total;
    g[2] = (n * inv_a - sw1u1) * inv_total * elu_derivative(p[2]);
    g[3] = -sw2u1 * inv_total;
    g[4] = (n * inv_c - sw2u2) * inv_total * elu_derivative(p[4]);
    return g;
}

double norm(const Params& g) {
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

}  // namespace

FitResult fit_mle(const std::vector<GroundTruthLandmark>& samples, LikelihoodKind kind,
                  const FitConfig& config) {
    if (samples.empty()) throw EmptyInputError("fit_mle: no samples");
    GroupData data;
    data.total = static_cast<int>(samples.size());
    for (const GroundTruthLandmark& s : samples) {
        if (s.visible()) data.visible.push_back(*s.location);
    }
    if (!data.visible.empty()) {
        bool distinct = false;
        for (const Point2& q : data.visible) {
            if (q.x != data.visible.front().x || q.y != data.visible.front().y) {
                distinct = true;
                break;
            }
        }
        if (!distinct) {
            throw DegenerateError(
                "fit_mle: fewer than 2 distinct visible locations, covariance unidentifiable");
        }
    }

    Params theta{};
    for (const Point2& q : data.visible) {
        theta[0] += q.x / data.visible.size();
        theta[1] += q.y / data.visible.size();
    }
    // The BCE term is the only part of the loss touching the logit, and its
    // minimizer is the empirical rate. Starting there matters at rate 0 or 1,
    // where a first-order path toward the clamp is extremely slow.
    const double rate = data.rate();
    if (rate <= 0.0) {
        theta[5] = -17.0;  // activation clamps this to 1e-7
    } else if (rate >= 1.0) {
        theta[5] = 17.0;
    } else {
        theta[5] = std::log(rate) - std::log1p(-rate);
    }

    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    Params m{}, v{};
    double lr = config.step;
    double loss = group_loss(data, kind, theta);
    Params grad = group_grad(data, kind, theta);
    double grad_norm = norm(grad);

    FitResult result;
    while (result.iterations < config.max_iterations && grad_norm >= config.grad_tolerance) {
        ++result.iterations;
        // Moments absorb the gradient at the current iterate even when the
        // step below is rejected. A stale momentum can point uphill, where no
        // step length helps; re-absorbing the same gradient rotates the
        // direction back toward descent while the halvings shrink the step.
        const double bc1 = 1.0 - std::pow(kBeta1, result.iterations);
        const double bc2 = 1.0 - std::pow(kBeta2, result.iterations);
        Params candidate;
        for (int i = 0; i < 6; ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
            candidate[i] = theta[i] - lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
        }
        const double candidate_loss = group_loss(data, kind, candidate);
        if (candidate_loss > loss) {
            lr *= 0.5;  // reject; theta and the cached gradient stay put
            if (lr < 1e-15) break;
            continue;
        }
        theta = candidate;
        loss = candidate_loss;
        lr = std::min(lr * 1.1, config.step);
        grad = group_grad(data, kind, theta);
        grad_norm = norm(grad);
    }

    result.prediction.mean = {theta[0], theta[1]};
    result.prediction.chol = cholesky_activation(theta[2], theta[3], theta[4]);
    result.prediction.visibility = visibility_activation(theta[5]);
    result.final_loss = loss;
    result.converged = grad_norm < config.grad_tolerance;
    return result;
}

double finite_difference_check(const DifferentiableLoss& f, std::vector<double> params,
                               double h) {
    if (!(h > 0.0)) throw InvalidArgumentError("finite_difference_check: h must be positive");
    const std::vector<double> analytic = f.gradient(params);
    if (analytic.size() != params.size()) {
        throw DimensionMismatchError("finite_difference_check: gradient length mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double fp = f.value(params);
        params[i] = saved - h;
        const double fm = f.value(params);
        params[i] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double denom = std::max(std::max(std::abs(fd), std::abs(analytic[i])), 1e-8);
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    return worst;
}

double luvli_gradient_check(LikelihoodKind kind, int trials, std::uint64_t seed, double h) {
    if (trials < 1) throw InvalidArgumentError("luvli_gradient_check: trials must be positive");
    RngStream rng(seed);
    DifferentiableLoss f;
    GroundTruthLandmark gt;
    auto pred_of = [](const std::vector<double>& p) {
        return LandmarkPrediction{{p[0], p[1]}, {p[2], p[3], p[4]}, visibility_activation(p[5])};
    };
    f.value = [&](const std::vector<double>& p) { return luvli_loss(kind, gt, pred_of(p)); };
    f.gradient = [&](const std::vector<double>& p) {
        const LuvliGradient g = luvli_grad(kind, gt, pred_of(p));
        return std::vector<double>{g.d_mean.x, g.d_mean.y, g.d_l11, g.d_l21, g.d_l22, g.d_logit};
    };

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Point2 mu{10.0 * rng.uniform() - 5.0, 10.0 * rng.uniform() - 5.0};
        if (rng.uniform() < 0.25) {
            gt = GroundTruthLandmark::invisible();
        } else {
            // Keep the point at least half a unit from the mean so the
            // Laplacian square root stays smooth at the probe scale.
            const double angle = 2.0 * 3.14159265358979323846 * rng.uniform();
            const double radius = 0.5 + 4.5 * rng.uniform();
            gt = GroundTruthLandmark::visible_at(
                {mu.x + radius * std::cos(angle), mu.y + radius * std::sin(angle)});
        }
        const std::vector<double> params{mu.x,
                                         mu.y,
                                         0.5 + 2.0 * rng.uniform(),
                                         2.0 * rng.uniform() - 1.0,
                                         0.5 + 2.0 * rng.uniform(),
                                         6.0 * rng.uniform() - 3.0};
        worst = std::max(worst, finite_difference_check(f, params, h));
    }
    return worst;
}

}  // namespace luvli
