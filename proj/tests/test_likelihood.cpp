#include <cmath>
#include <vector>

#include "doctest.h"
#include "luvli/likelihood.hpp"

using namespace luvli;

namespace {

constexpr double kLog2Pi = 1.8378770664093455;
constexpr double kLog2PiOver3 = 0.7392647777412358;
constexpr double kSqrt3 = 1.7320508075688772935;

SymMatrix2 rotate(const SymMatrix2& s, double theta) {
    const double c = std::cos(theta), sn = std::sin(theta);
    // R S R' computed densely, reassembled symmetric.
    const double a = c * s.xx - sn * s.xy, b = c * s.xy - sn * s.yy;
    const double d = sn * s.xx + c * s.xy, e = sn * s.xy + c * s.yy;
    return {a * c - b * sn, a * sn + b * c, d * sn + e * c};
}

Point2 rotate(Point2 p, double theta) {
    const double c = std::cos(theta), sn = std::sin(theta);
    return {c * p.x - sn * p.y, sn * p.x + c * p.y};
}

struct SampleStats {
    Point2 mean;
    SymMatrix2 cov;  // about the sample mean, biased
    double mean_norm = 0.0;
};

SampleStats stats_of(const std::vector<Point2>& pts) {
    SampleStats st;
    for (const Point2& p : pts) {
        st.mean = st.mean + p;
        st.mean_norm += p.norm();
    }
    const double n = static_cast<double>(pts.size());
    st.mean = st.mean * (1.0 / n);
    st.mean_norm /= n;
    for (const Point2& p : pts) {
        const Point2 d = p - st.mean;
        st.cov.xx += d.x * d.x;
        st.cov.xy += d.x * d.y;
        st.cov.yy += d.y * d.y;
    }
    st.cov = st.cov * (1.0 / n);
    return st;
}

}  // namespace

TEST_CASE("random stream basics") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK_EQ(a.next_u64(), b.next_u64());

    RngStream r(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK_GT(lo, 0.0);
    CHECK_LE(hi, 1.0);

    RngStream g(8);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        const double z = g.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK_LT(std::abs(sum / 1e6), 0.005);
    CHECK_LT(std::abs(sumsq / 1e6 - 1.0), 0.01);

    // A split stream diverges from the parent's continuation.
    RngStream parent(9);
    RngStream child = parent.split();
    bool all_equal = true;
    for (int i = 0; i < 10; ++i) {
        if (parent.next_u64() != child.next_u64()) all_equal = false;
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("location negative log-likelihood fixtures") {
    const CholeskyCovariance id{1.0, 0.0, 1.0};
    CHECK_EQ(location_nll(LikelihoodKind::kGaussian, {0, 0}, {0, 0}, id),
             doctest::Approx(kLog2Pi).epsilon(1e-14));
    CHECK_EQ(location_nll(LikelihoodKind::kLaplacian, {0, 0}, {0, 0}, id),
             doctest::Approx(kLog2PiOver3).epsilon(1e-14));
    CHECK_EQ(location_nll(LikelihoodKind::kGaussian, {1, 0}, {0, 0}, id),
             doctest::Approx(kLog2Pi + 0.5).epsilon(1e-14));
    CHECK_EQ(location_nll(LikelihoodKind::kLaplacian, {1, 0}, {0, 0}, id),
             doctest::Approx(2.471315585310113).epsilon(1e-13));

    // Same answer through the covariance overload.
    CHECK_EQ(location_nll(LikelihoodKind::kLaplacian, {1, 0}, {0, 0}, SymMatrix2::identity()),
             doctest::Approx(2.471315585310113).epsilon(1e-13));

    // log|S| enters as log(l11) + log(l22); scaling S by 4 adds log 4 to the
    // Gaussian at p = mu.
    const CholeskyCovariance twice{2.0, 0.0, 2.0};
    CHECK_EQ(location_nll(LikelihoodKind::kGaussian, {0, 0}, {0, 0}, twice),
             doctest::Approx(kLog2Pi + std::log(4.0)).epsilon(1e-14));

    CHECK_THROWS_AS(location_nll(LikelihoodKind::kGaussian, {0, 0}, {0, 0},
                                 CholeskyCovariance{-1.0, 0.0, 1.0}),
                    NonPositiveDefiniteError);
}

TEST_CASE("joint loss fixtures") {
    const GroundTruthLandmark invisible = GroundTruthLandmark::invisible();
    LandmarkPrediction pred;
    pred.visibility = 0.5;

    // Invisible landmarks pay only cross-entropy, whatever the location model.
    pred.mean = {100.0, -3.0};
    pred.chol = {0.2, 5.0, 7.0};
    CHECK_EQ(luvli_loss(LikelihoodKind::kGaussian, invisible, pred),
             doctest::Approx(0.6931471805599453).epsilon(1e-14));
    CHECK_EQ(luvli_loss(LikelihoodKind::kLaplacian, invisible, pred),
             doctest::Approx(0.6931471805599453).epsilon(1e-14));

    const GroundTruthLandmark at_unit = GroundTruthLandmark::visible_at({1.0, 0.0});
    pred.mean = {0.0, 0.0};
    pred.chol = {1.0, 0.0, 1.0};
    pred.visibility = 0.9;
    CHECK_EQ(luvli_loss(LikelihoodKind::kLaplacian, at_unit, pred),
             doctest::Approx(2.5766761009679394).epsilon(1e-13));

    // Stored probabilities at or beyond the clamp behave like the clamp value.
    pred.visibility = 1.0;
    LandmarkPrediction clamped = pred;
    clamped.visibility = 1.0 - 1e-7;
    CHECK_EQ(luvli_loss(LikelihoodKind::kGaussian, at_unit, pred),
             luvli_loss(LikelihoodKind::kGaussian, at_unit, clamped));
    CHECK_EQ(luvli_loss(LikelihoodKind::kGaussian, invisible, pred),
             doctest::Approx(-std::log(1e-7)).epsilon(1e-7));
}

TEST_CASE("with unit covariance the loss reduces to the plain distance form") {
    RngStream rng(301);
    LandmarkPrediction pred;
    pred.chol = {1.0, 0.0, 1.0};
    pred.visibility = 1.0 - 1e-7;
    for (int i = 0; i < 1000; ++i) {
        const Point2 p{-10.0 + 20.0 * rng.uniform(), -10.0 + 20.0 * rng.uniform()};
        pred.mean = {-10.0 + 20.0 * rng.uniform(), -10.0 + 20.0 * rng.uniform()};
        const GroundTruthLandmark gt = GroundTruthLandmark::visible_at(p);
        const double r2 = (p - pred.mean).squared_norm();
        CHECK_LT(std::abs(luvli_loss(LikelihoodKind::kGaussian, gt, pred) - kLog2Pi - 0.5 * r2),
                 1e-6);
        CHECK_LT(std::abs(luvli_loss(LikelihoodKind::kLaplacian, gt, pred) - kLog2PiOver3 -
                          kSqrt3 * std::sqrt(r2)),
                 1e-6);
    }
}

TEST_CASE("the density integrates to one") {
    RngStream rng(302);
    for (int trial = 0; trial < 5; ++trial) {
        const double l11 = 0.6 + 1.6 * rng.uniform();
        const double l21 = -1.0 + 2.0 * rng.uniform();
        const double l22 = 0.6 + 1.6 * rng.uniform();
        const CholeskyCovariance chol{l11, l21, l22};
        const SymMatrix2 sigma = to_covariance(chol);
        const Point2 mu{1.0, -2.0};

        // Midpoint rule over a box holding 12 standard radii in each axis.
        const double hx = 12.0 * std::sqrt(sigma.xx), hy = 12.0 * std::sqrt(sigma.yy);
        const int n = 400;
        for (LikelihoodKind kind : {LikelihoodKind::kGaussian, LikelihoodKind::kLaplacian}) {
            const double dx = 2.0 * hx / n, dy = 2.0 * hy / n;
            double mass = 0.0;
            for (int iy = 0; iy < n; ++iy) {
                const double y = mu.y - hy + (iy + 0.5) * dy;
                for (int ix = 0; ix < n; ++ix) {
                    const double x = mu.x - hx + (ix + 0.5) * dx;
                    mass += std::exp(-location_nll(kind, {x, y}, mu, chol));
                }
            }
            mass *= dx * dy;
            CHECK_LT(std::abs(mass - 1.0), 1e-3);
        }
    }
}

TEST_CASE("rotating the problem leaves the likelihood unchanged") {
    RngStream rng(303);
    for (int i = 0; i < 100; ++i) {
        const SymMatrix2 sigma =
            to_covariance({0.5 + 2.0 * rng.uniform(), -1.0 + 2.0 * rng.uniform(),
                           0.5 + 2.0 * rng.uniform()});
        const Point2 d{-3.0 + 6.0 * rng.uniform(), -3.0 + 6.0 * rng.uniform()};
        const double theta = 6.28318530717958647692 * rng.uniform();
        for (LikelihoodKind kind : {LikelihoodKind::kGaussian, LikelihoodKind::kLaplacian}) {
            const double base = location_nll(kind, d, {0, 0}, sigma);
            const double rot = location_nll(kind, rotate(d, theta), {0, 0}, rotate(sigma, theta));
            CHECK_EQ(rot, doctest::Approx(base).epsilon(1e-10));
        }
    }
}

TEST_CASE("the loss is minimized at the matching visibility") {
    LandmarkPrediction pred;
    pred.mean = {0.0, 0.0};
    pred.chol = {1.0, 0.0, 1.0};
    const GroundTruthLandmark vis = GroundTruthLandmark::visible_at({0.3, 0.1});
    const GroundTruthLandmark invis = GroundTruthLandmark::invisible();

    double prev_vis = 1e300, prev_invis = -1e300;
    for (double v = 0.05; v < 1.0; v += 0.05) {
        pred.visibility = v;
        const double lv = luvli_loss(LikelihoodKind::kGaussian, vis, pred);
        const double li = luvli_loss(LikelihoodKind::kGaussian, invis, pred);
        CHECK_LT(lv, prev_vis);   // decreasing toward vhat = 1
        CHECK_GT(li, prev_invis);  // increasing away from vhat = 0
        prev_vis = lv;
        prev_invis = li;
    }
}

TEST_CASE("sample covariance matches the requested covariance") {
    const SymMatrix2 target{4.0, 2.0, 2.0};
    for (LikelihoodKind kind : {LikelihoodKind::kGaussian, LikelihoodKind::kLaplacian}) {
        RngStream rng(kind == LikelihoodKind::kGaussian ? 304 : 305);
        std::vector<Point2> pts;
        pts.reserve(1000000);
        for (int i = 0; i < 1000000; ++i) pts.push_back(sample(kind, {5.0, -1.0}, target, rng));
        const SampleStats st = stats_of(pts);
        CHECK_LT(std::abs(st.mean.x - 5.0), 0.02);
        CHECK_LT(std::abs(st.mean.y + 1.0), 0.02);
        CHECK_LT(std::abs(st.cov.xx - 4.0) / 4.0, 0.02);
        CHECK_LT(std::abs(st.cov.xy - 2.0) / 2.0, 0.02);
        CHECK_LT(std::abs(st.cov.yy - 2.0) / 2.0, 0.02);
    }
}

TEST_CASE("unit Laplacian samples have the right radial profile") {
    RngStream rng(306);
    std::vector<Point2> pts;
    pts.reserve(1000000);
    const CholeskyCovariance id{1.0, 0.0, 1.0};
    for (int i = 0; i < 1000000; ++i) {
        pts.push_back(sample(LikelihoodKind::kLaplacian, {0.0, 0.0}, id, rng));
    }
    const SampleStats st = stats_of(pts);
    // E|z| = 2/sqrt(3) for the standard bivariate Laplacian.
    CHECK_LT(std::abs(st.mean_norm - 1.1547005383792515) / 1.1547005383792515, 0.005);
    CHECK_LT(std::abs(st.cov.xx - 1.0), 0.02);
    CHECK_LT(std::abs(st.cov.yy - 1.0), 0.02);
    CHECK_LT(std::abs(st.cov.xy), 0.02);
}

TEST_CASE("average likelihood prefers the generating parameters") {
    const Point2 mu{3.0, 7.0};
    const CholeskyCovariance chol{2.0, 0.5, 1.2};
    const SymMatrix2 sigma = to_covariance(chol);
    for (LikelihoodKind kind : {LikelihoodKind::kGaussian, LikelihoodKind::kLaplacian}) {
        RngStream rng(kind == LikelihoodKind::kGaussian ? 307 : 308);
        std::vector<Point2> pts;
        for (int i = 0; i < 100000; ++i) pts.push_back(sample(kind, mu, chol, rng));

        const SymMatrix2 wide = 4.0 * sigma;
        const Point2 shifted = mu + Point2{chol.l11, chol.l21};  // one standard radius away
        double at_truth = 0.0, at_wide = 0.0, at_shifted = 0.0;
        for (const Point2& p : pts) {
            at_truth += location_nll(kind, p, mu, sigma);
            at_wide += location_nll(kind, p, mu, wide);
            at_shifted += location_nll(kind, p, shifted, sigma);
        }
        CHECK_LT(at_truth, at_wide);
        CHECK_LT(at_truth, at_shifted);
    }
}

TEST_CASE("multi-stage total loss") {
    const std::vector<GroundTruthLandmark> gts = {
        GroundTruthLandmark::visible_at({1.0, 2.0}),
        GroundTruthLandmark::invisible(),
        GroundTruthLandmark::visible_at({-0.5, 4.0}),
    };
    RngStream rng(309);
    auto random_stage = [&rng]() {
        std::vector<LandmarkPrediction> stage;
        for (int j = 0; j < 3; ++j) {
            LandmarkPrediction p;
            p.mean = {4.0 * rng.uniform(), 4.0 * rng.uniform()};
            p.chol = {0.5 + rng.uniform(), -0.5 + rng.uniform(), 0.5 + rng.uniform()};
            p.visibility = 0.1 + 0.8 * rng.uniform();
            stage.push_back(p);
        }
        return stage;
    };

    const std::vector<LandmarkPrediction> one = random_stage();
    StageLossConfig cfg;
    cfg.weights = {2.5};
    double mean_loss = 0.0;
    for (int j = 0; j < 3; ++j) mean_loss += luvli_loss(LikelihoodKind::kGaussian, gts[j], one[j]);
    mean_loss /= 3.0;
    CHECK_EQ(total_loss(LikelihoodKind::kGaussian, cfg, gts, {one}),
             doctest::Approx(2.5 * mean_loss).epsilon(1e-13));

    // Two identical stages with unit weights double the single-stage value.
    cfg.weights = {1.0, 1.0};
    CHECK_EQ(total_loss(LikelihoodKind::kGaussian, cfg, gts, {one, one}),
             doctest::Approx(2.0 * mean_loss).epsilon(1e-13));

    // Eight random stages against a naive reimplementation.
    std::vector<std::vector<LandmarkPrediction>> stages;
    cfg.weights.clear();
    for (int k = 0; k < 8; ++k) {
        stages.push_back(random_stage());
        cfg.weights.push_back(0.25 + rng.uniform());
    }
    double expected = 0.0;
    for (int k = 0; k < 8; ++k) {
        double stage = 0.0;
        for (int j = 0; j < 3; ++j) {
            stage += luvli_loss(LikelihoodKind::kLaplacian, gts[j], stages[k][j]);
        }
        expected += cfg.weights[k] * stage / 3.0;
    }
    CHECK_EQ(total_loss(LikelihoodKind::kLaplacian, cfg, gts, stages),
             doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(total_loss(LikelihoodKind::kGaussian, cfg, gts, {one}),
                    DimensionMismatchError);
    CHECK_THROWS_AS(total_loss(LikelihoodKind::kGaussian, StageLossConfig{{1.0}}, {}, {one}),
                    DimensionMismatchError);
    CHECK_THROWS_AS(total_loss(LikelihoodKind::kGaussian, StageLossConfig{{0.0}}, gts, {one}),
                    InvalidArgumentError);
    CHECK_THROWS_AS(total_loss(LikelihoodKind::kGaussian, StageLossConfig{{-1.0}}, gts, {one}),
                    InvalidArgumentError);
}

TEST_CASE("gradient structure") {
    LandmarkPrediction pred;
    pred.mean = {1.0, 2.0};
    pred.chol = {1.4, -0.3, 0.8};
    pred.visibility = 0.7;

    // Invisible: only the visibility logit moves.
    LuvliGradient g =
        luvli_grad(LikelihoodKind::kGaussian, GroundTruthLandmark::invisible(), pred);
    CHECK_EQ(g.d_mean.x, 0.0);
    CHECK_EQ(g.d_mean.y, 0.0);
    CHECK_EQ(g.d_l11, 0.0);
    CHECK_EQ(g.d_l21, 0.0);
    CHECK_EQ(g.d_l22, 0.0);
    CHECK_EQ(g.d_logit, doctest::Approx(0.7).epsilon(1e-15));

    // Visible with unit covariance: the mean gradient is mu - p.
    pred.chol = {1.0, 0.0, 1.0};
    const Point2 p{3.5, 1.25};
    g = luvli_grad(LikelihoodKind::kGaussian, GroundTruthLandmark::visible_at(p), pred);
    CHECK_EQ(g.d_mean.x, doctest::Approx(pred.mean.x - p.x).epsilon(1e-14));
    CHECK_EQ(g.d_mean.y, doctest::Approx(pred.mean.y - p.y).epsilon(1e-14));
    CHECK_EQ(g.d_logit, doctest::Approx(0.7 - 1.0).epsilon(1e-14));
}

TEST_CASE("Laplacian gradient at the cusp") {
    LandmarkPrediction pred;
    pred.mean = {2.0, 3.0};
    pred.chol = {1.5, 0.2, 0.5};
    pred.visibility = 0.6;
    const GroundTruthLandmark at_mean = GroundTruthLandmark::visible_at({2.0, 3.0});

    CHECK_THROWS_AS(luvli_grad(LikelihoodKind::kLaplacian, at_mean, pred),
                    NonDifferentiablePointError);

    // Subgradient policy: distance term zeroed, log-det term kept.
    const LuvliGradient g =
        luvli_grad(LikelihoodKind::kLaplacian, at_mean, pred, CuspPolicy::kSubgradientZero);
    CHECK_EQ(g.d_mean.x, 0.0);
    CHECK_EQ(g.d_mean.y, 0.0);
    CHECK_EQ(g.d_l11, doctest::Approx(1.0 / 1.5).epsilon(1e-15));
    CHECK_EQ(g.d_l21, 0.0);
    CHECK_EQ(g.d_l22, doctest::Approx(2.0).epsilon(1e-15));

    // The Gaussian is smooth there.
    CHECK_NOTHROW(luvli_grad(LikelihoodKind::kGaussian, at_mean, pred));
}

TEST_CASE("activations") {
    CholeskyCovariance c = cholesky_activation(0.0, 0.0, 0.0);
    CHECK_EQ(c.l11, 1.0 + 1e-4);
    CHECK_EQ(c.l21, 0.0);
    CHECK_EQ(c.l22, 1.0 + 1e-4);

    // Diagonal is elu(raw) plus the shift, in that operation order.
    c = cholesky_activation(1.0, -2.0, 1.0);
    CHECK_EQ(c.l11, 1.0 + (1.0 + 1e-4));
    CHECK_EQ(c.l21, -2.0);
    CHECK_EQ(c.l22, 1.0 + (1.0 + 1e-4));

    // Deep negative raw values still give a strictly positive diagonal.
    c = cholesky_activation(-30.0, 0.5, -30.0);
    CHECK_GT(c.l11, 0.0);
    CHECK_EQ(c.l11, doctest::Approx(1e-4).epsilon(1e-8));
    CHECK_EQ(c.l21, 0.5);
    CHECK(c.valid());

    CHECK_EQ(visibility_activation(0.0), 0.5);
    CHECK_EQ(visibility_activation(2.0), doctest::Approx(0.8807970779778823).epsilon(1e-15));
    CHECK_EQ(visibility_activation(100.0), 1.0 - 1e-7);
    CHECK_EQ(visibility_activation(-100.0), 1e-7);

    CHECK_EQ(elu(3.5), 3.5);
    CHECK_EQ(elu(0.0), 0.0);
    CHECK_EQ(elu(-1.0), std::expm1(-1.0));
    CHECK_GT(elu(-5.0), -1.0);
    CHECK_GE(elu(-40.0), -1.0);  // rounds to exactly -1 in double precision
    CHECK_EQ(elu_derivative(0.0), 1.0);
    CHECK_EQ(elu_derivative(2.0), 1.0);
    CHECK_EQ(elu_derivative(-1.0), std::exp(-1.0));
}
