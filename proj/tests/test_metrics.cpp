#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "luvli/metrics.hpp"
#include "luvli/rng.hpp"

using namespace luvli;

namespace {

FaceEvalRecord record_with_box(double w, double h) {
    FaceEvalRecord rec;
    rec.bbox = BBox{0.0, 0.0, w, h};
    return rec;
}

void add_pair(FaceEvalRecord& rec, Point2 gt, Point2 pred) {
    rec.truth.push_back(GroundTruthLandmark::visible_at(gt));
    LandmarkPrediction p;
    p.mean = pred;
    rec.predictions.push_back(p);
}

void add_invisible(FaceEvalRecord& rec) {
    rec.truth.push_back(GroundTruthLandmark::invisible());
    rec.predictions.push_back(LandmarkPrediction{});
}

// Midpoint-rule integral of the empirical CDF, the slow oracle for auc().
double riemann_auc(std::vector<double> values, double cutoff, int cells) {
    std::sort(values.begin(), values.end());
    const double dt = cutoff / cells;
    double area = 0.0;
    std::size_t k = 0;
    for (int i = 0; i < cells; ++i) {
        const double t = (i + 0.5) * dt;
        while (k < values.size() && values[k] <= t) ++k;
        area += (static_cast<double>(k) / values.size()) * dt;
    }
    return area / cutoff;
}

}  // namespace

TEST_CASE("normalizing distances") {
    FaceEvalRecord rec = record_with_box(100.0, 100.0);
    add_pair(rec, {1, 1}, {1, 1});
    CHECK_EQ(normalizer(rec, NormalizerKind::kBox), 100.0);
    CHECK_EQ(normalizer(rec, NormalizerKind::kDiag),
             doctest::Approx(100.0 * std::sqrt(2.0)).epsilon(1e-15));

    rec = record_with_box(30.0, 40.0);
    add_pair(rec, {1, 1}, {1, 1});
    CHECK_EQ(normalizer(rec, NormalizerKind::kDiag), 50.0);

    // Outer eye corners of the 68-point scheme.
    FaceEvalRecord face;
    for (int i = 0; i < 68; ++i) add_pair(face, {5.0 + i * 0.1, 30.0}, {0, 0});
    face.truth[36] = GroundTruthLandmark::visible_at({10.0, 10.0});
    face.truth[45] = GroundTruthLandmark::visible_at({70.0, 10.0});
    CHECK_EQ(normalizer(face, NormalizerKind::kInterOcular), 60.0);

    face.truth[36] = GroundTruthLandmark::invisible();
    CHECK_THROWS_AS(normalizer(face, NormalizerKind::kInterOcular), MissingEyeCornersError);
    CHECK_THROWS_AS(normalizer(rec, NormalizerKind::kInterOcular), MissingEyeCornersError);
}

TEST_CASE("tight-box fallback when the bbox is missing") {
    FaceEvalRecord rec;
    add_pair(rec, {10.0, 20.0}, {0, 0});
    add_pair(rec, {40.0, 60.0}, {0, 0});
    add_invisible(rec);
    CHECK_EQ(normalizer(rec, NormalizerKind::kBox),
             doctest::Approx(std::sqrt(30.0 * 40.0)).epsilon(1e-15));
    CHECK_EQ(normalizer(rec, NormalizerKind::kDiag), 50.0);

    FaceEvalRecord empty;
    add_invisible(empty);
    CHECK_THROWS_AS(normalizer(empty, NormalizerKind::kBox), NoVisibleLandmarksError);
}

TEST_CASE("normalized mean error") {
    FaceEvalRecord rec = record_with_box(100.0, 100.0);
    add_pair(rec, {50.0, 50.0}, {50.0, 52.0});
    CHECK_EQ(nme(rec, NormalizerKind::kBox), doctest::Approx(2.0).epsilon(1e-14));
    CHECK_EQ(nme_vis(rec, NormalizerKind::kBox), doctest::Approx(2.0).epsilon(1e-14));

    // An invisible landmark dilutes nme but not nme_vis.
    rec = record_with_box(100.0, 100.0);
    add_pair(rec, {50.0, 50.0}, {53.0, 50.0});
    add_invisible(rec);
    CHECK_EQ(nme(rec, NormalizerKind::kBox), doctest::Approx(1.5).epsilon(1e-14));
    CHECK_EQ(nme_vis(rec, NormalizerKind::kBox), doctest::Approx(3.0).epsilon(1e-14));

    FaceEvalRecord none = record_with_box(100.0, 100.0);
    add_invisible(none);
    add_invisible(none);
    CHECK_EQ(nme(none, NormalizerKind::kBox), 0.0);
    CHECK_THROWS_AS(nme_vis(none, NormalizerKind::kBox), NoVisibleLandmarksError);

    FaceEvalRecord unpaired = record_with_box(10.0, 10.0);
    add_pair(unpaired, {1, 1}, {1, 1});
    unpaired.predictions.pop_back();
    CHECK_THROWS_AS(nme(unpaired, NormalizerKind::kBox), DimensionMismatchError);
}

TEST_CASE("nme is invariant to translation and scale") {
    RngStream rng(501);
    for (int trial = 0; trial < 50; ++trial) {
        FaceEvalRecord rec;
        rec.bbox = BBox{10.0, 5.0, 80.0, 60.0};
        for (int j = 0; j < 6; ++j) {
            const Point2 gt{80.0 * rng.uniform(), 60.0 * rng.uniform()};
            add_pair(rec, gt, gt + Point2{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0});
        }
        const double base = nme(rec, NormalizerKind::kBox);

        const Point2 t{123.0, -45.0};
        const double c = 3.25;
        FaceEvalRecord moved = rec, scaled = rec;
        moved.bbox = BBox{rec.bbox->x + t.x, rec.bbox->y + t.y, rec.bbox->width, rec.bbox->height};
        scaled.bbox = BBox{c * rec.bbox->x, c * rec.bbox->y, c * rec.bbox->width,
                           c * rec.bbox->height};
        for (int j = 0; j < 6; ++j) {
            moved.truth[j] = GroundTruthLandmark::visible_at(*rec.truth[j].location + t);
            moved.predictions[j].mean = rec.predictions[j].mean + t;
            scaled.truth[j] = GroundTruthLandmark::visible_at(c * *rec.truth[j].location);
            scaled.predictions[j].mean = c * rec.predictions[j].mean;
        }
        CHECK_EQ(nme(moved, NormalizerKind::kBox), doctest::Approx(base).epsilon(1e-12));
        CHECK_EQ(nme(scaled, NormalizerKind::kBox), doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("nme_vis never undercuts nme") {
    RngStream rng(502);
    for (int trial = 0; trial < 1000; ++trial) {
        FaceEvalRecord rec = record_with_box(100.0, 100.0);
        const int n = 1 + static_cast<int>(10.0 * rng.uniform());
        bool any_invisible = false;
        for (int j = 0; j < n; ++j) {
            if (j > 0 && rng.uniform() < 0.3) {
                add_invisible(rec);
                any_invisible = true;
            } else {
                const Point2 gt{100.0 * rng.uniform(), 100.0 * rng.uniform()};
                add_pair(rec, gt,
                         gt + Point2{6.0 * rng.uniform() - 3.0, 6.0 * rng.uniform() - 3.0});
            }
        }
        const double plain = nme(rec, NormalizerKind::kBox);
        const double vis = nme_vis(rec, NormalizerKind::kBox);
        CHECK_GE(vis, plain);
        if (!any_invisible) CHECK_EQ(vis, plain);
    }
}

TEST_CASE("area under the error curve") {
    CHECK_EQ(auc({0.0, 0.0}, 7.0), 1.0);
    CHECK_EQ(auc({8.0, 9.0}, 7.0), 0.0);
    CHECK_EQ(auc({7.0}, 7.0), 0.0);
    CHECK_EQ(auc({1.0, 3.0}, 7.0), doctest::Approx(10.0 / 14.0).epsilon(1e-15));

    CHECK_THROWS_AS(auc({}, 7.0), EmptyInputError);
    CHECK_THROWS_AS(auc({1.0}, 0.0), InvalidArgumentError);
    CHECK_THROWS_AS(auc({-1.0}, 7.0), InvalidArgumentError);
}

TEST_CASE("auc agrees with a dense Riemann sum") {
    RngStream rng(503);
    const double cutoff = 7.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(50.0 * rng.uniform());
        std::vector<double> values;
        for (int i = 0; i < n; ++i) values.push_back(2.0 * cutoff * rng.uniform());
        const double exact = auc(values, cutoff);
        const double slow = riemann_auc(values, cutoff, 1 << 21);
        CHECK_LT(std::abs(exact - slow), 1e-6);
        CHECK_GE(exact, 0.0);
        CHECK_LE(exact, 1.0);
    }

    // Worsening one value can only lower the area.
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> values;
        for (int i = 0; i < 20; ++i) values.push_back(10.0 * rng.uniform());
        const double before = auc(values, cutoff);
        values[static_cast<std::size_t>(20.0 * rng.uniform()) % 20] += 1.0;
        CHECK_LE(auc(values, cutoff), before);
    }
}

TEST_CASE("failure rate counts strict exceedances") {
    CHECK_EQ(failure_rate({1.0, 8.0, 12.0}, 10.0),
             doctest::Approx(100.0 / 3.0).epsilon(1e-15));
    CHECK_EQ(failure_rate({10.0}, 10.0), 0.0);
    CHECK_EQ(failure_rate({10.000001}, 10.0), 100.0);
    CHECK_EQ(failure_rate({1.0, 2.0}, 10.0), 0.0);
    CHECK_THROWS_AS(failure_rate({}, 10.0), EmptyInputError);
    CHECK_THROWS_AS(failure_rate({1.0}, -1.0), InvalidArgumentError);
}

TEST_CASE("visibility accuracy by class") {
    const std::vector<double> vhat{0.9, 0.4, 0.6, 0.2};
    const std::vector<VisibilityClass> classes{
        VisibilityClass::kUnoccluded, VisibilityClass::kUnoccluded,
        VisibilityClass::kSelfOccluded, VisibilityClass::kSelfOccluded};

    CHECK_EQ(visibility_accuracy(vhat, classes), 0.5);
    CHECK_EQ(visibility_accuracy(vhat, classes, ClassFilter::kVisible), 0.5);
    CHECK_EQ(visibility_accuracy(vhat, classes, ClassFilter::kInvisible), 0.5);
    CHECK_EQ(visibility_accuracy(vhat, classes, ClassFilter::kSelfOccluded), 0.5);
    CHECK_THROWS_AS(visibility_accuracy(vhat, classes, ClassFilter::kExternallyOccluded),
                    EmptyAfterFilterError);

    // vhat exactly at the threshold predicts "not visible".
    CHECK_EQ(visibility_accuracy({0.5}, {VisibilityClass::kSelfOccluded}), 1.0);
    CHECK_EQ(visibility_accuracy({0.5}, {VisibilityClass::kUnoccluded}), 0.0);
    // Externally occluded landmarks count as visible.
    CHECK_EQ(visibility_accuracy({0.9}, {VisibilityClass::kExternallyOccluded}), 1.0);

    CHECK_THROWS_AS(visibility_accuracy({0.5, 0.5}, {VisibilityClass::kUnoccluded}),
                    DimensionMismatchError);
}

TEST_CASE("uncertainty scalars") {
    LandmarkPrediction p;
    p.chol = {1.0, 0.0, 1.0};
    CHECK_EQ(uncertainty_scalar(p), 1.0);
    p.chol = {2.0, 1.0, 3.0};
    CHECK_EQ(uncertainty_scalar(p), 6.0);
    // l11*l22 is det(Sigma)^(1/2).
    CHECK_EQ(uncertainty_scalar(p), doctest::Approx(std::sqrt(det(to_covariance(p.chol)))));

    const std::optional<BBox> box = BBox{0.0, 0.0, 100.0, 100.0};
    p.chol = {1.0, 0.0, 1.0};
    CHECK_EQ(uncertainty_scalar_normalized(p, box), 1e-4);
    CHECK_THROWS_AS(uncertainty_scalar_normalized(p, std::nullopt), MissingBboxError);

    p.chol = {-1.0, 0.0, 1.0};
    CHECK_THROWS_AS(uncertainty_scalar(p), NonPositiveDefiniteError);
}

TEST_CASE("summary over a small batch") {
    EvalInput input;

    // Image A: one visible landmark 5 px off, one self-occluded.
    FaceEvalRecord a = record_with_box(100.0, 100.0);
    add_pair(a, {10.0, 10.0}, {13.0, 14.0});
    add_invisible(a);
    a.predictions[0].visibility = 0.9;
    a.predictions[0].chol = {1.0, 0.0, 1.0};
    a.predictions[1].visibility = 0.2;
    a.predictions[1].chol = {2.0, 1.0, 3.0};
    input.ids.push_back("a");
    input.records.push_back(a);
    input.classes.push_back({VisibilityClass::kUnoccluded, VisibilityClass::kSelfOccluded});

    // Image B: two perfect visible landmarks.
    FaceEvalRecord b = record_with_box(100.0, 100.0);
    add_pair(b, {20.0, 20.0}, {20.0, 20.0});
    add_pair(b, {30.0, 40.0}, {30.0, 40.0});
    b.predictions[0].visibility = 0.8;
    b.predictions[0].chol = {1.0, 0.0, 2.0};
    b.predictions[1].visibility = 0.7;
    b.predictions[1].chol = {1.0, 0.0, 1.0};
    input.ids.push_back("b");
    input.records.push_back(b);
    input.classes.push_back({VisibilityClass::kUnoccluded, VisibilityClass::kUnoccluded});

    // Image C: no bbox and nothing visible, so no normalizer exists.
    FaceEvalRecord c;
    add_invisible(c);
    add_invisible(c);
    c.predictions[0].visibility = 0.4;
    c.predictions[0].chol = {2.0, 0.0, 2.0};
    c.predictions[1].visibility = 0.6;
    c.predictions[1].chol = {2.0, 0.0, 2.0};
    input.ids.push_back("c");
    input.records.push_back(c);
    input.classes.push_back({VisibilityClass::kSelfOccluded, VisibilityClass::kSelfOccluded});

    const EvalSummary s = summarize(input, NormalizerKind::kBox, 7.0, 10.0);
    CHECK_EQ(s.num_images, 3);
    CHECK_EQ(s.num_skipped, 1);
    REQUIRE_EQ(s.nmes.size(), 2);
    CHECK_EQ(s.mean_nme, doctest::Approx(1.25).epsilon(1e-14));
    REQUIRE(s.mean_nme_vis.has_value());
    CHECK_EQ(*s.mean_nme_vis, doctest::Approx(2.5).epsilon(1e-14));
    CHECK_EQ(s.auc_value, doctest::Approx(11.5 / 14.0).epsilon(1e-14));
    CHECK_EQ(s.failure_rate_value, 0.0);

    CHECK_EQ(*s.accuracy_overall, doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    CHECK_EQ(*s.accuracy_visible, 1.0);
    CHECK_EQ(*s.accuracy_invisible, doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK_FALSE(s.accuracy_externally_occluded.has_value());
    CHECK_EQ(*s.uncertainty_unoccluded, doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK_EQ(*s.uncertainty_self_occluded, doctest::Approx(14.0 / 3.0).epsilon(1e-14));
    // Image C has no bbox, so only image A's self-occluded landmark normalizes.
    CHECK_EQ(*s.uncertainty_normalized_self_occluded, doctest::Approx(6e-4).epsilon(1e-14));

    // Reports: structural checks plus a few exact cells.
    const std::string csv = eval_csv(input);
    CHECK_NE(csv.find("id,nme_box,nme_interocular,nme_diag,nme_vis_box,nme_vis_interocular,"
                      "nme_vis_diag\n"),
             std::string::npos);
    CHECK_NE(csv.find("\na,2.5,,"), std::string::npos);
    CHECK_NE(csv.find("\nb,0,,"), std::string::npos);
    CHECK_NE(csv.find("\nc,,,,,,\n"), std::string::npos);

    const std::string json_text = eval_summary_json(s);
    const nlohmann::json j = nlohmann::json::parse(json_text);
    CHECK_EQ(j.at("schema"), "luvli-eval-1");
    CHECK_EQ(j.at("normalizer"), "box");
    CHECK_EQ(j.at("num_skipped"), 1);
    CHECK_EQ(j.at("auc").get<double>(), doctest::Approx(11.5 / 14.0).epsilon(1e-14));
    CHECK(j.at("visibility_accuracy").at("externally_occluded").is_null());
    CHECK_EQ(json_text.back(), '\n');

    CHECK_THROWS_AS(summarize({}, NormalizerKind::kBox, 7.0, 10.0), EmptyInputError);

    EvalInput only_c;
    only_c.ids.push_back("c");
    only_c.records.push_back(c);
    only_c.classes.push_back(input.classes[2]);
    CHECK_THROWS_AS(summarize(only_c, NormalizerKind::kBox, 7.0, 10.0), EmptyAfterFilterError);

    input.classes[0].pop_back();
    CHECK_THROWS_AS(summarize(input, NormalizerKind::kBox, 7.0, 10.0), DimensionMismatchError);
}
