#pragma once

#include <optional>
#include <string>
#include <vector>

#include "luvli/likelihood.hpp"

namespace luvli {

enum class NormalizerKind { kBox, kInterOcular, kDiag };

// Everything needed to score one image: labeled landmarks, the model's
// predictions for them, and the face bounding box when available.
struct FaceEvalRecord {
    std::vector<GroundTruthLandmark> truth;
    std::vector<LandmarkPrediction> predictions;
    std::optional<BBox> bbox;
};

// Normalizing distance d for the NME. Box is the geometric mean of the box
// sides, Diag its diagonal, InterOcular the distance between the outer eye
// corners (zero-based landmarks 36 and 45 of the 68-point scheme). A missing
// bbox falls back to the tight box over visible ground-truth landmarks.
double normalizer(const FaceEvalRecord& rec, NormalizerKind kind);

// Normalized mean error in percent: sum of per-landmark normalized errors
// over visible landmarks, divided by the total landmark count.
double nme(const FaceEvalRecord& rec, NormalizerKind kind);

// Same numerator as nme but divided by the number of visible landmarks.
// Always >= nme; equal when every landmark is visible.
double nme_vis(const FaceEvalRecord& rec, NormalizerKind kind);

// Area under the empirical NME CDF from 0 to cutoff, divided by cutoff so
// the result lies in [0,1]. Exact step-function integral.
double auc(const std::vector<double>& nmes, double cutoff);

// Percent of values strictly greater than the threshold.
double failure_rate(const std::vector<double>& nmes, double threshold);

// Subset selector for per-class metrics. kVisible covers unoccluded and
// externally occluded; kInvisible equals kSelfOccluded.
enum class ClassFilter {
    kAll,
    kVisible,
    kInvisible,
    kUnoccluded,
    kExternallyOccluded,
    kSelfOccluded,
};

bool filter_matches(ClassFilter f, VisibilityClass c);

// Fraction of selected landmarks where the thresholded prediction
// (vhat > 0.5) agrees with ground-truth visibility.
double visibility_accuracy(const std::vector<double>& vhat,
                           const std::vector<VisibilityClass>& classes,
                           ClassFilter filter = ClassFilter::kAll);

// det(Sigma)^(1/2), the product of the Cholesky diagonals. The normalized
// variant divides by the bounding-box area.
double uncertainty_scalar(const LandmarkPrediction& pred);
double uncertainty_scalar_normalized(const LandmarkPrediction& pred,
                                     const std::optional<BBox>& bbox);

// Batch input for report emission: per-image records with their ids and the
// three-way annotation classes (which FaceEvalRecord does not carry).
struct EvalInput {
    std::vector<std::string> ids;
    std::vector<FaceEvalRecord> records;
    std::vector<std::vector<VisibilityClass>> classes;
};

struct EvalSummary {
    NormalizerKind normalizer = NormalizerKind::kBox;
    double cutoff = 0.0;
    double threshold = 0.0;
    int num_images = 0;
    int num_skipped = 0;  // images where the chosen normalizer was unavailable
    std::vector<double> nmes;
    double mean_nme = 0.0;
    std::optional<double> mean_nme_vis;
    double auc_value = 0.0;
    double failure_rate_value = 0.0;
    std::optional<double> accuracy_overall;
    std::optional<double> accuracy_visible;
    std::optional<double> accuracy_invisible;
    std::optional<double> accuracy_unoccluded;
    std::optional<double> accuracy_externally_occluded;
    std::optional<double> accuracy_self_occluded;
    std::optional<double> uncertainty_unoccluded;
    std::optional<double> uncertainty_externally_occluded;
    std::optional<double> uncertainty_self_occluded;
    std::optional<double> uncertainty_normalized_unoccluded;
    std::optional<double> uncertainty_normalized_externally_occluded;
    std::optional<double> uncertainty_normalized_self_occluded;
};

EvalSummary summarize(const EvalInput& input, NormalizerKind kind, double cutoff,
                      double threshold);

// One CSV row per image: id, nme under each normalizer, nme_vis under each
// normalizer. Cells whose normalizer is unavailable for that image are empty.
std::string eval_csv(const EvalInput& input);

std::string eval_summary_json(const EvalSummary& summary);

}  // namespace luvli
