#pragma once

#include <optional>
#include <string>
#include <vector>

#include "luvli/fitting.hpp"
#include "luvli/likelihood.hpp"

namespace luvli {

// One annotated landmark: three-way class plus a location, present exactly
// when the class is not self-occluded.
struct AnnotatedLandmark {
    VisibilityClass cls = VisibilityClass::kUnoccluded;
    std::optional<Point2> location;
};

struct AnnotatedFace {
    std::string id;
    std::optional<BBox> bbox;
    std::vector<AnnotatedLandmark> landmarks;
};

// A dataset file: fixed landmark count, validated per face.
struct AnnotationSet {
    int num_landmarks = 0;
    std::vector<AnnotatedFace> faces;
};

struct PredictedFace {
    std::string id;
    std::vector<LandmarkPrediction> landmarks;
};

struct PredictionFile {
    std::vector<PredictedFace> faces;
};

// Parsers throw SyntaxError for malformed JSON and SchemaError for documents
// that are valid JSON but violate the format; schema messages name the face
// id and landmark index. Writers round-trip every value losslessly.
AnnotationSet parse_annotations(const std::string& text);
std::string write_annotations(const AnnotationSet& set);

PredictionFile parse_predictions(const std::string& text);
std::string write_predictions(const PredictionFile& preds);

// Maps annotation classes to the model's binary visibility: unoccluded and
// externally occluded become visible with their location, self-occluded
// becomes invisible.
std::vector<GroundTruthLandmark> to_ground_truth(const AnnotatedFace& face);

// Verifies that predictions pair one-to-one with annotations: same face ids,
// same landmark count everywhere. Throws CountMismatchError naming the
// offending id.
void check_pairing(const AnnotationSet& annotations, const PredictionFile& predictions);

// Scenario config consumed by the synth command and the fitter tests.
SyntheticScenario parse_scenario(const std::string& text);
std::string write_scenario(const SyntheticScenario& scenario);

}  // namespace luvli
