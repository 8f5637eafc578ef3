#include "luvli/dataio.hpp"

#include <set>
#include <unordered_map>

#include "json.hpp"

namespace luvli {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SyntaxError(e.what());
    }
}

void require_schema(const json& j, const char* expected) {
    if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string() ||
        j["schema"].get<std::string>() != expected) {
        throw SchemaError(std::string("missing or wrong schema field, expected \"") + expected +
                          "\"");
    }
}

double number_field(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw SchemaError(context + ": missing or non-numeric field \"" + key + "\"");
    }
    return j.at(key).get<double>();
}

std::string face_context(const std::string& id, std::size_t landmark) {
    return "face \"" + id + "\" landmark " + std::to_string(landmark);
}

std::optional<BBox> parse_bbox(const json& j, const std::string& id) {
    if (!j.contains("bbox") || j.at("bbox").is_null()) return std::nullopt;
    const json& b = j.at("bbox");
    if (!b.is_object()) throw SchemaError("face \"" + id + "\": bbox must be an object or null");
    BBox box;
    box.x = number_field(b, "x", "face \"" + id + "\" bbox");
    box.y = number_field(b, "y", "face \"" + id + "\" bbox");
    box.width = number_field(b, "w", "face \"" + id + "\" bbox");
    box.height = number_field(b, "h", "face \"" + id + "\" bbox");
    if (!(box.width > 0.0) || !(box.height > 0.0)) {
        throw SchemaError("face \"" + id + "\": bbox dimensions must be positive");
    }
    return box;
}

const std::unordered_map<std::string, VisibilityClass>& class_names() {
    static const std::unordered_map<std::string, VisibilityClass> names = {
        {"unoccluded", VisibilityClass::kUnoccluded},
        {"externally_occluded", VisibilityClass::kExternallyOccluded},
        {"self_occluded", VisibilityClass::kSelfOccluded},
    };
    return names;
}

const char* class_name(VisibilityClass c) {
    switch (c) {
        case VisibilityClass::kUnoccluded: return "unoccluded";
        case VisibilityClass::kExternallyOccluded: return "externally_occluded";
        case VisibilityClass::kSelfOccluded: return "self_occluded";
    }
    return "unoccluded";
}

}  // namespace

AnnotationSet parse_annotations(const std::string& text) {
    const json j = parse_json(text);
    require_schema(j, "luvli-annot-1");
    AnnotationSet set;
    if (!j.contains("num_landmarks") || !j["num_landmarks"].is_number_integer() ||
        j["num_landmarks"].get<int>() < 1) {
        throw SchemaError("num_landmarks must be a positive integer");
    }
    set.num_landmarks = j["num_landmarks"].get<int>();
    if (!j.contains("faces") || !j["faces"].is_array()) {
        throw SchemaError("faces must be an array");
    }
    for (const json& f : j["faces"]) {
        AnnotatedFace face;
        if (!f.is_object() || !f.contains("id") || !f["id"].is_string()) {
            throw SchemaError("face entry missing string id");
        }
        face.id = f["id"].get<std::string>();
        face.bbox = parse_bbox(f, face.id);
        if (!f.contains("landmarks") || !f["landmarks"].is_array()) {
            throw SchemaError("face \"" + face.id + "\": landmarks must be an array");
        }
        const json& lms = f["landmarks"];
        if (static_cast<int>(lms.size()) != set.num_landmarks) {
            throw SchemaError("face \"" + face.id + "\": expected " +
                              std::to_string(set.num_landmarks) + " landmarks, got " +
                              std::to_string(lms.size()));
        }
        for (std::size_t k = 0; k < lms.size(); ++k) {
            const json& lm = lms[k];
            const std::string ctx = face_context(face.id, k);
            if (!lm.is_object() || !lm.contains("class") || !lm["class"].is_string()) {
                throw SchemaError(ctx + ": missing class");
            }
            const auto it = class_names().find(lm["class"].get<std::string>());
            if (it == class_names().end()) {
                throw SchemaError(ctx + ": unknown class \"" + lm["class"].get<std::string>() +
                                  "\"");
            }
            AnnotatedLandmark out;
            out.cls = it->second;
            const bool has_coords = lm.contains("x") || lm.contains("y");
            if (out.cls == VisibilityClass::kSelfOccluded) {
                if (has_coords) {
                    throw SchemaError(ctx + ": self-occluded landmark must not have coordinates");
                }
            } else {
                if (!has_coords) {
                    throw SchemaError(ctx + ": visible landmark is missing coordinates");
                }
                out.location = Point2{number_field(lm, "x", ctx), number_field(lm, "y", ctx)};
            }
            face.landmarks.push_back(out);
        }
        set.faces.push_back(std::move(face));
    }
    return set;
}

std::string write_annotations(const AnnotationSet& set) {
    json j;
    j["schema"] = "luvli-annot-1";
    j["num_landmarks"] = set.num_landmarks;
    j["faces"] = json::array();
    for (const AnnotatedFace& face : set.faces) {
        json f;
        f["id"] = face.id;
        if (face.bbox) {
            f["bbox"] = {{"x", face.bbox->x},
                         {"y", face.bbox->y},
                         {"w", face.bbox->width},
                         {"h", face.bbox->height}};
        } else {
            f["bbox"] = nullptr;
        }
        f["landmarks"] = json::array();
        for (const AnnotatedLandmark& lm : face.landmarks) {
            json entry;
            entry["class"] = class_name(lm.cls);
            if (lm.location) {
                entry["x"] = lm.location->x;
                entry["y"] = lm.location->y;
            }
            f["landmarks"].push_back(entry);
        }
        j["faces"].push_back(std::move(f));
    }
    return j.dump(2) + "\n";
}

PredictionFile parse_predictions(const std::string& text) {
    const json j = parse_json(text);
    require_schema(j, "luvli-pred-1");
    if (!j.contains("faces") || !j["faces"].is_array()) {
        throw SchemaError("faces must be an array");
    }
    PredictionFile file;
    for (const json& f : j["faces"]) {
        PredictedFace face;
        if (!f.is_object() || !f.contains("id") || !f["id"].is_string()) {
            throw SchemaError("face entry missing string id");
        }
        face.id = f["id"].get<std::string>();
        if (!f.contains("landmarks") || !f["landmarks"].is_array()) {
            throw SchemaError("face \"" + face.id + "\": landmarks must be an array");
        }
        const json& lms = f["landmarks"];
        for (std::size_t k = 0; k < lms.size(); ++k) {
            const json& lm = lms[k];
            const std::string ctx = face_context(face.id, k);
            if (!lm.is_object() || !lm.contains("mu") || !lm["mu"].is_array() ||
                lm["mu"].size() != 2 || !lm["mu"][0].is_number() || !lm["mu"][1].is_number()) {
                throw SchemaError(ctx + ": mu must be a 2-element number array");
            }
            if (!lm.contains("chol") || !lm["chol"].is_array() || lm["chol"].size() != 3 ||
                !lm["chol"][0].is_number() || !lm["chol"][1].is_number() ||
                !lm["chol"][2].is_number()) {
                throw SchemaError(ctx + ": chol must be a 3-element number array");
            }
            if (!lm.contains("vis") || !lm["vis"].is_number()) {
                throw SchemaError(ctx + ": vis must be a number");
            }
            LandmarkPrediction pred;
            pred.mean = {lm["mu"][0].get<double>(), lm["mu"][1].get<double>()};
            pred.chol = {lm["chol"][0].get<double>(), lm["chol"][1].get<double>(),
                         lm["chol"][2].get<double>()};
            pred.visibility = lm["vis"].get<double>();
            if (!pred.chol.valid()) {
                throw SchemaError(ctx + ": Cholesky diagonal entries must be positive");
            }
            if (!(pred.visibility > 0.0) || !(pred.visibility < 1.0)) {
                throw SchemaError(ctx + ": vis must lie strictly inside (0,1)");
            }
            face.landmarks.push_back(pred);
        }
        file.faces.push_back(std::move(face));
    }
    return file;
}

std::string write_predictions(const PredictionFile& preds) {
    json j;
    j["schema"] = "luvli-pred-1";
    j["faces"] = json::array();
    for (const PredictedFace& face : preds.faces) {
        json f;
        f["id"] = face.id;
        f["landmarks"] = json::array();
        for (const LandmarkPrediction& lm : face.landmarks) {
            f["landmarks"].push_back({{"mu", {lm.mean.x, lm.mean.y}},
                                      {"chol", {lm.chol.l11, lm.chol.l21, lm.chol.l22}},
                                      {"vis", lm.visibility}});
        }
        j["faces"].push_back(std::move(f));
    }
    return j.dump(2) + "\n";
}

std::vector<GroundTruthLandmark> to_ground_truth(const AnnotatedFace& face) {
    std::vector<GroundTruthLandmark> out;
    out.reserve(face.landmarks.size());
    for (const AnnotatedLandmark& lm : face.landmarks) {
        if (is_visible(lm.cls)) {
            out.push_back(GroundTruthLandmark::visible_at(*lm.location));
        } else {
            out.push_back(GroundTruthLandmark::invisible());
        }
    }
    return out;
}

void check_pairing(const AnnotationSet& annotations, const PredictionFile& predictions) {
    std::unordered_map<std::string, const PredictedFace*> by_id;
    for (const PredictedFace& face : predictions.faces) {
        if (!by_id.emplace(face.id, &face).second) {
            throw CountMismatchError("duplicate prediction id \"" + face.id + "\"");
        }
    }
    std::set<std::string> seen;
    for (const AnnotatedFace& face : annotations.faces) {
        if (!seen.insert(face.id).second) {
            throw CountMismatchError("duplicate annotation id \"" + face.id + "\"");
        }
        const auto it = by_id.find(face.id);
        if (it == by_id.end()) {
            throw CountMismatchError("no prediction for face \"" + face.id + "\"");
        }
        if (it->second->landmarks.size() != face.landmarks.size()) {
            throw CountMismatchError(
                "face \"" + face.id + "\": " + std::to_string(face.landmarks.size()) +
                " annotated landmarks vs " + std::to_string(it->second->landmarks.size()) +
                " predicted");
        }
    }
    if (by_id.size() != annotations.faces.size()) {
        for (const PredictedFace& face : predictions.faces) {
            if (seen.find(face.id) == seen.end()) {
                throw CountMismatchError("prediction for unknown face \"" + face.id + "\"");
            }
        }
    }
}

SyntheticScenario parse_scenario(const std::string& text) {
    const json j = parse_json(text);
    require_schema(j, "luvli-scenario-1");
    SyntheticScenario scenario;
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw SchemaError("kind must be \"gaussian\" or \"laplacian\"");
    }
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "gaussian") {
        scenario.kind = LikelihoodKind::kGaussian;
    } else if (kind == "laplacian") {
        scenario.kind = LikelihoodKind::kLaplacian;
    } else {
        throw SchemaError("unknown kind \"" + kind + "\"");
    }
    if (!j.contains("num_samples") || !j["num_samples"].is_number_integer() ||
        j["num_samples"].get<int>() < 1) {
        throw SchemaError("num_samples must be a positive integer");
    }
    scenario.num_samples = j["num_samples"].get<int>();
    if (!j.contains("seed") || !j["seed"].is_number_integer()) {
        throw SchemaError("seed must be an integer");
    }
    scenario.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("bbox") && !j["bbox"].is_null()) {
        const json& b = j["bbox"];
        BBox box;
        box.x = number_field(b, "x", "bbox");
        box.y = number_field(b, "y", "bbox");
        box.width = number_field(b, "w", "bbox");
        box.height = number_field(b, "h", "bbox");
        if (!(box.width > 0.0) || !(box.height > 0.0)) {
            throw SchemaError("bbox dimensions must be positive");
        }
        scenario.bbox = box;
    }
    if (!j.contains("landmarks") || !j["landmarks"].is_array() || j["landmarks"].empty()) {
        throw SchemaError("landmarks must be a non-empty array");
    }
    for (std::size_t k = 0; k < j["landmarks"].size(); ++k) {
        const json& lm = j["landmarks"][k];
        const std::string ctx = "landmark " + std::to_string(k);
        ScenarioLandmark out;
        if (!lm.is_object() || !lm.contains("mu") || !lm["mu"].is_array() ||
            lm["mu"].size() != 2 || !lm["mu"][0].is_number() || !lm["mu"][1].is_number()) {
            throw SchemaError(ctx + ": mu must be a 2-element number array");
        }
        out.mean = {lm["mu"][0].get<double>(), lm["mu"][1].get<double>()};
        if (!lm.contains("sigma") || !lm["sigma"].is_array() || lm["sigma"].size() != 3 ||
            !lm["sigma"][0].is_number() || !lm["sigma"][1].is_number() ||
            !lm["sigma"][2].is_number()) {
            throw SchemaError(ctx + ": sigma must be a 3-element number array (xx, xy, yy)");
        }
        out.covariance = {lm["sigma"][0].get<double>(), lm["sigma"][1].get<double>(),
                          lm["sigma"][2].get<double>()};
        try {
            require_spd(out.covariance);
        } catch (const NonPositiveDefiniteError&) {
            throw SchemaError(ctx + ": sigma is not positive definite");
        }
        out.visibility_rate = number_field(lm, "rate", ctx);
        if (!(out.visibility_rate >= 0.0 && out.visibility_rate <= 1.0)) {
            throw SchemaError(ctx + ": rate must lie in [0,1]");
        }
        if (lm.contains("class")) {
            if (!lm["class"].is_string()) throw SchemaError(ctx + ": class must be a string");
            const std::string cls = lm["class"].get<std::string>();
            if (cls == "unoccluded") {
                out.externally_occluded = false;
            } else if (cls == "externally_occluded") {
                out.externally_occluded = true;
            } else {
                throw SchemaError(ctx + ": class must be unoccluded or externally_occluded");
            }
        }
        scenario.landmarks.push_back(out);
    }
    return scenario;
}

std::string write_scenario(const SyntheticScenario& scenario) {
    json j;
    j["schema"] = "luvli-scenario-1";
    j["kind"] = scenario.kind == LikelihoodKind::kGaussian ? "gaussian" : "laplacian";
    j["num_samples"] = scenario.num_samples;
    j["seed"] = scenario.seed;
    if (scenario.bbox) {
        j["bbox"] = {{"x", scenario.bbox->x},
                     {"y", scenario.bbox->y},
                     {"w", scenario.bbox->width},
                     {"h", scenario.bbox->height}};
    } else {
        j["bbox"] = nullptr;
    }
    j["landmarks"] = json::array();
    for (const ScenarioLandmark& lm : scenario.landmarks) {
        j["landmarks"].push_back(
            {{"mu", {lm.mean.x, lm.mean.y}},
             {"sigma", {lm.covariance.xx, lm.covariance.xy, lm.covariance.yy}},
             {"rate", lm.visibility_rate},
             {"class", lm.externally_occluded ? "externally_occluded" : "unoccluded"}});
    }
    return j.dump(2) + "\n";
}

}  // namespace luvli
