#include "luvli/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

namespace luvli {

namespace {

constexpr int kOuterLeftEye = 36;
constexpr int kOuterRightEye = 45;
constexpr int kSixtyEightPoint = 68;

void require_paired(const FaceEvalRecord& rec) {
    if (rec.truth.size() != rec.predictions.size()) {
        throw DimensionMismatchError("record has " + std::to_string(rec.truth.size()) +
                                     " ground-truth landmarks but " +
                                     std::to_string(rec.predictions.size()) + " predictions");
    }
}

BBox tight_box(const std::vector<GroundTruthLandmark>& truth) {
    double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
    double max_x = -min_x, max_y = -min_x;
    bool any = false;
    for (const GroundTruthLandmark& gt : truth) {
        if (!gt.visible()) continue;
        any = true;
        min_x = std::min(min_x, gt.location->x);
        max_x = std::max(max_x, gt.location->x);
        min_y = std::min(min_y, gt.location->y);
        max_y = std::max(max_y, gt.location->y);
    }
    if (!any) {
        throw NoVisibleLandmarksError("no visible landmarks for the tight-box fallback");
    }
    return {min_x, min_y, max_x - min_x, max_y - min_y};
}

}  // namespace

double normalizer(const FaceEvalRecord& rec, NormalizerKind kind) {
    if (kind == NormalizerKind::kInterOcular) {
        if (rec.truth.size() != kSixtyEightPoint) {
            throw MissingEyeCornersError("inter-ocular normalizer needs the 68-point scheme, got " +
                                         std::to_string(rec.truth.size()) + " landmarks");
        }
        const GroundTruthLandmark& left = rec.truth[kOuterLeftEye];
        const GroundTruthLandmark& right = rec.truth[kOuterRightEye];
        if (!left.visible() || !right.visible()) {
            throw MissingEyeCornersError("outer eye corner landmark is not visible");
        }
        return (*right.location - *left.location).norm();
    }
    const BBox box = rec.bbox ? *rec.bbox : tight_box(rec.truth);
    if (kind == NormalizerKind::kBox) return std::sqrt(box.width * box.height);
    return std::sqrt(box.width * box.width + box.height * box.height);
}

namespace {

// Sum of normalized visible-landmark errors and the visible count.
std::pair<double, int> error_sum(const FaceEvalRecord& rec, NormalizerKind kind) {
    require_paired(rec);
    if (rec.truth.empty()) throw EmptyInputError("record has no landmarks");
    const double d = normalizer(rec, kind);
    double sum = 0.0;
    int visible = 0;
    for (std::size_t j = 0; j < rec.truth.size(); ++j) {
        if (!rec.truth[j].visible()) continue;
        ++visible;
        sum += (*rec.truth[j].location - rec.predictions[j].mean).norm() / d;
    }
    return {sum * 100.0, visible};
}

}  // namespace

double nme(const FaceEvalRecord& rec, NormalizerKind kind) {
    const auto [sum, visible] = error_sum(rec, kind);
    (void)visible;
    return sum / static_cast<double>(rec.truth.size());
}

double nme_vis(const FaceEvalRecord& rec, NormalizerKind kind) {
    const auto [sum, visible] = error_sum(rec, kind);
    if (visible == 0) throw NoVisibleLandmarksError("nme_vis: no visible landmarks");
    return sum / static_cast<double>(visible);
}

double auc(const std::vector<double>& nmes, double cutoff) {
    if (nmes.empty()) throw EmptyInputError("auc: empty NME list");
    if (!(cutoff > 0.0)) throw InvalidArgumentError("auc: cutoff must be positive");
    double area = 0.0;
    for (double x : nmes) {
        if (x < 0.0) throw InvalidArgumentError("auc: negative NME value");
        area += std::max(0.0, cutoff - x);
    }
    return area / (cutoff * static_cast<double>(nmes.size()));
}

double failure_rate(const std::vector<double>& nmes, double threshold) {
    if (nmes.empty()) throw EmptyInputError("failure_rate: empty NME list");
    if (!(threshold > 0.0)) throw InvalidArgumentError("failure_rate: threshold must be positive");
    std::size_t failures = 0;
    for (double x : nmes) {
        if (x > threshold) ++failures;
    }
    return 100.0 * static_cast<double>(failures) / static_cast<double>(nmes.size());
}

bool filter_matches(ClassFilter f, VisibilityClass c) {
    switch (f) {
        case ClassFilter::kAll: return true;
        case ClassFilter::kVisible: return is_visible(c);
        case ClassFilter::kInvisible: return !is_visible(c);
        case ClassFilter::kUnoccluded: return c == VisibilityClass::kUnoccluded;
        case ClassFilter::kExternallyOccluded: return c == VisibilityClass::kExternallyOccluded;
        case ClassFilter::kSelfOccluded: return c == VisibilityClass::kSelfOccluded;
    }
    return false;
}

double visibility_accuracy(const std::vector<double>& vhat,
                           const std::vector<VisibilityClass>& classes, ClassFilter filter) {
    if (vhat.size() != classes.size()) {
        throw DimensionMismatchError("visibility_accuracy: list length mismatch");
    }
    std::size_t selected = 0, correct = 0;
    for (std::size_t i = 0; i < vhat.size(); ++i) {
        if (!filter_matches(filter, classes[i])) continue;
        ++selected;
        if ((vhat[i] > 0.5) == is_visible(classes[i])) ++correct;
    }
    if (selected == 0) throw EmptyAfterFilterError("visibility_accuracy: filter selected nothing");
    return static_cast<double>(correct) / static_cast<double>(selected);
}

double uncertainty_scalar(const LandmarkPrediction& pred) {
    if (!pred.chol.valid()) throw NonPositiveDefiniteError("uncertainty_scalar: invalid factor");
    return pred.chol.l11 * pred.chol.l22;
}

double uncertainty_scalar_normalized(const LandmarkPrediction& pred,
                                     const std::optional<BBox>& bbox) {
    if (!bbox) throw MissingBboxError("normalized uncertainty needs a bounding box");
    return uncertainty_scalar(pred) / (bbox->width * bbox->height);
}

namespace {

void require_consistent(const EvalInput& input) {
    if (input.ids.size() != input.records.size() || input.ids.size() != input.classes.size()) {
        throw DimensionMismatchError("eval input: ids, records and classes differ in length");
    }
    for (std::size_t i = 0; i < input.records.size(); ++i) {
        require_paired(input.records[i]);
        if (input.classes[i].size() != input.records[i].truth.size()) {
            throw DimensionMismatchError("eval input: class list length mismatch for image " +
                                         input.ids[i]);
        }
    }
}

std::optional<double> class_mean(const std::vector<double>& values,
                                 const std::vector<VisibilityClass>& classes, ClassFilter f) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!filter_matches(f, classes[i])) continue;
        sum += values[i];
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::optional<double> try_accuracy(const std::vector<double>& vhat,
                                   const std::vector<VisibilityClass>& classes, ClassFilter f) {
    try {
        return visibility_accuracy(vhat, classes, f);
    } catch (const EmptyAfterFilterError&) {
        return std::nullopt;
    }
}

}  // namespace

EvalSummary summarize(const EvalInput& input, NormalizerKind kind, double cutoff,
                      double threshold) {
    require_consistent(input);
    if (input.records.empty()) throw EmptyInputError("summarize: no images");
    EvalSummary s;
    s.normalizer = kind;
    s.cutoff = cutoff;
    s.threshold = threshold;
    s.num_images = static_cast<int>(input.records.size());

    double nme_vis_sum = 0.0;
    int nme_vis_count = 0;
    for (const FaceEvalRecord& rec : input.records) {
        try {
            s.nmes.push_back(nme(rec, kind));
        } catch (const Error&) {
            ++s.num_skipped;
            continue;
        }
        try {
            nme_vis_sum += nme_vis(rec, kind);
            ++nme_vis_count;
        } catch (const NoVisibleLandmarksError&) {
        }
    }
    if (s.nmes.empty()) throw EmptyAfterFilterError("summarize: no image had a usable normalizer");
    double total = 0.0;
    for (double x : s.nmes) total += x;
    s.mean_nme = total / static_cast<double>(s.nmes.size());
    if (nme_vis_count > 0) s.mean_nme_vis = nme_vis_sum / nme_vis_count;
    s.auc_value = auc(s.nmes, cutoff);
    s.failure_rate_value = failure_rate(s.nmes, threshold);

    std::vector<double> all_vhat, all_unc, all_unc_norm;
    std::vector<VisibilityClass> all_classes, norm_classes;
    for (std::size_t i = 0; i < input.records.size(); ++i) {
        const FaceEvalRecord& rec = input.records[i];
        for (std::size_t j = 0; j < rec.predictions.size(); ++j) {
            all_vhat.push_back(rec.predictions[j].visibility);
            all_classes.push_back(input.classes[i][j]);
            all_unc.push_back(uncertainty_scalar(rec.predictions[j]));
            if (rec.bbox) {
                all_unc_norm.push_back(uncertainty_scalar_normalized(rec.predictions[j], rec.bbox));
                norm_classes.push_back(input.classes[i][j]);
            }
        }
    }
    s.accuracy_overall = try_accuracy(all_vhat, all_classes, ClassFilter::kAll);
    s.accuracy_visible = try_accuracy(all_vhat, all_classes, ClassFilter::kVisible);
    s.accuracy_invisible = try_accuracy(all_vhat, all_classes, ClassFilter::kInvisible);
    s.accuracy_unoccluded = try_accuracy(all_vhat, all_classes, ClassFilter::kUnoccluded);
    s.accuracy_externally_occluded =
        try_accuracy(all_vhat, all_classes, ClassFilter::kExternallyOccluded);
    s.accuracy_self_occluded = try_accuracy(all_vhat, all_classes, ClassFilter::kSelfOccluded);
    s.uncertainty_unoccluded = class_mean(all_unc, all_classes, ClassFilter::kUnoccluded);
    s.uncertainty_externally_occluded =
        class_mean(all_unc, all_classes, ClassFilter::kExternallyOccluded);
    s.uncertainty_self_occluded = class_mean(all_unc, all_classes, ClassFilter::kSelfOccluded);
    s.uncertainty_normalized_unoccluded =
        class_mean(all_unc_norm, norm_classes, ClassFilter::kUnoccluded);
    s.uncertainty_normalized_externally_occluded =
        class_mean(all_unc_norm, norm_classes, ClassFilter::kExternallyOccluded);
    s.uncertainty_normalized_self_occluded =
        class_mean(all_unc_norm, norm_classes, ClassFilter::kSelfOccluded);
    return s;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_cell(std::string& out, const FaceEvalRecord& rec, NormalizerKind kind, bool vis) {
    out += ',';
    try {
        out += format_double(vis ? nme_vis(rec, kind) : nme(rec, kind));
    } catch (const Error&) {
    }
}

}  // namespace

std::string eval_csv(const EvalInput& input) {
    require_consistent(input);
    std::string out =
        "id,nme_box,nme_interocular,nme_diag,nme_vis_box,nme_vis_interocular,nme_vis_diag\n";
    for (std::size_t i = 0; i < input.records.size(); ++i) {
        out += input.ids[i];
        for (bool vis : {false, true}) {
            for (NormalizerKind kind :
                 {NormalizerKind::kBox, NormalizerKind::kInterOcular, NormalizerKind::kDiag}) {
                append_cell(out, input.records[i], kind, vis);
            }
        }
        out += '\n';
    }
    return out;
}

std::string eval_summary_json(const EvalSummary& s) {
    nlohmann::json j;
    j["schema"] = "luvli-eval-1";
    switch (s.normalizer) {
        case NormalizerKind::kBox: j["normalizer"] = "box"; break;
        case NormalizerKind::kInterOcular: j["normalizer"] = "interocular"; break;
        case NormalizerKind::kDiag: j["normalizer"] = "diag"; break;
    }
    j["cutoff"] = s.cutoff;
    j["threshold"] = s.threshold;
    j["num_images"] = s.num_images;
    j["num_skipped"] = s.num_skipped;
    j["mean_nme"] = s.mean_nme;
    j["mean_nme_vis"] = s.mean_nme_vis ? nlohmann::json(*s.mean_nme_vis) : nlohmann::json();
    j["auc"] = s.auc_value;
    j["failure_rate"] = s.failure_rate_value;
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json();
    };
    j["visibility_accuracy"] = {
        {"overall", opt(s.accuracy_overall)},
        {"visible", opt(s.accuracy_visible)},
        {"invisible", opt(s.accuracy_invisible)},
        {"unoccluded", opt(s.accuracy_unoccluded)},
        {"externally_occluded", opt(s.accuracy_externally_occluded)},
        {"self_occluded", opt(s.accuracy_self_occluded)},
    };
    j["mean_uncertainty"] = {
        {"unoccluded", opt(s.uncertainty_unoccluded)},
        {"externally_occluded", opt(s.uncertainty_externally_occluded)},
        {"self_occluded", opt(s.uncertainty_self_occluded)},
    };
    j["mean_uncertainty_box_normalized"] = {
        {"unoccluded", opt(s.uncertainty_normalized_unoccluded)},
        {"externally_occluded", opt(s.uncertainty_normalized_externally_occluded)},
        {"self_occluded", opt(s.uncertainty_normalized_self_occluded)},
    };
    return j.dump(2) + "\n";
}

}  // namespace luvli
