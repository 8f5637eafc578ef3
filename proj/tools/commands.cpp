#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "luvli/calibration.hpp"
#include "luvli/dataio.hpp"
#include "luvli/fitting.hpp"
#include "luvli/metrics.hpp"

namespace luvli::cli {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgumentError("cannot open \"" + path + "\" for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("cannot open \"" + path + "\" for writing");
    out << content;
    if (!out) throw InvalidArgumentError("failed writing \"" + path + "\"");
}

// report.json -> report<suffix>; falls back to appending when there is no
// .json extension.
std::string derive_path(const std::string& out_path, const std::string& suffix) {
    const std::string ext = ".json";
    if (out_path.size() > ext.size() &&
        out_path.compare(out_path.size() - ext.size(), ext.size(), ext) == 0) {
        return out_path.substr(0, out_path.size() - ext.size()) + suffix;
    }
    return out_path + suffix;
}

LikelihoodKind parse_kind(const std::string& name) {
    if (name == "gaussian") return LikelihoodKind::kGaussian;
    if (name == "laplacian") return LikelihoodKind::kLaplacian;
    throw InvalidArgumentError("kind must be gaussian or laplacian, got \"" + name + "\"");
}

NormalizerKind parse_normalizer(const std::string& name) {
    if (name == "box") return NormalizerKind::kBox;
    if (name == "interocular") return NormalizerKind::kInterOcular;
    if (name == "diag") return NormalizerKind::kDiag;
    throw InvalidArgumentError("normalizer must be box, interocular or diag, got \"" + name +
                               "\"");
}

HistogramGrid parse_grid(const std::string& text) {
    const std::size_t comma = text.find(',');
    if (comma == std::string::npos) {
        throw InvalidArgumentError("grid must be \"extent,cells\", got \"" + text + "\"");
    }
    HistogramGrid grid;
    try {
        grid.extent = std::stod(text.substr(0, comma));
        grid.cells = std::stoi(text.substr(comma + 1));
    } catch (const std::exception&) {
        throw InvalidArgumentError("grid must be \"extent,cells\", got \"" + text + "\"");
    }
    if (!(grid.extent > 0.0) || grid.cells < 1) {
        throw InvalidArgumentError("grid extent and cells must be positive");
    }
    return grid;
}

std::string face_id(int index, int total) {
    std::size_t width = 1;
    for (int n = total - 1; n >= 10; n /= 10) ++width;
    const std::string digits = std::to_string(index);
    std::string out = "synth-";
    if (digits.size() < width) out.append(width - digits.size(), '0');
    return out + digits;
}

// Inputs paired by face id, ordered by id so downstream output is
// deterministic regardless of file order. The pointer vectors index into the
// owned sets; vector moves keep them valid.
struct PairedData {
    AnnotationSet annotations;
    PredictionFile predictions;
    std::vector<const AnnotatedFace*> faces;      // sorted by id
    std::vector<const PredictedFace*> predicted;  // aligned with faces
};

PairedData load_paired(const std::string& annot_path, const std::string& pred_path) {
    PairedData data;
    data.annotations = parse_annotations(read_file(annot_path));
    data.predictions = parse_predictions(read_file(pred_path));
    check_pairing(data.annotations, data.predictions);
    std::unordered_map<std::string, const PredictedFace*> by_id;
    for (const PredictedFace& f : data.predictions.faces) by_id[f.id] = &f;
    for (const AnnotatedFace& f : data.annotations.faces) data.faces.push_back(&f);
    std::sort(data.faces.begin(), data.faces.end(),
              [](const AnnotatedFace* a, const AnnotatedFace* b) { return a->id < b->id; });
    for (const AnnotatedFace* f : data.faces) data.predicted.push_back(by_id.at(f->id));
    return data;
}

EvalInput build_eval_input(const PairedData& data) {
    EvalInput input;
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        const AnnotatedFace& face = *data.faces[i];
        input.ids.push_back(face.id);
        FaceEvalRecord rec;
        rec.truth = to_ground_truth(face);
        rec.predictions = data.predicted[i]->landmarks;
        rec.bbox = face.bbox;
        input.records.push_back(std::move(rec));
        std::vector<VisibilityClass> classes;
        for (const AnnotatedLandmark& lm : face.landmarks) classes.push_back(lm.cls);
        input.classes.push_back(std::move(classes));
    }
    return input;
}

int usage_failure(const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
}

int data_failure(const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDataFailure;
}

}  // namespace

int run_synth(const SynthOptions& opt) {
    SyntheticScenario scenario;
    try {
        scenario = parse_scenario(read_file(opt.config_path));
        if (opt.seed_set) scenario.seed = opt.seed;
    } catch (const Error& e) {
        return usage_failure(e);
    }

    const auto samples = generate(scenario);
    AnnotationSet set;
    set.num_landmarks = static_cast<int>(scenario.landmarks.size());
    for (int i = 0; i < scenario.num_samples; ++i) {
        AnnotatedFace face;
        face.id = face_id(i, scenario.num_samples);
        face.bbox = scenario.bbox;
        for (std::size_t j = 0; j < scenario.landmarks.size(); ++j) {
            AnnotatedLandmark lm;
            if (samples[j][i].visible()) {
                lm.cls = scenario.landmarks[j].externally_occluded
                             ? VisibilityClass::kExternallyOccluded
                             : VisibilityClass::kUnoccluded;
                lm.location = samples[j][i].location;
            } else {
                lm.cls = VisibilityClass::kSelfOccluded;
            }
            face.landmarks.push_back(lm);
        }
        set.faces.push_back(std::move(face));
    }

    const std::string truth_path = opt.out_path + ".truth.json";
    try {
        write_file(opt.out_path, write_annotations(set));
        write_file(truth_path, write_scenario(scenario));
    } catch (const Error& e) {
        return usage_failure(e);
    }
    std::printf("wrote %d faces x %d landmarks to %s (truth sidecar %s)\n", scenario.num_samples,
                set.num_landmarks, opt.out_path.c_str(), truth_path.c_str());
    return kExitOk;
}

int run_gradcheck(const GradcheckOptions& opt) {
    LikelihoodKind kind;
    try {
        kind = parse_kind(opt.kind);
        if (opt.trials < 1) throw InvalidArgumentError("trials must be at least 1");
    } catch (const Error& e) {
        return usage_failure(e);
    }
    const double worst = luvli_gradient_check(kind, opt.trials, opt.seed);
    std::printf("max relative error %.3e over %d trials (%s)\n", worst, opt.trials,
                opt.kind.c_str());
    return worst < 1e-6 ? kExitOk : kExitDataFailure;
}

int run_fit(const FitOptions& opt) {
    AnnotationSet set;
    LikelihoodKind kind;
    try {
        kind = parse_kind(opt.kind);
        set = parse_annotations(read_file(opt.annotations_path));
        if (set.faces.empty()) throw InvalidArgumentError("annotation file has no faces");
    } catch (const Error& e) {
        return usage_failure(e);
    }

    std::vector<std::vector<GroundTruthLandmark>> groups(set.num_landmarks);
    for (const AnnotatedFace& face : set.faces) {
        const auto gts = to_ground_truth(face);
        for (int j = 0; j < set.num_landmarks; ++j) groups[j].push_back(gts[j]);
    }

    std::vector<LandmarkPrediction> fitted(set.num_landmarks);
    int degenerate_count = 0;
    for (int j = 0; j < set.num_landmarks; ++j) {
        try {
            const FitResult result = fit_mle(groups[j], kind);
            fitted[j] = result.prediction;
            std::printf("landmark %d: %s after %d iterations, loss %.6f, vis %.4f\n", j,
                        result.converged ? "converged" : "stopped", result.iterations,
                        result.final_loss, result.prediction.visibility);
        } catch (const DegenerateError&) {
            ++degenerate_count;
            int visible = 0;
            Point2 centroid;
            for (const GroundTruthLandmark& gt : groups[j]) {
                if (!gt.visible()) continue;
                ++visible;
                centroid = centroid + *gt.location;
            }
            if (visible > 0) centroid = centroid * (1.0 / visible);
            const double rate = static_cast<double>(visible) / groups[j].size();
            fitted[j] = {centroid, {1.0, 0.0, 1.0}, std::clamp(rate, 1e-7, 1.0 - 1e-7)};
            std::printf("landmark %d: degenerate (fewer than 2 distinct visible locations)\n", j);
        }
    }

    PredictionFile out;
    std::vector<const AnnotatedFace*> faces;
    for (const AnnotatedFace& f : set.faces) faces.push_back(&f);
    std::sort(faces.begin(), faces.end(),
              [](const AnnotatedFace* a, const AnnotatedFace* b) { return a->id < b->id; });
    for (const AnnotatedFace* f : faces) {
        out.faces.push_back({f->id, fitted});
    }
    try {
        write_file(opt.out_path, write_predictions(out));
    } catch (const Error& e) {
        return usage_failure(e);
    }
    std::printf("wrote %zu predictions to %s\n", out.faces.size(), opt.out_path.c_str());
    return degenerate_count > 0 ? kExitDataFailure : kExitOk;
}

int run_eval(const EvalOptions& opt) {
    NormalizerKind kind;
    PairedData data;
    try {
        kind = parse_normalizer(opt.normalizer);
        if (!(opt.cutoff > 0.0)) throw InvalidArgumentError("cutoff must be positive");
        if (!(opt.threshold > 0.0)) throw InvalidArgumentError("threshold must be positive");
    } catch (const Error& e) {
        return usage_failure(e);
    }
    try {
        data = load_paired(opt.annotations_path, opt.predictions_path);
    } catch (const SyntaxError& e) {
        return usage_failure(e);
    } catch (const SchemaError& e) {
        return usage_failure(e);
    } catch (const CountMismatchError& e) {
        return data_failure(e);
    } catch (const Error& e) {
        return usage_failure(e);
    }
    if (data.faces.empty()) {
        std::fprintf(stderr, "error: annotation file has no faces\n");
        return kExitUsage;
    }

    const EvalInput input = build_eval_input(data);
    EvalSummary summary;
    try {
        summary = summarize(input, kind, opt.cutoff, opt.threshold);
    } catch (const Error& e) {
        return data_failure(e);
    }
    try {
        write_file(opt.out_path, eval_summary_json(summary));
        write_file(derive_path(opt.out_path, ".csv"), eval_csv(input));
    } catch (const Error& e) {
        return usage_failure(e);
    }
    std::printf("%d images (%d skipped), mean NME %.4f, AUC %.4f, FR %.2f%%\n", summary.num_images,
                summary.num_skipped, summary.mean_nme, summary.auc_value,
                summary.failure_rate_value);
    return kExitOk;
}

int run_calibrate(const CalibrateOptions& opt) {
    HistogramGrid grid;
    PairedData data;
    try {
        grid = parse_grid(opt.grid);
        if (opt.bin_size < 1) throw InvalidArgumentError("bin size must be at least 1");
    } catch (const Error& e) {
        return usage_failure(e);
    }
    try {
        data = load_paired(opt.annotations_path, opt.predictions_path);
    } catch (const SyntaxError& e) {
        return usage_failure(e);
    } catch (const SchemaError& e) {
        return usage_failure(e);
    } catch (const CountMismatchError& e) {
        return data_failure(e);
    } catch (const Error& e) {
        return usage_failure(e);
    }

    std::vector<ResidualRecord> records;
    std::vector<double> image_nme, image_uncertainty;
    for (std::size_t i = 0; i < data.faces.size(); ++i) {
        const AnnotatedFace& face = *data.faces[i];
        const std::vector<LandmarkPrediction>& preds = data.predicted[i]->landmarks;
        FaceEvalRecord rec{to_ground_truth(face), preds, face.bbox};
        double unc = 0.0;
        for (std::size_t j = 0; j < preds.size(); ++j) {
            unc += uncertainty_scalar(preds[j]);
            if (!rec.truth[j].visible()) continue;
            records.push_back(
                {*rec.truth[j].location - preds[j].mean, to_covariance(preds[j].chol)});
        }
        try {
            image_nme.push_back(nme(rec, NormalizerKind::kBox));
            image_uncertainty.push_back(unc / static_cast<double>(preds.size()));
        } catch (const Error&) {
        }
    }

    CalibrationReport report;
    try {
        report = bin_and_correlate(records, opt.bin_size);
    } catch (const Error& e) {
        return data_failure(e);
    }

    const std::vector<Point2> standardized = standardize(records);
    Histogram2D hist = build_histogram(standardized, grid);
    if (standardized.size() >= 1000) {
        report.kl = kl_vs_standard_laplacian(standardized, grid);
    } else {
        std::printf("only %zu standardized residuals, KL skipped (needs 1000)\n",
                    standardized.size());
    }

    RankReport rank;
    bool have_rank = !image_nme.empty();
    if (have_rank) rank = nme_vs_uncertainty_rank(image_nme, image_uncertainty);

    try {
        write_file(opt.out_path, calibration_report_json(report));
        write_file(derive_path(opt.out_path, "_bins.csv"), calibration_bins_csv(report));
        write_file(derive_path(opt.out_path, "_hist.csv"), histogram_csv(hist));
        if (have_rank) write_file(derive_path(opt.out_path, "_rank.csv"), rank_report_csv(rank));
    } catch (const Error& e) {
        return usage_failure(e);
    }

    std::printf("pearson xx %.4f xy %.4f yy %.4f, slope xx %.3f\n", report.xx.pearson,
                report.xy.pearson, report.yy.pearson, report.xx.slope);
    if (report.kl) std::printf("standardized-residual KL %.5f\n", *report.kl);
    if (have_rank) std::printf("spearman (uncertainty vs NME) %.4f\n", rank.spearman);
    return kExitOk;
}

}  // namespace luvli::cli
