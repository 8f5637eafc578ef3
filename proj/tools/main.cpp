#include <cstdio>

#include "CLI11.hpp"
#include "commands.hpp"
#include "luvli/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"LUVLi landmark likelihood toolkit"};
    app.require_subcommand(1);

    luvli::cli::SynthOptions synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic annotated dataset");
    synth_cmd->add_option("--config", synth.config_path, "scenario JSON")->required();
    synth_cmd->add_option("--out", synth.out_path, "annotation output path")->required();
    CLI::Option* seed_opt =
        synth_cmd->add_option("--seed", synth.seed, "override the scenario seed");

    luvli::cli::GradcheckOptions gradcheck;
    CLI::App* gradcheck_cmd =
        app.add_subcommand("gradcheck", "verify analytic gradients against finite differences");
    gradcheck_cmd->add_option("--kind", gradcheck.kind, "gaussian or laplacian")->required();
    gradcheck_cmd->add_option("--trials", gradcheck.trials, "number of random configurations")
        ->check(CLI::PositiveNumber);
    gradcheck_cmd->add_option("--seed", gradcheck.seed, "random seed");

    luvli::cli::FitOptions fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit per-landmark parameters by MLE");
    fit_cmd->add_option("--annotations", fit.annotations_path, "annotation JSON")->required();
    fit_cmd->add_option("--kind", fit.kind, "gaussian or laplacian")->required();
    fit_cmd->add_option("--out", fit.out_path, "prediction output path")->required();

    luvli::cli::EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score predictions against annotations");
    eval_cmd->add_option("--annotations", eval.annotations_path, "annotation JSON")->required();
    eval_cmd->add_option("--predictions", eval.predictions_path, "prediction JSON")->required();
    eval_cmd->add_option("--normalizer", eval.normalizer, "box, interocular or diag");
    eval_cmd->add_option("--cutoff", eval.cutoff, "AUC cutoff NME percent");
    eval_cmd->add_option("--threshold", eval.threshold, "failure-rate threshold NME percent");
    eval_cmd->add_option("--out", eval.out_path, "summary JSON output path")->required();

    luvli::cli::CalibrateOptions calibrate;
    CLI::App* calibrate_cmd =
        app.add_subcommand("calibrate", "uncertainty calibration diagnostics");
    calibrate_cmd->add_option("--annotations", calibrate.annotations_path, "annotation JSON")
        ->required();
    calibrate_cmd->add_option("--predictions", calibrate.predictions_path, "prediction JSON")
        ->required();
    calibrate_cmd->add_option("--bin-size", calibrate.bin_size, "records per calibration bin");
    calibrate_cmd->add_option("--grid", calibrate.grid, "histogram grid as extent,cells");
    calibrate_cmd->add_option("--out", calibrate.out_path, "report JSON output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? luvli::cli::kExitOk : luvli::cli::kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            synth.seed_set = seed_opt->count() > 0;
            return luvli::cli::run_synth(synth);
        }
        if (gradcheck_cmd->parsed()) return luvli::cli::run_gradcheck(gradcheck);
        if (fit_cmd->parsed()) return luvli::cli::run_fit(fit);
        if (eval_cmd->parsed()) return luvli::cli::run_eval(eval);
        if (calibrate_cmd->parsed()) return luvli::cli::run_calibrate(calibrate);
    } catch (const luvli::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return luvli::cli::kExitDataFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return luvli::cli::kExitDataFailure;
    }
    return luvli::cli::kExitUsage;
}
