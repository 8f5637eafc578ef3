#pragma once

#include <cstdint>
#include <string>

namespace luvli::cli {

// Exit codes shared by every subcommand: 0 success, 1 data or tolerance
// failure, 2 usage/config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataFailure = 1;
inline constexpr int kExitUsage = 2;

struct SynthOptions {
    std::string config_path;
    std::string out_path;
    bool seed_set = false;
    std::uint64_t seed = 0;
};

struct GradcheckOptions {
    std::string kind = "gaussian";
    int trials = 100;
    std::uint64_t seed = 0;
};

struct FitOptions {
    std::string annotations_path;
    std::string kind = "gaussian";
    std::string out_path;
};

struct EvalOptions {
    std::string annotations_path;
    std::string predictions_path;
    std::string normalizer = "box";
    double cutoff = 7.0;
    double threshold = 10.0;
    std::string out_path;
};

struct CalibrateOptions {
    std::string annotations_path;
    std::string predictions_path;
    int bin_size = 500;
    std::string grid = "6,60";
    std::string out_path;
};

int run_synth(const SynthOptions& opt);
int run_gradcheck(const GradcheckOptions& opt);
int run_fit(const FitOptions& opt);
int run_eval(const EvalOptions& opt);
int run_calibrate(const CalibrateOptions& opt);

}  // namespace luvli::cli
