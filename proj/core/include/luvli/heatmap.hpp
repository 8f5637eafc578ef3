#pragma once

#include <string>
#include <vector>

#include "luvli/errors.hpp"
#include "luvli/geometry.hpp"

namespace luvli {

// Row-major response grid. Pixel coordinates are zero-based, (0, 0) is the
// top-left pixel center, x indexes columns and y indexes rows.
struct Heatmap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Heatmap() = default;
    Heatmap(int w, int h);

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return values.size(); }
};

// Weighting function applied to heatmap responses before taking the mean.
struct SigmaKind {
    enum class Variant { kRelu, kSoftmax, kTemperatureSoftmax };

    Variant variant = Variant::kRelu;
    double tau = 1.0;

    static SigmaKind relu() { return {Variant::kRelu, 1.0}; }
    static SigmaKind softmax() { return {Variant::kSoftmax, 1.0}; }
    static SigmaKind temperature_softmax(double tau) {
        if (!(tau > 0.0)) throw InvalidArgumentError("temperature must be positive");
        return {Variant::kTemperatureSoftmax, tau};
    }
};

inline constexpr double kDefaultProxySigma = 1.0;
inline constexpr int kDefaultHeatmapSize = 64;

// Unnormalized isotropic Gaussian bump, peak value 1 when the center falls on
// a pixel. The center may be fractional or outside the grid.
Heatmap render_gaussian(Point2 center, double s, int width, int height);

// Weighted spatial mean over the grid. ReLU weighting requires at least one
// strictly positive pixel and throws AllNonPositiveError otherwise.
Point2 spatial_mean(const Heatmap& h, const SigmaKind& sigma);

// Gradient of the spatial mean with respect to each pixel, same row-major
// layout as the heatmap.
std::vector<Point2> spatial_mean_grad(const Heatmap& h, const SigmaKind& sigma);

// Baseline estimator: max pixel location nudged a quarter pixel (per axis)
// toward the second-highest pixel. Ties break in row-major scan order.
Point2 argmax_quarter_offset(const Heatmap& h);

// CSV fixture format: one text line per heatmap row, comma-separated values
// at full double precision.
std::string heatmap_to_csv(const Heatmap& h);
Heatmap heatmap_from_csv(const std::string& text);

}  // namespace luvli
