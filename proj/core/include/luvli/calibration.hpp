#pragma once

#include <optional>
#include <string>
#include <vector>

#include "luvli/geometry.hpp"

namespace luvli {

// One landmark's prediction error paired with the covariance the model
// claimed for it.
struct ResidualRecord {
    Point2 residual;       // ground truth minus predicted mean, pixels
    SymMatrix2 predicted;  // predicted covariance
};

struct BinPair {
    double mean_predicted = 0.0;
    double mean_residual_product = 0.0;
};

// Binned agreement between one predicted covariance component and the
// matching residual product (x*x, signed x*y, or y*y). degenerate is set
// when the predictor is constant across bins, which leaves the correlation
// and regression undefined (reported as zero).
struct ComponentCalibration {
    std::vector<BinPair> bins;
    double pearson = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    bool degenerate = false;
};

struct CalibrationReport {
    ComponentCalibration xx, xy, yy;
    std::optional<double> kl;  // standardized-residual KL when computed
    int n_per_bin = 0;
};

// Sorts records by each predicted component, partitions into consecutive
// equal-count bins (last partial bin dropped), and correlates bin means of
// predicted component vs residual product. Requires at least two full bins.
CalibrationReport bin_and_correlate(const std::vector<ResidualRecord>& records, int n_per_bin);

// Whitens each residual by its predicted covariance: inv_sqrt(Sigma) * r.
// For a correct model the outputs follow the standard (unit) distribution.
std::vector<Point2> standardize(const std::vector<ResidualRecord>& records);

struct HistogramGrid {
    double extent = 6.0;  // grid spans [-extent, extent] in both axes
    int cells = 60;       // per axis
};

// Mass fractions over the grid cells (row-major, y-major) plus the mass that
// fell outside the grid.
struct Histogram2D {
    HistogramGrid grid;
    std::vector<double> mass;
    double tail = 0.0;
};

Histogram2D build_histogram(const std::vector<Point2>& points, const HistogramGrid& grid);

// Per-cell mass of the standard 2D Laplacian density (3/(2pi)) e^(-sqrt(3)|z|),
// integrated with a 4-point product quadrature; tail holds the remainder.
Histogram2D standard_laplacian_reference(const HistogramGrid& grid);

// KL(empirical || reference) over matching grids, tail cell included. Empty
// empirical cells contribute zero.
double histogram_kl(const Histogram2D& empirical, const Histogram2D& reference);

// Convenience pipeline: histogram the points and compare against the
// standard Laplacian. Needs at least 1000 points.
double kl_vs_standard_laplacian(const std::vector<Point2>& points,
                                const HistogramGrid& grid = {});

// Log-Euclidean mean: matrix exponential of the elementwise mean of matrix
// logarithms. Always SPD for SPD inputs.
SymMatrix2 mean_covariance_logeuclidean(const std::vector<SymMatrix2>& sigmas);

struct RankPair {
    int rank = 0;  // ascending by uncertainty, zero-based
    double uncertainty = 0.0;
    double nme = 0.0;
};

// Images ordered by mean uncertainty with the Spearman rank correlation
// between uncertainty and NME. A constant list on either side makes the
// correlation undefined: reported as zero with degenerate set.
struct RankReport {
    std::vector<RankPair> pairs;
    double spearman = 0.0;
    bool degenerate = false;
};

RankReport nme_vs_uncertainty_rank(const std::vector<double>& nmes,
                                   const std::vector<double>& uncertainties);

std::string calibration_report_json(const CalibrationReport& report);

// Plot-ready CSVs: component bin pairs, histogram grid dump, rank pairs.
std::string calibration_bins_csv(const CalibrationReport& report);
std::string histogram_csv(const Histogram2D& hist);
std::string rank_report_csv(const RankReport& report);

}  // namespace luvli
