#include "luvli/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "luvli/errors.hpp"

namespace luvli {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ComponentCalibration calibrate_component(std::vector<std::pair<double, double>> pairs,
                                         int n_per_bin) {
    // Order by the predicted component only. A lexicographic pair sort would
    // break ties by the residual product, smearing it across bins whenever
    // many records share one predicted value.
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    ComponentCalibration comp;
    const std::size_t bins = pairs.size() / static_cast<std::size_t>(n_per_bin);
    for (std::size_t k = 0; k < bins; ++k) {
        BinPair bin;
        for (std::size_t i = k * n_per_bin; i < (k + 1) * static_cast<std::size_t>(n_per_bin);
             ++i) {
            bin.mean_predicted += pairs[i].first;
            bin.mean_residual_product += pairs[i].second;
        }
        bin.mean_predicted /= n_per_bin;
        bin.mean_residual_product /= n_per_bin;
        comp.bins.push_back(bin);
    }

    double mx = 0.0, my = 0.0;
    for (const BinPair& b : comp.bins) {
        mx += b.mean_predicted;
        my += b.mean_residual_product;
    }
    mx /= comp.bins.size();
    my /= comp.bins.size();
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const BinPair& b : comp.bins) {
        const double dx = b.mean_predicted - mx, dy = b.mean_residual_product - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        comp.degenerate = true;
        return comp;
    }
    comp.pearson = sxy / std::sqrt(sxx * syy);
    comp.slope = sxy / sxx;
    comp.intercept = my - comp.slope * mx;
    return comp;
}

}  // namespace

CalibrationReport bin_and_correlate(const std::vector<ResidualRecord>& records, int n_per_bin) {
    if (n_per_bin < 1) throw InvalidArgumentError("bin_and_correlate: n_per_bin must be positive");
    if (records.size() < 2 * static_cast<std::size_t>(n_per_bin)) {
        throw TooFewRecordsError("bin_and_correlate: need at least " +
                                 std::to_string(2 * n_per_bin) + " records, got " +
                                 std::to_string(records.size()));
    }
    std::vector<std::pair<double, double>> xx, xy, yy;
    xx.reserve(records.size());
    xy.reserve(records.size());
    yy.reserve(records.size());
    for (const ResidualRecord& r : records) {
        require_spd(r.predicted);
        xx.emplace_back(r.predicted.xx, r.residual.x * r.residual.x);
        xy.emplace_back(r.predicted.xy, r.residual.x * r.residual.y);
        yy.emplace_back(r.predicted.yy, r.residual.y * r.residual.y);
    }
    CalibrationReport report;
    report.n_per_bin = n_per_bin;
    report.xx = calibrate_component(std::move(xx), n_per_bin);
    report.xy = calibrate_component(std::move(xy), n_per_bin);
    report.yy = calibrate_component(std::move(yy), n_per_bin);
    return report;
}

std::vector<Point2> standardize(const std::vector<ResidualRecord>& records) {
    std::vector<Point2> out;
    out.reserve(records.size());
    for (const ResidualRecord& r : records) {
        out.push_back(inv_sqrt(r.predicted).apply(r.residual));
    }
    return out;
}

Histogram2D build_histogram(const std::vector<Point2>& points, const HistogramGrid& grid) {
    if (grid.cells < 1 || !(grid.extent > 0.0)) {
        throw InvalidArgumentError("histogram grid must have positive extent and cells");
    }
    if (points.empty()) throw EmptyInputError("build_histogram: no points");
    Histogram2D h;
    h.grid = grid;
    h.mass.assign(static_cast<std::size_t>(grid.cells) * grid.cells, 0.0);
    const double w = 1.0 / static_cast<double>(points.size());
    const double delta = 2.0 * grid.extent / grid.cells;
    for (const Point2& p : points) {
        const double fx = (p.x + grid.extent) / delta;
        const double fy = (p.y + grid.extent) / delta;
        const int ix = static_cast<int>(std::floor(fx));
        const int iy = static_cast<int>(std::floor(fy));
        if (ix < 0 || ix >= grid.cells || iy < 0 || iy >= grid.cells) {
            h.tail += w;
        } else {
            h.mass[static_cast<std::size_t>(iy) * grid.cells + ix] += w;
        }
    }
    return h;
}

Histogram2D standard_laplacian_reference(const HistogramGrid& grid) {
    if (grid.cells < 1 || !(grid.extent > 0.0)) {
        throw InvalidArgumentError("histogram grid must have positive extent and cells");
    }
    Histogram2D h;
    h.grid = grid;
    h.mass.assign(static_cast<std::size_t>(grid.cells) * grid.cells, 0.0);
    const double delta = 2.0 * grid.extent / grid.cells;
    // Two-point Gauss-Legendre offsets per axis, exact for cubics per cell.
    const double off = delta / (2.0 * std::sqrt(3.0));
    const double density_scale = 3.0 / (2.0 * 3.14159265358979323846);
    const double sqrt3 = 1.7320508075688772935;
    double total = 0.0;
    for (int iy = 0; iy < grid.cells; ++iy) {
        const double cy = -grid.extent + (iy + 0.5) * delta;
        for (int ix = 0; ix < grid.cells; ++ix) {
            const double cx = -grid.extent + (ix + 0.5) * delta;
            double sum = 0.0;
            for (double sx : {-off, off}) {
                for (double sy : {-off, off}) {
                    const double r = std::hypot(cx + sx, cy + sy);
                    sum += std::exp(-sqrt3 * r);
                }
            }
            const double mass = density_scale * sum * delta * delta / 4.0;
            h.mass[static_cast<std::size_t>(iy) * grid.cells + ix] = mass;
            total += mass;
        }
    }
    // Floor keeps the tail strictly positive even if quadrature error pushes
    // the cell total past 1, so the KL against this reference stays finite.
    h.tail = std::max(1e-12, 1.0 - total);
    return h;
}

double histogram_kl(const Histogram2D& empirical, const Histogram2D& reference) {
    if (empirical.grid.cells != reference.grid.cells ||
        empirical.grid.extent != reference.grid.extent) {
        throw DimensionMismatchError("histogram_kl: grids differ");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < empirical.mass.size(); ++i) {
        const double q = empirical.mass[i];
        if (q > 0.0) kl += q * std::log(q / reference.mass[i]);
    }
    if (empirical.tail > 0.0) kl += empirical.tail * std::log(empirical.tail / reference.tail);
    return kl;
}

double kl_vs_standard_laplacian(const std::vector<Point2>& points, const HistogramGrid& grid) {
    if (points.size() < 1000) {
        throw TooFewPointsError("kl_vs_standard_laplacian: need at least 1000 points, got " +
                                std::to_string(points.size()));
    }
    return histogram_kl(build_histogram(points, grid), standard_laplacian_reference(grid));
}

SymMatrix2 mean_covariance_logeuclidean(const std::vector<SymMatrix2>& sigmas) {
    if (sigmas.empty()) throw EmptyInputError("mean_covariance_logeuclidean: empty input");
    SymMatrix2 acc;
    for (const SymMatrix2& s : sigmas) {
        acc = acc + matrix_log(s);
    }
    return matrix_exp(acc * (1.0 / static_cast<double>(sigmas.size())));
}

namespace {

// Fractional (average) ranks, 1-based; ties share their mean rank.
std::vector<double> fractional_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double mean_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

RankReport nme_vs_uncertainty_rank(const std::vector<double>& nmes,
                                   const std::vector<double>& uncertainties) {
    if (nmes.size() != uncertainties.size()) {
        throw DimensionMismatchError("nme_vs_uncertainty_rank: list length mismatch");
    }
    if (nmes.empty()) throw EmptyInputError("nme_vs_uncertainty_rank: empty input");
    std::vector<std::size_t> order(nmes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return uncertainties[a] < uncertainties[b];
    });
    RankReport report;
    report.pairs.reserve(nmes.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        report.pairs.push_back({static_cast<int>(k), uncertainties[order[k]], nmes[order[k]]});
    }

    const std::vector<double> ru = fractional_ranks(uncertainties);
    const std::vector<double> rn = fractional_ranks(nmes);
    double mu = 0.0, mn = 0.0;
    for (std::size_t i = 0; i < ru.size(); ++i) {
        mu += ru[i];
        mn += rn[i];
    }
    mu /= ru.size();
    mn /= rn.size();
    double suu = 0.0, snn = 0.0, sun = 0.0;
    for (std::size_t i = 0; i < ru.size(); ++i) {
        suu += (ru[i] - mu) * (ru[i] - mu);
        snn += (rn[i] - mn) * (rn[i] - mn);
        sun += (ru[i] - mu) * (rn[i] - mn);
    }
    if (suu == 0.0 || snn == 0.0) {
        report.degenerate = true;
        return report;
    }
    report.spearman = sun / std::sqrt(suu * snn);
    return report;
}

namespace {

nlohmann::json component_json(const ComponentCalibration& comp) {
    nlohmann::json bins = nlohmann::json::array();
    for (const BinPair& b : comp.bins) {
        bins.push_back({{"mean_predicted", b.mean_predicted},
                        {"mean_residual_product", b.mean_residual_product}});
    }
    return {{"bins", bins},
            {"pearson", comp.pearson},
            {"slope", comp.slope},
            {"intercept", comp.intercept},
            {"degenerate", comp.degenerate}};
}

}  // namespace

std::string calibration_report_json(const CalibrationReport& report) {
    nlohmann::json j;
    j["schema"] = "luvli-calib-1";
    j["n_per_bin"] = report.n_per_bin;
    j["xx"] = component_json(report.xx);
    j["xy"] = component_json(report.xy);
    j["yy"] = component_json(report.yy);
    j["kl"] = report.kl ? nlohmann::json(*report.kl) : nlohmann::json();
    return j.dump(2) + "\n";
}

std::string calibration_bins_csv(const CalibrationReport& report) {
    std::string out = "component,bin,mean_predicted,mean_residual_product\n";
    const std::pair<const char*, const ComponentCalibration*> comps[] = {
        {"xx", &report.xx}, {"xy", &report.xy}, {"yy", &report.yy}};
    for (const auto& [name, comp] : comps) {
        for (std::size_t k = 0; k < comp->bins.size(); ++k) {
            out += name;
            out += ',' + std::to_string(k);
            out += ',' + format_double(comp->bins[k].mean_predicted);
            out += ',' + format_double(comp->bins[k].mean_residual_product);
            out += '\n';
        }
    }
    return out;
}

std::string histogram_csv(const Histogram2D& hist) {
    std::string out = "extent," + format_double(hist.grid.extent) +
                      ",cells," + std::to_string(hist.grid.cells) +
                      ",tail," + format_double(hist.tail) + "\n";
    for (int y = 0; y < hist.grid.cells; ++y) {
        for (int x = 0; x < hist.grid.cells; ++x) {
            if (x > 0) out += ',';
            out += format_double(hist.mass[static_cast<std::size_t>(y) * hist.grid.cells + x]);
        }
        out += '\n';
    }
    return out;
}

std::string rank_report_csv(const RankReport& report) {
    std::string out = "spearman," + format_double(report.spearman) + ",degenerate," +
                      (report.degenerate ? "1" : "0") + "\n";
    out += "rank,mean_uncertainty,nme\n";
    for (const RankPair& p : report.pairs) {
        out += std::to_string(p.rank);
        out += ',' + format_double(p.uncertainty);
        out += ',' + format_double(p.nme);
        out += '\n';
    }
    return out;
}

}  // namespace luvli
