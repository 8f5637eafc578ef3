#include "luvli/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

namespace luvli {

Heatmap::Heatmap(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) {
        throw InvalidDimensionsError("heatmap dimensions must be at least 1x1");
    }
    values.assign(static_cast<std::size_t>(w) * h, 0.0);
}

Heatmap render_gaussian(Point2 center, double s, int width, int height) {
    if (!(s > 0.0)) throw InvalidArgumentError("render_gaussian: s must be positive");
    Heatmap h(width, height);
    const double inv = 1.0 / (2.0 * s * s);
    for (int y = 0; y < height; ++y) {
        const double dy = y - center.y;
        for (int x = 0; x < width; ++x) {
            const double dx = x - center.x;
            h.at(x, y) = std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
    return h;
}

namespace {

// Normalized per-pixel weights for the given sigma variant. Returns the sum
// of the unnormalized ReLU weights through `relu_sum` so the gradient can
// reuse it; softmax weights always sum to 1.
std::vector<double> weights(const Heatmap& h, const SigmaKind& sigma, double& relu_sum) {
    std::vector<double> w(h.size());
    if (sigma.variant == SigmaKind::Variant::kRelu) {
        double sum = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            w[i] = h.values[i] > 0.0 ? h.values[i] : 0.0;
            sum += w[i];
        }
        if (!(sum > 0.0)) {
            throw AllNonPositiveError("spatial_mean: no strictly positive pixel under ReLU");
        }
        relu_sum = sum;
        for (double& v : w) v /= sum;
        return w;
    }
    const double tau = sigma.variant == SigmaKind::Variant::kSoftmax ? 1.0 : sigma.tau;
    const double peak = *std::max_element(h.values.begin(), h.values.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        w[i] = std::exp((h.values[i] - peak) / tau);
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    relu_sum = sum;
    return w;
}

Point2 mean_of_weights(const Heatmap& h, const std::vector<double>& w) {
    Point2 mu;
    std::size_t i = 0;
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x, ++i) {
            mu.x += w[i] * x;
            mu.y += w[i] * y;
        }
    }
    return mu;
}

}  // namespace

Point2 spatial_mean(const Heatmap& h, const SigmaKind& sigma) {
    double relu_sum;
    return mean_of_weights(h, weights(h, sigma, relu_sum));
}

std::vector<Point2> spatial_mean_grad(const Heatmap& h, const SigmaKind& sigma) {
    double relu_sum;
    const std::vector<double> w = weights(h, sigma, relu_sum);
    const Point2 mu = mean_of_weights(h, w);
    std::vector<Point2> grad(h.size());
    std::size_t i = 0;
    if (sigma.variant == SigmaKind::Variant::kRelu) {
        for (int y = 0; y < h.height; ++y) {
            for (int x = 0; x < h.width; ++x, ++i) {
                if (h.values[i] > 0.0) {
                    grad[i] = Point2{x - mu.x, y - mu.y} * (1.0 / relu_sum);
                }
            }
        }
        return grad;
    }
    const double tau = sigma.variant == SigmaKind::Variant::kSoftmax ? 1.0 : sigma.tau;
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x, ++i) {
            grad[i] = Point2{x - mu.x, y - mu.y} * (w[i] / tau);
        }
    }
    return grad;
}

Point2 argmax_quarter_offset(const Heatmap& h) {
    if (h.size() < 2) throw InvalidDimensionsError("argmax_quarter_offset: need at least 2 pixels");
    std::size_t best = 0;
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (h.values[i] > h.values[best]) best = i;
    }
    std::size_t second = best == 0 ? 1 : 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i != best && h.values[i] > h.values[second]) second = i;
    }
    const int bx = static_cast<int>(best % h.width), by = static_cast<int>(best / h.width);
    const int sx = static_cast<int>(second % h.width), sy = static_cast<int>(second / h.width);
    auto sign = [](int d) { return d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0; };
    return {bx + 0.25 * sign(sx - bx), by + 0.25 * sign(sy - by)};
}

std::string heatmap_to_csv(const Heatmap& h) {
    std::string out;
    char buf[40];
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) {
            std::snprintf(buf, sizeof buf, "%.17g", h.at(x, y));
            if (x > 0) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

Heatmap heatmap_from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                                 : comma - pos);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw SyntaxError("heatmap csv: bad number '" + cell + "' in row " +
                                  std::to_string(rows.size()));
            }
            row.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw SyntaxError("heatmap csv: ragged row " + std::to_string(rows.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) {
        throw SyntaxError("heatmap csv: empty input");
    }
    Heatmap h(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) h.at(x, y) = rows[y][x];
    }
    return h;
}

}  // namespace luvli
