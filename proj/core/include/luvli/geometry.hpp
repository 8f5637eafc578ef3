#pragma once

#include <cmath>

#include "luvli/errors.hpp"

namespace luvli {

/// A 2D point or vector in pixel coordinates.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double c, Point2 p) { return {c * p.x, c * p.y}; }
    friend Point2 operator*(Point2 p, double c) { return {c * p.x, c * p.y}; }
    friend Point2 operator-(Point2 p) { return {-p.x, -p.y}; }

    double squared_norm() const { return x * x + y * y; }
    double norm() const { return std::sqrt(squared_norm()); }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

/// Axis-aligned bounding box (origin + size, pixels).
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;
};

/// A symmetric 2x2 matrix stored as its three unique entries.
/// Symmetry holds by construction; SPD-ness is a runtime property.
struct SymMatrix2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    static SymMatrix2 identity() { return {1.0, 0.0, 1.0}; }
    static SymMatrix2 diagonal(double a, double b) { return {a, 0.0, b}; }

    friend SymMatrix2 operator+(SymMatrix2 a, SymMatrix2 b) {
        return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
    }
    friend SymMatrix2 operator*(double c, SymMatrix2 m) {
        return {c * m.xx, c * m.xy, c * m.yy};
    }
    friend SymMatrix2 operator*(SymMatrix2 m, double c) {
        return {c * m.xx, c * m.xy, c * m.yy};
    }

    /// Matrix-vector product.
    Point2 apply(Point2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

/// Lower-triangular Cholesky factor of a 2x2 SPD covariance:
///   L = [ l11   0  ]        Sigma = L * L^T
///       [ l21  l22 ]
/// Positive diagonals guarantee Sigma is SPD with det = (l11*l22)^2.
struct CholeskyCovariance {
    double l11 = 1.0;
    double l21 = 0.0;
    double l22 = 1.0;

    bool valid() const {
        return l11 > 0.0 && l22 > 0.0 && std::isfinite(l11) && std::isfinite(l21) &&
               std::isfinite(l22);
    }
};

/// Threshold below which determinants and leading entries are treated as
/// degenerate. Rejects only truly singular inputs while keeping the adjugate
/// inverse finite.
inline constexpr double kSpdThreshold = 1e-300;

double det(const SymMatrix2& m);

/// Throws NonPositiveDefiniteError unless m passes the SPD gate
/// (det > kSpdThreshold and xx > kSpdThreshold).
void require_spd(const SymMatrix2& m);

/// Closed-form adjugate inverse. Requires SPD.
SymMatrix2 inverse(const SymMatrix2& m);

/// Sigma = L * L^T.
SymMatrix2 to_covariance(const CholeskyCovariance& chol);

/// Cholesky factorization of an SPD matrix. Throws NonPositiveDefiniteError.
CholeskyCovariance cholesky(const SymMatrix2& m);

/// Squared Mahalanobis distance d^T Sigma^{-1} d. Requires SPD.
double mahalanobis_sq(Point2 d, const SymMatrix2& sigma);

/// Matrix logarithm via symmetric eigendecomposition. Requires SPD.
SymMatrix2 matrix_log(const SymMatrix2& m);

/// Matrix exponential via symmetric eigendecomposition. Defined for any
/// symmetric input.
SymMatrix2 matrix_exp(const SymMatrix2& m);

/// Inverse principal square root S with S * Sigma * S = I. Requires SPD.
SymMatrix2 inv_sqrt(const SymMatrix2& m);

}  // namespace luvli
