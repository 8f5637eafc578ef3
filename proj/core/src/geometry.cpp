#include "luvli/geometry.hpp"

#include <cmath>

namespace luvli {

namespace {

// Eigendecomposition of a symmetric 2x2 matrix: M = R diag(l1, l2) R^T with
// R = [[c, -s], [s, c]]. l1 is the eigenvalue of the rotated first axis.
struct EigenDecomp {
    double l1, l2;
    double c, s;
};

EigenDecomp eigen_sym(const SymMatrix2& m) {
    const double mean = 0.5 * (m.xx + m.yy);
    const double radius = std::hypot(0.5 * (m.xx - m.yy), m.xy);
    const double theta = 0.5 * std::atan2(2.0 * m.xy, m.xx - m.yy);
    return {mean + radius, mean - radius, std::cos(theta), std::sin(theta)};
}

SymMatrix2 recompose(const EigenDecomp& e, double f1, double f2) {
    const double c2 = e.c * e.c;
    const double s2 = e.s * e.s;
    const double cs = e.c * e.s;
    return {c2 * f1 + s2 * f2, cs * (f1 - f2), s2 * f1 + c2 * f2};
}

}  // namespace

double det(const SymMatrix2& m) { return m.xx * m.yy - m.xy * m.xy; }

void require_spd(const SymMatrix2& m) {
    if (!(det(m) > kSpdThreshold) || !(m.xx > kSpdThreshold)) {
        throw NonPositiveDefiniteError("matrix is not positive definite: xx=" +
                                       std::to_string(m.xx) + " det=" + std::to_string(det(m)));
    }
}

SymMatrix2 inverse(const SymMatrix2& m) {
    require_spd(m);
    const double d = det(m);
    return {m.yy / d, -m.xy / d, m.xx / d};
}

SymMatrix2 to_covariance(const CholeskyCovariance& chol) {
    return {chol.l11 * chol.l11, chol.l11 * chol.l21,
            chol.l21 * chol.l21 + chol.l22 * chol.l22};
}

CholeskyCovariance cholesky(const SymMatrix2& m) {
    require_spd(m);
    CholeskyCovariance chol;
    chol.l11 = std::sqrt(m.xx);
    chol.l21 = m.xy / chol.l11;
    const double rest = m.yy - chol.l21 * chol.l21;
    if (!(rest > 0.0)) {
        throw NonPositiveDefiniteError("cholesky: trailing pivot is non-positive");
    }
    chol.l22 = std::sqrt(rest);
    return chol;
}

double mahalanobis_sq(Point2 d, const SymMatrix2& sigma) {
    require_spd(sigma);
    const double dd = det(sigma);
    // d^T adj(Sigma) d / det(Sigma), expanded.
    return (sigma.yy * d.x * d.x - 2.0 * sigma.xy * d.x * d.y + sigma.xx * d.y * d.y) / dd;
}

SymMatrix2 matrix_log(const SymMatrix2& m) {
    require_spd(m);
    const EigenDecomp e = eigen_sym(m);
    if (!(e.l2 > 0.0)) {
        throw NonPositiveDefiniteError("matrix_log: non-positive eigenvalue");
    }
    return recompose(e, std::log(e.l1), std::log(e.l2));
}

SymMatrix2 matrix_exp(const SymMatrix2& m) {
    const EigenDecomp e = eigen_sym(m);
    return recompose(e, std::exp(e.l1), std::exp(e.l2));
}

SymMatrix2 inv_sqrt(const SymMatrix2& m) {
    require_spd(m);
    const EigenDecomp e = eigen_sym(m);
    if (!(e.l2 > 0.0)) {
        throw NonPositiveDefiniteError("inv_sqrt: non-positive eigenvalue");
    }
    return recompose(e, 1.0 / std::sqrt(e.l1), 1.0 / std::sqrt(e.l2));
}

}  // namespace luvli
