#include "qcw/transfer.hpp"

#include <cmath>

#include "qcw/errors.hpp"

namespace qcw {

namespace {

// sinh(x)/x * e^{-x} = (1 - e^{-2x}) / (2x), finite at x = 0.
double sinhc_scaled(double x) {
    if (x < 1e-8) return 1.0 - x;
    return -std::expm1(-2.0 * x) / (2.0 * x);
}

// (x cosh x - sinh x) / x^3 * e^{-x}.
double dsinhc_scaled(double x) {
    if (x < 0.1) {
        const double x2 = x * x;
        const double series = 1.0 / 3.0 + x2 / 30.0 + x2 * x2 / 840.0 + x2 * x2 * x2 / 45360.0;
        return series * std::exp(-x);
    }
    const double e2 = std::exp(-2.0 * x);
    return (x * (1.0 + e2) - (1.0 - e2)) / (2.0 * x * x * x);
}

}  // namespace

ScaledMat2 propagator(double d, double lambda, double b) {
    const double r = std::hypot(lambda, b);
    const double x = d * r;
    const double c = 0.5 * (1.0 + std::exp(-2.0 * x));  // cosh(x) e^{-x}
    const double s = d * sinhc_scaled(x);                // sinh(x)/r e^{-x}
    ScaledMat2 out;
    out.m(0, 0) = c + s * b;
    out.m(1, 1) = c - s * b;
    out.m(0, 1) = out.m(1, 0) = s * lambda;
    out.log_scale = x;
    return out;
}

ScaledMat2 propagator_db(double d, double lambda, double b) {
    const double r = std::hypot(lambda, b);
    const double x = d * r;
    const double s = d * sinhc_scaled(x);
    // d/db [sinh(dR)/R] = b (d cosh(dR) - sinh(dR)/R) / R^2 = b d^3 g(dR).
    const double ds = b * d * d * d * dsinhc_scaled(x);
    const double dc = d * b * s;  // d/db cosh(dR) = d b sinh(dR)/R
    ScaledMat2 out;
    out.m(0, 0) = dc + ds * b + s;
    out.m(1, 1) = dc - ds * b - s;
    out.m(0, 1) = out.m(1, 0) = ds * lambda;
    out.log_scale = x;
    return out;
}

void ScaledProduct::multiply(const Mat2& a, double log_scale) {
    m_ = m_ * a;
    log_scale_ += log_scale;
    const double big = m_.cwiseAbs().maxCoeff();
    if (big > 0.0 && std::isfinite(big)) {
        m_ /= big;
        log_scale_ += std::log(big);
    }
}

double ScaledProduct::log_trace() const {
    const double tr = m_.trace();
    if (!(tr > 0.0)) throw InvariantViolation("transfer product has non-positive trace");
    return std::log(tr) + log_scale_;
}

}  // namespace qcw
