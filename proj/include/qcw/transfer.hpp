#pragma once

#include <cmath>

#include <Eigen/Core>

namespace qcw {

using Mat2 = Eigen::Matrix2d;

/// A 2x2 matrix represented as exp(log_scale) * m, with m of order one.
struct ScaledMat2 {
    Mat2 m = Mat2::Identity();
    double log_scale = 0.0;
};

/// exp{d (lambda X + b Z)} with X = [[0,1],[1,0]], Z = diag(1,-1).
/// Closed form cosh(dR) I + sinh(dR)/R (lambda X + b Z), R = sqrt(lambda^2 + b^2),
/// returned with the factor e^{dR} pulled into log_scale.
ScaledMat2 propagator(double d, double lambda, double b);

/// d/db of propagator(d, lambda, b), sharing the same log_scale.
ScaledMat2 propagator_db(double d, double lambda, double b);

/// diag(e^a, e^-a).
inline Mat2 z_exponential(double a) {
    Mat2 m = Mat2::Zero();
    m(0, 0) = std::exp(a);
    m(1, 1) = std::exp(-a);
    return m;
}

inline Mat2 pauli_z() {
    Mat2 m = Mat2::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

/// Running ordered product with the largest entry factored out after every step.
class ScaledProduct {
public:
    void multiply(const Mat2& a, double log_scale = 0.0);
    void multiply(const ScaledMat2& a) { multiply(a.m, a.log_scale); }

    const Mat2& matrix() const { return m_; }
    double log_scale() const { return log_scale_; }
    ScaledMat2 value() const { return {m_, log_scale_}; }
    /// log Tr; throws InvariantViolation if the trace is not positive.
    double log_trace() const;

private:
    Mat2 m_ = Mat2::Identity();
    double log_scale_ = 0.0;
};

/// Index of basis state for a spin value: +1 -> 0, -1 -> 1.
inline int spin_index(int s) { return s > 0 ? 0 : 1; }
inline int index_spin(int k) { return k == 0 ? 1 : -1; }

}  // namespace qcw
