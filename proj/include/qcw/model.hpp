#pragma once

#include <span>
#include <vector>

namespace qcw {

/// Real polynomial with coefficients stored constant term first.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    /// The default interaction x^2/2.
    static Polynomial quadratic() { return Polynomial({0.0, 0.0, 0.5}); }

    double operator()(double x) const;
    int degree() const;
    std::span<const double> coeffs() const { return coeffs_; }

    /// True when the polynomial is exactly a*x^2 + b*x + c (up to trailing zeros).
    bool is_quadratic() const { return degree() <= 2; }
    /// Leading coefficient positive and degree >= 2.
    bool has_superlinear_growth() const;

private:
    std::vector<double> coeffs_;
};

/// Parameters of one quantum Curie-Weiss instance:
/// -H_N = N P(m_N) + sum_i (lambda sigma^x_i + h sigma^z_i) at inverse temperature beta.
struct ModelParams {
    double beta = 1.0;
    double lambda = 0.0;
    double h = 0.0;
    Polynomial p = Polynomial::quadratic();

    /// Throws ParameterError unless beta > 0, lambda >= 0 and P grows super-linearly.
    void validate() const;
};

}  // namespace qcw
