#pragma once

#include <optional>
#include <vector>

namespace qcw {

// Quadratic interaction P(x) = x^2/2 at zero longitudinal field. The variational
// functional is g(c) = Lambda(c * 1) - beta c^2 / 2 over constant fields c.

/// f = tanh(lambda beta) / lambda, equal to beta at lambda = 0.
double f_value(double lambda, double beta);

struct MfSolution {
    double m_star = 0.0;
    double f = 0.0;
    double s4 = 0.0;
    double g_value = 0.0;
    bool supercritical = false;
    /// sqrt(6 beta (f - 1) / s4) when supercritical, 0 otherwise.
    double m_star_prediction = 0.0;
    double residual = 0.0;  ///< |m* - M(m*)|
};

/// lambda > 0 with f(lambda, beta) = f_target. DomainError unless 0 < f_target < beta.
double lambda_for_f(double f_target, double beta);

/// Largest non-negative fixed point of c = M(c). Throws NumericError if the residual exceeds tol.
MfSolution solve_m_star(double lambda, double beta, double tol = 1e-12);

/// lambda_c(beta) solving tanh(lambda beta) = lambda; empty for beta <= 1.
std::optional<double> critical_lambda(double beta);
/// beta_c(lambda) = atanh(lambda) / lambda; empty for lambda >= 1.
std::optional<double> critical_beta(double lambda);

/// sqrt(6 beta (f - 1) / s4); DomainError when f < 1.
double predict_m_star(double lambda, double beta);

/// g(c) = Lambda(c * 1) - beta c^2 / 2.
double g_value(double c, double lambda, double beta);

/// lim (beta N)^{-1} log Tr exp(-beta H_N) = (1/beta) [log(2 cosh(beta lambda)) + g(m*)].
double limit_free_energy_density(double lambda, double beta);

/// int_{0<r<s<t<beta} [(s-r)^2 + (t-s)^2 + (beta+r-t)^2] dr ds dt = beta^5 / 12.
double triangle_integral(double beta);

/// chi such that v'(c) <= -chi M(c) for 0 <= c <= c_max:
/// (lambda^2 beta^4 / 4) exp(-(4 lambda + 2 c_max) beta).
double chi_value(double lambda, double beta, double c_max = 1.0);

struct StabilityData {
    double chi = 0.0;
    double d_coeff = 0.0;  ///< chi beta (c*)^3 / 24
    double eta = 0.0;      ///< 2 lambda
    double m_star = 0.0;
    /// min over the grid of (g(c*) - g(c)) / (c - c*)^2; the best constant the grid supports.
    double verified_constant = 0.0;
    double min_slack = 0.0;  ///< min over the grid of g(c*) - g(c) - d_coeff (c - c*)^2
    std::vector<double> violations;  ///< grid points where the quadratic bound fails
    bool holds() const { return violations.empty(); }
};

/// Checks g(c*) - g(c) >= d_coeff (c - c*)^2 on `grid_points` equally spaced c in [0, 1].
/// DomainError when (lambda, beta) is not supercritical.
StabilityData stability_coefficient(double lambda, double beta, int grid_points = 101);

/// Convex conjugate of H(g) = e^{2g} + e^{-2g}: (z/2) asinh(z/4) - 2 sqrt(1 + z^2/16).
double h_conjugate(double z);

/// U_eta(z) = eta H*(z / eta).
double u_eta(double z, double eta);

}  // namespace qcw
