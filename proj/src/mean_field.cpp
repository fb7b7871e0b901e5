#include "qcw/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcw/errors.hpp"
#include "qcw/single_spin.hpp"
#include "qcw/taylor.hpp"

namespace qcw {

namespace {

constexpr int kMaxIter = 200;

void require(double lambda, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be nonnegative");
}

// Bisection for a decreasing function with phi(lo) > 0 >= phi(hi), down to adjacent doubles.
template <class F>
double bisect_decreasing(F phi, double lo, double hi) {
    for (int it = 0; it < kMaxIter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    throw NumericError("bisection did not converge");
}

}  // namespace

double f_value(double lambda, double beta) {
    require(lambda, beta);
    const double x = lambda * beta;
    if (x < 1e-8) return beta * (1.0 - x * x / 3.0);
    return std::tanh(x) / lambda;
}

double lambda_for_f(double f_target, double beta) {
    require(0.0, beta);
    if (!(f_target > 0.0 && f_target < beta)) throw DomainError("f_target must lie in (0, beta)");
    // f decreases in lambda from beta towards 0.
    double hi = 1.0;
    while (f_value(hi, beta) >= f_target) hi *= 2.0;
    return bisect_decreasing([&](double l) { return f_value(l, beta) - f_target; }, 0.0, hi);
}

MfSolution solve_m_star(double lambda, double beta, double tol) {
    require(lambda, beta);
    if (!(tol > 0.0)) throw ParameterError("tol must be positive");
    MfSolution sol;
    sol.f = f_value(lambda, beta);
    sol.s4 = s4(lambda, beta);
    if (sol.f <= 1.0) return sol;

    // Nonzero fixed points solve M(c)/c = tanh(beta R)/R = 1, R = sqrt(lambda^2 + c^2); the left side
    // decreases in c from f > 1 and is below 1 at c = 1 because |M| < 1.
    const auto phi = [&](double c) {
        const double r = std::hypot(lambda, c);
        return std::tanh(beta * r) / r - 1.0;
    };
    const double c = bisect_decreasing(phi, 0.0, 1.0);
    sol.m_star = c;
    sol.supercritical = true;
    sol.residual = std::fabs(c - magnetization_const(c, lambda, beta));
    if (sol.residual > tol) throw NumericError("fixed point residual above tolerance");
    sol.g_value = g_value(c, lambda, beta);
    sol.m_star_prediction = predict_m_star(lambda, beta);
    return sol;
}

std::optional<double> critical_lambda(double beta) {
    require(0.0, beta);
    if (beta <= 1.0) return std::nullopt;
    // tanh(lambda beta)/lambda decreases from beta > 1 to tanh(beta) < 1 on (0, 1].
    return bisect_decreasing([&](double l) { return std::tanh(l * beta) - l; }, 0.0, 1.0);
}

std::optional<double> critical_beta(double lambda) {
    require(lambda, 1.0);
    if (lambda >= 1.0) return std::nullopt;
    if (lambda < 1e-4) {
        const double l2 = lambda * lambda;
        return 1.0 + l2 / 3.0 + l2 * l2 / 5.0;
    }
    return std::atanh(lambda) / lambda;
}

double predict_m_star(double lambda, double beta) {
    const double f = f_value(lambda, beta);
    if (f < 1.0) throw DomainError("predict_m_star needs f >= 1");
    return std::sqrt(6.0 * beta * (f - 1.0) / s4(lambda, beta));
}

double g_value(double c, double lambda, double beta) {
    return log_mgf_const(c, lambda, beta) - 0.5 * beta * c * c;
}

double limit_free_energy_density(double lambda, double beta) {
    const MfSolution sol = solve_m_star(lambda, beta);
    return (log_cosh(beta * lambda) + std::log(2.0) + sol.g_value) / beta;
}

double triangle_integral(double beta) { return std::pow(beta, 5) / 12.0; }

double chi_value(double lambda, double beta, double c_max) {
    require(lambda, beta);
    if (!(c_max >= 0.0)) throw ParameterError("c_max must be nonnegative");
    // v'(c) = Lambda'''(c)/beta and Lambda''' = 6 * integral of U over r < s < t.
    return 6.0 / beta * 0.5 * lambda * lambda * std::exp(-(4.0 * lambda + 2.0 * c_max) * beta) *
           triangle_integral(beta);
}

StabilityData stability_coefficient(double lambda, double beta, int grid_points) {
    if (grid_points < 2) throw ParameterError("grid needs at least two points");
    const MfSolution sol = solve_m_star(lambda, beta);
    if (!sol.supercritical) throw DomainError("stability_coefficient needs a supercritical point");
    StabilityData out;
    out.m_star = sol.m_star;
    out.chi = chi_value(lambda, beta);
    out.d_coeff = out.chi * beta * std::pow(sol.m_star, 3) / 24.0;
    out.eta = 2.0 * lambda;
    out.verified_constant = std::numeric_limits<double>::infinity();
    out.min_slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_points; ++k) {
        const double c = static_cast<double>(k) / (grid_points - 1);
        const double gap = sol.g_value - g_value(c, lambda, beta);
        const double d2 = (c - sol.m_star) * (c - sol.m_star);
        const double slack = gap - out.d_coeff * d2;
        out.min_slack = std::min(out.min_slack, slack);
        if (d2 > 0.0) out.verified_constant = std::min(out.verified_constant, gap / d2);
        if (slack < 0.0) out.violations.push_back(c);
    }
    return out;
}

double h_conjugate(double z) {
    const double q = z / 4.0;
    return 0.5 * z * std::asinh(q) - 2.0 * std::sqrt(1.0 + q * q);
}

double u_eta(double z, double eta) {
    if (!(eta > 0.0)) throw ParameterError("eta must be positive");
    return eta * h_conjugate(z / eta);
}

}  // namespace qcw
