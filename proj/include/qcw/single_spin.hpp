#pragma once

#include <array>
#include <span>
#include <vector>

#include "qcw/circle.hpp"

namespace qcw {

// Exact results for one spin in a transverse field lambda on the circle S_beta.
// Lambda(g) = log < exp( int g(t) sigma(t) dt ) > under the lambda-only path measure,
// normalised so that Lambda(0) = 0.

/// Lambda(c * 1) = log cosh(beta sqrt(lambda^2 + c^2)) - log cosh(beta lambda).
double log_mgf_const(double c, double lambda, double beta);

/// {Lambda, Lambda', Lambda'', Lambda''', Lambda''''} of c -> Lambda(c * 1), evaluated at c.
std::array<double, 5> log_mgf_const_derivatives(double c, double lambda, double beta);

/// Lambda(h) for a piecewise-constant field, from the ordered product of 2x2 exponentials.
double log_mgf_piecewise(const PiecewiseField& h, double lambda);

/// log < exp( sum_i g_i (sigma(t_i) - sigma(t_{i-1})) ) > under the constant field c.
/// The partition t_1 < ... < t_n in [0, beta) is cyclic (t_0 = t_n), one g_i per point.
double log_mgf_increments(std::span<const double> times, std::span<const double> g, double c, double lambda,
                          double beta);

/// M(c) = Lambda'(c)/beta = (c/R) tanh(beta R), R = sqrt(lambda^2 + c^2).
double magnetization_const(double c, double lambda, double beta);

/// v(c) = Lambda''(c)/beta.
double variance_const(double c, double lambda, double beta);

/// <sigma_0 sigma_t> at zero longitudinal field: cosh(lambda(beta - 2t)) / cosh(lambda beta).
double two_point(double t, double lambda, double beta);

/// <prod_i sigma(t_i)> under the constant field c, from Z insertions into the transfer product.
/// Times must be sorted in [0, beta).
double correlator(std::span<const double> times, double c, double lambda, double beta);

struct CorrelationRequest {
    enum class Kind { one_point, two_point, three_point, ursell3 };
    std::vector<double> insertion_times;
    Kind kind = Kind::one_point;
};

double evaluate(const CorrelationRequest& req, double c, double lambda, double beta);

/// Third Ursell function U(r, s, t) for 0 <= r <= s <= t < beta.
double ursell3(double r, double s, double t, double c, double lambda, double beta);

/// Random-current upper bound on ursell3:
/// -M(c) e^{-(4 lambda + 2c) beta} (lambda^2/2) [(s-r)^2 + (t-s)^2 + (beta+r-t)^2].
double rcb_bound(double r, double s, double t, double c, double lambda, double beta);

/// s4 = -Lambda''''(0), the fourth semi-invariant of the time-integrated spin.
double s4(double lambda, double beta);

/// Lambda'''(h0).
double third_derivative(double h0, double lambda, double beta);

/// Largest C with Lambda'''(h0) <= -C h0 on a grid of `points` values of h0 in (0, h_max].
double fit_third_derivative_constant(double lambda, double beta, double h_max = 0.1, int points = 200);

}  // namespace qcw
