#pragma once

#include <cstdint>
#include <vector>

#include "qcw/circle.hpp"

namespace qcw {

// Checks of the dual variational problem sup_h { Lambda(h) - |h|^2 / 2 } for P(x) = x^2/2,
// with |h|^2 = int_0^beta h(t)^2 dt. Every Lambda is an exact transfer-matrix evaluation.

/// Field constant on the 2^level dyadic intervals [k beta / 2^level, (k+1) beta / 2^level).
class DyadicField {
public:
    /// Throws ParameterError unless values.size() == 2^level and level is in [0, 20].
    DyadicField(int level, std::vector<double> values);

    static DyadicField constant(int level, double c);
    /// Independent uniform values in [lo, hi].
    static DyadicField random(int level, double lo, double hi, Rng& rng);

    int level() const { return level_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    PiecewiseField on_circle(double beta) const;
    DyadicField abs() const;
    /// h_l: the first half followed by its mirror image.
    DyadicField reflected_left() const;
    /// h_r: the mirror image of the second half followed by the second half.
    DyadicField reflected_right() const;
    double squared_norm(double beta) const;

private:
    int level_;
    std::vector<double> values_;
};

double log_mgf_dyadic(const DyadicField& h, double lambda, double beta);

/// d Lambda / d h_k = E[ int over interval k of sigma ], from prefix and suffix transfer products.
std::vector<double> log_mgf_gradient(const DyadicField& h, double lambda, double beta);

/// (1/2)[Lambda(h_l) + Lambda(h_r)] - Lambda(h); nonnegative by reflection positivity.
double check_reflection(const DyadicField& h, double lambda, double beta);

/// (1/beta) int Lambda(h(t) 1) dt - Lambda(h).
double check_integral_inequality(const DyadicField& h, double lambda, double beta);

/// (1/beta) int g(h(t)) dt - [Lambda(h) - |h|^2/2], g(c) = Lambda(c 1) - beta c^2 / 2.
double check_pointwise_bound(const DyadicField& h, double lambda, double beta);

/// Lambda(|h|) - Lambda(h).
double check_absolute_value(const DyadicField& h, double lambda, double beta);

struct DualBudget {
    int starts = 20;
    int max_iterations = 2000;
    double start_radius = 1.5;  ///< starting values uniform in [-r, r]
    double tolerance = 1e-11;   ///< on max_k |<sigma>_k - h_k|
};

struct DualOptResult {
    std::vector<double> best_field;
    double best_value = 0.0;
    double constant_optimum = 0.0;  ///< g(m*)
    double m_star = 0.0;
    double sup_distance = 0.0;     ///< sup-norm distance of the best field to the nearer of +-m*
    double worst_excess = 0.0;     ///< max over starts of value - constant optimum
    int starts = 0;
    int unconverged = 0;           ///< starts that ran out of iterations
    bool conclusive() const { return unconverged == 0; }
    bool bound_holds() const { return worst_excess <= 1e-6; }
};

/// Multi-start ascent of Lambda(h) - |h|^2/2 over DyadicFields of the given level. Each step moves
/// h toward the interval averages of <sigma> (the gradient in the metric of the |.|^2 term),
/// with backtracking so that the objective never decreases.
DualOptResult optimize_dual_field(int level, double lambda, double beta, const DualBudget& budget, Rng& rng);

/// Continuous periodic profile on S_beta, linear between knots and wrapping from the last knot to the first.
struct LinearProfile {
    std::vector<double> knots;   ///< strictly increasing in [0, beta)
    std::vector<double> values;
    double beta = 1.0;

    double operator()(double t) const;
};

struct PartitionBound {
    std::vector<double> partition;
    std::vector<double> increments;  ///< m(t_i) - m(t_{i-1}), cyclic
    double bound_value = 0.0;        ///< sum_i |t_i - t_{i-1}| U_eta(z_i / |t_i - t_{i-1}|)
    double rate_value = 0.0;         ///< sup_g { g.z - Lambda^R(g) } found by coordinate ascent
    std::vector<double> maximiser;
    int sweeps = 0;
    /// rate_value is attained by maximiser, so it is a certified lower bound on I^R.
    bool consistent() const { return rate_value >= bound_value - 1e-8; }
};

/// Lower bounds on the rate function of the profile m on a partition refining its knots. The
/// background measure has transverse field lambda and longitudinal field h; eta is the
/// dominating Poisson intensity (2 lambda when passed as a negative number).
PartitionBound rate_lower_bound(const LinearProfile& m, const std::vector<double>& partition, double lambda,
                                double beta, double h = 0.0, double eta = -1.0);

struct DualStabilityReport {
    double residual = 0.0;     ///< {Lambda(m* 1) - beta m*^2/2} - {Lambda(|h|) - |h|^2/2} - D(h)
    double d_value = 0.0;      ///< D(h) = (1/beta) int d(|h(t)| - m*) dt
    double dbound_rhs = 0.0;   ///< c_1 min(|h - m*|^2, |h + m*|^2), c_1 = d_coeff / beta
    double m_star = 0.0;
    double d_coeff = 0.0;
    bool sign_definite = false;
    bool stability_holds() const { return residual >= -1e-10; }
    bool dbound_holds() const { return d_value >= dbound_rhs - 1e-14; }
};

/// DomainError when (lambda, beta) is not supercritical.
DualStabilityReport dual_stability_check(const DyadicField& h, double lambda, double beta);

}  // namespace qcw
