#include "qcw/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "qcw/errors.hpp"
#include "qcw/mean_field.hpp"
#include "qcw/single_spin.hpp"
#include "qcw/transfer.hpp"

namespace qcw {

namespace {

constexpr int kMaxLevel = 20;
constexpr double kGBox = 20.0;
constexpr int kMaxAscentSweeps = 500;

void require(double lambda, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be nonnegative");
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// DyadicField

DyadicField::DyadicField(int level, std::vector<double> values) : level_(level), values_(std::move(values)) {
    if (level < 0 || level > kMaxLevel) throw ParameterError("dyadic level out of range");
    if (values_.size() != (std::size_t{1} << level)) throw ParameterError("a level-M field has 2^M values");
    for (double v : values_)
        if (!std::isfinite(v)) throw ParameterError("field values must be finite");
}

DyadicField DyadicField::constant(int level, double c) {
    if (level < 0 || level > kMaxLevel) throw ParameterError("dyadic level out of range");
    return DyadicField(level, std::vector<double>(std::size_t{1} << level, c));
}

DyadicField DyadicField::random(int level, double lo, double hi, Rng& rng) {
    if (level < 0 || level > kMaxLevel) throw ParameterError("dyadic level out of range");
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<double> v(std::size_t{1} << level);
    for (auto& x : v) x = uni(rng);
    return DyadicField(level, std::move(v));
}

PiecewiseField DyadicField::on_circle(double beta) const { return PiecewiseField::uniform(values_, beta); }

DyadicField DyadicField::abs() const {
    auto v = values_;
    for (auto& x : v) x = std::fabs(x);
    return DyadicField(level_, std::move(v));
}

DyadicField DyadicField::reflected_left() const {
    if (level_ == 0) return *this;
    const std::size_t half = values_.size() / 2;
    std::vector<double> v(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(half));
    v.insert(v.end(), v.rbegin(), v.rend());
    return DyadicField(level_, std::move(v));
}

DyadicField DyadicField::reflected_right() const {
    if (level_ == 0) return *this;
    const std::size_t half = values_.size() / 2;
    std::vector<double> v(values_.rbegin(), values_.rbegin() + static_cast<std::ptrdiff_t>(half));
    v.insert(v.end(), values_.begin() + static_cast<std::ptrdiff_t>(half), values_.end());
    return DyadicField(level_, std::move(v));
}

double DyadicField::squared_norm(double beta) const {
    double s = 0.0;
    for (double x : values_) s += x * x;
    return s * beta / static_cast<double>(values_.size());
}

// ---------------------------------------------------------------------------------------------
// Lambda and its gradient

double log_mgf_dyadic(const DyadicField& h, double lambda, double beta) {
    require(lambda, beta);
    return log_mgf_piecewise(h.on_circle(beta), lambda);
}

std::vector<double> log_mgf_gradient(const DyadicField& h, double lambda, double beta) {
    require(lambda, beta);
    const std::size_t k_max = h.size();
    const double w = beta / static_cast<double>(k_max);
    std::vector<ScaledMat2> g(k_max);
    for (std::size_t k = 0; k < k_max; ++k) g[k] = propagator(w, lambda, h.values()[k]);

    // prefix[k] = G_0 ... G_{k-1}, suffix[k] = G_{k+1} ... G_{K-1}, both rescaled; the scales cancel
    // in the ratio Tr(L G'_k R) / Tr(L G_k R) because G'_k shares the scale of G_k.
    std::vector<Mat2> prefix(k_max), suffix(k_max);
    ScaledProduct p;
    for (std::size_t k = 0; k < k_max; ++k) {
        prefix[k] = p.matrix();
        p.multiply(g[k].m);
    }
    Mat2 s = Mat2::Identity();
    for (std::size_t k = k_max; k-- > 0;) {
        suffix[k] = s;
        s = g[k].m * s;
        s /= s.cwiseAbs().maxCoeff();
    }
    std::vector<double> grad(k_max);
    for (std::size_t k = 0; k < k_max; ++k) {
        const Mat2 d = propagator_db(w, lambda, h.values()[k]).m;
        grad[k] = (prefix[k] * d * suffix[k]).trace() / (prefix[k] * g[k].m * suffix[k]).trace();
    }
    return grad;
}

// ---------------------------------------------------------------------------------------------
// Inequalities

double check_reflection(const DyadicField& h, double lambda, double beta) {
    return 0.5 * (log_mgf_dyadic(h.reflected_left(), lambda, beta) + log_mgf_dyadic(h.reflected_right(), lambda, beta)) -
           log_mgf_dyadic(h, lambda, beta);
}

double check_integral_inequality(const DyadicField& h, double lambda, double beta) {
    double avg = 0.0;
    for (double v : h.values()) avg += log_mgf_const(v, lambda, beta);
    return avg / static_cast<double>(h.size()) - log_mgf_dyadic(h, lambda, beta);
}

double check_pointwise_bound(const DyadicField& h, double lambda, double beta) {
    double avg = 0.0;
    for (double v : h.values()) avg += g_value(v, lambda, beta);
    avg /= static_cast<double>(h.size());
    return avg - (log_mgf_dyadic(h, lambda, beta) - 0.5 * h.squared_norm(beta));
}

double check_absolute_value(const DyadicField& h, double lambda, double beta) {
    return log_mgf_dyadic(h.abs(), lambda, beta) - log_mgf_dyadic(h, lambda, beta);
}

// ---------------------------------------------------------------------------------------------
// Dual optimisation

DualOptResult optimize_dual_field(int level, double lambda, double beta, const DualBudget& budget, Rng& rng) {
    require(lambda, beta);
    if (budget.starts < 1 || budget.max_iterations < 1) throw ParameterError("budget must allow at least one step");
    const MfSolution sol = solve_m_star(lambda, beta);
    DualOptResult out;
    out.constant_optimum = sol.g_value;
    out.m_star = sol.m_star;
    out.best_value = -std::numeric_limits<double>::infinity();
    out.worst_excess = -std::numeric_limits<double>::infinity();

    const std::size_t k_max = std::size_t{1} << level;
    const double w = beta / static_cast<double>(k_max);
    const auto objective = [&](const DyadicField& f) { return log_mgf_dyadic(f, lambda, beta) - 0.5 * f.squared_norm(beta); };

    for (int start = 0; start < budget.starts; ++start) {
        DyadicField h = DyadicField::random(level, -budget.start_radius, budget.start_radius, rng);
        double value = objective(h);
        bool converged = false;
        for (int it = 0; it < budget.max_iterations; ++it) {
            const auto grad = log_mgf_gradient(h, lambda, beta);
            std::vector<double> dir(k_max);
            double size = 0.0;
            for (std::size_t k = 0; k < k_max; ++k) {
                dir[k] = grad[k] / w - h.values()[k];
                size = std::max(size, std::fabs(dir[k]));
            }
            if (size < budget.tolerance) {
                converged = true;
                break;
            }
            bool moved = false;
            for (double step = 1.0; step > 1e-10; step *= 0.5) {
                auto v = h.values();
                for (std::size_t k = 0; k < k_max; ++k) v[k] += step * dir[k];
                DyadicField trial(level, std::move(v));
                const double tv = objective(trial);
                // Near the optimum the change in the objective is below its rounding error.
                if (tv >= value - 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(value))) {
                    h = std::move(trial);
                    value = tv;
                    moved = true;
                    break;
                }
            }
            // No ascent step left at double precision: the iterate is stationary to rounding.
            if (!moved) {
                converged = true;
                break;
            }
        }
        ++out.starts;
        if (!converged) ++out.unconverged;
        out.worst_excess = std::max(out.worst_excess, value - out.constant_optimum);
        if (value > out.best_value) {
            out.best_value = value;
            out.best_field = h.values();
        }
    }

    double up = 0.0, down = 0.0;
    for (double v : out.best_field) {
        up = std::max(up, std::fabs(v - out.m_star));
        down = std::max(down, std::fabs(v + out.m_star));
    }
    out.sup_distance = std::min(up, down);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Rate function bounds

double LinearProfile::operator()(double t) const {
    const std::size_t n = knots.size();
    if (n == 0) throw ParameterError("profile needs at least one knot");
    if (n == 1) return values[0];
    t = std::fmod(t, beta);
    if (t < 0.0) t += beta;
    // Knot interval containing t, wrapping past the last knot.
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    const std::size_t hi = (it == knots.end()) ? 0 : static_cast<std::size_t>(it - knots.begin());
    const std::size_t lo = (hi + n - 1) % n;
    double t0 = knots[lo], t1 = knots[hi];
    if (t1 <= t0) t1 += beta;
    if (t < t0) t += beta;
    return values[lo] + (values[hi] - values[lo]) * (t - t0) / (t1 - t0);
}

PartitionBound rate_lower_bound(const LinearProfile& m, const std::vector<double>& partition, double lambda,
                                double beta, double h, double eta) {
    require(lambda, beta);
    if (m.beta != beta) throw ParameterError("profile and measure must share beta");
    if (m.knots.size() != m.values.size() || m.knots.empty()) throw ParameterError("profile needs matching knots and values");
    if (partition.empty()) throw ParameterError("partition needs at least one point");
    for (std::size_t k = 0; k < partition.size(); ++k) {
        if (!(partition[k] >= 0.0 && partition[k] < beta)) throw ParameterError("partition must lie in [0, beta)");
        if (k > 0 && !(partition[k] > partition[k - 1])) throw ParameterError("partition must be strictly increasing");
    }
    for (double knot : m.knots)
        if (!std::binary_search(partition.begin(), partition.end(), knot))
            throw ParameterError("partition must contain every knot of the profile");
    if (eta < 0.0) eta = 2.0 * lambda;
    if (!(eta > 0.0)) throw ParameterError("eta must be positive");

    const std::size_t n = partition.size();
    PartitionBound out;
    out.partition = partition;
    out.increments.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t prev = (i + n - 1) % n;
        out.increments[i] = m(partition[i]) - m(partition[prev]);
        double dt = partition[i] - partition[prev];
        if (dt <= 0.0) dt += beta;
        out.bound_value += dt * u_eta(out.increments[i] / dt, eta);
    }

    // Coordinate ascent of the concave function g -> g.z - Lambda^R(g). Any g gives a lower bound
    // on the supremum, so the reported value is certified whatever the stopping point.
    std::vector<double> g(n, 0.0);
    const auto phi = [&](const std::vector<double>& x) {
        double lin = 0.0;
        for (std::size_t i = 0; i < n; ++i) lin += x[i] * out.increments[i];
        return lin - log_mgf_increments(partition, x, h, lambda, beta);
    };
    double value = phi(g);
    for (out.sweeps = 0; out.sweeps < kMaxAscentSweeps;) {
        ++out.sweeps;
        const double before = value;
        for (std::size_t i = 0; i < n; ++i) {
            auto x = g;
            const auto neg = [&](double gi) {
                x[i] = gi;
                return -phi(x);
            };
            const auto [arg, fmin] = boost::math::tools::brent_find_minima(neg, -kGBox, kGBox, 52);
            if (-fmin > value) {
                g[i] = arg;
                value = -fmin;
            }
        }
        if (value - before <= 1e-14 * (1.0 + std::fabs(value))) break;
    }
    out.rate_value = value;
    out.maximiser = g;
    return out;
}

// ---------------------------------------------------------------------------------------------
// Dual stability

DualStabilityReport dual_stability_check(const DyadicField& h, double lambda, double beta) {
    const StabilityData stab = stability_coefficient(lambda, beta);
    const double m = stab.m_star;
    DualStabilityReport out;
    out.m_star = m;
    out.d_coeff = stab.d_coeff;

    const double w = beta / static_cast<double>(h.size());
    double dev_abs = 0.0, dev_up = 0.0, dev_down = 0.0;
    bool nonneg = true, nonpos = true;
    for (double v : h.values()) {
        dev_abs += w * (std::fabs(v) - m) * (std::fabs(v) - m);
        dev_up += w * (v - m) * (v - m);
        dev_down += w * (v + m) * (v + m);
        nonneg = nonneg && v >= 0.0;
        nonpos = nonpos && v <= 0.0;
    }
    out.sign_definite = nonneg || nonpos;
    out.d_value = stab.d_coeff * dev_abs / beta;
    out.dbound_rhs = stab.d_coeff / beta * std::min(dev_up, dev_down);

    const double optimum = g_value(m, lambda, beta);
    const double at_h = log_mgf_dyadic(h.abs(), lambda, beta) - 0.5 * h.squared_norm(beta);
    out.residual = optimum - at_h - out.d_value;
    return out;
}

}  // namespace qcw
