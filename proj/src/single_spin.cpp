#include "qcw/single_spin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcw/errors.hpp"
#include "qcw/taylor.hpp"
#include "qcw/transfer.hpp"

namespace qcw {

namespace {

constexpr double kLog2 = 0.69314718055994530942;

// log cosh(sqrt(s)) = sum_k kSeries[k-1] s^k.
constexpr std::array<double, 10> kSeries{
    1.0 / 2.0,           -1.0 / 12.0,           1.0 / 45.0,
    -17.0 / 2520.0,      31.0 / 14175.0,        -691.0 / 935550.0,
    10922.0 / 42567525.0, -929569.0 / 10216206000.0, 3202291.0 / 97692469875.0,
    -221930581.0 / 18561569276250.0};
constexpr double kSeriesCutoff = 0.1;

void require_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
}

void require_lambda(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be nonnegative");
}

// log Tr exp{beta(lambda X + c Z)}.
double log_partition(double c, double lambda, double beta) {
    return log_cosh(beta * std::hypot(lambda, c)) + kLog2;
}

// sech^2 without overflow.
double sech2(double x) {
    const double e = std::exp(-2.0 * std::fabs(x));
    return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

// tanh(x)/x, finite at 0.
double tanhc(double x) {
    if (std::fabs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0;
    }
    return std::tanh(x) / x;
}

void require_sorted_times(std::span<const double> times, double beta) {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0 && times[k] < beta)) throw ParameterError("insertion times must lie in [0, beta)");
        if (k > 0 && times[k] < times[k - 1]) throw ParameterError("insertion times must be sorted");
    }
}

}  // namespace

double log_mgf_const(double c, double lambda, double beta) {
    require_beta(beta);
    require_lambda(lambda);
    if (c == 0.0) return 0.0;
    const double b2 = beta * beta;
    const double s = b2 * (lambda * lambda + c * c);
    if (s < kSeriesCutoff) {
        // Difference of two series avoids cancellation when both terms are tiny.
        const double s0 = b2 * (lambda * lambda);
        double acc = 0.0, ps = 1.0, p0 = 1.0;
        for (double a : kSeries) {
            ps *= s;
            p0 *= s0;
            acc += a * (ps - p0);
        }
        return acc;
    }
    return log_cosh(beta * std::hypot(lambda, c)) - log_cosh(beta * lambda);
}

std::array<double, 5> log_mgf_const_derivatives(double c, double lambda, double beta) {
    require_beta(beta);
    require_lambda(lambda);
    const Taylor4 x = Taylor4::variable(c);
    const double b2 = beta * beta;
    Taylor4 jet;
    const double s0 = b2 * (lambda * lambda + c * c);
    if (s0 < kSeriesCutoff) {
        const Taylor4 s = Taylor4::constant(b2 * lambda * lambda) + b2 * (x * x);
        Taylor4::Coeffs f{};
        for (int k = 0; k <= Taylor4::kOrder; ++k) {
            double acc = 0.0;
            for (std::size_t j = 1; j <= kSeries.size(); ++j) {
                if (static_cast<int>(j) < k) continue;
                double binom = 1.0;
                for (int i = 0; i < k; ++i) binom *= static_cast<double>(static_cast<int>(j) - i) / (i + 1);
                acc += kSeries[j - 1] * binom * std::pow(s0, static_cast<int>(j) - k);
            }
            f[static_cast<std::size_t>(k)] = acc;
        }
        jet = s.compose(f);
    } else {
        const Taylor4 y = beta * sqrt(Taylor4::constant(lambda * lambda) + x * x);
        jet = log_cosh(y);
    }
    std::array<double, 5> out{};
    for (int k = 0; k <= 4; ++k) out[static_cast<std::size_t>(k)] = jet.derivative(k);
    out[0] = log_mgf_const(c, lambda, beta);
    return out;
}

double log_mgf_piecewise(const PiecewiseField& h, double lambda) {
    require_lambda(lambda);
    ScaledProduct prod;
    for (std::size_t k = 0; k < h.size(); ++k) prod.multiply(propagator(h.length(k), lambda, h.values()[k]));
    return prod.log_trace() - log_partition(0.0, lambda, h.beta());
}

double log_mgf_increments(std::span<const double> times, std::span<const double> g, double c, double lambda,
                          double beta) {
    require_beta(beta);
    require_lambda(lambda);
    if (times.empty()) throw ParameterError("partition needs at least one point");
    if (times.size() != g.size()) throw ParameterError("one coefficient per partition point is required");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0 && times[k] < beta)) throw ParameterError("partition must lie in [0, beta)");
        if (k > 0 && !(times[k] > times[k - 1])) throw ParameterError("partition must be strictly increasing");
    }
    // sum_i g_i (sigma_i - sigma_{i-1}) = sum_i (g_i - g_{i+1}) sigma_i cyclically.
    const std::size_t n = times.size();
    ScaledProduct prod;
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        prod.multiply(propagator(times[i] - prev, lambda, c));
        prod.multiply(z_exponential(g[i] - g[(i + 1) % n]));
        prev = times[i];
    }
    prod.multiply(propagator(beta - prev, lambda, c));
    return prod.log_trace() - log_partition(c, lambda, beta);
}

double magnetization_const(double c, double lambda, double beta) {
    require_beta(beta);
    require_lambda(lambda);
    const double r = std::hypot(lambda, c);
    if (r == 0.0) return 0.0;
    return c / r * std::tanh(beta * r);
}

double variance_const(double c, double lambda, double beta) {
    require_beta(beta);
    require_lambda(lambda);
    const double r = std::hypot(lambda, c);
    if (r == 0.0) return beta;
    const double x = beta * r;
    const double wl = (lambda / r) * (lambda / r);
    const double wc = (c / r) * (c / r);
    return beta * (wl * tanhc(x) + wc * sech2(x));
}

double two_point(double t, double lambda, double beta) {
    require_beta(beta);
    require_lambda(lambda);
    if (!(t >= 0.0 && t <= beta)) throw ParameterError("two_point: t must lie in [0, beta]");
    const double a = lambda * std::fabs(beta - 2.0 * t);
    const double b = lambda * beta;
    return std::exp(a - b) * (1.0 + std::exp(-2.0 * a)) / (1.0 + std::exp(-2.0 * b));
}

double correlator(std::span<const double> times, double c, double lambda, double beta) {
    require_beta(beta);
    require_lambda(lambda);
    require_sorted_times(times, beta);
    ScaledProduct prod;
    double prev = 0.0;
    const Mat2 z = pauli_z();
    for (double t : times) {
        prod.multiply(propagator(t - prev, lambda, c));
        prod.multiply(z);
        prev = t;
    }
    prod.multiply(propagator(beta - prev, lambda, c));
    return prod.matrix().trace() * std::exp(prod.log_scale() - log_partition(c, lambda, beta));
}

double ursell3(double r, double s, double t, double c, double lambda, double beta) {
    if (!(r <= s && s <= t)) throw ParameterError("ursell3: times must be sorted");
    const double pts[3] = {r, s, t};
    const double m = correlator(std::span<const double>(pts, 1), c, lambda, beta);
    const double rs[2] = {r, s}, st[2] = {s, t}, rt[2] = {r, t};
    const double crs = correlator(rs, c, lambda, beta);
    const double cst = correlator(st, c, lambda, beta);
    const double crt = correlator(rt, c, lambda, beta);
    const double crst = correlator(pts, c, lambda, beta);
    // One-point functions are shift invariant, so <sigma_r> = <sigma_s> = <sigma_t> = m.
    return crst - m * (crs + cst + crt) + 2.0 * m * m * m;
}

double evaluate(const CorrelationRequest& req, double c, double lambda, double beta) {
    const auto& t = req.insertion_times;
    const auto need = [&](std::size_t n) {
        if (t.size() != n) throw ParameterError("wrong number of insertion times for the requested kind");
    };
    switch (req.kind) {
        case CorrelationRequest::Kind::one_point: need(1); return correlator(t, c, lambda, beta);
        case CorrelationRequest::Kind::two_point: need(2); return correlator(t, c, lambda, beta);
        case CorrelationRequest::Kind::three_point: need(3); return correlator(t, c, lambda, beta);
        case CorrelationRequest::Kind::ursell3: need(3); return ursell3(t[0], t[1], t[2], c, lambda, beta);
    }
    throw ParameterError("unknown correlation kind");
}

double rcb_bound(double r, double s, double t, double c, double lambda, double beta) {
    const double q = (s - r) * (s - r) + (t - s) * (t - s) + (beta + r - t) * (beta + r - t);
    return -magnetization_const(c, lambda, beta) * std::exp(-(4.0 * lambda + 2.0 * c) * beta) * 0.5 * lambda *
           lambda * q;
}

double s4(double lambda, double beta) {
    require_beta(beta);
    require_lambda(lambda);
    const double x = beta * lambda;
    const double b4 = beta * beta * beta * beta;
    if (x < 0.02) {
        const double x2 = x * x;
        return 3.0 * b4 * (2.0 / 3.0 - 8.0 * x2 / 15.0 + 34.0 * x2 * x2 / 105.0 - 496.0 * x2 * x2 * x2 / 2835.0);
    }
    return 3.0 * b4 * (std::tanh(x) / (x * x * x) - sech2(x) / (x * x));
}

double third_derivative(double h0, double lambda, double beta) {
    return log_mgf_const_derivatives(h0, lambda, beta)[3];
}

double fit_third_derivative_constant(double lambda, double beta, double h_max, int points) {
    if (!(h_max > 0.0) || points < 1) throw ParameterError("fit needs h_max > 0 and at least one point");
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= points; ++k) {
        const double h0 = h_max * k / points;
        best = std::min(best, -third_derivative(h0, lambda, beta) / h0);
    }
    return best;
}

}  // namespace qcw
