#pragma once

#include <array>
#include <cmath>
#include <span>

namespace qcw {

/// Truncated Taylor expansion a0 + a1 e + ... + a4 e^4 of a function of one variable,
/// used for exact derivatives of closed-form expressions up to fourth order.
class Taylor4 {
public:
    static constexpr int kOrder = 4;
    using Coeffs = std::array<double, kOrder + 1>;

    Taylor4() { c_.fill(0.0); }
    explicit Taylor4(const Coeffs& c) : c_(c) {}

    static Taylor4 constant(double v) {
        Taylor4 t;
        t.c_[0] = v;
        return t;
    }
    /// The independent variable expanded at x0.
    static Taylor4 variable(double x0) {
        Taylor4 t;
        t.c_[0] = x0;
        t.c_[1] = 1.0;
        return t;
    }

    double value() const { return c_[0]; }
    double coeff(int k) const { return c_[static_cast<std::size_t>(k)]; }
    /// k-th derivative at the expansion point.
    double derivative(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c_[static_cast<std::size_t>(k)] * f;
    }

    friend Taylor4 operator+(Taylor4 a, const Taylor4& b) {
        for (int k = 0; k <= kOrder; ++k) a.c_[k] += b.c_[k];
        return a;
    }
    friend Taylor4 operator-(Taylor4 a, const Taylor4& b) {
        for (int k = 0; k <= kOrder; ++k) a.c_[k] -= b.c_[k];
        return a;
    }
    friend Taylor4 operator*(double s, Taylor4 a) {
        for (auto& x : a.c_) x *= s;
        return a;
    }
    friend Taylor4 operator*(const Taylor4& a, const Taylor4& b) {
        Taylor4 r;
        for (int i = 0; i <= kOrder; ++i)
            for (int j = 0; i + j <= kOrder; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
        return r;
    }

    /// f(this) given f's Taylor coefficients f^(k)(a0)/k! at a0 = value().
    Taylor4 compose(const Coeffs& f) const {
        Taylor4 delta = *this;
        delta.c_[0] = 0.0;
        Taylor4 r = constant(f[kOrder]);
        for (int k = kOrder - 1; k >= 0; --k) r = r * delta + constant(f[static_cast<std::size_t>(k)]);
        return r;
    }

    /// Polynomial p(this) with coefficients constant term first.
    Taylor4 polynomial(std::span<const double> p) const {
        Taylor4 r;
        for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * (*this) + constant(*it);
        return r;
    }

private:
    Coeffs c_;
};

inline Taylor4 sqrt(const Taylor4& x) {
    const double x0 = x.value();
    const double s = std::sqrt(x0);
    // (x0 + e)^{1/2} = s * sum_k binom(1/2, k) (e/x0)^k
    Taylor4::Coeffs f{};
    double binom = 1.0, pw = 1.0;
    for (int k = 0; k <= Taylor4::kOrder; ++k) {
        f[static_cast<std::size_t>(k)] = s * binom * pw;
        binom *= (0.5 - k) / (k + 1);
        pw /= x0;
    }
    return x.compose(f);
}

/// log cosh y, evaluated without overflow for large |y|.
inline double log_cosh(double y) {
    const double a = std::fabs(y);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

inline Taylor4 log_cosh(const Taylor4& y) {
    const double t = std::tanh(y.value());
    const double s2 = 1.0 - t * t;
    Taylor4::Coeffs f{log_cosh(y.value()), t, s2 / 2.0, -2.0 * t * s2 / 6.0,
                      -2.0 * s2 * (1.0 - 3.0 * t * t) / 24.0};
    return y.compose(f);
}

}  // namespace qcw
