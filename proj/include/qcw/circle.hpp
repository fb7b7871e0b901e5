#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qcw {

/// Generator used by every sampler. Callers own it; no global state.
using Rng = std::mt19937_64;

/// Sorted arrival times of a point process on the circle S_beta = [0, beta).
class PointSet {
public:
    PointSet() = default;
    /// Throws ParameterError unless times are strictly increasing inside [0, beta).
    PointSet(std::vector<double> times, double beta);

    std::span<const double> times() const { return times_; }
    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double beta() const { return beta_; }
    /// Number of points in the half-open window [a, b), 0 <= a <= b <= beta.
    std::size_t count_in(double a, double b) const;

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::vector<double> times_;
    double beta_ = 1.0;
};

/// Connected component of S_beta minus a point set. Wraps modulo beta.
struct Arc {
    double start = 0.0;
    double length = 0.0;
};

/// Piecewise-constant +-1 trajectory on S_beta, stored as sign changes.
/// sigma(t) = initial_sign * (-1)^{#jumps <= t}; right-continuous and beta-periodic.
class SpinPath {
public:
    SpinPath() = default;
    /// Throws ParameterError for a bad sign, unsorted jumps, jumps outside (0, beta)
    /// or an odd number of jumps.
    SpinPath(int initial_sign, std::vector<double> jumps, double beta);

    static SpinPath constant(int sign, double beta) { return SpinPath(sign, {}, beta); }

    int initial_sign() const { return initial_sign_; }
    std::span<const double> jumps() const { return jumps_; }
    double beta() const { return beta_; }

    int value_at(double t) const;
    SpinPath flipped() const;

    friend bool operator==(const SpinPath&, const SpinPath&) = default;

private:
    int initial_sign_ = 1;
    std::vector<double> jumps_;
    double beta_ = 1.0;
};

/// Piecewise-constant real function on S_beta: values[k] holds on [breakpoints[k], breakpoints[k+1]).
/// breakpoints[0] must be 0 so the pieces cover the whole circle.
class PiecewiseField {
public:
    PiecewiseField() = default;
    PiecewiseField(std::vector<double> breakpoints, std::vector<double> values, double beta);

    static PiecewiseField constant(double value, double beta) { return PiecewiseField({0.0}, {value}, beta); }
    /// Equal-length pieces; values.size() pieces of length beta / values.size().
    static PiecewiseField uniform(std::vector<double> values, double beta);

    std::span<const double> breakpoints() const { return breakpoints_; }
    std::span<const double> values() const { return values_; }
    double beta() const { return beta_; }
    std::size_t size() const { return values_.size(); }

    double length(std::size_t k) const;
    double value_at(double t) const;
    /// Same function rotated: result(t) = this(t + shift).
    PiecewiseField shifted(double shift) const;
    /// Same function with every piece split in two.
    PiecewiseField refined() const;
    double integral() const;
    double squared_norm() const;

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    double beta_ = 1.0;
};

/// Homogeneous Poisson process of the given intensity on S_beta, returned sorted.
PointSet sample_poisson(double intensity, double beta, Rng& rng);

/// Uniform points on S_beta conditioned on their number.
PointSet sample_uniform_points(std::size_t count, double beta, Rng& rng);

/// Components of S_beta minus xi. The unpunctured circle is one arc of length beta.
std::vector<Arc> components(const PointSet& xi);

/// True iff every jump of sigma is a point of xi.
bool compatible(const SpinPath& sigma, const PointSet& xi);

/// Exact integral of sigma over [0, beta).
double time_integral(const SpinPath& sigma);

/// Pointwise mean of the paths, as a piecewise-constant field.
PiecewiseField mean_path(std::span<const SpinPath> paths);

}  // namespace qcw
