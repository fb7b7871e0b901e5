#include "qcw/circle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcw/errors.hpp"

namespace qcw {

namespace {

void require_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
}

bool strictly_increasing(std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

PointSet::PointSet(std::vector<double> times, double beta) : times_(std::move(times)), beta_(beta) {
    require_beta(beta);
    if (!strictly_increasing(times_)) throw ParameterError("PointSet times must be strictly increasing");
    if (!times_.empty() && (times_.front() < 0.0 || times_.back() >= beta))
        throw ParameterError("PointSet times must lie in [0, beta)");
}

std::size_t PointSet::count_in(double a, double b) const {
    auto lo = std::lower_bound(times_.begin(), times_.end(), a);
    auto hi = std::lower_bound(times_.begin(), times_.end(), b);
    return static_cast<std::size_t>(hi - lo);
}

SpinPath::SpinPath(int initial_sign, std::vector<double> jumps, double beta)
    : initial_sign_(initial_sign), jumps_(std::move(jumps)), beta_(beta) {
    require_beta(beta);
    if (initial_sign != 1 && initial_sign != -1) throw ParameterError("initial_sign must be +1 or -1");
    if (!strictly_increasing(jumps_)) throw ParameterError("SpinPath jumps must be strictly increasing");
    if (!jumps_.empty() && (jumps_.front() <= 0.0 || jumps_.back() >= beta))
        throw ParameterError("SpinPath jumps must lie in (0, beta)");
    if (jumps_.size() % 2 != 0) throw ParameterError("SpinPath needs an even number of jumps on a circle");
}

int SpinPath::value_at(double t) const {
    t = std::fmod(t, beta_);
    if (t < 0.0) t += beta_;
    auto n = std::upper_bound(jumps_.begin(), jumps_.end(), t) - jumps_.begin();
    return (n % 2 == 0) ? initial_sign_ : -initial_sign_;
}

SpinPath SpinPath::flipped() const { return SpinPath(-initial_sign_, jumps_, beta_); }

PiecewiseField::PiecewiseField(std::vector<double> breakpoints, std::vector<double> values, double beta)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), beta_(beta) {
    require_beta(beta);
    if (breakpoints_.empty() || breakpoints_.size() != values_.size())
        throw ParameterError("PiecewiseField needs one value per breakpoint");
    if (breakpoints_.front() != 0.0) throw ParameterError("PiecewiseField must start at t = 0");
    if (!strictly_increasing(breakpoints_) || breakpoints_.back() >= beta)
        throw ParameterError("PiecewiseField breakpoints must be strictly increasing in [0, beta)");
}

PiecewiseField PiecewiseField::uniform(std::vector<double> values, double beta) {
    if (values.empty()) throw ParameterError("uniform field needs at least one value");
    std::vector<double> bps(values.size());
    const double n = static_cast<double>(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) bps[k] = beta * static_cast<double>(k) / n;
    return PiecewiseField(std::move(bps), std::move(values), beta);
}

double PiecewiseField::length(std::size_t k) const {
    const double end = (k + 1 < breakpoints_.size()) ? breakpoints_[k + 1] : beta_;
    return end - breakpoints_[k];
}

double PiecewiseField::value_at(double t) const {
    t = std::fmod(t, beta_);
    if (t < 0.0) t += beta_;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

PiecewiseField PiecewiseField::shifted(double shift) const {
    shift = std::fmod(shift, beta_);
    if (shift < 0.0) shift += beta_;
    if (shift == 0.0) return *this;
    // New breakpoints are old breakpoints minus shift (mod beta), plus 0.
    std::vector<double> bps{0.0};
    for (double b : breakpoints_) {
        double nb = b - shift;
        if (nb < 0.0) nb += beta_;
        if (nb > 0.0 && nb < beta_) bps.push_back(nb);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    std::vector<double> vals;
    vals.reserve(bps.size());
    for (std::size_t k = 0; k < bps.size(); ++k) {
        const double end = (k + 1 < bps.size()) ? bps[k + 1] : beta_;
        vals.push_back(value_at(0.5 * (bps[k] + end) + shift));
    }
    return PiecewiseField(std::move(bps), std::move(vals), beta_);
}

PiecewiseField PiecewiseField::refined() const {
    std::vector<double> bps, vals;
    for (std::size_t k = 0; k < size(); ++k) {
        bps.push_back(breakpoints_[k]);
        bps.push_back(breakpoints_[k] + 0.5 * length(k));
        vals.push_back(values_[k]);
        vals.push_back(values_[k]);
    }
    return PiecewiseField(std::move(bps), std::move(vals), beta_);
}

double PiecewiseField::integral() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < size(); ++k) acc += values_[k] * length(k);
    return acc;
}

double PiecewiseField::squared_norm() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < size(); ++k) acc += values_[k] * values_[k] * length(k);
    return acc;
}

PointSet sample_uniform_points(std::size_t count, double beta, Rng& rng) {
    require_beta(beta);
    std::uniform_real_distribution<double> uni(0.0, beta);
    std::vector<double> t(count);
    for (;;) {
        for (auto& x : t) x = uni(rng);
        std::sort(t.begin(), t.end());
        // Zero and coincident draws are probability-zero rounding artefacts; redraw.
        bool ok = t.empty() || (t.front() > 0.0 && t.back() < beta);
        ok = ok && std::adjacent_find(t.begin(), t.end()) == t.end();
        if (ok) break;
    }
    return PointSet(std::move(t), beta);
}

PointSet sample_poisson(double intensity, double beta, Rng& rng) {
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) throw ParameterError("intensity must be nonnegative");
    require_beta(beta);
    if (intensity == 0.0) return PointSet({}, beta);
    std::poisson_distribution<std::int64_t> count(intensity * beta);
    return sample_uniform_points(static_cast<std::size_t>(count(rng)), beta, rng);
}

std::vector<Arc> components(const PointSet& xi) {
    const auto t = xi.times();
    const double beta = xi.beta();
    if (t.empty()) return {Arc{0.0, beta}};
    std::vector<Arc> arcs;
    arcs.reserve(t.size());
    for (std::size_t k = 0; k + 1 < t.size(); ++k) arcs.push_back(Arc{t[k], t[k + 1] - t[k]});
    arcs.push_back(Arc{t.back(), beta - t.back() + t.front()});
    return arcs;
}

bool compatible(const SpinPath& sigma, const PointSet& xi) {
    if (sigma.beta() != xi.beta()) throw ParameterError("compatible: beta mismatch");
    const auto pts = xi.times();
    return std::all_of(sigma.jumps().begin(), sigma.jumps().end(),
                       [&](double j) { return std::binary_search(pts.begin(), pts.end(), j); });
}

double time_integral(const SpinPath& sigma) {
    double acc = 0.0, prev = 0.0;
    int s = sigma.initial_sign();
    for (double j : sigma.jumps()) {
        acc += s * (j - prev);
        prev = j;
        s = -s;
    }
    acc += s * (sigma.beta() - prev);
    return acc;
}

PiecewiseField mean_path(std::span<const SpinPath> paths) {
    if (paths.empty()) throw ParameterError("mean_path needs at least one path");
    const double beta = paths.front().beta();
    std::vector<double> bps{0.0};
    int total = 0;
    for (const auto& p : paths) {
        if (p.beta() != beta) throw ParameterError("mean_path: paths must share beta");
        bps.insert(bps.end(), p.jumps().begin(), p.jumps().end());
        total += p.initial_sign();
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    // Sweep the merged jump list; each jump flips exactly one path's contribution.
    std::vector<std::pair<double, std::size_t>> events;
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (double j : paths[i].jumps()) events.emplace_back(j, i);
    std::sort(events.begin(), events.end());
    std::vector<int> sign(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) sign[i] = paths[i].initial_sign();

    const double n = static_cast<double>(paths.size());
    std::vector<double> vals;
    vals.reserve(bps.size());
    vals.push_back(total / n);
    std::size_t e = 0;
    for (std::size_t k = 1; k < bps.size(); ++k) {
        while (e < events.size() && events[e].first <= bps[k]) {
            auto i = events[e].second;
            total -= 2 * sign[i];
            sign[i] = -sign[i];
            ++e;
        }
        vals.push_back(total / n);
    }
    return PiecewiseField(std::move(bps), std::move(vals), beta);
}

}  // namespace qcw
