#include "qcw/fk_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <boost/math/distributions/poisson.hpp>

#include "qcw/errors.hpp"
#include "qcw/taylor.hpp"

namespace qcw {

namespace {

void require(double lambda, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be nonnegative");
}

// Poisson(mu) conditioned on being at least one.
std::size_t zero_truncated_poisson(double mu, Rng& rng) {
    if (mu > 10.0) {
        std::poisson_distribution<std::int64_t> pois(mu);
        for (;;) {
            const auto n = pois(rng);
            if (n > 0) return static_cast<std::size_t>(n);
        }
    }
    // Sequential inversion of p_n = mu^n / (n! (e^mu - 1)).
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng) * std::expm1(mu);
    double term = mu;
    std::size_t n = 1;
    while (u > term) {
        u -= term;
        ++n;
        term *= mu / static_cast<double>(n);
        if (term == 0.0) break;
    }
    return n;
}

}  // namespace

double q_empty_probability(double lambda, double h, double beta) {
    require(lambda, beta);
    const double a = std::fabs(h) * beta;
    return std::exp(-lambda * beta + log_cosh(a) - log_cosh(beta * std::hypot(lambda, h)));
}

PointSet sample_q_zero(double lambda, double beta, Rng& rng) { return sample_q_field(lambda, 0.0, beta, rng); }

PointSet sample_q_field(double lambda, double h, double beta, Rng& rng, FkSamplerStats* stats) {
    require(lambda, beta);
    if (!std::isfinite(h)) throw ParameterError("h must be finite");
    h = std::fabs(h);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (uni(rng) < q_empty_probability(lambda, h, beta)) return PointSet({}, beta);

    const double mu = 2.0 * lambda * beta;
    for (;;) {
        PointSet xi = sample_uniform_points(zero_truncated_poisson(mu, rng), beta, rng);
        if (stats) ++stats->proposals;
        double accept = 1.0;
        for (const Arc& arc : components(xi)) accept *= 0.5 * (1.0 + std::exp(-2.0 * h * arc.length));
        if (!(accept > 0.0 && accept <= 1.0)) throw InvariantViolation("FK acceptance ratio outside (0, 1]");
        if (uni(rng) < accept) {
            if (stats) ++stats->accepted;
            return xi;
        }
    }
}

SpinPath paint(const PointSet& xi, double h, Rng& rng) {
    const double beta = xi.beta();
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto up = [&](double len) { return uni(rng) < 1.0 / (1.0 + std::exp(-2.0 * h * len)) ? 1 : -1; };
    if (xi.empty()) return SpinPath::constant(up(beta), beta);
    const auto t = xi.times();
    if (t.front() == 0.0) throw ParameterError("paint: a puncture at t = 0 cannot carry a jump");

    const auto arcs = components(xi);
    std::vector<int> colour(arcs.size());
    for (std::size_t k = 0; k < arcs.size(); ++k) colour[k] = up(arcs[k].length);
    // Arc k starts at t[k]; the last arc wraps through 0 and fixes the initial sign.
    std::vector<double> jumps;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
        const int before = colour[(k + arcs.size() - 1) % arcs.size()];
        if (before != colour[k]) jumps.push_back(t[k]);
    }
    return SpinPath(colour.back(), std::move(jumps), beta);
}

SpinPath sample_spin_path(double lambda, double h, double beta, Rng& rng) {
    const PointSet xi = sample_q_field(lambda, h, beta, rng);
    return paint(xi, h, rng);
}

DominationReport domination_check(double lambda, double h, double beta, int samples, Rng& rng, double alpha) {
    require(lambda, beta);
    if (samples < 1) throw ParameterError("domination_check needs at least one sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    DominationReport rep;
    rep.samples = samples;
    rep.envelope_mean = 2.0 * lambda * beta;
    rep.threshold = std::sqrt(std::log(1.0 / alpha) / (2.0 * samples));

    FkSamplerStats stats;
    std::map<std::size_t, int> total, half;
    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
        const PointSet xi = sample_q_field(lambda, h, beta, rng, &stats);
        ++total[xi.size()];
        ++half[xi.count_in(0.0, 0.5 * beta)];
        sum += static_cast<double>(xi.size());
    }
    rep.mean_count = sum / samples;
    rep.acceptance_rate = stats.acceptance_rate();

    const auto worst = [&](const std::map<std::size_t, int>& counts, double mean) {
        if (mean == 0.0) return 0.0;  // both sides are point masses at zero
        boost::math::poisson_distribution<double> pois(mean);
        double cum = 0.0, d = 0.0;
        const std::size_t top = counts.rbegin()->first;
        for (std::size_t n = 0; n <= top; ++n) {
            auto it = counts.find(n);
            if (it != counts.end()) cum += it->second;
            d = std::max(d, boost::math::cdf(pois, static_cast<double>(n)) - cum / samples);
        }
        return d;
    };
    rep.statistic = std::max(worst(total, rep.envelope_mean), worst(half, 0.5 * rep.envelope_mean));
    rep.dominated = rep.statistic <= rep.threshold;
    return rep;
}

}  // namespace qcw
