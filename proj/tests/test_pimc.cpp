#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "qcw/errors.hpp"
#include "qcw/fk_sampler.hpp"
#include "qcw/pimc.hpp"
#include "qcw/quantum_ed.hpp"
#include "qcw/single_spin.hpp"
#include "stat_util.hpp"

using namespace qcw;
using testutil::mean_se;

namespace {

ModelParams make(double lambda, double beta, double h = 0.0, Polynomial p = Polynomial::quadratic()) {
    ModelParams m;
    m.lambda = lambda;
    m.beta = beta;
    m.h = h;
    m.p = std::move(p);
    return m;
}

// Trotter Gibbs log weight summed term by term. At lambda = 0 the time bonds become the
// constraint that world lines are constant.
double brute_log_weight(const TrotterLattice& l) {
    const int n = l.n_slices(), N = l.n_spins();
    const auto& p = l.params();
    const double eps = p.beta / n;
    double w = 0.0;
    for (int k = 0; k < n; ++k) {
        int s = 0;
        for (int i = 0; i < N; ++i) s += l.spin(i, k);
        const double m = static_cast<double>(s) / N;
        w += eps * (N * p.p(m) + p.h * N * m);
        for (int i = 0; i < N; ++i) {
            const int bond = l.spin(i, k) * l.spin(i, (k + 1) % n);
            if (p.lambda == 0.0) {
                if (bond < 0) return -INFINITY;
            } else {
                w += 0.5 * std::log(1.0 / std::tanh(p.lambda * p.beta / n)) * bond;
            }
        }
    }
    return w;
}

void load_state(TrotterLattice& l, unsigned bits) {
    for (int i = 0; i < l.n_spins(); ++i)
        for (int k = 0; k < l.n_slices(); ++k) l.set_spin(i, k, (bits >> (i * l.n_slices() + k)) & 1u ? -1 : 1);
}

unsigned state_of(const TrotterLattice& l) {
    unsigned bits = 0;
    for (int i = 0; i < l.n_spins(); ++i)
        for (int k = 0; k < l.n_slices(); ++k)
            if (l.spin(i, k) < 0) bits |= 1u << (i * l.n_slices() + k);
    return bits;
}

// <s> on the N = 1 Trotter ring: Tr(Z T^n) / Tr(T^n), T = diag(e^{eps h s}) [[1, t], [t, 1]].
double trotter_single_spin(double lambda, double h, double beta, int n) {
    const double eps = beta / n, t = std::tanh(lambda * eps);
    Eigen::Matrix2d T;
    T << std::exp(eps * h), std::exp(eps * h) * t, std::exp(-eps * h) * t, std::exp(-eps * h);
    Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
    for (int k = 0; k < n; ++k) P = P * T / T.norm();
    return (P(0, 0) - P(1, 1)) / (P(0, 0) + P(1, 1));
}

}  // namespace

TEST_CASE("trotter_coupling") {
    CHECK(trotter_coupling(1.0, 1.0, 2) == doctest::Approx(0.385968416452652).epsilon(1e-14));
    CHECK_THROWS_AS(trotter_coupling(0.0, 1.0, 8), DomainError);
    CHECK_THROWS_AS(trotter_coupling(1.0, 1.0, 1), ParameterError);
    double prev = 0.0;
    for (int n = 2; n <= (1 << 20); n *= 2) {
        const double j = trotter_coupling(0.7, 1.3, n);
        CHECK(j > prev);
        prev = j;
    }
    const int n = 1 << 20;
    CHECK(std::exp(-2.0 * trotter_coupling(0.7, 1.3, n)) * n / (0.7 * 1.3) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("lattice shape") {
    Rng rng(1);
    CHECK_THROWS_AS(TrotterLattice(make(1.0, 1.0), 3, 6, rng), ParameterError);
    CHECK_THROWS_AS(TrotterLattice(make(1.0, 1.0), 0, 4, rng), ParameterError);
    const TrotterLattice l(make(1.0, 1.0), 3, 8, rng);
    for (int i = 0; i < 3; ++i)
        for (int k = 1; k < 8; ++k) CHECK(l.spin(i, k) == l.spin(i, 0));
}

TEST_CASE("Metropolis detailed balance on a 3 x 4 lattice") {
    // Quartic P and a field so that every term of the weight is exercised.
    const ModelParams p = make(0.8, 1.5, 0.3, Polynomial({0.0, 0.0, 0.5, 0.0, 0.25}));
    Rng rng(2);
    TrotterLattice x(p, 3, 4, rng), y(p, 3, 4, rng);
    const unsigned states = 1u << 12;
    std::vector<double> logw(states);
    for (unsigned s = 0; s < states; ++s) {
        load_state(x, s);
        logw[s] = brute_log_weight(x);
    }
    double worst = 0.0;
    for (unsigned s = 0; s < states; ++s) {
        load_state(x, s);
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 4; ++k) {
                const unsigned t = s ^ (1u << (i * 4 + k));
                const double r = x.flip_log_ratio(i, k);
                worst = std::max(worst, std::fabs(r - (logw[t] - logw[s])));
                load_state(y, t);
                // pi(x) a(x -> y) = pi(y) a(y -> x) with a = min(1, ratio).
                const double fwd = logw[s] + std::min(0.0, r);
                const double bwd = logw[t] + std::min(0.0, y.flip_log_ratio(i, k));
                CHECK(fwd == doctest::Approx(bwd).epsilon(1e-12));
            }
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("Metropolis sweep samples the Trotter weight") {
    const ModelParams p = make(1.0, 1.0, 0.2);
    Rng rng(3);
    TrotterLattice l(p, 2, 4, rng);
    std::vector<double> pi(256), counts(256, 0.0);
    double z = 0.0;
    for (unsigned s = 0; s < 256; ++s) {
        load_state(l, s);
        pi[s] = std::exp(brute_log_weight(l));
        z += pi[s];
    }
    for (auto& v : pi) v /= z;
    load_state(l, 0);
    for (int step = 0; step < 300000; ++step) {
        trotter_sweep(l, rng);
        if (step % 3 == 0) counts[state_of(l)] += 1.0;
    }
    CHECK(testutil::chi2_gof_pvalue(counts, pi) > 1e-3);
}

TEST_CASE("world-line heat bath samples the Trotter weight") {
    for (const ModelParams& p : {make(1.0, 1.0, 0.2), make(0.0, 1.0, 0.2), make(2.0, 1.5, -0.4, Polynomial({0, 0, 0, 0, 1}))}) {
        Rng rng(4);
        TrotterLattice l(p, 2, 4, rng);
        std::vector<double> pi(256), counts(256, 0.0);
        double z = 0.0;
        for (unsigned s = 0; s < 256; ++s) {
            load_state(l, s);
            pi[s] = std::exp(brute_log_weight(l));
            z += pi[s];
        }
        for (auto& v : pi) v /= z;
        load_state(l, 0);
        for (int step = 0; step < 100000; ++step) {
            trotter_worldline_sweep(l, rng);
            counts[state_of(l)] += 1.0;
        }
        CHECK(testutil::chi2_gof_pvalue(counts, pi) > 1e-3);
    }
}

TEST_CASE("single spin on the Trotter ring") {
    // N = 1: P(m) is constant, so each world-line draw is an exact independent sample.
    const double lambda = 1.0, h = 0.4, beta = 1.5;
    double prev_gap = 1.0;
    for (int n : {8, 16, 32, 64}) {
        const double exact = trotter_single_spin(lambda, h, beta, n);
        const double gap = std::fabs(exact - magnetization_const(h, lambda, beta));
        CHECK(gap < prev_gap / 3.0);  // second order in 1/n
        prev_gap = gap;

        Rng rng(static_cast<std::uint64_t>(n));
        TrotterLattice l(make(lambda, beta, h), 1, n, rng);
        std::vector<double> q(40000);
        for (auto& v : q) {
            trotter_worldline_sweep(l, rng);
            v = l.mean_magnetization();
        }
        const auto e = mean_se(q);
        CHECK(std::fabs(e.mean - exact) <= 3.0 * e.se);
    }
    CHECK(prev_gap < 1e-3);
}

TEST_CASE("effective field") {
    Rng rng(5);
    PathEnsemble ens;
    ens.beta = 2.0;
    ens.paths = {SpinPath(1, {0.3, 1.1}, 2.0), SpinPath(-1, {0.5, 1.7}, 2.0), SpinPath(1, {}, 2.0),
                 SpinPath(-1, {0.2, 0.9, 1.0, 1.9}, 2.0)};
    const int n = 4;
    const ModelParams quad = make(1.0, 2.0, 0.25);
    for (int i = 0; i < n; ++i) {
        const PiecewiseField b = effective_field(ens, i, quad);
        for (double t = 0.01; t < 2.0; t += 0.05) {
            double mbar = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) mbar += ens.paths[static_cast<std::size_t>(j)].value_at(t);
            mbar /= n;
            CHECK(b.value_at(t) == doctest::Approx(0.25 + mbar).epsilon(1e-15));
        }
    }
    // General P: the affine identity N P(mbar + s/N) = A + s B.
    const ModelParams quartic = make(1.0, 2.0, -0.1, Polynomial({0.0, 0.3, 0.5, 0.2, 1.0}));
    const PiecewiseField b = effective_field(ens, 2, quartic);
    for (double t : {0.1, 0.6, 1.05, 1.8}) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != 2) sum += ens.paths[static_cast<std::size_t>(j)].value_at(t);
        const double up = n * quartic.p((sum + 1.0) / n) + quartic.h * (sum + 1.0);
        const double dn = n * quartic.p((sum - 1.0) / n) + quartic.h * (sum - 1.0);
        CHECK(b.value_at(t) == doctest::Approx(0.5 * (up - dn)).epsilon(1e-13));
    }
    // Relabelling the other circles changes nothing.
    PathEnsemble swapped = ens;
    std::swap(swapped.paths[0], swapped.paths[3]);
    const auto b1 = effective_field(ens, 1, quad), b2 = effective_field(swapped, 1, quad);
    CHECK(std::vector<double>(b1.values().begin(), b1.values().end()) ==
          std::vector<double>(b2.values().begin(), b2.values().end()));
    CHECK(swapped.mean_magnetization() == doctest::Approx(ens.mean_magnetization()).epsilon(1e-15));
    CHECK_THROWS_AS(effective_field(ens, 4, quad), ParameterError);
}

TEST_CASE("path sampler in a constant field") {
    Rng rng(6);
    const double lambda = 1.0, h = 0.5, beta = 1.0;
    const int n = 60000;
    std::vector<double> s0(n), integral(n);
    for (int i = 0; i < n; ++i) {
        const SpinPath p = sample_path_in_field(PiecewiseField::constant(h, beta), lambda, rng);
        s0[i] = p.value_at(0.0);
        integral[i] = time_integral(p) / beta;
    }
    CHECK(std::fabs(mean_se(s0).mean - magnetization_const(h, lambda, beta)) <= 3.0 * mean_se(s0).se);
    CHECK(std::fabs(mean_se(integral).mean - magnetization_const(h, lambda, beta)) <= 3.0 * mean_se(integral).se);

    for (double t : {0.25, 0.6}) {
        std::vector<double> c(n);
        for (auto& v : c) {
            const SpinPath p = sample_path_in_field(PiecewiseField::constant(0.0, 2.0), 0.8, rng);
            v = p.value_at(0.1) * p.value_at(0.1 + t);
        }
        CHECK(std::fabs(mean_se(c).mean - two_point(t, 0.8, 2.0)) <= 3.0 * mean_se(c).se);
    }

    // Jump counts against the random-cluster sampler.
    std::vector<int> a(30000), b(30000);
    for (auto& v : a) v = static_cast<int>(sample_path_in_field(PiecewiseField::constant(0.4, 1.5), 1.2, rng).jumps().size());
    for (auto& v : b) v = static_cast<int>(sample_spin_path(1.2, 0.4, 1.5, rng).jumps().size());
    CHECK(testutil::two_sample_chi2_pvalue(a, b) > 0.01);

    // lambda = 0: no jumps, sign from the field.
    for (int i = 0; i < 100; ++i) CHECK(sample_path_in_field(PiecewiseField::constant(0.3, 1.0), 0.0, rng).jumps().empty());
}

TEST_CASE("path sampler in a piecewise field") {
    // E[int over piece k of sigma] is the derivative of log E exp(int b sigma) in b_k.
    const std::vector<double> breaks{0.0, 0.3, 0.5, 1.2};
    const std::vector<double> vals{0.7, -1.2, 0.1, 2.0};
    const double beta = 1.6, lambda = 0.9;
    const PiecewiseField field(breaks, vals, beta);
    Rng rng(7);
    const int n = 60000;
    std::vector<std::vector<double>> piece(vals.size(), std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        const SpinPath p = sample_path_in_field(field, lambda, rng);
        CHECK(p.jumps().size() % 2 == 0);
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const double lo = breaks[k], hi = k + 1 < breaks.size() ? breaks[k + 1] : beta;
            // Integral over [lo, hi) from the jump list.
            double acc = 0.0, t = lo;
            int s = p.value_at(lo);
            for (double j : p.jumps()) {
                if (j <= lo || j >= hi) continue;
                acc += s * (j - t);
                t = j;
                s = -s;
            }
            piece[k][static_cast<std::size_t>(i)] = acc + s * (hi - t);
        }
    }
    for (std::size_t k = 0; k < vals.size(); ++k) {
        auto up = vals, dn = vals;
        const double d = 1e-5;
        up[k] += d;
        dn[k] -= d;
        const double exact = (log_mgf_piecewise(PiecewiseField(breaks, up, beta), lambda) -
                              log_mgf_piecewise(PiecewiseField(breaks, dn, beta), lambda)) / (2.0 * d);
        const auto e = mean_se(piece[k]);
        CHECK(std::fabs(e.mean - exact) <= 3.0 * e.se);
    }
}

TEST_CASE("run_chain arguments") {
    const ModelParams p = make(1.0, 1.0);
    McParams mc;
    mc.sweeps = 100;
    mc.burn_in = 80;
    CHECK_THROWS_AS(run_chain(p, 2, mc), ParameterError);
    mc.burn_in = 100;
    CHECK_THROWS_AS(run_chain(p, 2, mc), ParameterError);
    mc.burn_in = 10;
    mc.n_slices = 12;
    CHECK_THROWS_AS(run_chain(p, 2, mc), ParameterError);
    mc.n_slices = 8;
    const McStats st = run_chain(p, 2, mc);
    CHECK(st.samples == 64);
    CHECK(st.burn_in == 36);
    CHECK(st.batches == 32);
    CHECK(st.binder.mean <= 2.0 / 3.0);
    CHECK(st.q2.se >= 0.0);
}

TEST_CASE("run_chain is deterministic") {
    const ModelParams p = make(0.7, 2.0);
    for (Sampler s : {Sampler::trotter, Sampler::trotter_metropolis, Sampler::ct}) {
        McParams mc;
        mc.sweeps = 2000;
        mc.seed = 42;
        mc.sampler = s;
        mc.n_slices = 16;
        const McStats a = run_chain(p, 4, mc), b = run_chain(p, 4, mc);
        CHECK(a == b);
        mc.seed = 43;
        CHECK(!(run_chain(p, 4, mc) == a));
    }
}

TEST_CASE("batch errors shrink like one over root two") {
    const ModelParams p = make(1.2, 1.0);
    double ratio = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        McParams mc;
        mc.n_slices = 16;
        mc.burn_in = 200;
        mc.seed = 100 + static_cast<std::uint64_t>(s);
        mc.sweeps = 200 + 6400;
        const double e1 = run_chain(p, 6, mc).q2.se;
        mc.sweeps = 200 + 12800;
        const double e2 = run_chain(p, 6, mc).q2.se;
        ratio += e1 / e2 / seeds;
    }
    CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.3));
}

TEST_CASE("samplers against exact diagonalisation") {
    struct Case {
        ModelParams p;
        int n;
    };
    for (const Case& c : {Case{make(1.0, 1.0, 0.2), 1}, Case{make(1.0, 1.0, 0.2), 2}, Case{make(1.5, 1.0), 4},
                          Case{make(0.5, 3.0), 3}, Case{make(0.8, 1.5, 0.1, Polynomial({0, 0, 0.3, 0, 0.4})), 3}}) {
        const auto ed = time_integrated_moments(c.p, c.n, 4);
        for (Sampler s : {Sampler::trotter, Sampler::ct}) {
            McParams mc;
            mc.sweeps = 40000;
            mc.seed = 11;
            mc.sampler = s;
            mc.n_slices = 128;
            const McStats st = run_chain(c.p, c.n, mc);
            INFO("N = " << c.n << " lambda = " << c.p.lambda << " sampler " << static_cast<int>(s));
            CHECK(std::fabs(st.q.mean - ed[0]) <= 4.0 * st.q.se + 1e-3);
            CHECK(std::fabs(st.q2.mean - ed[1]) <= 4.0 * st.q2.se + 1e-3);
            CHECK(std::fabs(st.q4.mean - ed[3]) <= 4.0 * st.q4.se + 1e-3);
        }
    }
}

TEST_CASE("Binder cumulant in the disordered phase") {
    // beta = 0.5 is subcritical for every lambda: U_4 falls towards zero with N.
    const ModelParams p = make(0.5, 0.5);
    std::vector<double> u;
    for (int n : {8, 16, 32}) {
        McParams mc;
        mc.sweeps = 20000;
        mc.seed = 3;
        mc.n_slices = 16;
        u.push_back(run_chain(p, n, mc).binder.mean);
    }
    const auto ed = time_integrated_moments(make(0.5, 0.5), 8, 4);
    CHECK(u[0] == doctest::Approx(1.0 - ed[3] / (3.0 * ed[1] * ed[1])).epsilon(0.05));
    CHECK(u[2] < u[0]);
    CHECK(std::fabs(u[2]) < 0.1);
}

TEST_CASE("curve_crossing") {
    const std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
    CHECK(*curve_crossing(grid, {0.1, 0.2, 0.3, 0.4}, {0.5, 0.4, 0.2, 0.0}) == doctest::Approx(1.0 + 0.2 / 0.3));
    CHECK(!curve_crossing(grid, {0.1, 0.2, 0.3, 0.4}, {0.2, 0.3, 0.4, 0.5}));
    // A noise crossing on the plateau loses against the steep one.
    CHECK(*curve_crossing(grid, {0.0, 0.0, 0.0, 0.0}, {0.001, -0.001, 0.3, 0.5}) == doctest::Approx(1.0 + 0.001 / 0.301));
    CHECK_THROWS_AS(curve_crossing(grid, {0.0}, {0.0}), ParameterError);
}

TEST_CASE("binder scans") {
    McParams mc;
    mc.sweeps = 4000;
    mc.seed = 9;
    mc.n_slices = 8;
    SUBCASE("always subcritical") {
        const auto s = binder_scan(0.5, {0.2, 0.6, 1.0}, {8, 32}, mc, 2, 50);
        CHECK(!s.crossing);
        CHECK(s.points.size() == 6);
    }
    SUBCASE("classical column crosses near beta = 1") {
        mc.n_slices = 2;
        mc.sweeps = 20000;
        const auto s = binder_scan_beta(0.0, {0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3}, {16, 64}, mc, 1, 100);
        REQUIRE(s.crossing);
        CHECK(*s.crossing == doctest::Approx(1.0).epsilon(0.1));
        CHECK(s.error > 0.0);
        CHECK(!s.extrapolated);  // one pair only
    }
    SUBCASE("thread count does not change results") {
        const auto a = binder_scan(2.0, {0.8, 1.1}, {4, 8}, mc, 1, 20);
        const auto b = binder_scan(2.0, {0.8, 1.1}, {4, 8}, mc, 3, 20);
        for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k].binder.mean == b.points[k].binder.mean);
        CHECK(a.error == b.error);
    }
}
