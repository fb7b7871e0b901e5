#include <cmath>
#include <vector>

#include "doctest.h"
#include "qcw/errors.hpp"
#include "qcw/fk_sampler.hpp"
#include "qcw/single_spin.hpp"
#include "stat_util.hpp"

using namespace qcw;
using testutil::mean_se;

namespace {

// 0 and t lie in the same component iff one of the two arcs between them is free of punctures.
bool connected(const PointSet& xi, double t) {
    return xi.count_in(0.0, t) == 0 || xi.count_in(t, xi.beta()) == 0;
}

}  // namespace

TEST_CASE("empty configuration probability") {
    CHECK(q_empty_probability(1.0, 0.0, 1.0) == doctest::Approx(0.238405844044235).epsilon(1e-13));
    CHECK(q_empty_probability(0.0, 0.7, 2.0) == doctest::Approx(1.0));
    CHECK(q_empty_probability(1.0, 0.5, 1.0) == q_empty_probability(1.0, -0.5, 1.0));
    // Large beta must not overflow.
    CHECK(q_empty_probability(1.0, 0.0, 400.0) >= 0.0);
}

TEST_CASE("sample_q_zero") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) CHECK(sample_q_zero(0.0, 1.0, rng).empty());

    const int n = 100000;
    std::vector<double> empty(n);
    for (int i = 0; i < n; ++i) empty[i] = sample_q_zero(1.0, 1.0, rng).empty() ? 1.0 : 0.0;
    const auto e = mean_se(empty);
    CHECK(std::fabs(e.mean - 0.238405844044235) <= 3.0 * e.se);

    for (double t : {0.2, 0.5, 0.9}) {
        std::vector<double> conn(40000);
        for (auto& v : conn) v = connected(sample_q_zero(1.0, 1.0, rng), t) ? 1.0 : 0.0;
        const auto c = mean_se(conn);
        CHECK(std::fabs(c.mean - two_point(t, 1.0, 1.0)) <= 3.0 * c.se);
    }
}

TEST_CASE("sample_q_field") {
    Rng rng(6);
    SUBCASE("h = 0 agrees with the zero-field sampler") {
        std::vector<int> a(30000), b(30000);
        for (auto& v : a) v = static_cast<int>(sample_q_field(1.2, 0.0, 1.5, rng).size());
        for (auto& v : b) v = static_cast<int>(sample_q_zero(1.2, 1.5, rng).size());
        CHECK(testutil::two_sample_chi2_pvalue(a, b) > 0.01);
    }
    SUBCASE("saturation at large h") {
        std::vector<double> m(2000);
        for (auto& v : m) v = time_integral(sample_spin_path(1.0, 20.0, 1.0, rng));
        CHECK(mean_se(m).mean > 0.99);
    }
    SUBCASE("painted one-point function") {
        std::vector<double> s0(100000);
        for (auto& v : s0) v = sample_spin_path(1.0, 0.5, 1.0, rng).value_at(0.0);
        const auto e = mean_se(s0);
        CHECK(std::fabs(e.mean - magnetization_const(0.5, 1.0, 1.0)) <= 3.0 * e.se);
    }
    SUBCASE("acceptance rate") {
        FkSamplerStats stats;
        for (int i = 0; i < 5000; ++i) sample_q_field(2.0, 1.0, 2.0, rng, &stats);
        CHECK(stats.acceptance_rate() > 0.0);
        CHECK(stats.acceptance_rate() <= 1.0);
        MESSAGE("acceptance rate at (lambda, h, beta) = (2, 1, 2): " << stats.acceptance_rate());
    }
}

TEST_CASE("paint") {
    Rng rng(7);
    CHECK_THROWS_AS(paint(PointSet({0.0, 0.5}, 1.0), 0.0, rng), ParameterError);

    // h = 0: each component is a fair coin, so a two-component xi has a jump pair with probability 1/2.
    const PointSet xi({0.25, 0.6}, 1.0);
    std::vector<double> jumps(20000), sign(20000);
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        const SpinPath p = paint(xi, 0.0, rng);
        jumps[i] = p.jumps().empty() ? 0.0 : 1.0;
        sign[i] = p.value_at(0.4);
        CHECK(compatible(p, xi));
    }
    CHECK(std::fabs(mean_se(jumps).mean - 0.5) <= 3.0 * mean_se(jumps).se);
    CHECK(std::fabs(mean_se(sign).mean) <= 3.0 * mean_se(sign).se);

    // Unpunctured circle: constant path, up with probability 1 / (1 + e^{-2 h beta}).
    std::vector<double> up(20000);
    for (auto& v : up) {
        const SpinPath p = paint(PointSet({}, 2.0), 0.3, rng);
        CHECK(p.jumps().empty());
        v = p.initial_sign() > 0 ? 1.0 : 0.0;
    }
    CHECK(std::fabs(mean_se(up).mean - 1.0 / (1.0 + std::exp(-1.2))) <= 3.0 * mean_se(up).se);
}

TEST_CASE("sample_spin_path") {
    Rng rng(8);
    const int n = 60000;
    std::vector<double> integral(n), zero_field(n);
    for (int i = 0; i < n; ++i) integral[i] = time_integral(sample_spin_path(1.0, 0.3, 2.0, rng)) / 2.0;
    const auto e = mean_se(integral);
    CHECK(std::fabs(e.mean - magnetization_const(0.3, 1.0, 2.0)) <= 3.0 * e.se);

    for (double t : {0.3, 1.0}) {
        std::vector<double> corr(n);
        for (int i = 0; i < n; ++i) {
            const SpinPath p = sample_spin_path(1.0, 0.0, 2.0, rng);
            corr[i] = p.value_at(0.0) * p.value_at(t);
            zero_field[i] = p.value_at(0.0);
        }
        const auto c = mean_se(corr);
        CHECK(std::fabs(c.mean - two_point(t, 1.0, 2.0)) <= 3.0 * c.se);
        CHECK(std::fabs(mean_se(zero_field).mean) <= 3.0 * mean_se(zero_field).se);
    }

    // Negative field by global flip.
    std::vector<double> neg(n);
    for (auto& v : neg) v = sample_spin_path(1.0, -0.3, 2.0, rng).value_at(0.7);
    CHECK(std::fabs(mean_se(neg).mean + magnetization_const(0.3, 1.0, 2.0)) <= 3.0 * mean_se(neg).se);
}

TEST_CASE("painting preserves the puncture marginal") {
    Rng a(21), b(22);
    const int n = 30000;
    std::vector<int> from_paths(n), from_q(n);
    for (int i = 0; i < n; ++i) {
        // Jump counts of painted paths against painting of independent FK draws.
        from_paths[i] = static_cast<int>(sample_spin_path(1.5, 0.4, 1.0, a).jumps().size());
        from_q[i] = static_cast<int>(paint(sample_q_field(1.5, 0.4, 1.0, b), 0.4, b).jumps().size());
        CHECK(from_paths[i] % 2 == 0);
    }
    CHECK(testutil::two_sample_chi2_pvalue(from_paths, from_q) > 0.01);
}

TEST_CASE("increments generating function against sampled paths") {
    Rng rng(9);
    const double t1 = 0.3, t2 = 0.8, beta = 1.0, lambda = 1.0;
    const int n = 100000;
    std::vector<double> w(n);
    for (auto& v : w) {
        const SpinPath p = sample_spin_path(lambda, 0.0, beta, rng);
        // g = (1, 0): exponent g1 (s1 - s2) + g2 (s2 - s1) = s1 - s2.
        v = std::exp(p.value_at(t1) - p.value_at(t2));
    }
    const auto e = mean_se(w);
    const double exact = log_mgf_increments(std::vector<double>{t1, t2}, std::vector<double>{1.0, 0.0}, 0.0, lambda,
                                            beta);
    CHECK(std::fabs(std::log(e.mean) - exact) <= 3.0 * e.se / e.mean);
}

TEST_CASE("domination_check") {
    Rng rng(10);
    CHECK(domination_check(1.0, 0.0, 1.0, 20000, rng).dominated);
    const auto strong = domination_check(1.0, 2.0, 1.0, 20000, rng);
    CHECK(strong.dominated);
    CHECK(strong.mean_count <= strong.envelope_mean);
    const auto none = domination_check(0.0, 0.5, 1.0, 100, rng);
    CHECK(none.dominated);
    CHECK(none.statistic == 0.0);
    CHECK(none.mean_count == 0.0);
}
