#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "qcw/circle.hpp"
#include "qcw/errors.hpp"

using namespace qcw;

TEST_CASE("PointSet validation") {
    CHECK_NOTHROW(PointSet({0.0, 0.5}, 1.0));
    CHECK_THROWS_AS(PointSet({0.5, 0.2}, 1.0), ParameterError);
    CHECK_THROWS_AS(PointSet({0.2, 0.2}, 1.0), ParameterError);
    CHECK_THROWS_AS(PointSet({1.0}, 1.0), ParameterError);
    CHECK_THROWS_AS(PointSet({}, 0.0), ParameterError);
}

TEST_CASE("SpinPath validation and evaluation") {
    CHECK_THROWS_AS(SpinPath(1, {0.5}, 1.0), ParameterError);
    CHECK_THROWS_AS(SpinPath(0, {}, 1.0), ParameterError);
    CHECK_THROWS_AS(SpinPath(1, {0.0, 0.5}, 1.0), ParameterError);

    SpinPath p(1, {0.25, 0.75}, 1.0);
    CHECK(p.value_at(0.0) == 1);
    CHECK(p.value_at(0.25) == -1);  // right-continuous
    CHECK(p.value_at(0.2499) == 1);
    CHECK(p.value_at(0.75) == 1);
    CHECK(p.value_at(1.3) == p.value_at(0.3));
    CHECK(p.value_at(-0.7) == p.value_at(0.3));
}

TEST_CASE("sample_poisson") {
    Rng rng(1);
    CHECK(sample_poisson(0.0, 1.0, rng).empty());
    CHECK_THROWS_AS(sample_poisson(-1.0, 1.0, rng), ParameterError);
    CHECK_THROWS_AS(sample_poisson(1.0, 0.0, rng), ParameterError);

    SUBCASE("mean count") {
        const int n = 100000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += static_cast<double>(sample_poisson(2.0, 1.0, rng).size());
        const double se = std::sqrt(2.0 / n);
        CHECK(std::fabs(sum / n - 2.0) < 4.0 * se);
    }

    SUBCASE("count pmf against Poisson(2)") {
        const int n = 50000, kmax = 8;
        std::vector<double> obs(kmax + 1, 0.0);
        for (int i = 0; i < n; ++i) {
            auto k = std::min<std::size_t>(sample_poisson(1.0, 2.0, rng).size(), kmax);
            obs[k] += 1.0;
        }
        double chi2 = 0.0, tail = 1.0;
        for (int k = 0; k <= kmax; ++k) {
            double p;
            if (k < kmax) {
                p = std::exp(-2.0 + k * std::log(2.0) - std::lgamma(k + 1.0));
                tail -= p;
            } else {
                p = tail;
            }
            chi2 += (obs[k] - n * p) * (obs[k] - n * p) / (n * p);
        }
        boost::math::chi_squared dist(kmax);
        CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.01);
    }

    SUBCASE("reproducible from seed") {
        Rng a(42), b(42);
        CHECK(sample_poisson(3.0, 2.0, a) == sample_poisson(3.0, 2.0, b));
    }

    SUBCASE("sorted, inside the circle") {
        for (int i = 0; i < 100; ++i) {
            auto xi = sample_poisson(5.0, 1.5, rng);
            CHECK(std::is_sorted(xi.times().begin(), xi.times().end()));
            if (!xi.empty()) CHECK(xi.times().back() < 1.5);
        }
    }
}

TEST_CASE("components") {
    auto arcs = components(PointSet({}, 1.0));
    REQUIRE(arcs.size() == 1);
    CHECK(arcs[0].start == 0.0);
    CHECK(arcs[0].length == 1.0);

    arcs = components(PointSet({0.3}, 1.0));
    REQUIRE(arcs.size() == 1);
    CHECK(arcs[0].start == doctest::Approx(0.3));
    CHECK(arcs[0].length == doctest::Approx(1.0));

    arcs = components(PointSet({0.2, 0.7}, 1.0));
    REQUIRE(arcs.size() == 2);
    CHECK(arcs[0].length == doctest::Approx(0.5));
    CHECK(arcs[1].length == doctest::Approx(0.5));

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        auto xi = sample_poisson(4.0, 2.5, rng);
        auto a = components(xi);
        double total = 0.0;
        for (const auto& arc : a) total += arc.length;
        CHECK(std::fabs(total - 2.5) < 1e-12);
        CHECK(a.size() == std::max<std::size_t>(1, xi.size()));
    }
}

TEST_CASE("compatible") {
    PointSet xi({0.3, 0.5, 0.7}, 1.0);
    CHECK(compatible(SpinPath::constant(1, 1.0), PointSet({0.3}, 1.0)));
    CHECK_FALSE(compatible(SpinPath(1, {0.5, 0.9}, 1.0), PointSet({0.3, 0.5}, 1.0)));
    CHECK(compatible(SpinPath(-1, {0.3, 0.7}, 1.0), xi));
    CHECK_THROWS_AS(compatible(SpinPath::constant(1, 2.0), xi), ParameterError);
}

TEST_CASE("time_integral") {
    CHECK(time_integral(SpinPath::constant(1, 2.0)) == 2.0);
    CHECK(time_integral(SpinPath(1, {0.25, 0.5}, 1.0)) == doctest::Approx(0.5));
    CHECK(time_integral(SpinPath(-1, {0.1, 0.35}, 1.0)) == doctest::Approx(-0.5));
    SpinPath p(1, {0.1, 0.4, 0.45, 0.9}, 1.0);
    CHECK(time_integral(p) + time_integral(p.flipped()) == doctest::Approx(0.0));
}

TEST_CASE("mean_path") {
    CHECK_THROWS_AS(mean_path({}), ParameterError);

    std::vector<SpinPath> one{SpinPath(1, {0.2, 0.6}, 1.0)};
    auto m = mean_path(one);
    for (double t : {0.0, 0.1, 0.2, 0.5, 0.6, 0.99}) CHECK(m.value_at(t) == one[0].value_at(t));

    std::vector<SpinPath> opp{SpinPath::constant(1, 1.0), SpinPath::constant(-1, 1.0)};
    CHECK(mean_path(opp).value_at(0.4) == 0.0);

    std::vector<SpinPath> three(3, SpinPath::constant(1, 1.0));
    CHECK(mean_path(three).value_at(0.7) == 1.0);

    std::vector<SpinPath> mixed{SpinPath(1, {0.2, 0.6}, 1.0), SpinPath(-1, {0.4, 0.8}, 1.0),
                                SpinPath(1, {0.3, 0.5}, 1.0)};
    auto mm = mean_path(mixed);
    for (double t = 0.0; t < 1.0; t += 0.01) {
        double expect = 0.0;
        for (const auto& p : mixed) expect += p.value_at(t);
        CHECK(mm.value_at(t) == doctest::Approx(expect / 3.0));
        CHECK(std::fabs(mm.value_at(t)) <= 1.0);
    }
}

TEST_CASE("PiecewiseField geometry") {
    PiecewiseField f({0.0, 0.25, 0.5}, {1.0, -2.0, 3.0}, 1.0);
    CHECK(f.integral() == doctest::Approx(0.25 - 0.5 + 1.5));
    CHECK(f.squared_norm() == doctest::Approx(0.25 + 1.0 + 4.5));
    auto g = f.shifted(0.3);
    for (double t = 0.0; t < 1.0; t += 0.013) CHECK(g.value_at(t) == f.value_at(t + 0.3));
    CHECK(g.integral() == doctest::Approx(f.integral()));
    auto r = f.refined();
    CHECK(r.size() == 6);
    for (double t = 0.0; t < 1.0; t += 0.013) CHECK(r.value_at(t) == f.value_at(t));
    CHECK_THROWS_AS(PiecewiseField({0.1}, {1.0}, 1.0), ParameterError);
}
