#include <cmath>

#include "doctest.h"
#include "sbx/error.hpp"
#include "sbx/rng.hpp"
#include "sbx/stats.hpp"

using namespace sbx;

TEST_CASE("mean estimate")
{
    auto e = mean_estimate({1, 2, 3, 4});
    CHECK(e.value == 2.5);
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3 / 4)));
    CHECK(e.n == 4);
    CHECK(mean_estimate({2, 2, 2}).std_error == 0);
    CHECK_THROWS_AS(mean_estimate({}), Error);
}

TEST_CASE("KS distances")
{
    std::vector<double> a{0.1, 0.5, 0.9, 1.3};
    CHECK(ks_distance(a, a) == 0);
    CHECK(ks_distance({0.0}, {1.0}) == 1);
    CHECK(ks_distance({0.0, 1.0}, {1.0, 2.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_distance(std::vector<double>{}, a), Error);

    RngStream rng(3, 0);
    double const rate = std::sqrt(2.0);
    std::vector<double> ex;
    std::vector<double> un;
    for (int i = 0; i < 100000; ++i)
    {
        ex.push_back(rng.exponential(rate));
        un.push_back(rng.uniform());
    }
    auto exp_cdf = [&](double x) { return x <= 0 ? 0 : 1 - std::exp(-rate * x); };
    double d = ks_distance(ex, exp_cdf);
    CHECK(d < std::sqrt(std::log(2 / 1e-3) / 2e5));
    CHECK(ks_distance(un, exp_cdf) > 0.2);
    CHECK(ks_pvalue(d, ex.size()) > 1e-3);
}

TEST_CASE("Kolmogorov distribution")
{
    // reference values of 1 - K(x)
    CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(1e-2));
    CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.0098).epsilon(2e-2));
    CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
    // both series agree where they meet
    CHECK(kolmogorov_survival(1 - 1e-12) == doctest::Approx(kolmogorov_survival(1)).epsilon(1e-9));
    CHECK(kolmogorov_survival(0) == 1);
}

TEST_CASE("chi-square")
{
    auto r = chi_square({10, 10, 10}, {10, 10, 10});
    CHECK(r.statistic == 0);
    CHECK(r.pvalue == doctest::Approx(1));
    auto s = chi_square({30, 10}, {20, 20});
    CHECK(s.statistic == doctest::Approx(10));
    CHECK(s.dof == 1);
    CHECK(s.pvalue == doctest::Approx(0.0015654).epsilon(1e-4));
}

TEST_CASE("Gumbel mixture")
{
    CHECK(gumbel_mixture_cdf({0, 0, 0}, 1, -3) == 1);
    CHECK(gumbel_mixture_cdf({1}, 1, 0) == doctest::Approx(std::exp(-1.0)));
    CHECK_THROWS_AS(gumbel_mixture_cdf({-0.1}, 1, 0), Error);
    double prev = 0;
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
    {
        double v = gumbel_mixture_cdf({0.3, 1.0, 2.5}, 0.8, x);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("Laplace functional estimate")
{
    std::vector<PointMeasure> empty(5);
    auto e = laplace_mc(empty, [](double) { return 3.0; });
    CHECK(e.value == 1);
    CHECK(e.std_error == 0);
    std::vector<PointMeasure> s(2);
    s[0].add(0.0);
    s[1].add(0.0, 2);
    auto zero = laplace_mc(s, [](double) { return 0.0; });
    CHECK(zero.value == 1);
    CHECK(zero.std_error == 0);
    auto one = laplace_mc(s, [](double) { return 1.0; });
    CHECK(one.value == doctest::Approx((std::exp(-1.0) + std::exp(-2.0)) / 2));
    CHECK_THROWS_AS(laplace_mc({}, [](double) { return 0.0; }), Error);
}

TEST_CASE("martingale test and drifted control")
{
    RngStream rng(5, 0);
    std::vector<double> times{1, 2, 5, 10};
    std::vector<std::vector<double>> flat;
    std::vector<std::vector<double>> drift;
    for (int i = 0; i < 100000; ++i)
    {
        std::vector<double> a;
        std::vector<double> b;
        double w = 0;
        double prev = 0;
        for (double t : times)
        {
            w += std::sqrt(t - prev) * rng.normal() * 0.1;
            prev = t;
            a.push_back(w);
            b.push_back(w + 0.01 * t);
        }
        flat.push_back(a);
        drift.push_back(b);
    }
    CHECK_FALSE(martingale_test(flat, times, 0).any_flagged);
    auto rep = martingale_test(drift, times, 0);
    CHECK(rep.any_flagged);
    CHECK(rep.rows.back().z > rep.rows.front().z);
    CHECK_THROWS_AS(martingale_test(flat, {1}, 0), Error);
}

TEST_CASE("regression and paired difference")
{
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{2.1, 3.9, 6.2, 7.8, 10.1};
    auto r = linear_regression(x, y);
    CHECK(r.slope == doctest::Approx(1.99).epsilon(1e-9));
    CHECK(r.slope_stderr > 0);
    auto d = paired_difference(y, y);
    CHECK(d.value == 0);
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 3, 2}) == 2.5);
}
