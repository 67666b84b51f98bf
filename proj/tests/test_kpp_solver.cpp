#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sbx/error.hpp"
#include "sbx/kpp_solver.hpp"

using namespace sbx;

namespace
{
double logistic(double c, double t)
{
    double e = std::exp(t);
    return c * e / (1 + c * (e - 1));
}

double sub_logistic(double c, double t)
{
    double e = std::exp(-t);
    return c * e / (1 + c * (1 - e));
}

double spread(Field const& f)
{
    auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    return *hi - *lo;
}

Grid1D small_grid(double dx = 0.05, double dt = 0.01)
{
    return Grid1D::covering(-30, 30, dx, dt);
}
}  // namespace

TEST_CASE("grid construction")
{
    auto g = Grid1D::standard(2);
    CHECK(g.x_min == doctest::Approx(-20 - 2 * kSqrt2).epsilon(1e-2));
    CHECK(g.x(g.n / 2) == doctest::Approx(0).epsilon(1e-12));
    CHECK(g.dx() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK_THROWS_AS(Grid1D::covering(1, 0, 0.1, 0.1), Error);
}

TEST_CASE("fixed points")
{
    auto m = bank::binary();
    auto g = small_grid();
    auto zero = solve_kpp(m, Profile::constant(0), {0.5, 1}, g);
    for (auto const& f : zero.fields)
        CHECK(f.sup_on(-1e9, 1e9) == 0);
    auto one = solve_kpp(m, Profile::constant(1), {1, 3}, g);
    for (auto const& f : one.fields)
        for (double v : f.values)
            CHECK(std::abs(v - 1) < 1e-12);
}

TEST_CASE("logistic closed forms")
{
    auto m = bank::binary();
    auto g = small_grid();
    auto sol = solve_kpp(m, Profile::constant(0.3), {1}, g);
    CHECK(spread(sol.fields[0]) < 1e-12);
    CHECK(std::abs(sol.fields[0].values[10] - logistic(0.3, 1)) < 1e-6);
    // 0.3 e / (1 + 0.3 (e - 1))
    CHECK(logistic(0.3, 1) == doctest::Approx(0.538102).epsilon(1e-6));

    for (double c : {0.01, 0.2})
    {
        auto s = solve_subcritical(m, Profile::constant(c), {1, 2.5}, g);
        CHECK(std::abs(s.fields[0].values[5] - sub_logistic(c, 1)) < 1e-6);
        CHECK(std::abs(s.fields[1].values[5] - sub_logistic(c, 2.5)) < 1e-6);
    }
}

TEST_CASE("reaction flow for non-quadratic mechanisms")
{
    // v' = -psi(v) integrated with a fine reference RK4
    for (auto const& m : {bank::remark_atom(), bank::mixture(), bank::power_tail()})
    {
        for (double v0 : {0.05, 0.5, 1.0, 3.0})
        {
            double v = v0;
            int n = 2000;
            double h = 1.0 / n;
            for (int i = 0; i < n; ++i)
            {
                double k1 = -m.psi(v), k2 = -m.psi(v + h / 2 * k1), k3 = -m.psi(v + h / 2 * k2),
                       k4 = -m.psi(v + h * k3);
                v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            }
            CHECK(reaction_flow(m, v0, 1.0) == doctest::Approx(v).epsilon(1e-7));
        }
        double ls = m.lambda_star();
        CHECK(std::abs(reaction_flow(m, ls, 2.0) - ls) < 1e-9 * ls);
    }
}

TEST_CASE("subcritical sup-norm decay")
{
    auto m = bank::binary();
    auto g = small_grid();
    auto phi = Profile::indicator(-2, 2, 0.8);
    auto sol = solve_subcritical(m, phi, {1, 2, 4}, g);
    double alpha_star = -m.psi_deriv(1, 1);
    double s[] = {1, 2, 4};
    for (int i = 0; i < 3; ++i)
        CHECK(sol.fields[i].sup_on(-30, 30) <= std::exp(alpha_star * s[i]) * 0.8 + 1e-10);
}

TEST_CASE("immigration functional")
{
    auto m = bank::binary();
    auto g = small_grid();
    auto trivial = immigration_laplace(m, Profile::constant(0), 1, g);
    for (double v : trivial.V.values)
        CHECK(v == 1);
    for (double c : {0.2, 0.7})
    {
        auto V = immigration_laplace(m, Profile::constant(c), 1.5, g);
        CHECK(spread(V.V) < 1e-12);
        double expect = 1 - logistic(c, 1.5) + sub_logistic(c, 1.5);
        CHECK(std::abs(V.V.values[7] - expect) < 1e-6);
    }
    auto phi = Profile::indicator(-1, 3, 2.0);
    auto V = immigration_laplace(m, phi, 2, g);
    auto u = solve_kpp(m, phi, {2}, g).fields[0];
    for (std::size_t i = 0; i < g.n; ++i)
    {
        CHECK(1 - V.V.values[i] >= -1e-12);
        CHECK(1 - V.V.values[i] <= u.values[i] + 1e-12);
    }
}

TEST_CASE("mean bound against the heat semigroup")
{
    auto m = bank::binary();
    auto g = Grid1D::standard(3);
    double c = 0.5;
    auto u = solve_kpp(m, Profile::indicator(0, INFINITY, c), {1, 3}, g);
    double ts[] = {1, 3};
    for (int k = 0; k < 2; ++k)
    {
        double t = ts[k];
        for (std::size_t i = 0; i < g.n; ++i)
        {
            double x = g.x(i);
            double bound = std::exp(t) * c * 0.5 * std::erfc(-x / std::sqrt(2 * t));
            CHECK(u.fields[k].values[i] <= bound + 1e-8);
        }
    }
}

TEST_CASE("comparison, subadditivity and scaling")
{
    for (auto const& m : {bank::binary(), bank::remark_atom()})
    {
        auto g = Grid1D::standard(2);
        auto f1 = Profile::indicator(-1, 1, 0.4);
        auto f2 = Profile::indicator(0.5, INFINITY, 0.3);
        auto big = Profile::indicator(-1.5, 1.5, 0.5);
        auto u1 = solve_kpp(m, f1, {2}, g).fields[0];
        auto u2 = solve_kpp(m, f2, {2}, g).fields[0];
        auto u12 = solve_kpp(m, f1 + f2, {2}, g).fields[0];
        auto ub = solve_kpp(m, big, {2}, g).fields[0];
        for (std::size_t i = 0; i < g.n; ++i)
        {
            CHECK(u1.values[i] <= ub.values[i] + 1e-10);
            CHECK(u12.values[i] <= u1.values[i] + u2.values[i] + 1e-8);
        }
        for (double M : {2.0, 10.0})
        {
            auto uM = solve_kpp(m, f1.scaled(M), {2}, g).fields[0];
            for (std::size_t i = 0; i < g.n; ++i)
                CHECK(uM.values[i] <= M * u1.values[i] + 1e-8);
        }
    }
}

TEST_CASE("semigroup property")
{
    auto m = bank::binary();
    auto g = Grid1D::standard(3);
    auto phi = Profile::indicator(-1, 2, 0.6);
    auto direct = solve_kpp(m, phi, {1, 3}, g);
    auto restart =
        solve_kpp(m, Profile::from_field(direct.fields[0]), {2}, g).fields[0];
    CHECK(sup_distance(direct.fields[1], restart, g.x_min, g.x_max) < 1e-6);
}

TEST_CASE("grid convergence")
{
    auto m = bank::binary();
    auto phi = Profile::indicator(0, INFINITY, 1.0);
    auto coarse = solve_kpp(m, phi, {2}, Grid1D::standard(2, 0.05, 0.01)).fields[0];
    auto fine = solve_kpp(m, phi, {2}, Grid1D::standard(2, 0.025, 0.005)).fields[0];
    CHECK(std::abs(coarse.at(0) - fine.at(0)) < 1e-4);
    CHECK(sup_distance(coarse, fine, -10, 10) < 1e-4);
}

TEST_CASE("boundary monitor")
{
    auto m = bank::binary();
    auto g = Grid1D::covering(-3, 3, 0.05, 0.01);
    CHECK_THROWS_AS(solve_kpp(m, Profile::indicator(0, INFINITY, 1), {2}, g), Error);
    SolverOptions quiet;
    quiet.check_flux = false;
    auto sol = solve_kpp(m, Profile::indicator(0, INFINITY, 1), {2}, g, quiet);
    CHECK(sol.max_boundary_slope > 1e-8);
}
