#include <cmath>

#include "doctest.h"
#include "sbx/error.hpp"
#include "sbx/mechanism.hpp"

using namespace sbx;

namespace
{
// Newton on e^{-y} - 2 + y, independent of the library's bisection
double y0_oracle()
{
    double y = 1.8;
    for (int i = 0; i < 50; ++i)
        y -= (std::exp(-y) - 2 + y) / (1 - std::exp(-y));
    return y;
}

double central_diff(BranchingMechanism const& m, double lam, double h = 1e-5)
{
    return (m.psi(lam + h) - m.psi(lam - h)) / (2 * h);
}

std::vector<BranchingMechanism> test_bank()
{
    return {bank::binary(), bank::remark_atom(), bank::mixture()};
}
}  // namespace

TEST_CASE("psi evaluations")
{
    auto bin = bank::binary();
    CHECK(bin.psi(1) == doctest::Approx(0).epsilon(1e-15));
    CHECK(bin.psi(2) == doctest::Approx(2));
    double y0 = y0_oracle();
    CHECK(remark_root_y0() == doctest::Approx(y0).epsilon(1e-14));
    CHECK(y0 == doctest::Approx(1.8414).epsilon(1e-4));
    auto rem = bank::remark_atom();
    CHECK(std::abs(rem.psi(1)) < 1e-14);
    CHECK_THROWS_AS(rem.psi(-1), Error);
}

TEST_CASE("psi derivatives")
{
    auto bin = bank::binary();
    CHECK(bin.psi_deriv(0, 1) == doctest::Approx(-1));
    CHECK(bin.psi_deriv(1, 1) == doctest::Approx(1));
    CHECK(bin.psi_deriv(3, 2) == doctest::Approx(2));
    CHECK(bin.psi_deriv(3, 3) == 0);
    auto rem = bank::remark_atom();
    double y0 = y0_oracle();
    double q = (y0 - 1) - y0 * std::exp(-y0);
    CHECK(rem.psi_deriv(1, 1) == doctest::Approx(q).epsilon(1e-12));
    CHECK(q == doctest::Approx(0.5494).epsilon(1e-3));
    CHECK(central_diff(rem, 1) == doctest::Approx(q).epsilon(1e-8));
    CHECK(rem.psi_deriv(1, 3) == doctest::Approx(-y0 * y0 * y0 * std::exp(-y0)).epsilon(1e-12));

    for (auto const& m : test_bank())
        for (double lam : {0.1, 1.0, 10.0})
            CHECK(m.psi_deriv(lam, 1) == doctest::Approx(central_diff(m, lam)).epsilon(1e-6));
}

TEST_CASE("convexity on a grid")
{
    for (auto const& m : test_bank())
        for (int i = 0; i < 50; ++i)
        {
            double lam = 1000.0 * i / 49;
            CHECK(m.psi_deriv(lam, 2) >= 0);
        }
}

TEST_CASE("lambda star")
{
    CHECK(find_lambda_star(bank::binary()) == 1);
    CHECK(find_lambda_star(BranchingMechanism(1, 2)) == doctest::Approx(0.5));
    CHECK(find_lambda_star(bank::remark_atom()) == doctest::Approx(1).epsilon(1e-12));
    for (auto const& m : test_bank())
    {
        double ls = m.lambda_star();
        CHECK(std::abs(m.psi(ls)) < 1e-10 * (1 + std::abs(m.psi_deriv(ls, 1))));
    }
    // psi stays negative: linear with no Levy part
    BranchingMechanism lin(1, 0);
    CHECK_THROWS_AS(lin.lambda_star(), Error);
    // psi'(0) = -1 but int y pi = 1 = alpha: psi -> -pi(R+) < 0
    BranchingMechanism flat(1, 0, LevyMeasure::atomic({{1.0, 1.0}}));
    try
    {
        flat.lambda_star();
        FAIL("expected ConditionA1Violated");
    }
    catch (Error const& e)
    {
        CHECK(e.code() == ErrorCode::ConditionA1Violated);
    }
}

TEST_CASE("normalization")
{
    auto n = normalize_mechanism(BranchingMechanism(2, 2));
    CHECK(n.mechanism.alpha() == doctest::Approx(1));
    CHECK(n.mechanism.beta() == doctest::Approx(1));
    CHECK(n.scale.time_factor == doctest::Approx(2));
    CHECK(n.scale.mass_factor == doctest::Approx(1));
    auto id = normalize_mechanism(bank::binary());
    CHECK(id.scale.identity());
    auto rid = normalize_mechanism(bank::remark_atom());
    CHECK(rid.scale.identity());

    // general case: psi~(lam) == psi(l* lam)/(alpha l*) pointwise
    std::vector<BranchingMechanism> raw = {
        BranchingMechanism(3, 0.7, LevyMeasure::atomic({{0.4, 2.0}, {1.3, 0.5}})),
        BranchingMechanism(0.5, 2.0),
    };
    LevyMeasure::Density d;
    d.c = 0.8;
    d.a = 1.5;
    d.b = 0.3;
    raw.emplace_back(2.0, 0.1, LevyMeasure::exp_poly(d));
    for (auto const& m : raw)
    {
        auto nm = normalize_mechanism(m);
        double ls = m.lambda_star();
        CHECK(nm.mechanism.psi_deriv(0, 1) == doctest::Approx(-1).epsilon(1e-10));
        CHECK(std::abs(nm.mechanism.psi(1)) < 1e-10);
        CHECK(nm.scale.mass_factor == doctest::Approx(ls));
        for (double lam : {0.3, 1.7, 5.0})
            CHECK(nm.mechanism.psi(lam)
                  == doctest::Approx(m.psi(ls * lam) / (m.alpha() * ls)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(normalize_mechanism(BranchingMechanism(-1, 1)), Error);
}

TEST_CASE("exp-poly density against closed forms")
{
    // density y^{-2.5} on (0, inf) truncated by e^{-y}: psi has closed form
    // c Gamma(-a) [(lam+b)^a - b^a - a b^{a-1} lam]
    LevyMeasure::Density d;
    d.c = 1;
    d.a = 1.5;
    d.b = 1;
    BranchingMechanism m(1, 0, LevyMeasure::exp_poly(d));
    double g = std::tgamma(-1.5);
    for (double lam : {0.01, 1.0, 30.0})
    {
        double exact = -lam + g * (std::pow(lam + 1, 1.5) - 1 - 1.5 * lam);
        CHECK(m.psi(lam) == doctest::Approx(exact).epsilon(1e-9));
    }
    LevyMeasure::Density bad;
    bad.c = 1;
    bad.a = 1.0;
    CHECK_THROWS_AS(LevyMeasure::exp_poly(bad), Error);
    auto pt = bank::power_tail();
    CHECK_THROWS_AS(pt.psi_deriv(0, 2), Error);
}

TEST_CASE("subcritical shift")
{
    for (auto const& m : test_bank())
    {
        auto s = m.subcritical();
        CHECK(s.psi_deriv(0, 1) > 0);
        for (double lam : {0.0, 0.5, 3.0})
            CHECK(s.psi(lam) == doctest::Approx(m.psi(lam + 1)).epsilon(1e-12).scale(1));
    }
    auto s = bank::binary().subcritical();
    CHECK(s.psi(2) == doctest::Approx(6));  // u^2 + u
}

TEST_CASE("condition report")
{
    auto rb = check_conditions(bank::binary());
    CHECK(rb.a1);
    CHECK(rb.a2);
    CHECK(rb.a3.holds);
    CHECK(rb.a3.a == doctest::Approx(1));
    CHECK(rb.a3.b == doctest::Approx(1));
    CHECK(rb.a3.gamma == 1);
    CHECK(rb.llogl.holds());
    CHECK(rb.extra_2_19.holds());

    auto rr = check_conditions(bank::remark_atom());
    CHECK(rr.a2);
    CHECK_FALSE(rr.a3.holds);
    CHECK(rr.llogl.holds());
    CHECK(rr.extra_2_19.verdict == Verdict::Infinite);

    auto rp = check_conditions(bank::power_tail());
    CHECK(rp.a1);
    CHECK(rp.a2);
    CHECK(*rp.a2_witness < 0.5);
    CHECK(tail_moment_evidence(bank::power_tail(), 0.25).verdict == Verdict::Finite);
    CHECK(tail_moment_evidence(bank::power_tail(), 0.5).verdict == Verdict::Infinite);
    CHECK(tail_moment_evidence(bank::power_tail(), 0.75).verdict == Verdict::Infinite);
    CHECK(rp.llogl.holds());
    CHECK_FALSE(rp.a3.holds);

    auto rm = check_conditions(bank::mixture());
    CHECK(rm.a3.holds);
    CHECK(rm.extra_2_19.holds());
}

TEST_CASE("Lemma A.2 equivalence")
{
    auto r = check_lemmaA2_equivalence(bank::binary(), 0.5);
    CHECK(r.tail.verdict == Verdict::Finite);
    CHECK(r.inner.verdict == Verdict::Finite);
    CHECK(r.agree);
    auto pt = bank::power_tail();
    auto f = check_lemmaA2_equivalence(pt, 0.25);
    CHECK(f.tail.verdict == Verdict::Finite);
    CHECK(f.inner.verdict == Verdict::Finite);
    CHECK(f.agree);
    auto i = check_lemmaA2_equivalence(pt, 0.75);
    CHECK(i.tail.verdict == Verdict::Infinite);
    CHECK(i.inner.verdict == Verdict::Infinite);
    CHECK(i.agree);
    for (auto const& m : test_bank())
        for (double beta : {0.25, 0.75})
            CHECK(check_lemmaA2_equivalence(m, beta).agree);
}
