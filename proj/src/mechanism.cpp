#include "sbx/mechanism.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "sbx/error.hpp"

namespace sbx
{
namespace
{
// e^{-x} - 1 + x without cancellation for small x
double h_psi(double x)
{
    if (std::abs(x) < 1e-3)
    {
        double x2 = x * x;
        return x2 * (0.5 - x / 6 + x2 / 24 - x2 * x / 120 + x2 * x2 / 720);
    }
    return std::expm1(-x) + x;
}

bool is_inf(double v) { return std::isinf(v); }
}  // namespace

LevyMeasure LevyMeasure::atomic(std::vector<Atom> atoms)
{
    for (auto const& a : atoms)
        require(a.weight > 0 && a.location > 0 && std::isfinite(a.weight)
                    && std::isfinite(a.location),
                ErrorCode::InvalidArgument, "atomic Levy measure needs positive finite atoms");
    LevyMeasure m;
    if (atoms.empty())
        return m;
    m.kind_ = Kind::Atomic;
    m.atoms_ = std::move(atoms);
    return m;
}

LevyMeasure LevyMeasure::exp_poly(Density d)
{
    require(d.c > 0 && d.b >= 0 && d.y_min >= 0 && d.y_max > d.y_min,
            ErrorCode::InvalidArgument, "exp_poly density needs c > 0, b >= 0, y_min < y_max");
    if (d.y_min == 0)
        require(d.a < 2, ErrorCode::NonIntegrableLevyMeasure,
                "int y^2 pi(dy) diverges near 0 (a >= 2)");
    if (is_inf(d.y_max) && d.b == 0)
        require(d.a > 1, ErrorCode::NonIntegrableLevyMeasure,
                "int y pi(dy) diverges at infinity (a <= 1, b = 0)");
    LevyMeasure m;
    m.kind_ = Kind::ExpPoly;
    m.density_ = d;
    return m;
}

double LevyMeasure::integrate(RealFn const& g) const
{
    switch (kind_)
    {
        case Kind::Zero: return 0;
        case Kind::Atomic:
        {
            double s = 0;
            for (auto const& a : atoms_)
                s += a.weight * g(a.location);
            return s;
        }
        case Kind::ExpPoly:
            return integrate_power_density(g, density_.c, density_.a, density_.b,
                                           density_.y_min, density_.y_max);
    }
    return 0;
}

bool LevyMeasure::moment_finite(double p, double lam) const
{
    if (kind_ != Kind::ExpPoly)
        return true;
    auto const& d = density_;
    if (d.y_min == 0 && !(p - d.a > 0))
        return false;
    if (is_inf(d.y_max) && !(lam + d.b > 0) && !(p - d.a < 0))
        return false;
    return true;
}

BranchingMechanism::BranchingMechanism(double alpha, double beta, LevyMeasure levy)
    : alpha_(alpha), beta_(beta), levy_(std::move(levy))
{
    require(std::isfinite(alpha) && std::isfinite(beta) && beta >= 0,
            ErrorCode::InvalidArgument, "mechanism needs finite alpha and beta >= 0");
}

double BranchingMechanism::psi(double lam) const
{
    require(lam >= 0, ErrorCode::NegativeArgument, "psi evaluated at negative argument");
    double v = -alpha_ * lam + beta_ * lam * lam;
    if (lam == 0 || levy_.kind() == LevyMeasure::Kind::Zero)
        return v;
    return v + levy_.integrate([lam](double y) { return h_psi(lam * y); });
}

double BranchingMechanism::psi_deriv(double lam, int k) const
{
    require(lam >= 0, ErrorCode::NegativeArgument, "psi derivative at negative argument");
    require(k >= 1, ErrorCode::InvalidArgument, "derivative order must be >= 1");
    if (k == 1)
        return -alpha_ + 2 * beta_ * lam
               + (lam == 0 ? 0.0
                           : levy_.integrate([lam](double y) { return -y * std::expm1(-lam * y); }));
    require(levy_.moment_finite(k, lam), ErrorCode::MomentDivergence,
            "int y^" + std::to_string(k) + " e^{-lam y} pi(dy) diverges");
    double m = levy_.integrate([lam, k](double y) {
        return std::exp(k * std::log(y) - lam * y);
    });
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return (k == 2 ? 2 * beta_ : 0.0) + sign * m;
}

double BranchingMechanism::psi_prime_increment(double s) const
{
    require(s >= 0, ErrorCode::NegativeArgument, "negative argument");
    if (s == 0)
        return 0;
    return 2 * beta_ * s + levy_.integrate([s](double y) { return -y * std::expm1(-s * y); });
}

double BranchingMechanism::lambda_star() const
{
    if (lambda_star_)
        return *lambda_star_;
    require(psi_deriv(0, 1) < 0, ErrorCode::NotSupercritical,
            "psi'(0) >= 0: no positive root");
    double root;
    if (quadratic())
    {
        require(beta_ > 0, ErrorCode::ConditionA1Violated, "psi is linear and decreasing");
        root = alpha_ / beta_;
    }
    else
    {
        double hi = 1;
        while (psi(hi) <= 0)
        {
            hi *= 2;
            require(hi <= 1e12, ErrorCode::ConditionA1Violated,
                    "psi stays <= 0 up to 1e12");
        }
        double lo = hi / 2;
        while (psi(lo) >= 0)
        {
            lo /= 2;
            require(lo > 1e-300, ErrorCode::ConditionA1Violated, "no negative bracket");
        }
        for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i)
        {
            double mid = 0.5 * (lo + hi);
            (psi(mid) < 0 ? lo : hi) = mid;
        }
        root = 0.5 * (lo + hi);
        for (int i = 0; i < 3; ++i)
        {
            double d = psi_deriv(root, 1);
            if (!(d > 0))
                break;
            double next = root - psi(root) / d;
            if (!(next > lo * (1 - 1e-12) && next < hi * (1 + 1e-12)))
                break;
            if (std::abs(next - root) <= 1e-16 * root)
            {
                root = next;
                break;
            }
            root = next;
        }
    }
    lambda_star_ = root;
    return root;
}

BranchingMechanism BranchingMechanism::shifted(double s) const
{
    require(s >= 0, ErrorCode::NegativeArgument, "negative shift");
    double alpha_s = -psi_deriv(s, 1);
    switch (levy_.kind())
    {
        case LevyMeasure::Kind::Zero: return {alpha_s, beta_};
        case LevyMeasure::Kind::Atomic:
        {
            std::vector<LevyMeasure::Atom> atoms;
            for (auto const& a : levy_.atoms())
                atoms.push_back({a.weight * std::exp(-s * a.location), a.location});
            return {alpha_s, beta_, LevyMeasure::atomic(atoms)};
        }
        case LevyMeasure::Kind::ExpPoly:
        {
            auto d = levy_.density();
            d.b += s;
            return {alpha_s, beta_, LevyMeasure::exp_poly(d)};
        }
    }
    return *this;
}

BranchingMechanism BranchingMechanism::subcritical() const
{
    return shifted(lambda_star());
}

bool BranchingMechanism::is_normalized(double tol) const
{
    return std::abs(psi_deriv(0, 1) + 1) <= tol && std::abs(psi(1)) <= tol;
}

std::string BranchingMechanism::describe() const
{
    std::ostringstream os;
    os.precision(17);
    os << "alpha=" << alpha_ << ";beta=" << beta_ << ";pi=";
    switch (levy_.kind())
    {
        case LevyMeasure::Kind::Zero: os << "zero"; break;
        case LevyMeasure::Kind::Atomic:
            os << "atomic";
            for (auto const& a : levy_.atoms())
                os << "(" << a.weight << "@" << a.location << ")";
            break;
        case LevyMeasure::Kind::ExpPoly:
        {
            auto const& d = levy_.density();
            os << "exp_poly(c=" << d.c << ",a=" << d.a << ",b=" << d.b << ",range=" << d.y_min
               << ".." << d.y_max << ")";
            break;
        }
    }
    return os.str();
}

double eval_psi(BranchingMechanism const& m, double lam) { return m.psi(lam); }

double eval_psi_deriv(BranchingMechanism const& m, double lam, int k)
{
    return m.psi_deriv(lam, k);
}

double find_lambda_star(BranchingMechanism const& m) { return m.lambda_star(); }

NormalizedMechanism normalize_mechanism(BranchingMechanism const& m)
{
    require(m.psi_deriv(0, 1) < 0, ErrorCode::NotSupercritical, "psi'(0) >= 0");
    double ls = m.lambda_star();
    double al = m.alpha();
    ScaleRecord scale{al, std::sqrt(al), ls};
    double beta = m.beta() * ls / al;
    auto const& levy = m.levy();
    LevyMeasure pi;
    switch (levy.kind())
    {
        case LevyMeasure::Kind::Zero: break;
        case LevyMeasure::Kind::Atomic:
        {
            std::vector<LevyMeasure::Atom> atoms;
            for (auto const& a : levy.atoms())
                atoms.push_back({a.weight / (al * ls), a.location * ls});
            pi = LevyMeasure::atomic(atoms);
            break;
        }
        case LevyMeasure::Kind::ExpPoly:
        {
            auto d = levy.density();
            d.c = d.c * std::pow(ls, d.a - 1) / al;
            d.b = d.b / ls;
            d.y_min *= ls;
            d.y_max *= ls;
            pi = LevyMeasure::exp_poly(d);
            break;
        }
    }
    if (ls == 1 && al == 1)
        return {m, scale};
    return {BranchingMechanism(1.0, beta, pi), scale};
}

namespace
{
// int over (lo, hi] of g against pi
double integrate_range(LevyMeasure const& pi, RealFn const& g, double lo, double hi)
{
    switch (pi.kind())
    {
        case LevyMeasure::Kind::Zero: return 0;
        case LevyMeasure::Kind::Atomic:
        {
            double s = 0;
            for (auto const& a : pi.atoms())
                if (a.location > lo && a.location <= hi)
                    s += a.weight * g(a.location);
            return s;
        }
        case LevyMeasure::Kind::ExpPoly:
        {
            auto const& d = pi.density();
            double a = std::max(lo, d.y_min);
            double b = std::min(hi, d.y_max);
            if (!(b > a))
                return 0;
            auto f = [&](double s) {
                double y = std::exp(s);
                return g(y) * d.c * std::exp(-d.a * s - d.b * y);
            };
            return integrate(f, std::log(a), std::log(b), 1e-10);
        }
    }
    return 0;
}

SeriesEvidence tail_evidence(LevyMeasure const& pi, RealFn const& g)
{
    return classify_increments(
        [&](int k) { return integrate_range(pi, g, std::pow(10.0, k), std::pow(10.0, k + 1)); },
        12);
}

std::string describe(SeriesEvidence const& ev)
{
    std::ostringstream os;
    os << to_string(ev.verdict) << " (" << ev.note << "; partial=" << ev.partial_sum << ")";
    return os.str();
}

A3Fit fit_a3(BranchingMechanism const& m)
{
    A3Fit fit;
    double p5 = m.psi(1e5);
    double p6 = m.psi(1e6);
    if (!(p5 > 0 && p6 > 0))
        return fit;
    double gamma = std::log10(p6 / p5) - 1;
    if (gamma >= 0.995)
        gamma = 1;
    fit.gamma = gamma;
    if (gamma < 0.05)
        return fit;
    std::vector<double> grid;
    for (int i = 0; i <= 120; ++i)
        grid.push_back(std::pow(10.0, -6 + 0.1 * i));
    for (double a : {m.alpha(), 2 * m.alpha()})
    {
        double b = std::numeric_limits<double>::infinity();
        for (double lam : grid)
            b = std::min(b, (m.psi(lam) + a * lam) / std::pow(lam, 1 + gamma));
        if (b > 0 && std::isfinite(b))
        {
            fit.holds = true;
            fit.a = a;
            fit.b = b;
            double margin = std::numeric_limits<double>::infinity();
            for (double lam : grid)
                margin = std::min(margin, m.psi(lam) + a * lam - b * std::pow(lam, 1 + gamma));
            fit.min_margin = margin;
            return fit;
        }
    }
    return fit;
}

// int_{z}^inf dy / sqrt(int_1^y psi), decade pieces starting near z = 2
ConditionEntry extra_condition(BranchingMechanism const& m, bool& nonpositive)
{
    constexpr int per_decade = 100;
    constexpr int decades = 11;
    constexpr int start = 30;  // y = 10^0.3
    int n = start + per_decade * decades + 1;
    std::vector<double> cum(n, 0.0);
    auto node = [](int j) { return std::pow(10.0, static_cast<double>(j) / per_decade); };
    double ds = std::log(10.0) / per_decade;
    double prev = m.psi(1.0) * 1.0;
    for (int j = 1; j < n; ++j)
    {
        double y = node(j);
        double cur = m.psi(y) * y;
        cum[j] = cum[j - 1] + 0.5 * ds * (prev + cur);
        prev = cur;
    }
    nonpositive = !(cum[start] > 0);
    ConditionEntry e;
    if (nonpositive)
    {
        e.verdict = Verdict::Indeterminate;
        e.evidence = "inner integral non-positive at the lower limit";
        return e;
    }
    auto integrand = [&](int j) { return node(j) / std::sqrt(cum[j]); };
    auto ev = classify_increments(
        [&](int k) {
            double s = 0;
            int j0 = start + per_decade * k;
            for (int j = j0; j < j0 + per_decade; ++j)
                s += 0.5 * ds * (integrand(j) + integrand(j + 1));
            return s;
        },
        decades);
    e.verdict = ev.verdict;
    e.evidence = describe(ev);
    return e;
}
}  // namespace

SeriesEvidence tail_moment_evidence(BranchingMechanism const& m, double beta)
{
    return tail_evidence(m.levy(), [beta](double y) { return std::pow(y, 1 + beta); });
}

ConditionReport check_conditions(BranchingMechanism const& m)
{
    ConditionReport r;
    try
    {
        r.lambda_star = m.lambda_star();
        r.a1 = true;
    }
    catch (Error const&)
    {
        r.a1 = false;
    }
    std::ostringstream a2;
    for (double beta : {0.1, 0.25, 0.5, 0.9})
    {
        auto ev = tail_moment_evidence(m, beta);
        a2 << "beta=" << beta << ":" << describe(ev) << "; ";
        if (ev.verdict == Verdict::Finite && !r.a2)
        {
            r.a2 = true;
            r.a2_witness = beta;
        }
    }
    r.a2_evidence = a2.str();
    if (r.a1)
        r.a3 = fit_a3(m);
    auto ll = tail_evidence(m.levy(), [](double y) {
        double l = std::log(y);
        return y * l * l;
    });
    r.llogl = {ll.verdict, describe(ll)};
    if (r.a1)
        r.extra_2_19 = extra_condition(m, r.extra_nonpositive_flag);
    else
        r.extra_2_19 = {Verdict::Indeterminate, "psi has no positive root"};
    return r;
}

EquivalenceReport check_lemmaA2_equivalence(BranchingMechanism const& m, double beta)
{
    require(beta > 0 && beta < 1, ErrorCode::InvalidArgument, "beta must lie in (0,1)");
    require(std::abs(m.psi_deriv(0, 1) + 1) <= 1e-10, ErrorCode::NotNormalized,
            "Lemma A.2 check needs psi'(0) = -1");
    EquivalenceReport rep;
    rep.beta = beta;
    rep.tail = tail_moment_evidence(m, beta);
    // pieces [1e-2, 1], [1e-3, 1e-2], ..., [1e-8, 1e-7]
    rep.inner = classify_increments(
        [&](int k) {
            double hi = k == 0 ? 1.0 : std::pow(10.0, -(k + 1));
            double lo = std::pow(10.0, -(k + 2));
            auto f = [&](double s) {
                double x = std::exp(s);
                return m.psi_prime_increment(x) * std::exp(-beta * s);
            };
            return integrate(f, std::log(lo), std::log(hi), 1e-9);
        },
        7);
    rep.agree = rep.tail.verdict != Verdict::Indeterminate && rep.tail.verdict == rep.inner.verdict;
    return rep;
}

double remark_root_y0()
{
    double lo = 1, hi = 2;
    for (int i = 0; i < 200; ++i)
    {
        double mid = 0.5 * (lo + hi);
        double f = std::exp(-mid) - 2 + mid;
        (f < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace bank
{
BranchingMechanism binary() { return {1.0, 1.0}; }

BranchingMechanism remark_atom()
{
    return {1.0, 0.0, LevyMeasure::atomic({{1.0, remark_root_y0()}})};
}

BranchingMechanism mixture()
{
    return {1.0, 0.5, LevyMeasure::atomic({{0.5, remark_root_y0()}})};
}

BranchingMechanism power_tail()
{
    LevyMeasure::Density d;
    d.c = 1;
    d.a = 1.5;
    d.b = 0;
    d.y_min = 1;
    return {1.0, 0.0, LevyMeasure::exp_poly(d)};
}
}  // namespace bank

}  // namespace sbx
