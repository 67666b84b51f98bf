#include "sbx/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

namespace sbx
{
double integrate(RealFn const& f, double a, double b, double rel_tol)
{
    if (!(b > a))
        return 0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    return GK::integrate(f, a, b, 12, rel_tol);
}

double integrate_power_density(RealFn const& g, double c, double a, double b,
                               double y_min, double y_max)
{
    auto integrand = [&](double s) {
        double y = std::exp(s);
        double v = g(y);
        if (v == 0)
            return 0.0;
        return v * c * std::exp(-a * s - b * y);
    };
    constexpr double s_floor = -700;
    constexpr double s_ceil = 700;
    double lo = y_min > 0 ? std::log(y_min) : -std::numeric_limits<double>::infinity();
    double hi = std::isfinite(y_max) ? std::log(y_max) : std::numeric_limits<double>::infinity();
    double center = std::clamp(0.0, std::max(lo, s_floor), std::min(hi, s_ceil));

    double total = 0;
    auto walk = [&](double from, double limit, double dir) {
        int quiet = 0;
        double s = from;
        for (int i = 0; i < 4000; ++i)
        {
            double next = s + dir;
            bool last = (dir > 0) ? next >= limit : next <= limit;
            if (last)
                next = limit;
            double piece = dir > 0 ? integrate(integrand, s, next, 1e-13)
                                   : integrate(integrand, next, s, 1e-13);
            total += piece;
            if (last)
                return;
            if (std::abs(piece) <= 1e-17 * std::abs(total))
            {
                if (++quiet >= 3)
                    return;
            }
            else
            {
                quiet = 0;
            }
            s = next;
        }
    };
    walk(center, std::min(hi, s_ceil), +1);
    walk(center, std::max(lo, s_floor), -1);
    return total;
}

std::string to_string(Verdict v)
{
    switch (v)
    {
        case Verdict::Finite: return "finite";
        case Verdict::Infinite: return "infinite";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

SeriesEvidence classify_increments(std::function<double(int)> const& increment,
                                   int max_terms, double abs_tol)
{
    constexpr int window = 3;
    SeriesEvidence ev;
    std::vector<double> ratios;
    for (int k = 0; k < max_terms; ++k)
    {
        double inc = increment(k);
        if (!std::isfinite(inc))
        {
            ev.verdict = Verdict::Infinite;
            ev.note = "non-finite piece at step " + std::to_string(k);
            ev.partial_sum = inc;
            ev.increments.push_back(inc);
            return ev;
        }
        inc = std::abs(inc);
        ev.increments.push_back(inc);
        ev.partial_sum += inc;
        if (k > 0)
        {
            double prev = ev.increments[k - 1];
            ratios.push_back(prev > 0 ? inc / prev : (inc > 0 ? 1e300 : 0.0));
        }
        if (k >= window && inc <= abs_tol * std::max(1.0, ev.partial_sum))
        {
            ev.verdict = Verdict::Finite;
            ev.note = "pieces negligible";
            return ev;
        }
        if (static_cast<int>(ratios.size()) >= window)
        {
            auto tail = ratios.end() - window;
            bool grow = std::all_of(tail, ratios.end(), [](double r) { return r > 1.1; });
            if (grow)
            {
                ev.verdict = Verdict::Infinite;
                ev.note = "pieces grow geometrically";
                return ev;
            }
        }
    }
    if (ratios.size() >= window)
    {
        auto tail = ratios.end() - window;
        double rmax = *std::max_element(tail, ratios.end());
        double rmin = *std::min_element(tail, ratios.end());
        if (rmax < 0.9)
        {
            ev.verdict = Verdict::Finite;
            ev.note = "geometric decay, tail bound "
                      + std::to_string(ev.increments.back() * rmax / (1 - rmax));
            return ev;
        }
        if (rmin >= 0.999)
        {
            ev.verdict = Verdict::Infinite;
            ev.note = "pieces do not decrease";
            return ev;
        }
    }
    ev.verdict = Verdict::Indeterminate;
    ev.note = "ratios did not settle";
    return ev;
}

}  // namespace sbx
