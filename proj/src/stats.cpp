#include "sbx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "sbx/error.hpp"
#include "sbx/kpp_solver.hpp"

namespace sbx
{
bool McEstimate::covers(double target, double k, double allowance) const
{
    return std::abs(value - target) <= k * std_error + allowance;
}

McEstimate mean_estimate(std::vector<double> const& xs)
{
    require(!xs.empty(), ErrorCode::Empty, "no samples");
    McEstimate e;
    e.n = xs.size();
    double mean = 0;
    double m2 = 0;
    std::size_t k = 0;
    for (double x : xs)
    {
        ++k;
        double d = x - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (x - mean);
    }
    e.value = mean;
    if (e.n > 1)
        e.std_error = std::sqrt(m2 / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
    return e;
}

McEstimate paired_difference(std::vector<double> const& a, std::vector<double> const& b)
{
    require(a.size() == b.size(), ErrorCode::InvalidArgument, "paired samples differ in size");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d[i] = a[i] - b[i];
    return mean_estimate(d);
}

double ks_distance(std::vector<double> a, std::vector<double> b)
{
    require(!a.empty() && !b.empty(), ErrorCode::Empty, "KS needs two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_distance(std::vector<double> a, std::function<double(double)> const& cdf)
{
    require(!a.empty(), ErrorCode::Empty, "KS needs a nonempty sample");
    std::sort(a.begin(), a.end());
    double n = static_cast<double>(a.size());
    double d = 0;
    for (std::size_t i = 0; i < a.size();)
    {
        std::size_t j = i;
        while (j < a.size() && a[j] == a[i])
            ++j;
        double f = cdf(a[i]);
        // nothing lies below an atom at -inf, so only its right side counts
        if (a[i] > -std::numeric_limits<double>::infinity())
            d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(j) / n - f));
        i = j;
    }
    return d;
}

double kolmogorov_survival(double x)
{
    if (x <= 0)
        return 1;
    if (x < 1)
    {
        // theta-function form converges fast for small x
        double s = 0;
        double pi2 = M_PI * M_PI;
        for (int k = 1; k < 50; k += 2)
            s += std::exp(-k * k * pi2 / (8 * x * x));
        return std::clamp(1 - std::sqrt(2 * M_PI) / x * s, 0.0, 1.0);
    }
    double s = 0;
    for (int k = 1; k < 100; ++k)
    {
        double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 2 : -2) * term;
        if (term < 1e-18)
            break;
    }
    return std::clamp(s, 0.0, 1.0);
}

double ks_pvalue(double d, std::size_t n)
{
    double sn = std::sqrt(static_cast<double>(n));
    // Stephens' small-sample correction
    return kolmogorov_survival(d * (sn + 0.12 + 0.11 / sn));
}

double ks_pvalue(double d, std::size_t n, std::size_t m)
{
    double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
    double sn = std::sqrt(ne);
    return kolmogorov_survival(d * (sn + 0.12 + 0.11 / sn));
}

ChiSquareResult chi_square(std::vector<double> const& observed,
                           std::vector<double> const& expected, int fitted)
{
    require(observed.size() == expected.size() && observed.size() >= 2,
            ErrorCode::InvalidArgument, "chi-square needs matching bins");
    ChiSquareResult r;
    for (std::size_t i = 0; i < observed.size(); ++i)
    {
        require(expected[i] > 0, ErrorCode::InvalidArgument, "expected count must be positive");
        double d = observed[i] - expected[i];
        r.statistic += d * d / expected[i];
    }
    r.dof = static_cast<int>(observed.size()) - 1 - fitted;
    require(r.dof >= 1, ErrorCode::InvalidArgument, "no degrees of freedom left");
    boost::math::chi_squared dist(r.dof);
    r.pvalue = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

double gumbel_mixture_cdf(std::vector<double> const& dM, double c, double x)
{
    require(!dM.empty(), ErrorCode::Empty, "no derivative martingale samples");
    double scale = c * std::exp(-kSqrt2 * x);
    double s = 0;
    for (double m : dM)
    {
        require(m >= 0, ErrorCode::NegativeSample, "derivative martingale sample < 0");
        s += m == 0 ? 1 : std::exp(-scale * m);
    }
    return s / static_cast<double>(dM.size());
}

McEstimate laplace_mc(std::vector<PointMeasure> const& samples,
                      std::function<double(double)> const& phi)
{
    require(!samples.empty(), ErrorCode::Empty, "no samples");
    std::vector<double> v;
    v.reserve(samples.size());
    for (auto const& s : samples)
        v.push_back(std::exp(-s.integrate(phi)));
    return mean_estimate(v);
}

MartingaleReport martingale_test(std::vector<std::vector<double>> const& values,
                                 std::vector<double> const& times, double initial,
                                 double threshold)
{
    require(times.size() >= 2, ErrorCode::InvalidArgument, "need at least two times");
    require(!values.empty(), ErrorCode::Empty, "no trajectories");
    MartingaleReport rep;
    for (std::size_t j = 0; j < times.size(); ++j)
    {
        std::vector<double> col;
        col.reserve(values.size());
        for (auto const& row : values)
        {
            require(row.size() == times.size(), ErrorCode::InvalidArgument,
                    "trajectory length differs from times");
            col.push_back(row[j]);
        }
        auto e = mean_estimate(col);
        MartingaleRow r;
        r.t = times[j];
        r.mean = e.value;
        r.std_error = e.std_error;
        double diff = e.value - initial;
        if (e.std_error > 0)
            r.z = diff / e.std_error;
        else
            r.z = diff == 0 ? 0 : std::copysign(INFINITY, diff);
        r.flagged = std::abs(r.z) > threshold;
        rep.any_flagged = rep.any_flagged || r.flagged;
        rep.rows.push_back(r);
    }
    return rep;
}

Regression linear_regression(std::vector<double> const& x, std::vector<double> const& y)
{
    require(x.size() == y.size() && x.size() >= 3, ErrorCode::InvalidArgument,
            "regression needs matched samples");
    double n = static_cast<double>(x.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0;
    double sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0, ErrorCode::InvalidArgument, "regressor is constant");
    Regression r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double meat = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double e = y[i] - r.intercept - r.slope * x[i];
        meat += (x[i] - mx) * (x[i] - mx) * e * e;
    }
    r.slope_stderr = std::sqrt(meat) / sxx;
    return r;
}

double median(std::vector<double> xs)
{
    require(!xs.empty(), ErrorCode::Empty, "no samples");
    std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<long>(mid), xs.end());
    double m = xs[mid];
    if (xs.size() % 2 == 0)
        m = (m + *std::max_element(xs.begin(), xs.begin() + static_cast<long>(mid))) / 2;
    return m;
}

}  // namespace sbx
