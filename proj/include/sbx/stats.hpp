#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sbx/point_measure.hpp"

namespace sbx
{
struct McEstimate
{
    double value = 0;
    double std_error = 0;
    std::size_t n = 0;

    //! |value - target| <= k stderr + allowance.
    bool covers(double target, double k = 3, double allowance = 0) const;
};

//! Sample mean with its standard error.
McEstimate mean_estimate(std::vector<double> const& xs);

//! Mean of a - b over pairs.
McEstimate paired_difference(std::vector<double> const& a, std::vector<double> const& b);

//! Two-sample sup distance between empirical CDFs.
double ks_distance(std::vector<double> a, std::vector<double> b);
//! One-sample sup distance against a continuous CDF; -inf samples form an
//! atom at -inf that the CDF should carry as its limit.
double ks_distance(std::vector<double> a, std::function<double(double)> const& cdf);

//! Asymptotic Kolmogorov tail P(sqrt(n) D > x).
double kolmogorov_survival(double x);
//! p-value of a one-sample statistic d from n draws.
double ks_pvalue(double d, std::size_t n);
//! p-value of a two-sample statistic.
double ks_pvalue(double d, std::size_t n, std::size_t m);

struct ChiSquareResult
{
    double statistic = 0;
    int dof = 0;
    double pvalue = 1;
};

//! Pearson test of counts against expected counts (same length).
ChiSquareResult chi_square(std::vector<double> const& observed,
                           std::vector<double> const& expected, int fitted = 0);

//! (1/n) sum exp(-c dM_i e^{-sqrt2 x}).
double gumbel_mixture_cdf(std::vector<double> const& dM, double c, double x);

//! Mean and stderr of exp(-<phi, sample>).
McEstimate laplace_mc(std::vector<PointMeasure> const& samples,
                      std::function<double(double)> const& phi);

struct MartingaleRow
{
    double t = 0;
    double mean = 0;
    double std_error = 0;
    double z = 0;
    bool flagged = false;
};

struct MartingaleReport
{
    std::vector<MartingaleRow> rows;
    bool any_flagged = false;
};

/*!
 * values[i][j] is replica i at times[j]. The z-score of each column mean is
 * taken against `initial`; |z| > 4 is flagged.
 */
MartingaleReport martingale_test(std::vector<std::vector<double>> const& values,
                                 std::vector<double> const& times, double initial,
                                 double threshold = 4);

struct Regression
{
    double slope = 0;
    double intercept = 0;
    //! Heteroskedasticity-robust (HC0) standard error of the slope.
    double slope_stderr = 0;
};

Regression linear_regression(std::vector<double> const& x, std::vector<double> const& y);

double median(std::vector<double> xs);

}  // namespace sbx
