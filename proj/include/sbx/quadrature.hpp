#pragma once

#include <functional>
#include <string>
#include <vector>

namespace sbx
{
using RealFn = std::function<double(double)>;

//! Adaptive Gauss-Kronrod on a finite interval.
double integrate(RealFn const& f, double a, double b, double rel_tol = 1e-12);

/*!
 * Integral of g(y) c y^(-1-a) e^(-b y) over (y_min, y_max), done in
 * log-coordinates with unit chunks walked outwards until they are negligible.
 */
double integrate_power_density(RealFn const& g, double c, double a, double b,
                               double y_min, double y_max);

enum class Verdict
{
    Finite,
    Infinite,
    Indeterminate,
};

std::string to_string(Verdict v);

struct SeriesEvidence
{
    Verdict verdict = Verdict::Indeterminate;
    double partial_sum = 0;
    std::vector<double> increments;
    std::string note;
};

/*!
 * Classify an integral split into nonnegative pieces increment(0),
 * increment(1), ... by the ratio of successive pieces.
 *
 * Finite once the pieces vanish or decay geometrically (ratio < 0.9);
 * infinite when they grow (ratio > 1.1) or stop decreasing (ratio >= 0.999)
 * through the last pieces; indeterminate otherwise.
 */
SeriesEvidence classify_increments(std::function<double(int)> const& increment,
                                   int max_terms, double abs_tol = 1e-14);

}  // namespace sbx
