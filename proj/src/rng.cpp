#include "sbx/rng.hpp"

#include <cmath>

namespace sbx
{
// Inversion for small means, Hormann's PTRS otherwise.
std::uint64_t RngStream::poisson(double mean)
{
    if (!(mean > 0))
        return 0;
    if (mean < 10)
    {
        double p = std::exp(-mean);
        double cdf = p;
        double u = uniform();
        std::uint64_t k = 0;
        while (u > cdf && k < 1000)
        {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    double slam = std::sqrt(mean);
    double loglam = std::log(mean);
    double b = 0.931 + 2.53 * slam;
    double a = -0.059 + 0.02483 * b;
    double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    double vr = 0.9277 - 3.6224 / (b - 2);
    while (true)
    {
        double u = uniform() - 0.5;
        double v = uniform_pos();
        double us = 0.5 - std::abs(u);
        double k = std::floor((2 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr)
            return static_cast<std::uint64_t>(k);
        if (k < 0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b)
            <= -mean + k * loglam - std::lgamma(k + 1))
            return static_cast<std::uint64_t>(k);
    }
}
}  // namespace sbx
