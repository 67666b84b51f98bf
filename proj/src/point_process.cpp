#include "sbx/point_process.hpp"

#include <algorithm>
#include <cmath>

#include "sbx/error.hpp"

namespace sbx
{
void DecorationBank::validate() const
{
    require(!samples.empty(), ErrorCode::EmptyBank, "decoration bank is empty");
    for (auto const& s : samples)
        require(!s.empty() && s.max() == 0, ErrorCode::InvalidArgument,
                "decoration must have its top atom at 0");
}

PointMeasure sample_exponential_ppp(double c, double L, RngStream& rng)
{
    require(c >= 0, ErrorCode::InvalidArgument, "intensity scale must be >= 0");
    PointMeasure m;
    if (c == 0)
        return m;
    auto n = rng.poisson(c * std::exp(-kSqrt2 * L));
    for (std::uint64_t i = 0; i < n; ++i)
        m.add(L + rng.exponential(kSqrt2));
    return m;
}

PointMeasure sample_dppp(double c, std::vector<double> const& shift_randomizer,
                         DecorationBank const& bank, double L, double report_from,
                         RngStream& rng)
{
    require(!bank.samples.empty(), ErrorCode::EmptyBank, "decoration bank is empty");
    require(!shift_randomizer.empty(), ErrorCode::Empty, "no shift samples");
    require(report_from >= L, ErrorCode::InvalidArgument, "reporting window below truncation");
    double dM = shift_randomizer[rng.index(shift_randomizer.size())];
    require(dM >= 0, ErrorCode::NegativeSample, "negative shift sample");
    PointMeasure out;
    auto atoms = sample_exponential_ppp(c * dM, L, rng);
    for (double e : atoms.positions)
    {
        auto const& d = bank.samples[rng.index(bank.samples.size())];
        for (std::size_t j = 0; j < d.size(); ++j)
        {
            double x = d.positions[j] + e;
            if (x > report_from)
                out.add(x, d.masses[j]);
        }
    }
    return out;
}

PointMeasure sample_prm(PointMeasure const& intensity, RngStream& rng)
{
    double total = intensity.total_mass();
    require(std::isfinite(total), ErrorCode::InfiniteIntensity, "intensity is not finite");
    PointMeasure out;
    for (std::size_t i = 0; i < intensity.size(); ++i)
    {
        require(intensity.masses[i] >= 0, ErrorCode::InvalidArgument, "negative intensity");
        auto n = rng.poisson(intensity.masses[i]);
        for (std::uint64_t k = 0; k < n; ++k)
            out.add(intensity.positions[i]);
    }
    return out;
}

PointMeasure sample_prm(Field const& density, RngStream& rng)
{
    double dx = density.grid.dx();
    PointMeasure out;
    for (std::size_t i = 0; i < density.values.size(); ++i)
    {
        double v = density.values[i];
        require(std::isfinite(v), ErrorCode::InfiniteIntensity, "intensity is not finite");
        require(v >= 0, ErrorCode::InvalidArgument, "negative intensity");
        double a = std::max(density.grid.x(i) - dx / 2, density.grid.x_min);
        double b = std::min(density.grid.x(i) + dx / 2, density.grid.x_max);
        auto n = rng.poisson(v * (b - a));
        for (std::uint64_t k = 0; k < n; ++k)
            out.add(a + (b - a) * rng.uniform());
    }
    return out;
}

namespace
{
void require_compact(Profile const& phi)
{
    require(phi.left_value() == 0 && phi.right_value() == 0, ErrorCode::InvalidArgument,
            "phi must vanish outside a bounded window");
}

// int sqrt2 e^{-sqrt2 y} mean_b G(b, y) dy by the midpoint rule over
// [lo, hi + depth]: an atom at -d reaches the support of phi for y in
// [lo + d, hi + d]. G sees the atoms of b that land in [lo, hi].
template <class G>
double bank_integral(DecorationBank const& bank, Profile const& phi, std::size_t nodes,
                     double max_depth, G&& g)
{
    bank.validate();
    require_compact(phi);
    require(nodes > 0 && max_depth >= 0, ErrorCode::InvalidArgument, "bad quadrature settings");
    double lo = phi.lo();
    double hi = phi.hi();
    double width = hi - lo;
    double depth = 0;
    for (auto const& d : bank.samples)
        for (double x : d.positions)
            depth = std::max(depth, -x);
    depth = std::min(depth, max_depth);

    struct Sorted
    {
        std::vector<double> x;
        std::vector<double> m;
    };
    std::vector<Sorted> tops;
    tops.reserve(bank.samples.size());
    for (auto const& d : bank.samples)
    {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < d.size(); ++j)
            if (d.positions[j] >= -(width + depth))
                idx.push_back(j);
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return d.positions[a] < d.positions[b]; });
        Sorted s;
        for (std::size_t j : idx)
        {
            s.x.push_back(d.positions[j]);
            s.m.push_back(d.masses[j]);
        }
        tops.push_back(std::move(s));
    }

    double h = (width + depth) / static_cast<double>(nodes);
    double total = 0;
    for (std::size_t k = 0; k < nodes; ++k)
    {
        double y = lo + (static_cast<double>(k) + 0.5) * h;
        double mean = 0;
        for (auto const& t : tops)
        {
            auto first = std::lower_bound(t.x.begin(), t.x.end(), lo - y) - t.x.begin();
            auto last = std::upper_bound(t.x.begin(), t.x.end(), hi - y) - t.x.begin();
            mean += g(t.x.data() + first, t.m.data() + first, last - first, y);
        }
        mean /= static_cast<double>(tops.size());
        total += kSqrt2 * std::exp(-kSqrt2 * y) * mean * h;
    }
    return total;
}
}  // namespace

double dppp_laplace(double c, std::vector<double> const& shift_randomizer,
                    DecorationBank const& bank, Profile const& phi, std::size_t nodes,
                    double max_depth)
{
    require(!shift_randomizer.empty(), ErrorCode::Empty, "no shift samples");
    double inner = bank_integral(bank, phi, nodes, max_depth,
                                 [&](double const* x, double const* m, long n, double y) {
                                     double s = 0;
                                     for (long j = n - 1; j >= 0 && s < 50; --j)
                                         s += m[j] * phi(x[j] + y);
                                     return 1 - std::exp(-s);
                                 });
    double out = 0;
    for (double m : shift_randomizer)
        out += std::exp(-c * m * inner);
    return out / static_cast<double>(shift_randomizer.size());
}

double decoration_integral(double c, DecorationBank const& bank, Profile const& phi,
                           std::size_t nodes, double max_depth)
{
    double inner = bank_integral(bank, phi, nodes, max_depth,
                                 [&](double const* x, double const*, long n, double y) {
                                     double p = 1;
                                     for (long j = n - 1; j >= 0 && p > 1e-20; --j)
                                         p *= 1 - phi(x[j] + y);
                                     return 1 - p;
                                 });
    return c * inner;
}

}  // namespace sbx
