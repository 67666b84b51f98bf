#include "sbx/skeleton_law.hpp"

#include <algorithm>
#include <cmath>

#include "sbx/error.hpp"

namespace sbx
{
OffspringTable::OffspringTable(std::vector<double> probs) : probs_(std::move(probs))
{
    require(!probs_.empty(), ErrorCode::InvalidArgument, "empty offspring table");
    double total = 0;
    for (double p : probs_)
    {
        require(p >= 0 && std::isfinite(p), ErrorCode::InvalidArgument,
                "offspring probabilities must be nonnegative");
        total += p;
    }
    require(total > 0, ErrorCode::InvalidArgument, "offspring probabilities sum to zero");
    for (double& p : probs_)
        p /= total;
    cdf_.resize(probs_.size());
    double acc = 0;
    for (std::size_t k = 0; k < probs_.size(); ++k)
    {
        acc += probs_[k];
        cdf_[k] = acc;
    }
    cdf_.back() = 1;
    while (first_k_ < max_k() && probs_[first_k_] == 0)
        ++first_k_;
}

double OffspringTable::mean() const
{
    double m = 0;
    for (std::size_t k = 0; k < probs_.size(); ++k)
        m += static_cast<double>(k) * probs_[k];
    return m;
}

double OffspringTable::pgf(double s) const
{
    double v = 0;
    for (std::size_t k = probs_.size(); k-- > 0;)
        v = v * s + probs_[k];
    return v;
}

int OffspringTable::sample(RngStream& rng) const
{
    double u = rng.uniform();
    if (u < cdf_[first_k_])
        return first_k_;
    auto it = std::upper_bound(cdf_.begin() + first_k_, cdf_.end(), u);
    if (it == cdf_.end())
        return max_k();
    return static_cast<int>(it - cdf_.begin());
}

std::vector<double> derivative_series(BranchingMechanism const& mech, double level,
                                      double scale, double target_mass, double tail_tol,
                                      double& tail_out)
{
    constexpr int k_cap = 1000000;
    std::vector<double> p(2, 0.0);
    double mass = 0;
    auto const& pi = mech.levy();
    // Poisson-mixture form: (-1)^k psi^(k)(L) L^k / k! = 2 beta L^2 [k=2]
    //   + int Pois(k; L y) pi(dy).
    if (pi.kind() == LevyMeasure::Kind::ExpPoly)
    {
        auto const& d = pi.density();
        if (std::isinf(d.y_max) && d.b == 0)
        {
            // the mixture tail behaves like pi((K/L, inf)) / scale
            double k_needed = level * std::pow(tail_tol * scale * d.a / d.c, -1 / d.a);
            require(k_needed < k_cap, ErrorCode::TruncationFailure,
                    "offspring tail decays polynomially; K would exceed 1e6");
        }
    }
    for (int k = 2; k <= k_cap; ++k)
    {
        double lk = std::lgamma(k + 1.0);
        double val = 0;
        if (k == 2)
            val += 2 * mech.beta() * level * level / 2;
        if (pi.kind() != LevyMeasure::Kind::Zero)
        {
            val += pi.integrate([&](double y) {
                double x = level * y;
                return std::exp(k * std::log(x) - x - lk);
            });
        }
        val /= scale;
        p.push_back(val);
        mass += val;
        if (pi.kind() == LevyMeasure::Kind::Zero)
            break;
        if (mass >= target_mass - tail_tol && val < tail_tol)
            break;
        require(k < k_cap, ErrorCode::TruncationFailure, "K exceeded 1e6 before reaching tail");
    }
    tail_out = std::max(0.0, target_mass - mass);
    return p;
}

OffspringLaw derive_offspring_law(BranchingMechanism const& mech, double tail_tol)
{
    require(mech.is_normalized(1e-9), ErrorCode::NotNormalized,
            "skeleton law needs psi'(0) = -1 and lambda* = 1");
    double q = mech.psi_deriv(1, 1);
    require(q > 0, ErrorCode::NonPositiveRate, "psi'(1) <= 0");
    OffspringLaw law;
    law.q = q;
    double tail = 0;
    law.raw_probs = derivative_series(mech, 1.0, q, 1.0, tail_tol, tail);
    law.truncation_tail = tail;
    law.table = OffspringTable(law.raw_probs);
    return law;
}

double verify_generating_identity(OffspringLaw const& law, BranchingMechanism const& mech,
                                  std::vector<double> const& grid)
{
    double worst = 0;
    for (double s : grid)
    {
        double f = 0;
        for (std::size_t k = law.raw_probs.size(); k-- > 0;)
            f = f * s + law.raw_probs[k];
        worst = std::max(worst, std::abs(law.q * (f - s) - mech.psi(1 - s)));
    }
    return worst;
}

std::vector<double> standard_identity_grid()
{
    std::vector<double> g;
    for (int i = 0; i <= 9; ++i)
        g.push_back(0.1 * i);
    g.push_back(0.99);
    return g;
}

}  // namespace sbx
