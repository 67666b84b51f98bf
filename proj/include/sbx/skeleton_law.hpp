#pragma once

#include <vector>

#include "sbx/mechanism.hpp"
#include "sbx/rng.hpp"

namespace sbx
{
//! Probabilities p_k indexed from k = 0, with a cumulative table for sampling.
class OffspringTable
{
  public:
    OffspringTable() = default;
    //! probs[k] = P(k offspring); renormalized to sum 1.
    explicit OffspringTable(std::vector<double> probs);

    std::vector<double> const& probs() const { return probs_; }
    std::vector<double> const& cdf() const { return cdf_; }
    int max_k() const { return static_cast<int>(probs_.size()) - 1; }
    double mean() const;
    double pgf(double s) const;

    int sample(RngStream& rng) const;

  private:
    std::vector<double> probs_;
    std::vector<double> cdf_;
    int first_k_ = 0;
};

struct OffspringLaw
{
    double q = 0;
    OffspringTable table;
    //! p_k before renormalization (kept for the generating identity).
    std::vector<double> raw_probs;
    double truncation_tail = 0;
};

OffspringLaw derive_offspring_law(BranchingMechanism const& mech, double tail_tol = 1e-12);

inline int sample_offspring(OffspringLaw const& law, RngStream& rng)
{
    return law.table.sample(rng);
}

//! max over the grid of |q(F(s) - s) - psi(1 - s)|, F from the raw probabilities.
double verify_generating_identity(OffspringLaw const& law, BranchingMechanism const& mech,
                                  std::vector<double> const& grid);

std::vector<double> standard_identity_grid();

//! p_k = (1/scale) * (-1)^k psi^(k)(level) level^k / k!, k >= 2, until the mass
//! reaches 1 - tail_tol. Shared with the particle approximation.
std::vector<double> derivative_series(BranchingMechanism const& mech, double level,
                                      double scale, double target_mass, double tail_tol,
                                      double& tail_out);

}  // namespace sbx
