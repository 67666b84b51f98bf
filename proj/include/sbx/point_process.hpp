#pragma once

#include <string>
#include <vector>

#include "sbx/kpp_solver.hpp"
#include "sbx/point_measure.hpp"
#include "sbx/rng.hpp"

namespace sbx
{
//! Empirical decoration law: point measures with top atom at 0.
struct DecorationBank
{
    std::vector<PointMeasure> samples;
    std::string source;

    void validate() const;
};

/*!
 * Poisson process on (L, inf) with intensity c sqrt2 e^{-sqrt2 z} dz, by
 * inversion: N ~ Poisson(c e^{-sqrt2 L}), atoms L + Exp(sqrt2).
 */
PointMeasure sample_exponential_ppp(double c, double L, RngStream& rng);

/*!
 * Decorated process: draw dM from the randomizer, a process with scale
 * c dM, and a uniformly drawn bank decoration on every atom. The result is
 * restricted to (report_from, inf). Decorations sit below their atom, so any
 * report_from >= L is exact.
 */
PointMeasure sample_dppp(double c, std::vector<double> const& shift_randomizer,
                         DecorationBank const& bank, double L, double report_from,
                         RngStream& rng);

//! Poisson random measure with the given atoms as intensity.
PointMeasure sample_prm(PointMeasure const& intensity, RngStream& rng);
//! Poisson random measure with a gridded density, uniform within cells.
PointMeasure sample_prm(Field const& density, RngStream& rng);

/*!
 * E exp(-<phi, DPPP>) from the Poisson computation
 * E exp(-c dM int sqrt2 e^{-sqrt2 y} E[1 - e^{-<phi, D + y>}] dy),
 * the inner integral by the midpoint rule. phi must vanish outside
 * [phi.lo(), phi.hi()]; decoration atoms deeper than max_depth below the
 * support are ignored.
 */
double dppp_laplace(double c, std::vector<double> const& shift_randomizer,
                    DecorationBank const& bank, Profile const& phi, std::size_t nodes = 4000,
                    double max_depth = 8);

/*!
 * c int sqrt2 e^{-sqrt2 y} E[1 - prod (1 - phi(d + y))] dy over the bank.
 */
double decoration_integral(double c, DecorationBank const& bank, Profile const& phi,
                           std::size_t nodes = 4000, double max_depth = 8);

}  // namespace sbx
