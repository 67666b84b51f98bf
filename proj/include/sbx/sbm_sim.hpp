#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sbx/mechanism.hpp"
#include "sbx/point_measure.hpp"
#include "sbx/rng.hpp"
#include "sbx/skeleton_law.hpp"

namespace sbx
{
/*!
 * Branching particle system approximating the superprocess: particles of
 * mass eps branch at rate rho with offspring pgf
 * g(s) = s + (eps / rho) psi((1 - s) / eps).
 */
struct ApproxConfig
{
    double eps = 0.1;
    double rho = 0;
    OffspringTable offspring;
    double truncation_tail = 0;
    double horizon = 1;
    std::vector<double> observation_times;
    std::uint64_t seed = 0;
    std::size_t max_particles = 10'000'000;

    void validate() const;
};

//! Fills eps, rho and the offspring table; the rest keeps its defaults.
ApproxConfig derive_particle_approximation(BranchingMechanism const& mech, double eps,
                                           double tail_tol = 1e-12);

//! Equal-mass atoms at a given time.
struct MassMeasure
{
    double t = 0;
    double eps = 0;
    std::vector<double> positions;

    double total_mass() const { return eps * static_cast<double>(positions.size()); }
    PointMeasure as_point_measure() const;
};

/*!
 * delta_x as ceil(mass / eps) particles; rounding receives the excess mass
 * over the target.
 */
MassMeasure delta_measure(double x, double eps, double mass = 1, double* rounding = nullptr);

struct SbmRun
{
    std::vector<MassMeasure> snapshots;
    bool capped = false;
    bool extinct = false;
};

//! One replica streamed from (cfg.seed, replica).
SbmRun simulate_sbm(ApproxConfig const& cfg, MassMeasure const& initial,
                    std::uint64_t replica = 0);

//! N ~ Poisson(lambda* |X|) unit atoms placed on uniformly chosen particles.
PointMeasure poissonize_skeleton(MassMeasure const& x, RngStream& rng, double lambda_star = 1);

struct DerivativeMartingale
{
    double t = 0;
    double dW = 0;
    double W = 0;
};

DerivativeMartingale sbm_derivative_martingale(MassMeasure const& x);
std::vector<DerivativeMartingale> sbm_derivative_martingale(std::vector<MassMeasure> const& xs);

struct ConditionedSbm
{
    //! X_t - max X_t, atoms of mass eps.
    PointMeasure x_decoration;
    //! Poissonized skeleton, shifted by the same amount.
    PointMeasure z_decoration;
    //! max X_t - sqrt2 t - z_shift.
    double y = 0;
};

/*!
 * One replica of the conditioned triple, or empty when
 * max X_t <= sqrt2 t + z_shift. Refuses mechanisms without (A3).
 */
std::optional<ConditionedSbm> sample_conditioned_sbm(ApproxConfig const& cfg,
                                                     BranchingMechanism const& mech,
                                                     MassMeasure const& initial, double t,
                                                     double z_shift, std::uint64_t replica);

struct ConditionedSbmBatch
{
    std::vector<ConditionedSbm> accepted;
    std::size_t attempts = 0;
};

//! Replicas 0 .. attempts-1; the (A3) check runs once.
ConditionedSbmBatch sample_conditioned_sbm_batch(ApproxConfig const& cfg,
                                                 BranchingMechanism const& mech,
                                                 MassMeasure const& initial, double t,
                                                 double z_shift, std::size_t attempts);

}  // namespace sbx
