#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "sbx/point_measure.hpp"
#include "sbx/rng.hpp"
#include "sbx/skeleton_law.hpp"
#include "sbx/stats.hpp"

namespace sbx
{
struct SinglePoint
{
    double x = 0;
};

//! Poisson initial field; atoms carry the intensity lambda* mu.
struct PoissonField
{
    PointMeasure intensity;
};

using InitialCondition = std::variant<SinglePoint, PoissonField>;

struct BbmConfig
{
    OffspringLaw law;
    InitialCondition initial = SinglePoint{};
    double horizon = 1;
    std::vector<double> observation_times;
    std::uint64_t seed = 0;
    std::size_t max_particles = 10'000'000;

    void validate() const;
};

struct BbmFunctionals
{
    double dM = 0;
    double M = 0;
    double max = 0;
    double count = 0;
};

//! dM_t, M_t, max and count of unit particles at time t, in one pass.
BbmFunctionals bbm_functionals(std::vector<double> const& positions, double t);

struct BbmSnapshot
{
    double t = 0;
    PointMeasure particles;
    BbmFunctionals f;
};

struct BbmRun
{
    std::vector<BbmSnapshot> snapshots;
    //! The cap was passed; snapshots after that point are missing.
    bool capped = false;
    //! -1 when nothing branched before the horizon.
    double first_branch_time = -1;
    std::size_t initial_count = 0;
};

//! Initial particle positions for a replica.
std::vector<double> initial_positions(InitialCondition const& init, RngStream& rng);

/*!
 * One replica, streamed from (cfg.seed, replica). Snapshots are taken at the
 * observation times; particle lists are dropped unless keep_particles.
 */
BbmRun simulate_bbm(BbmConfig const& cfg, std::uint64_t replica = 0,
                    bool keep_particles = true);

//! Functionals of every replica at every observation time, indexed [replica][time].
std::vector<std::vector<BbmFunctionals>> bbm_functional_batch(BbmConfig const& cfg,
                                                              std::size_t replicas);

/*!
 * 1 - E prod (1 - phi(z_u(t))) from a single particle at the configured
 * point, with its standard error.
 */
McEstimate kpp_duality_estimate(BbmConfig const& cfg, std::function<double(double)> const& phi,
                                double t, std::size_t replicas);

struct ConditionedSample
{
    //! Z_t - max Z_t.
    PointMeasure decoration;
    //! max Z_t - sqrt2 t - z_shift.
    double y = 0;
    //! Additive-type functional of the same replica, for pairing.
    double dM = 0;
};

//! One replica; empty when max Z_t <= sqrt2 t + z_shift.
std::optional<ConditionedSample> sample_conditioned_decoration(BbmConfig const& cfg, double t,
                                                               double z_shift,
                                                               std::uint64_t replica);

struct ConditionedBatch
{
    std::vector<ConditionedSample> accepted;
    std::size_t attempts = 0;

    double acceptance_rate() const;
    double acceptance_stderr() const;
};

ConditionedBatch sample_conditioned_batch(BbmConfig const& cfg, double t, double z_shift,
                                          std::size_t attempts);

struct MartingaleTrajectories
{
    std::vector<double> times;
    //! [replica][time]
    std::vector<std::vector<double>> dM;
    std::vector<std::vector<double>> M;
};

MartingaleTrajectories martingale_trajectories(BbmConfig const& cfg, std::size_t replicas);

}  // namespace sbx
