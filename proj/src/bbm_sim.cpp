#include "sbx/bbm_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbx/branching_engine.hpp"
#include "sbx/error.hpp"
#include "sbx/kpp_solver.hpp"
#include "sbx/replicas.hpp"

namespace sbx
{
void BbmConfig::validate() const
{
    require(horizon >= 0, ErrorCode::InvalidArgument, "horizon must be >= 0");
    require(max_particles >= 1, ErrorCode::InvalidArgument, "max_particles must be >= 1");
    require(law.q > 0, ErrorCode::NonPositiveRate, "offspring law has no rate");
    require(std::is_sorted(observation_times.begin(), observation_times.end()),
            ErrorCode::InvalidArgument, "observation times must be sorted");
    for (double t : observation_times)
        require(t >= 0 && t <= horizon, ErrorCode::InvalidArgument,
                "observation time outside [0, T]");
}

BbmFunctionals bbm_functionals(std::vector<double> const& positions, double t)
{
    BbmFunctionals f;
    f.max = -std::numeric_limits<double>::infinity();
    double front = kSqrt2 * t;
    for (double z : positions)
    {
        double e = std::exp(kSqrt2 * (z - front));
        f.M += e;
        f.dM += (front - z) * e;
        f.max = std::max(f.max, z);
    }
    f.count = static_cast<double>(positions.size());
    return f;
}

std::vector<double> initial_positions(InitialCondition const& init, RngStream& rng)
{
    if (auto const* p = std::get_if<SinglePoint>(&init))
        return {p->x};
    auto const& field = std::get<PoissonField>(init).intensity;
    std::vector<double> out;
    for (std::size_t i = 0; i < field.size(); ++i)
    {
        auto n = rng.poisson(field.masses[i]);
        out.insert(out.end(), n, field.positions[i]);
    }
    return out;
}

BbmRun simulate_bbm(BbmConfig const& cfg, std::uint64_t replica, bool keep_particles)
{
    cfg.validate();
    RngStream rng(cfg.seed, replica);
    BranchingEngine engine(cfg.law.q, cfg.law.table, cfg.max_particles);
    engine.reset(initial_positions(cfg.initial, rng));
    BbmRun run;
    run.initial_count = engine.size();
    for (double t : cfg.observation_times)
    {
        if (!engine.advance(t, rng))
        {
            run.capped = true;
            break;
        }
        BbmSnapshot s;
        s.t = t;
        s.f = bbm_functionals(engine.positions(), t);
        if (keep_particles)
            s.particles = PointMeasure::unit(engine.positions());
        run.snapshots.push_back(std::move(s));
    }
    if (!run.capped && !engine.advance(cfg.horizon, rng))
        run.capped = true;
    run.first_branch_time = engine.first_event_time();
    return run;
}

std::vector<std::vector<BbmFunctionals>> bbm_functional_batch(BbmConfig const& cfg,
                                                              std::size_t replicas)
{
    cfg.validate();
    return run_replicas<std::vector<BbmFunctionals>>(replicas, [&](std::size_t i) {
        auto run = simulate_bbm(cfg, i, false);
        require(!run.capped, ErrorCode::ParticleCapExceeded, "replica passed the particle cap");
        std::vector<BbmFunctionals> out;
        for (auto const& s : run.snapshots)
            out.push_back(s.f);
        return out;
    });
}

McEstimate kpp_duality_estimate(BbmConfig const& cfg, std::function<double(double)> const& phi,
                                double t, std::size_t replicas)
{
    require(std::holds_alternative<SinglePoint>(cfg.initial), ErrorCode::InvalidArgument,
            "duality needs a single-point start");
    BbmConfig c = cfg;
    c.horizon = t;
    c.observation_times = {t};
    c.validate();
    auto vals = run_replicas<double>(replicas, [&](std::size_t i) {
        RngStream rng(c.seed, i);
        BranchingEngine engine(c.law.q, c.law.table, c.max_particles);
        engine.reset(initial_positions(c.initial, rng));
        require(engine.advance(t, rng), ErrorCode::ParticleCapExceeded,
                "replica passed the particle cap");
        double prod = 1;
        for (double z : engine.positions())
        {
            double v = phi(z);
            require(v >= 0 && v <= 1, ErrorCode::RangeViolation, "phi must take values in [0,1]");
            prod *= 1 - v;
        }
        return 1 - prod;
    });
    return mean_estimate(vals);
}

std::optional<ConditionedSample> sample_conditioned_decoration(BbmConfig const& cfg, double t,
                                                               double z_shift,
                                                               std::uint64_t replica)
{
    require(t >= 1, ErrorCode::InvalidArgument, "conditioned samples need t >= 1");
    RngStream rng(cfg.seed, replica);
    BranchingEngine engine(cfg.law.q, cfg.law.table, cfg.max_particles);
    engine.reset(initial_positions(cfg.initial, rng));
    if (!engine.advance(t, rng))
        throw Error(ErrorCode::ParticleCapExceeded, "replica passed the particle cap");
    auto f = bbm_functionals(engine.positions(), t);
    double y = f.max - kSqrt2 * t - z_shift;
    if (!(y > 0))
        return std::nullopt;
    ConditionedSample s;
    s.y = y;
    s.dM = f.dM;
    s.decoration = PointMeasure::unit(engine.positions()).translated(-f.max);
    return s;
}

double ConditionedBatch::acceptance_rate() const
{
    return attempts ? static_cast<double>(accepted.size()) / static_cast<double>(attempts) : 0;
}

double ConditionedBatch::acceptance_stderr() const
{
    if (attempts == 0)
        return 0;
    double p = acceptance_rate();
    return std::sqrt(p * (1 - p) / static_cast<double>(attempts));
}

ConditionedBatch sample_conditioned_batch(BbmConfig const& cfg, double t, double z_shift,
                                          std::size_t attempts)
{
    cfg.validate();
    auto all = run_replicas<std::optional<ConditionedSample>>(attempts, [&](std::size_t i) {
        return sample_conditioned_decoration(cfg, t, z_shift, i);
    });
    ConditionedBatch b;
    b.attempts = attempts;
    for (auto& s : all)
        if (s)
            b.accepted.push_back(std::move(*s));
    return b;
}

MartingaleTrajectories martingale_trajectories(BbmConfig const& cfg, std::size_t replicas)
{
    require(cfg.observation_times.size() >= 2, ErrorCode::InvalidArgument,
            "need at least two observation times");
    auto batch = bbm_functional_batch(cfg, replicas);
    MartingaleTrajectories out;
    out.times = cfg.observation_times;
    out.dM.reserve(replicas);
    out.M.reserve(replicas);
    for (auto const& row : batch)
    {
        std::vector<double> d;
        std::vector<double> m;
        for (auto const& f : row)
        {
            d.push_back(f.dM);
            m.push_back(f.M);
        }
        out.dM.push_back(std::move(d));
        out.M.push_back(std::move(m));
    }
    return out;
}

}  // namespace sbx
