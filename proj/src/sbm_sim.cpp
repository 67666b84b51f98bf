#include "sbx/sbm_sim.hpp"

#include <algorithm>
#include <cmath>

#include "sbx/branching_engine.hpp"
#include "sbx/error.hpp"
#include "sbx/kpp_solver.hpp"
#include "sbx/replicas.hpp"

namespace sbx
{
void ApproxConfig::validate() const
{
    require(eps > 0, ErrorCode::InvalidEps, "eps must be positive");
    require(rho > 0, ErrorCode::NonPositiveRate, "rho must be positive");
    require(!offspring.probs().empty(), ErrorCode::InvalidArgument, "no offspring table");
    require(horizon >= 0, ErrorCode::InvalidArgument, "horizon must be >= 0");
    require(max_particles >= 1, ErrorCode::InvalidArgument, "max_particles must be >= 1");
    require(std::is_sorted(observation_times.begin(), observation_times.end()),
            ErrorCode::InvalidArgument, "observation times must be sorted");
    for (double t : observation_times)
        require(t >= 0 && t <= horizon, ErrorCode::InvalidArgument,
                "observation time outside [0, T]");
}

ApproxConfig derive_particle_approximation(BranchingMechanism const& mech, double eps,
                                           double tail_tol)
{
    require(eps > 0 && std::isfinite(eps), ErrorCode::InvalidEps, "eps must be positive");
    double level = 1 / eps;
    double psi = mech.psi(level);
    double rho = mech.psi_deriv(level, 1);
    require(psi >= 0, ErrorCode::InvalidEps, "psi(1/eps) < 0; eps too large");
    require(rho > 0, ErrorCode::InvalidEps, "psi'(1/eps) <= 0; eps too large");
    ApproxConfig cfg;
    cfg.eps = eps;
    cfg.rho = rho;
    double p0 = psi * eps / rho;
    double tail = 0;
    auto p = derivative_series(mech, level, rho * level, 1 - p0, tail_tol, tail);
    p[0] = p0;
    p[1] = 0;
    cfg.truncation_tail = tail;
    cfg.offspring = OffspringTable(std::move(p));
    return cfg;
}

PointMeasure MassMeasure::as_point_measure() const
{
    PointMeasure m;
    m.positions = positions;
    m.masses.assign(positions.size(), eps);
    return m;
}

MassMeasure delta_measure(double x, double eps, double mass, double* rounding)
{
    require(eps > 0, ErrorCode::InvalidEps, "eps must be positive");
    auto n = static_cast<std::size_t>(std::ceil(mass / eps - 1e-9));
    MassMeasure m;
    m.eps = eps;
    m.positions.assign(n, x);
    if (rounding)
        *rounding = m.total_mass() - mass;
    return m;
}

SbmRun simulate_sbm(ApproxConfig const& cfg, MassMeasure const& initial, std::uint64_t replica)
{
    cfg.validate();
    require(initial.eps == cfg.eps, ErrorCode::InvalidArgument,
            "initial atoms must carry mass eps");
    RngStream rng(cfg.seed, replica);
    BranchingEngine engine(cfg.rho, cfg.offspring, cfg.max_particles);
    engine.reset(initial.positions);
    SbmRun run;
    for (double t : cfg.observation_times)
    {
        if (!engine.advance(t, rng))
        {
            run.capped = true;
            break;
        }
        MassMeasure s;
        s.t = t;
        s.eps = cfg.eps;
        s.positions = engine.positions();
        run.snapshots.push_back(std::move(s));
    }
    run.extinct = !run.capped && engine.size() == 0;
    return run;
}

PointMeasure poissonize_skeleton(MassMeasure const& x, RngStream& rng, double lambda_star)
{
    PointMeasure z;
    if (x.positions.empty())
        return z;
    auto n = rng.poisson(lambda_star * x.total_mass());
    for (std::uint64_t i = 0; i < n; ++i)
        z.add(x.positions[rng.index(x.positions.size())]);
    return z;
}

DerivativeMartingale sbm_derivative_martingale(MassMeasure const& x)
{
    DerivativeMartingale d;
    d.t = x.t;
    double front = kSqrt2 * x.t;
    for (double z : x.positions)
    {
        double e = std::exp(kSqrt2 * (z - front));
        d.W += e;
        d.dW += (front - z) * e;
    }
    d.W *= x.eps;
    d.dW *= x.eps;
    return d;
}

std::vector<DerivativeMartingale> sbm_derivative_martingale(std::vector<MassMeasure> const& xs)
{
    std::vector<DerivativeMartingale> out;
    out.reserve(xs.size());
    for (auto const& x : xs)
        out.push_back(sbm_derivative_martingale(x));
    return out;
}

namespace
{
std::optional<ConditionedSbm> conditioned_replica(ApproxConfig const& cfg, double lambda_star,
                                                  MassMeasure const& initial, double t,
                                                  double z_shift, std::uint64_t replica)
{
    ApproxConfig c = cfg;
    c.horizon = t;
    c.observation_times = {t};
    auto run = simulate_sbm(c, initial, replica);
    require(!run.capped, ErrorCode::ParticleCapExceeded, "replica passed the particle cap");
    auto const& x = run.snapshots.front();
    if (x.positions.empty())
        return std::nullopt;
    double top = *std::max_element(x.positions.begin(), x.positions.end());
    double y = top - kSqrt2 * t - z_shift;
    if (!(y > 0))
        return std::nullopt;
    // a second stream keeps the Poissonization independent of the path
    RngStream rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL, replica);
    ConditionedSbm s;
    s.y = y;
    s.x_decoration = x.as_point_measure().translated(-top);
    s.z_decoration = poissonize_skeleton(x, rng, lambda_star).translated(-top);
    return s;
}

void require_a3(BranchingMechanism const& mech)
{
    require(check_conditions(mech).a3.holds, ErrorCode::ConditionA3Required,
            "max X_t may be infinite without (A3)");
}
}  // namespace

std::optional<ConditionedSbm> sample_conditioned_sbm(ApproxConfig const& cfg,
                                                     BranchingMechanism const& mech,
                                                     MassMeasure const& initial, double t,
                                                     double z_shift, std::uint64_t replica)
{
    require_a3(mech);
    return conditioned_replica(cfg, mech.lambda_star(), initial, t, z_shift, replica);
}

ConditionedSbmBatch sample_conditioned_sbm_batch(ApproxConfig const& cfg,
                                                 BranchingMechanism const& mech,
                                                 MassMeasure const& initial, double t,
                                                 double z_shift, std::size_t attempts)
{
    require_a3(mech);
    double ls = mech.lambda_star();
    auto all = run_replicas<std::optional<ConditionedSbm>>(attempts, [&](std::size_t i) {
        return conditioned_replica(cfg, ls, initial, t, z_shift, i);
    });
    ConditionedSbmBatch b;
    b.attempts = attempts;
    for (auto& s : all)
        if (s)
            b.accepted.push_back(std::move(*s));
    return b;
}

}  // namespace sbx
