#include <algorithm>
#include <cmath>
#include <limits>

#include "context.hpp"
#include "sbx/bbm_sim.hpp"
#include "sbx/error.hpp"
#include "sbx/front_constants.hpp"
#include "sbx/point_process.hpp"
#include "sbx/replicas.hpp"
#include "sbx/sbm_sim.hpp"

namespace sbx::detail
{
namespace
{
constexpr std::uint64_t kInitialStream = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kPoissonStream = 0x9e3779b97f4a7c15ULL;

BbmConfig skeleton_config(RecipeContext const& ctx, InitialCondition init, double horizon,
                          std::vector<double> times)
{
    BbmConfig cfg;
    cfg.law = derive_offspring_law(ctx.mechanism());
    cfg.initial = std::move(init);
    cfg.horizon = horizon;
    cfg.observation_times = std::move(times);
    cfg.seed = ctx.seed();
    return cfg;
}

// skeleton of the superprocess started from delta_0
PoissonField poisson_start(BranchingMechanism const& m)
{
    PointMeasure intensity;
    intensity.add(0, m.lambda_star());
    return PoissonField{intensity};
}

// (1 - e^{-eps f}) / eps, the data whose K-P-P solution gives the particle
// system's Laplace functional
Profile eps_transform(Profile const& f, double eps)
{
    return Profile([f, eps](double x) { return -std::expm1(-eps * f(x)) / eps; }, f.breaks(),
                   f.lo(), f.hi());
}

double max_abs_z(MartingaleReport const& r)
{
    double z = 0;
    for (auto const& row : r.rows)
        z = std::max(z, std::abs(row.z));
    return z;
}

Json report_rows(MartingaleReport const& r)
{
    Json rows = Json::array();
    for (auto const& row : r.rows)
        rows.push_back({{"t", row.t}, {"mean", row.mean}, {"std_error", row.std_error},
                        {"z", row.z}});
    return rows;
}

void add_martingale(RecipeContext& ctx, std::string id, MartingaleReport const& r,
                    double threshold)
{
    ctx.add_le(std::move(id), max_abs_z(r), threshold, {{"rows", report_rows(r)}});
}

// Gumbel mixture on a grid, linear in between, exact outside
class MixtureTable
{
  public:
    MixtureTable(std::vector<double> const& bank, double c, double lo, double hi,
                 std::size_t nodes)
        : bank_(bank), c_(c), lo_(lo), hi_(hi), values_(nodes)
    {
        step_ = (hi - lo) / static_cast<double>(nodes - 1);
        for (std::size_t i = 0; i < nodes; ++i)
            values_[i] = gumbel_mixture_cdf(bank_, c_, lo_ + step_ * static_cast<double>(i));
        at_minus_inf_ = gumbel_mixture_cdf(bank_, c_, -std::numeric_limits<double>::infinity());
    }

    double operator()(double x) const
    {
        if (x == -std::numeric_limits<double>::infinity())
            return at_minus_inf_;
        if (x < lo_ || x > hi_)
            return gumbel_mixture_cdf(bank_, c_, x);
        double s = (x - lo_) / step_;
        auto i = std::min(static_cast<std::size_t>(s), values_.size() - 2);
        double w = s - static_cast<double>(i);
        return (1 - w) * values_[i] + w * values_[i + 1];
    }

  private:
    std::vector<double> const& bank_;
    double c_;
    double lo_;
    double hi_;
    double step_ = 1;
    std::vector<double> values_;
    double at_minus_inf_ = 0;
};
}  // namespace

void martingales(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    double threshold = ctx.num("threshold");
    auto times = ctx.list("times");
    require(!times.empty(), ErrorCode::ConfigInvalid, "times must be nonempty");

    std::size_t n = ctx.count("replicas");
    auto cfg = skeleton_config(ctx, SinglePoint{0}, times.back(), times);
    auto tr = martingale_trajectories(cfg, n);
    // dM_0 = 0 and M_0 = 1 from a single particle at 0
    auto rd = martingale_test(tr.dM, tr.times, 0, threshold);
    auto rm = martingale_test(tr.M, tr.times, 1, threshold);
    add_martingale(ctx, "dM_mean", rd, threshold);
    add_martingale(ctx, "M_mean", rm, threshold);

    auto drifted = tr.dM;
    double drift = ctx.num("drift");
    for (auto& row : drifted)
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] += drift * tr.times[j];
    auto rc = martingale_test(drifted, tr.times, 0, threshold);
    ctx.add_flag("drift_control_flagged", rc.any_flagged, max_abs_z(rc), threshold,
                 {{"rows", report_rows(rc)}});

    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < times.size(); ++j)
        rows.push_back({times[j], rd.rows[j].mean, rd.rows[j].std_error, rm.rows[j].mean,
                        rm.rows[j].std_error});

    std::size_t ns = ctx.count("sbm_replicas");
    if (ns > 0)
    {
        auto st = ctx.list("sbm_times");
        auto ac = derive_particle_approximation(m, ctx.num("eps"));
        ac.horizon = st.back();
        ac.observation_times = st;
        ac.seed = ctx.seed() + 1;
        auto init = delta_measure(0, ac.eps);
        auto runs = run_replicas<std::vector<DerivativeMartingale>>(ns, [&](std::size_t i) {
            auto run = simulate_sbm(ac, init, i);
            require(!run.capped, ErrorCode::ParticleCapExceeded, "replica passed the cap");
            return sbm_derivative_martingale(run.snapshots);
        });
        auto w0 = sbm_derivative_martingale(init);
        std::vector<std::vector<double>> dW(ns), W(ns);
        for (std::size_t i = 0; i < ns; ++i)
            for (auto const& d : runs[i])
            {
                dW[i].push_back(d.dW);
                W[i].push_back(d.W);
            }
        auto rw = martingale_test(dW, st, w0.dW, threshold);
        auto rW = martingale_test(W, st, w0.W, threshold);
        add_martingale(ctx, "dW_mean", rw, threshold);
        add_martingale(ctx, "W_mean", rW, threshold);
        std::vector<std::vector<double>> srows;
        for (std::size_t j = 0; j < st.size(); ++j)
            srows.push_back({st[j], rw.rows[j].mean, rw.rows[j].std_error, rW.rows[j].mean,
                             rW.rows[j].std_error});
        ctx.write_csv("superprocess_means.csv", {"t", "dW", "dW_se", "W", "W_se"}, srows);
    }
    ctx.write_csv("skeleton_means.csv", {"t", "dM", "dM_se", "M", "M_se"}, rows);
}

void max_law_gumbel(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    auto times = ctx.list("times");
    require(times.size() >= 2 && std::is_sorted(times.begin(), times.end()),
            ErrorCode::ConfigInvalid, "times must be increasing with at least two entries");
    std::size_t n = ctx.count("replicas");
    auto cfg = skeleton_config(ctx, poisson_start(m), times.back(), times);
    auto batch = bbm_functional_batch(cfg, n);

    // the limit law is randomized by dM at the last time; the few negative
    // finite-time values are clipped
    std::vector<double> bank;
    std::size_t clipped = 0;
    for (auto const& row : batch)
    {
        double d = row.back().dM;
        if (d < 0)
        {
            ++clipped;
            d = 0;
        }
        bank.push_back(d);
    }
    double c_star = compute_C(m, Profile::indicator(0, INFINITY, 1)).C;

    std::vector<std::vector<double>> samples(times.size());
    double lo = INFINITY, hi = -INFINITY;
    for (auto const& row : batch)
        for (std::size_t j = 0; j < times.size(); ++j)
        {
            double v = row[j].max - bramson_m(times[j]);
            samples[j].push_back(v);
            if (std::isfinite(v))
            {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    MixtureTable cdf(bank, c_star, lo, hi, ctx.count("cdf_nodes"));

    std::vector<double> ks;
    Json per_t = Json::array();
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < times.size(); ++j)
    {
        double d = ks_distance(samples[j], [&](double x) { return cdf(x); });
        ks.push_back(d);
        per_t.push_back({{"t", times[j]}, {"ks", d}});
        rows.push_back({times[j], d});
    }
    ctx.write_csv("ks.csv", {"t", "ks"}, rows);

    // the PDE gives P(max Z_t <= m(t)) = exp(-u(t, -m(t))) exactly
    Json pde = Json::array();
    std::vector<std::vector<double>> prow;
    double limit0 = cdf(0);
    for (double t : ctx.list("pde_times"))
    {
        auto u = solve_kpp(m, Profile::indicator(0, INFINITY, 1), {t}, Grid1D::standard(t));
        double p = std::exp(-u.fields[0].at(-bramson_m(t)));
        pde.push_back({t, p});
        prow.push_back({t, p, limit0});
    }
    ctx.write_csv("pde_cdf_at_zero.csv", {"t", "pde", "mixture"}, prow);

    bool decreasing = true;
    for (std::size_t j = 1; j < ks.size(); ++j)
        decreasing = decreasing && ks[j] < ks[j - 1];
    ctx.add_flag("ks_decreasing", decreasing, ks.back() - ks.front(), 0,
                 {{"ks", per_t},
                  {"c_star", c_star},
                  {"clipped", clipped},
                  {"mixture_at_zero", limit0},
                  {"pde_cdf_at_zero", pde}});
}

void poissonization(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    double eps = ctx.num("eps");
    double t = ctx.num("t");
    double ls = m.lambda_star();
    auto g = parse_profile(ctx.param("g"));
    auto ac = derive_particle_approximation(m, eps);
    ac.horizon = t;
    ac.observation_times = {t};
    ac.seed = ctx.seed();
    auto init = delta_measure(0, eps);

    struct Pair
    {
        double z_laplace;
        double x_laplace;
        double z_mass;
        double x_mass;
    };
    auto pairs = run_replicas<Pair>(ctx.count("replicas"), [&](std::size_t i) {
        auto run = simulate_sbm(ac, init, i);
        require(!run.capped, ErrorCode::ParticleCapExceeded, "replica passed the cap");
        auto const& x = run.snapshots[0];
        RngStream rng(ctx.seed() ^ kPoissonStream, i);
        auto z = poissonize_skeleton(x, rng, ls);
        double xl = 0;
        for (double p : x.positions)
            xl -= x.eps * std::expm1(-g(p));
        return Pair{std::exp(-z.integrate([&](double y) { return g(y); })),
                    std::exp(-ls * xl), z.total_mass(), x.total_mass()};
    });
    std::vector<double> a, b, zm, xm;
    for (auto const& p : pairs)
    {
        a.push_back(p.z_laplace);
        b.push_back(p.x_laplace);
        zm.push_back(p.z_mass);
        xm.push_back(p.x_mass);
    }
    double k = ctx.num("k_sigma");
    auto diff = paired_difference(a, b);
    ctx.add_le("paired_laplace", std::abs(diff.value), k * diff.std_error,
               {{"difference", diff.value},
                {"std_error", diff.std_error},
                {"z_laplace", mean_estimate(a).value},
                {"x_laplace", mean_estimate(b).value}});
    auto reg = linear_regression(xm, zm);
    ctx.add_le("mass_regression", std::abs(reg.slope - ls), k * reg.slope_stderr,
               {{"slope", reg.slope},
                {"slope_stderr", reg.slope_stderr},
                {"intercept", reg.intercept},
                {"lambda_star", ls}});
}

void extremal_process(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    double T = ctx.num("T");
    double eps = ctx.num("eps");
    double ls = m.lambda_star();
    double lt = ctx.num("laplace_time");
    require(lt > 0 && lt <= T, ErrorCode::ConfigInvalid, "laplace_time must lie in (0, T]");

    auto cfg = skeleton_config(ctx, poisson_start(m), T, {T});
    auto batch = bbm_functional_batch(cfg, ctx.count("bbm_replicas"));
    std::vector<double> dM;
    for (auto const& row : batch)
        dM.push_back(row[0].dM);

    // Poisson(1/eps) particles of mass eps: the surviving lines then form
    // a Poisson(lambda*) family, as for the skeleton of delta_0
    auto ac = derive_particle_approximation(m, eps);
    ac.horizon = T;
    ac.observation_times = lt < T ? std::vector<double>{lt, T} : std::vector<double>{T};
    ac.seed = ctx.seed() + 1;
    auto phi = parse_profile(ctx.param("phi"));
    auto g = parse_profile(ctx.param("g"));
    double shift = bramson_m(lt);

    struct Out
    {
        double dW;
        double laplace;
        double joint;
        double merged;
    };
    auto outs = run_replicas<Out>(ctx.count("sbm_replicas"), [&](std::size_t i) {
        RngStream rng(ctx.seed() ^ kInitialStream, i);
        MassMeasure init;
        init.eps = eps;
        init.positions.assign(rng.poisson(1 / eps), 0.0);
        auto run = simulate_sbm(ac, init, i);
        require(!run.capped, ErrorCode::ParticleCapExceeded, "replica passed the cap");
        auto const& xl = run.snapshots.front();
        double f = 0, h = 0;
        for (double p : xl.positions)
        {
            f += eps * phi(p - shift);
            h -= eps * ls * std::expm1(-g(p - shift));
        }
        RngStream prng(ctx.seed() ^ kPoissonStream, i);
        auto z = poissonize_skeleton(xl, prng, ls);
        double zg = z.integrate([&](double y) { return g(y - shift); });
        return Out{sbm_derivative_martingale(run.snapshots.back()).dW, std::exp(-f),
                   std::exp(-f - zg), std::exp(-f - h)};
    });
    std::vector<double> dW, lap, joint, merged;
    for (auto const& o : outs)
    {
        dW.push_back(o.dW);
        lap.push_back(o.laplace);
        joint.push_back(o.joint);
        merged.push_back(o.merged);
    }

    double ks = ks_distance(dM, dW);
    auto zero_fraction = [](std::vector<double> const& v) {
        return static_cast<double>(std::count(v.begin(), v.end(), 0.0)) /
               static_cast<double>(v.size());
    };
    Json quantiles = Json::array();
    {
        auto a = dM, b = dW;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        for (double q : {0.5, 0.7, 0.9})
            quantiles.push_back({q, a[static_cast<std::size_t>(q * (a.size() - 1))],
                                 b[static_cast<std::size_t>(q * (b.size() - 1))]});
    }
    ctx.add_le("derivative_martingale_ks", ks, ctx.num("ks_tol"),
               {{"pvalue", ks_pvalue(ks, dM.size(), dW.size())},
                {"zero_fraction_dM", zero_fraction(dM)},
                {"zero_fraction_dW", zero_fraction(dW)},
                {"quantiles", quantiles}});

    // E exp(-<phi, X_t - m(t)>) = exp(-u_phi(t, -m(t))) for the superprocess
    auto grid = Grid1D::standard(lt);
    double pde = std::exp(-solve_kpp(m, phi, {lt}, grid).fields[0].at(-shift));
    double exact_eps =
        std::exp(-solve_kpp(m, eps_transform(phi, eps), {lt}, grid).fields[0].at(-shift));
    auto est = mean_estimate(lap);
    ctx.add_le("recentred_laplace", std::abs(est.value - pde),
               3 * est.std_error + ctx.num("laplace_allowance"),
               {{"mc", est.value},
                {"std_error", est.std_error},
                {"pde", pde},
                {"particle_system_exact", exact_eps}});

    auto diff = paired_difference(joint, merged);
    ctx.add_le("joint_poissonization", std::abs(diff.value), 3 * diff.std_error,
               {{"difference", diff.value}, {"std_error", diff.std_error}});

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < std::max(dM.size(), dW.size()); ++i)
        rows.push_back({static_cast<double>(i), i < dM.size() ? dM[i] : NAN,
                        i < dW.size() ? dW[i] : NAN});
    ctx.write_csv("derivative_martingales.csv", {"replica", "dM", "dW"}, rows);
}

void decoration_bank(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    auto times = ctx.list("times");
    auto attempts = ctx.param("attempts").get<std::vector<std::size_t>>();
    require(!times.empty() && times.size() == attempts.size(), ErrorCode::ConfigInvalid,
            "times and attempts must have the same nonzero length");
    double z = ctx.num("z_shift");
    auto phi = parse_profile(ctx.param("phi"));
    std::size_t nodes = ctx.count("nodes");
    double keep = (phi.hi() - phi.lo()) + 8;

    struct Sample
    {
        bool accepted = false;
        bool valid = true;
        PointMeasure top;
    };
    DecorationBank bank;
    double bank_rate = 0;
    std::size_t violations = 0;
    Json rates = Json::array();
    for (std::size_t j = 0; j < times.size(); ++j)
    {
        double t = times[j];
        auto cfg = skeleton_config(ctx, poisson_start(m), t, {});
        cfg.seed = ctx.seed() + j;
        auto out = run_replicas<Sample>(attempts[j], [&](std::size_t i) {
            Sample s;
            auto d = sample_conditioned_decoration(cfg, t, z, i);
            if (!d)
                return s;
            s.accepted = true;
            bool has_zero = false;
            for (double x : d->decoration.positions)
            {
                if (x > 0)
                    s.valid = false;
                has_zero = has_zero || x == 0;
                if (x >= -keep)
                    s.top.add(x);
            }
            s.valid = s.valid && has_zero;
            return s;
        });
        std::size_t acc = 0;
        for (auto const& s : out)
            if (s.accepted)
            {
                ++acc;
                violations += s.valid ? 0 : 1;
            }
        double n = static_cast<double>(attempts[j]);
        double rate = static_cast<double>(acc) / n;
        double se = std::sqrt(rate * (1 - rate) / n);
        auto u = solve_kpp(m, Profile::indicator(0, INFINITY, 1), {t}, Grid1D::standard(t));
        double pred = -std::expm1(-u.fields[0].at(-kSqrt2 * t - z));
        ctx.add_le("acceptance_t" + std::to_string(static_cast<int>(t)), std::abs(rate - pred),
                   3 * se, {{"rate", rate}, {"std_error", se}, {"pde", pred}, {"accepted", acc}});
        rates.push_back({t, rate, pred});

        if (j + 1 == times.size())
        {
            bank_rate = rate;
            for (auto& s : out)
                if (s.accepted)
                    bank.samples.push_back(std::move(s.top));
        }
    }
    ctx.add_le("support_and_top_atom", static_cast<double>(violations), 0);
    require(!bank.samples.empty(), ErrorCode::EmptyBank, "no decoration was accepted");
    bank.source = "skeleton decoration at t=" + std::to_string(times.back()) + ", " +
                  m.describe();

    double c_star = compute_C(m, Profile::indicator(0, INFINITY, 1)).C;
    double c_phi = compute_C(m, phi).C;
    double closure = decoration_integral(c_star, bank, phi, nodes);
    double gap = std::abs(closure - c_phi) / c_phi;
    ctx.add_le("integral_representation", gap, ctx.num("closure_tol"),
               {{"C_phi", c_phi}, {"bank_integral", closure}, {"c_star", c_star},
                {"bank_size", bank.samples.size()}});

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < bank.samples.size(); ++i)
        for (std::size_t k = 0; k < bank.samples[i].size(); ++k)
            rows.push_back({static_cast<double>(i), bank.samples[i].positions[k],
                            bank.samples[i].masses[k]});
    ctx.write_csv("bank.csv", {"sample_id", "position", "mass"}, rows);
    ctx.write_json("bank.json", {{"source", bank.source},
                                 {"t", times.back()},
                                 {"mechanism", ctx.spec().mechanism},
                                 {"depth_kept", keep},
                                 {"acceptance_rate", bank_rate},
                                 {"acceptance", rates}});
}

void conditioned_sbm(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    double eps = ctx.num("eps");
    double t = ctx.num("t");
    double z = ctx.num("z_shift");
    auto ac = derive_particle_approximation(m, eps);
    ac.seed = ctx.seed();
    auto init = delta_measure(0, eps);
    bool a3 = check_conditions(m).a3.holds;

    bool refused = false;
    ConditionedSbmBatch batch;
    try
    {
        batch = sample_conditioned_sbm_batch(ac, m, init, t, z, ctx.count("attempts"));
    }
    catch (Error const& e)
    {
        if (e.code() != ErrorCode::ConditionA3Required)
            throw;
        refused = true;
    }
    ctx.add_flag("a3_guard", refused == !a3, refused ? 1 : 0, a3 ? 0 : 1, {{"a3", a3}});
    if (refused)
        return;

    std::size_t bad = 0;
    for (auto const& s : batch.accepted)
    {
        bool ok = s.y > 0 && s.x_decoration.max() == 0;
        for (double x : s.z_decoration.positions)
            ok = ok && x <= 0;
        bad += ok ? 0 : 1;
    }
    ctx.add_le("support_and_top_atom", static_cast<double>(bad), 0,
               {{"accepted", batch.accepted.size()}});

    // particle system from n particles: P(max <= y) = (1 - eps w)^n with w
    // started from 1/eps on (y, inf)
    double n = static_cast<double>(init.positions.size());
    double y = kSqrt2 * t + z;
    auto w = solve_kpp(m, Profile::indicator(0, INFINITY, 1 / eps), {t}, Grid1D::standard(t))
                 .fields[0]
                 .at(-y);
    double pred = 1 - std::pow(1 - eps * w, n);
    double attempts = static_cast<double>(batch.attempts);
    double rate = static_cast<double>(batch.accepted.size()) / attempts;
    double se = std::sqrt(pred * (1 - pred) / attempts);
    ctx.add_le("acceptance", std::abs(rate - pred), 3 * se,
               {{"rate", rate}, {"pde", pred}, {"std_error", se}});

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < batch.accepted.size(); ++i)
    {
        auto const& s = batch.accepted[i];
        rows.push_back({static_cast<double>(i), s.y, s.x_decoration.total_mass(),
                        s.z_decoration.total_mass()});
    }
    ctx.write_csv("conditioned.csv", {"sample", "y", "x_mass", "z_mass"}, rows);
}

}  // namespace sbx::detail
