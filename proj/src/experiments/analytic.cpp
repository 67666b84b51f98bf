#include <algorithm>
#include <cmath>

#include "context.hpp"
#include "sbx/bbm_sim.hpp"
#include "sbx/error.hpp"
#include "sbx/front_constants.hpp"
#include "sbx/skeleton_law.hpp"

namespace sbx::detail
{
namespace
{
double relative_gap(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// v' = -psi(v) by RK4 with a step far below the solver's.
double reference_flow(BranchingMechanism const& m, double v, double t)
{
    int n = static_cast<int>(std::ceil(t * 2000));
    double h = t / n;
    for (int i = 0; i < n; ++i)
    {
        double k1 = -m.psi(v), k2 = -m.psi(v + h / 2 * k1), k3 = -m.psi(v + h / 2 * k2),
               k4 = -m.psi(v + h * k3);
        v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return v;
}

double max_excess(Field const& a, Field const& b)
{
    double worst = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        worst = std::max(worst, a.values[i] - b.values[i]);
    return worst;
}

void solver_invariants(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    double alpha = -m.psi_deriv(0, 1);
    double ls = m.lambda_star();

    // spatially constant data follows the reaction flow
    auto flat = Grid1D::covering(-30, 30, 0.05, 0.01);
    double gap = 0;
    Json rows = Json::array();
    for (double c : {0.2, 0.7, 1.5})
    {
        auto sol = solve_kpp(m, Profile::constant(c), {1, 2.5}, flat);
        double t_list[] = {1, 2.5};
        for (int k = 0; k < 2; ++k)
        {
            double exact;
            double t = t_list[k];
            if (m.quadratic())
            {
                double beta = m.beta();
                double e = std::exp(alpha * t);
                exact = c * e / (1 + beta / alpha * c * (e - 1));
            }
            else
                exact = reference_flow(m, c, t);
            double got = sol.fields[k].values[flat.n / 3];
            gap = std::max(gap, std::abs(got - exact));
            rows.push_back({c, t, got, exact});
        }
        if (c < ls)
        {
            auto sub = solve_subcritical(m, Profile::constant(c), {1}, flat);
            double exact;
            if (m.quadratic())
            {
                double beta = m.beta();
                double a_star = m.psi_deriv(ls, 1);
                double e = std::exp(-a_star);
                exact = c * e / (1 + beta / a_star * c * (1 - e));
            }
            else
            {
                auto star = m.subcritical();
                exact = reference_flow(star, c, 1);
            }
            gap = std::max(gap, std::abs(sub.fields[0].values[flat.n / 3] - exact));
        }
    }
    ctx.add_le("logistic_closed_form", gap, 1e-6, {{"rows", rows}});

    auto g = Grid1D::standard(3);
    auto phi = Profile::indicator(-1, 2, 0.6);
    auto direct = solve_kpp(m, phi, {1, 3}, g);
    auto restart = solve_kpp(m, Profile::from_field(direct.fields[0]), {2}, g).fields[0];
    ctx.add_le("semigroup", sup_distance(direct.fields[1], restart, g.x_min, g.x_max), 1e-6);

    auto g2 = Grid1D::standard(2);
    auto f1 = Profile::indicator(-1, 1, 0.4);
    auto f2 = Profile::indicator(0.5, INFINITY, 0.3);
    auto big = Profile::indicator(-1.5, 1.5, 0.5);
    auto u1 = solve_kpp(m, f1, {2}, g2).fields[0];
    auto u2 = solve_kpp(m, f2, {2}, g2).fields[0];
    auto u12 = solve_kpp(m, f1 + f2, {2}, g2).fields[0];
    auto ub = solve_kpp(m, big, {2}, g2).fields[0];
    ctx.add_le("comparison", max_excess(u1, ub), 1e-10);
    Field sum = u1;
    for (std::size_t i = 0; i < sum.values.size(); ++i)
        sum.values[i] += u2.values[i];
    ctx.add_le("subadditivity", max_excess(u12, sum), 1e-8);
    double scaling = 0;
    for (double M : {2.0, 10.0})
    {
        auto uM = solve_kpp(m, f1.scaled(M), {2}, g2).fields[0];
        Field bound = u1;
        for (double& v : bound.values)
            v *= M;
        scaling = std::max(scaling, max_excess(uM, bound));
    }
    ctx.add_le("scaling", scaling, 1e-8);

    // u_f <= E<f, X_t> = e^{alpha t} P_t f
    double c = 0.5;
    auto mean_sol = solve_kpp(m, Profile::indicator(0, INFINITY, c), {1, 3}, g);
    double excess = -INFINITY;
    double ts[] = {1, 3};
    for (int k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < g.n; ++i)
        {
            double x = g.x(i);
            double bound = std::exp(alpha * ts[k]) * c * 0.5 * std::erfc(-x / std::sqrt(2 * ts[k]));
            excess = std::max(excess, mean_sol.fields[k].values[i] - bound);
        }
    ctx.add_le("mean_bound", std::max(excess, 0.0), 1e-8);
}
}  // namespace

void skeleton_derive(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    auto law = derive_offspring_law(m, ctx.num("tail_tol"));
    double residual = verify_generating_identity(law, m, standard_identity_grid());
    double mass = 0;
    for (double p : law.raw_probs)
        mass += p;

    std::vector<std::vector<double>> rows;
    Json probs = Json::array();
    for (std::size_t k = 0; k < law.raw_probs.size(); ++k)
    {
        rows.push_back({static_cast<double>(k), law.raw_probs[k]});
        if (k < 12)
            probs.push_back(law.raw_probs[k]);
    }
    ctx.write_csv("offspring.csv", {"k", "p_k"}, rows);

    Json ev = {{"q", law.q},
               {"p", probs},
               {"max_k", law.table.max_k()},
               {"truncation_tail", law.truncation_tail}};
    ctx.add_le("generating_identity", residual, ctx.num("residual_tol"), ev);
    ctx.add_le("mass_defect", std::abs(mass - 1), ctx.num("mass_tol"));

    // for atomic or zero Levy measures the law is a Poisson mixture
    if (m.levy().kind() != LevyMeasure::Kind::ExpPoly)
    {
        double ls = m.lambda_star();
        double q = -m.alpha() + 2 * m.beta() * ls;
        for (auto const& a : m.levy().atoms())
            q += a.weight * a.location * (1 - std::exp(-ls * a.location));
        double worst = std::abs(law.q - q) / q;
        std::vector<double> closed(law.raw_probs.size(), 0.0);
        if (closed.size() > 2)
            closed[2] = m.beta() * ls * ls;
        for (auto const& a : m.levy().atoms())
        {
            double y = ls * a.location;
            double pois = std::exp(-y);
            for (std::size_t k = 1; k < closed.size(); ++k)
            {
                pois *= y / static_cast<double>(k);
                if (k >= 2)
                    closed[k] += a.weight * pois;
            }
        }
        for (std::size_t k = 2; k < closed.size(); ++k)
            worst = std::max(worst, std::abs(law.raw_probs[k] - closed[k] / q));
        ctx.add_le("closed_form", worst, 1e-12);
    }
}

void kpp_duality(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    std::size_t n = ctx.count("replicas");
    if (n > 0)
    {
        double t = ctx.num("t");
        double x = ctx.num("x");
        BbmConfig cfg;
        cfg.law = derive_offspring_law(m);
        cfg.initial = SinglePoint{x};
        cfg.horizon = t;
        cfg.seed = ctx.seed();
        auto grid = Grid1D::standard(t + std::abs(x));
        double allowance = ctx.num("allowance");
        std::vector<std::vector<double>> rows;
        int idx = 0;
        for (auto const& block : ctx.param("phis"))
        {
            auto phi = parse_profile(block);
            double pde = solve_kpp(m, phi, {t}, grid).fields[0].at(x);
            cfg.seed = ctx.seed() + static_cast<std::uint64_t>(idx);
            auto mc = kpp_duality_estimate(cfg, [&](double z) { return phi(z); }, t, n);
            double tol = 3 * mc.std_error + allowance;
            ctx.add_le("duality_" + std::to_string(idx), std::abs(mc.value - pde), tol,
                       {{"mc", mc.value}, {"std_error", mc.std_error}, {"pde", pde}});
            rows.push_back({static_cast<double>(idx), mc.value, mc.std_error, pde});
            ++idx;
        }
        ctx.write_csv("duality.csv", {"phi", "mc", "std_error", "pde"}, rows);
    }
    if (ctx.param("invariants").get<bool>())
        solver_invariants(ctx);
}

void front_constant(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    auto phi = parse_profile(ctx.param("phi"));
    auto schedule = ctx.list("schedule");

    auto flag = compute_C(m, phi, ctx.list("flag_schedule"));
    std::vector<std::vector<double>> rows;
    Json table = Json::array();
    for (auto const& e : flag.table)
    {
        rows.push_back({e.r, e.value, e.value_bare});
        table.push_back({e.r, e.value});
    }
    ctx.write_csv("c_r.csv", {"r", "C_r", "C_r_bare"}, rows);
    ctx.add_flag("convergence_flag", flag.converged, flag.relative_change, 0.05,
                 {{"table", table}});

    auto base = compute_C(m, phi, schedule);
    double shift_err = 0;
    Json shifts = Json::array();
    for (double x : ctx.list("shifts"))
    {
        double c = compute_C(m, phi.shifted(x), schedule).C;
        double expect = std::exp(kSqrt2 * x) * base.C;
        shift_err = std::max(shift_err, relative_gap(c, expect));
        shifts.push_back({x, c, expect});
    }
    ctx.add_le("shift_covariance", shift_err, ctx.num("shift_tol"),
               {{"C", base.C}, {"shifted", shifts}});

    // C(f) = C(u_f(s, . - sqrt2 s))
    auto f = parse_profile(ctx.param("f"));
    double s = ctx.num("s");
    auto grid = Grid1D::covering(-40, 30 + kSqrt2 * s, 0.05, 0.01);
    auto us = solve_kpp(m, f, {s}, grid).fields[0];
    auto moved = Profile::from_field(us).shifted(-kSqrt2 * s);
    double cf = compute_C(m, f, schedule).C;
    double cm = compute_C(m, moved, schedule).C;
    ctx.add_le("transport", relative_gap(cm, cf), ctx.num("transport_tol"),
               {{"C_f", cf}, {"C_transported", cm}});

    auto star = compute_C(m, Profile::indicator(0, INFINITY, 1), schedule);
    auto tilde = tilde_C(m, Profile::constant(0), schedule);
    ctx.add_flag("c_star_below_c_tilde", star.C < tilde.C, star.C, tilde.C,
                 {{"c_star", star.C}, {"c_tilde_0", tilde.C}});
}

void travelling_wave_recipe(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    auto w = travelling_wave(m, ctx.num("T"), ctx.num("dx"), ctx.num("dt"));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < w.x.size(); i += 5)
        rows.push_back({w.x[i], w.w[i]});
    ctx.write_csv("wave.csv", {"x", "w"}, rows);

    ctx.add_le("ode_residual", w.residual, ctx.num("residual_tol"),
               {{"front_drift", w.front_drift}, {"ode_pde_gap", w.ode_pde_gap}});
    ctx.add_flag("monotone", w.monotone);
    double lim = ctx.num("limit_tol");
    ctx.add_le("limits", std::max(w.left_gap, w.right_value), lim,
               {{"left_gap", w.left_gap}, {"right_value", w.right_value}});
    double cs = compute_C(m, Profile::indicator(0, INFINITY, 1)).C;
    ctx.add_le("wave_constant", relative_gap(w.wave_constant, cs), ctx.num("constant_tol"),
               {{"wave_constant", w.wave_constant},
                {"c_star", cs},
                {"window_spread", w.window_spread}});
}

void dichotomy(RecipeContext& ctx)
{
    auto const& m = ctx.mechanism();
    double t = ctx.num("t");
    auto lambdas = ctx.list("lambdas");
    bool a3 = check_conditions(m).a3.holds;
    auto tu = tilde_u(m, Profile::constant(0), t, Grid1D::standard(t), lambdas);
    Json growth = Json::array();
    for (auto const& [l, s] : tu.growth)
        growth.push_back({l, s});
    // divergence is expected exactly when (A3) fails
    ctx.add_flag("divergence_matches_a3", tu.divergent == !a3 && tu.converged == a3,
                 tu.divergent ? 1 : 0, a3 ? 0 : 1,
                 {{"a3", a3}, {"divergent", tu.divergent}, {"growth", growth}});

    if (a3)
    {
        auto schedule = ctx.list("schedule");
        auto io = iota_estimate(m, Profile::indicator(0, 1, 1), lambdas, schedule);
        Json ratios = Json::array();
        for (auto const& [l, r] : io.ratios)
            ratios.push_back({l, r});
        ctx.add_le("iota", io.iota, ctx.num("iota_tol"), {{"ratios", ratios}});

        // sup over lambda of C(lambda 1_{(0,inf)}) stays below C tilde
        double c_tilde = tilde_C(m, Profile::constant(0), schedule).C;
        double worst = 0;
        for (double l : lambdas)
            worst = std::max(worst, compute_C(m, Profile::indicator(0, INFINITY, l), schedule).C);
        ctx.add_flag("lambda_schedule_bounded", worst <= c_tilde * (1 + 1e-3), worst, c_tilde);
    }
}

void appendix_equivalence(RecipeContext& ctx)
{
    std::vector<std::pair<std::string, BranchingMechanism>> mechs = {
        {"config", ctx.mechanism()}};
    for (auto const& name : ctx.param("presets"))
        mechs.emplace_back(name.get<std::string>(),
                           parse_mechanism(Json{{"preset", name.get<std::string>()}}));
    int disagreements = 0;
    Json rows = Json::array();
    for (auto const& [name, m] : mechs)
        for (double beta : ctx.list("betas"))
        {
            auto r = check_lemmaA2_equivalence(m, beta);
            if (!r.agree)
                ++disagreements;
            rows.push_back({{"mechanism", name},
                            {"beta", beta},
                            {"tail", to_string(r.tail.verdict)},
                            {"inner", to_string(r.inner.verdict)},
                            {"agree", r.agree}});
        }
    ctx.write_json("classifications.json", rows);
    ctx.add_le("classifications_agree", disagreements, 0, {{"rows", rows}});
}

}  // namespace sbx::detail
