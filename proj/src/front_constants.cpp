#include "sbx/front_constants.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "sbx/error.hpp"
#include "sbx/quadrature.hpp"

#include <Eigen/Dense>

namespace sbx
{
double h_norm(Profile const& phi)
{
    double lo = phi.lo();
    double reach = std::max(0.0, -lo);
    double total = 0, left = 0;
    auto g = [&phi](double y) { return y * std::exp(kSqrt2 * y) * phi(-y); };
    std::vector<double> cuts;
    for (double b : phi.breaks())
        if (-b > 0 && -b < reach)
            cuts.push_back(-b);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(reach);
    for (double c : cuts)
    {
        if (c > left)
            total += integrate(g, left, c, 1e-10);
        left = c;
    }
    // phi is constant below lo; anything left there makes the integral diverge,
    // unless it is far below what the grid can resolve
    double tail = phi.left_value() * (reach + 1) * std::exp(kSqrt2 * reach);
    require(phi.left_value() == 0 || tail < 1e-12 * std::max(1.0, total), ErrorCode::NotInH,
            "phi does not vanish fast enough at -inf");
    return total;
}

Grid1D front_grid(Profile const& phi, double r, double dx, double dt)
{
    double anchor = -kSqrt2 * r;
    double x_lo = std::min(phi.lo(), 0.0) - kSqrt2 * r - 8 * std::sqrt(r) - 30;
    double x_hi = std::max(phi.hi(), 0.0) + 8 * std::sqrt(r) + 20;
    // data vanishing on the right spreads that way at speed sqrt2 as well
    if (phi.right_value() == 0)
        x_hi += kSqrt2 * r;
    double left = std::ceil((anchor - x_lo) / dx);
    double right = std::ceil((x_hi - anchor) / dx);
    Grid1D g;
    g.x_min = anchor - left * dx;
    g.n = static_cast<std::size_t>(left + right) + 1;
    g.x_max = g.x_min + dx * static_cast<double>(g.n - 1);
    g.dt = dt;
    return g;
}

double front_integral(Field const& u, double r, double tail_ratio)
{
    double dx = u.grid.dx();
    double anchor = -kSqrt2 * r;
    double peak = 0, sum = 0;
    // trapezoid from y = 0, where the integrand vanishes
    for (std::size_t j = 1;; ++j)
    {
        double y = dx * static_cast<double>(j);
        double x = anchor - y;
        if (x < u.grid.x_min)
            break;
        double v = y * std::exp(kSqrt2 * y) * u.at(x);
        sum += v;
        if (v > peak)
            peak = v;
        else if (v < tail_ratio * peak)
            break;
    }
    return sum * dx;
}

namespace
{
// C_r = C (1 - k log r / sqrt r) - b / sqrt r + d / r with k = 3 / (2 sqrt pi):
// the log term is the Bramson shift seen through the y-weighted integral. The
// last two or three entries determine the unknowns.
double richardson(std::vector<CrEntry> const& table)
{
    double k = 3 / (2 * std::sqrt(M_PI));
    std::size_t m = std::min<std::size_t>(table.size(), 3);
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m);
    for (std::size_t i = 0; i < m; ++i)
    {
        auto const& e = table[table.size() - m + i];
        double s = 1 / std::sqrt(e.r);
        A(i, 0) = 1 - k * std::log(e.r) * s;
        A(i, 1) = -s;
        if (m == 3)
            A(i, 2) = 1 / e.r;
        rhs(i) = e.value_bare;
    }
    return A.fullPivLu().solve(rhs)(0);
}

void extrapolate(FrontConstants& out)
{
    auto const& last = out.table.back();
    out.C_bare = last.value_bare;
    out.converged = false;
    if (out.table.size() >= 2)
    {
        auto const& prev = out.table[out.table.size() - 2];
        double c = richardson(out.table);
        if (c > 0 && std::isfinite(c))
            out.C_bare = c;
        out.relative_change =
            out.C_bare > 0 ? std::abs(last.value_bare - prev.value_bare) / out.C_bare : 0;
        out.converged = out.relative_change < 0.05;
    }
    if (last.value_bare == 0)
    {
        out.C_bare = 0;
        out.relative_change = 0;
        out.converged = true;
    }
    out.C = sqrt_2_over_pi() * out.C_bare;
}
}  // namespace

FrontConstants compute_C(BranchingMechanism const& mech, Profile const& phi,
                         std::vector<double> const& r_schedule, FrontOptions const& opt)
{
    require(!r_schedule.empty() && std::is_sorted(r_schedule.begin(), r_schedule.end())
                && r_schedule.front() > 0,
            ErrorCode::InvalidArgument, "r schedule must be positive and increasing");
    h_norm(phi);
    FrontConstants out;
    for (double r : r_schedule)
    {
        auto grid = front_grid(phi, r, opt.dx, opt.dt);
        auto u = solve_kpp(mech, phi, {r}, grid).fields.back();
        double bare = front_integral(u, r, opt.tail_ratio);
        out.table.push_back({r, sqrt_2_over_pi() * bare, bare});
    }
    extrapolate(out);
    out.C = sqrt_2_over_pi() * out.C_bare;
    return out;
}

namespace
{
struct Laguerre
{
    std::vector<double> nodes, weights;
};

// Golub-Welsch for weight e^{-y} on (0, inf)
Laguerre gauss_laguerre(int n)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
    {
        J(i, i) = 2 * i + 1;
        if (i + 1 < n)
            J(i, i + 1) = J(i + 1, i) = i + 1;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Laguerre out;
    for (int i = 0; i < n; ++i)
    {
        out.nodes.push_back(es.eigenvalues()(i));
        double v = es.eigenvectors()(0, i);
        out.weights.push_back(v * v);
    }
    return out;
}

double level_crossing(Field const& u, double level)
{
    // last node above the level, then linear interpolation
    std::size_t n = u.grid.n;
    for (std::size_t i = n - 1; i-- > 0;)
        if (u.values[i] >= level && u.values[i + 1] < level)
        {
            double w = (u.values[i] - level) / (u.values[i] - u.values[i + 1]);
            return u.grid.x(i) + w * u.grid.dx();
        }
    throw Error(ErrorCode::NonConvergedFront, "no level crossing in the field");
}

struct LineFit
{
    double slope, intercept;
};

LineFit fit_line(std::vector<double> const& x, std::vector<double> const& y)
{
    double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}
}  // namespace

TildeResult tilde_u(BranchingMechanism const& mech, Profile const& phi, double t,
                    Grid1D const& grid, std::vector<double> lambdas, SolverOptions const& opt)
{
    require(!lambdas.empty() && t > 0, ErrorCode::InvalidArgument, "tilde_u needs lambdas and t > 0");
    TildeResult out;
    std::optional<Field> prev;
    double prev_sup = 0;
    for (std::size_t k = 0; k < lambdas.size(); ++k)
    {
        double lam = lambdas[k];
        auto init = Profile::splice(phi, Profile::constant(lam), 0);
        Field u;
        try
        {
            u = solve_kpp(mech, init, {t}, grid, opt).fields.back();
        }
        catch (Error const& e)
        {
            if (e.code() != ErrorCode::BlowUp)
                throw;
            out.divergent = true;
            out.growth.emplace_back(lam, std::numeric_limits<double>::infinity());
            break;
        }
        double sup = u.sup_on(-10, 10);
        out.growth.emplace_back(lam, sup);
        out.field = u;
        out.lambda_used = lam;
        if (prev)
        {
            double d = sup_distance(u, *prev, -10, 10);
            out.cauchy.push_back(d);
            if (d < 1e-4)
            {
                out.converged = true;
                break;
            }
            // growth per decade of lambda
            double decades = std::log10(lam / lambdas[k - 1]);
            if (sup >= prev_sup * std::pow(1.1, decades))
            {
                out.divergent = true;
                break;
            }
        }
        if (k + 1 == lambdas.size() && lam * 10 <= 1e12)
            lambdas.push_back(lam * 10);
        prev = u;
        prev_sup = sup;
    }
    return out;
}

FrontConstants tilde_C(BranchingMechanism const& mech, Profile const& phi,
                       std::vector<double> const& r_schedule, double r0, FrontOptions const& opt)
{
    double lo = std::min(phi.lo(), 0.0) - 25 - kSqrt2 * r0;
    double hi = std::max(phi.hi(), 0.0) + 25;
    auto grid = Grid1D::covering(lo, hi, opt.dx, opt.dt);
    auto tu = tilde_u(mech, phi, r0, grid);
    require(tu.converged && !tu.divergent, ErrorCode::NotInH,
            "u~ does not converge in lambda; C~ is undefined");
    // u~(r0 + r, x - sqrt2 r0) = u_g(r, x) with g = u~(r0, . - sqrt2 r0)
    auto g = Profile::from_field(tu.field).shifted(-kSqrt2 * r0);
    auto fc = compute_C(mech, g, r_schedule, opt);
    for (auto& e : fc.table)
        e.r += r0;
    extrapolate(fc);
    fc.c_tilde_0 = fc.C;
    return fc;
}

WaveResult travelling_wave(BranchingMechanism const& mech, double T_large, double dx, double dt)
{
    require(T_large >= 30, ErrorCode::InvalidArgument, "travelling wave needs T >= 30");
    require(mech.is_normalized(1e-9), ErrorCode::NotNormalized, "mechanism must be normalized");
    // u = 1 is an equilibrium, so the left margin only needs to hold the decay of 1 - u
    auto grid = Grid1D::covering(-40, kSqrt2 * T_large + 20, dx, dt);
    double half = 0.5 * T_large;
    auto sol = solve_kpp(mech, Profile::indicator(-INFINITY, 0, 1), {half, T_large - 5, T_large},
                         grid);
    auto const& uT = sol.fields[2];
    WaveResult out;
    double X_half = level_crossing(sol.fields[0], 0.5);
    double X_prev = level_crossing(sol.fields[1], 0.5);
    double X = level_crossing(uT, 0.5);

    for (std::size_t i = 0; i < grid.n; ++i)
    {
        out.x.push_back(grid.x(i) - X);
        out.w.push_back(uT.values[i]);
    }
    out.monotone = true;
    for (std::size_t i = 0; i + 1 < grid.n; ++i)
        if (out.w[i + 1] > out.w[i] + 1e-12)
            out.monotone = false;
    out.left_gap = std::abs(1 - out.w.front());
    out.right_value = out.w.back();

    for (std::size_t i = 1; i + 1 < grid.n; ++i)
    {
        if (std::abs(out.x[i]) > 10)
            continue;
        double w = out.w[i];
        double d2 = (out.w[i + 1] - 2 * w + out.w[i - 1]) / (dx * dx);
        double d1 = (out.w[i + 1] - out.w[i - 1]) / (2 * dx);
        out.residual = std::max(out.residual, std::abs(0.5 * d2 + kSqrt2 * d1 - mech.psi(w)));
    }

    // recentred profiles at T - 5 and T
    auto const& up = sol.fields[1];
    for (double z = -10; z <= 10; z += 0.1)
        out.front_drift = std::max(out.front_drift, std::abs(uT.at(X + z) - up.at(X_prev + z)));
    if (out.front_drift > 1e-3)
        throw Error(ErrorCode::NonConvergedFront,
                    "recentred profiles differ by " + std::to_string(out.front_drift));

    // X(t) - m(t) = s* - 3 sqrt(pi/2) / sqrt t + b / t; the 1/sqrt t term is the
    // universal pulled-front correction for diffusivity 1/2 and speed sqrt2
    auto corrected = [](double X_, double t) {
        return X_ - bramson_m(t) + 3 * std::sqrt(M_PI / 2) / std::sqrt(t);
    };
    out.front_shift = 2 * corrected(X, T_large) - corrected(X_half, half);

    // ODE shooting from the saddle at w = 1
    double q = mech.psi_deriv(1, 1);
    double mu = -kSqrt2 + std::sqrt(2 + 2 * q);
    double eta = 1e-9, h = 1e-3;
    double xx = 0, w = 1 - eta, wp = -eta * mu;
    auto acc = [&mech](double w_, double wp_) { return 2 * (mech.psi(std::max(w_, 0.0)) - kSqrt2 * wp_); };
    std::vector<double> ox, ow;
    double x_pin = std::numeric_limits<double>::quiet_NaN();
    while (true)
    {
        ox.push_back(xx);
        ow.push_back(w);
        if (std::isnan(x_pin) && ow.size() >= 2 && w <= 0.5)
        {
            double w0 = ow[ow.size() - 2];
            x_pin = xx - h * (0.5 - w) / (w0 - w);
        }
        if (!std::isnan(x_pin) && xx > x_pin + 16)
            break;
        require(xx < 1e4 && w > 0, ErrorCode::NonConvergedFront, "wave ODE shooting failed");
        double k1w = wp, k1p = acc(w, wp);
        double k2w = wp + 0.5 * h * k1p, k2p = acc(w + 0.5 * h * k1w, wp + 0.5 * h * k1p);
        double k3w = wp + 0.5 * h * k2p, k3p = acc(w + 0.5 * h * k2w, wp + 0.5 * h * k2p);
        double k4w = wp + h * k3p, k4p = acc(w + h * k3w, wp + h * k3p);
        w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
        wp += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
        xx += h;
    }
    auto fit_window = [&](double a, double b) {
        std::vector<double> fx, fy;
        for (std::size_t i = 0; i < ox.size(); ++i)
        {
            double z = ox[i] - x_pin;
            if (z >= a && z <= b)
            {
                fx.push_back(z);
                fy.push_back(ow[i] * std::exp(kSqrt2 * z));
            }
        }
        return fit_line(fx, fy).slope;
    };
    out.ode_constant = fit_window(5, 15);
    double a1 = fit_window(5, 10), a2 = fit_window(10, 15);
    out.window_spread = std::abs(a1 - a2) / out.ode_constant;
    out.wave_constant = out.ode_constant * std::exp(kSqrt2 * out.front_shift);

    auto ode_at = [&](double z) {
        double s = (z + x_pin) / h;
        auto i = static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(ox.size() - 2)));
        double f = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
        return (1 - f) * ow[i] + f * ow[i + 1];
    };
    for (double z = -10; z <= 10; z += 0.05)
        if (z + x_pin >= 0)
            out.ode_pde_gap = std::max(out.ode_pde_gap, std::abs(ode_at(z) - uT.at(X + z)));
    for (double z = 5; z <= 15; z += 0.05)
        out.pde_ratio = std::max(out.pde_ratio, uT.at(X + z) / (z * std::exp(-kSqrt2 * z)));
    return out;
}

std::vector<RecenteredRow> recentered_limit_check(BranchingMechanism const& mech,
                                                  Profile const& phi, double C,
                                                  std::vector<double> const& dm_bank,
                                                  std::vector<double> const& t_schedule,
                                                  std::vector<double> const& x_window,
                                                  FrontOptions const& opt)
{
    require(!dm_bank.empty(), ErrorCode::MissingBank, "recentered check needs a dM bank");
    h_norm(phi);
    std::vector<RecenteredRow> rows;
    // -log P_{delta_x}[exp(-C dM)] with a Poisson(1) skeleton start
    auto target = [&](double theta) {
        double s = 0;
        for (double d : dm_bank)
            s += std::exp(-theta * d);
        return 1 - s / static_cast<double>(dm_bank.size());
    };
    for (double t : t_schedule)
    {
        double lo = std::min(phi.lo(), 0.0) - kSqrt2 * t - 8 * std::sqrt(t) - 20;
        double hi = std::max(phi.hi(), 0.0) + 8 * std::sqrt(t) + 20;
        auto grid = Grid1D::covering(lo, hi, opt.dx, opt.dt);
        auto u = solve_kpp(mech, phi, {t}, grid).fields.back();
        RecenteredRow row{t, 0, {}, {}, 0};
        for (double x : x_window)
        {
            double l = u.at(x - bramson_m(t));
            double r = target(C * std::exp(kSqrt2 * x));
            double r_alt = 0;
            {
                // e^{sqrt2 x} moved onto the bank values
                double s = 0;
                for (double d : dm_bank)
                    s += std::exp(-C * (std::exp(kSqrt2 * x) * d));
                r_alt = 1 - s / static_cast<double>(dm_bank.size());
            }
            row.shift_consistency = std::max(row.shift_consistency, std::abs(r - r_alt));
            row.lhs.push_back(l);
            row.rhs.push_back(r);
            row.sup_discrepancy = std::max(row.sup_discrepancy, std::abs(l - r));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

DecorationLaplace decoration_laplace(BranchingMechanism const& mech, DecorationInput const& in,
                                     std::vector<double> const& t_schedule,
                                     std::vector<double> const& r_schedule,
                                     FrontOptions const& opt)
{
    require(in.s > 0 && in.lambda >= 0, ErrorCode::InvalidArgument, "need s > 0, lambda >= 0");
    h_norm(in.f);
    h_norm(in.h);

    // B = 1 - e^{-g} V_h(s, . - sqrt2 s)
    double shift = kSqrt2 * in.s;
    std::shared_ptr<Field> V;
    double v_lo = in.g.lo(), v_hi = in.g.hi();
    bool h_zero = in.h.breaks().empty() && in.h.lo() == in.h.hi() && in.h(0) == 0;
    if (!h_zero)
    {
        double lo = std::min(in.h.lo(), 0.0) - 20 - kSqrt2 * in.s;
        double hi = std::max(in.h.hi(), 0.0) + 20 + kSqrt2 * in.s;
        auto grid = Grid1D::covering(lo, hi, opt.dx, opt.dt);
        V = std::make_shared<Field>(immigration_laplace(mech, in.h, in.s, grid).V);
        v_lo = std::min(v_lo, V->grid.x_min + shift);
        v_hi = std::max(v_hi, V->grid.x_max + shift);
    }
    auto g = in.g;
    Profile B(
        [g, V, shift](double x) {
            double v = V ? V->at(x - shift) : 1.0;
            return 1 - std::exp(-g(x)) * v;
        },
        in.g.breaks(), v_lo, v_hi);
    auto F = [&](double a) {
        if (std::isinf(a))
            return in.f + B;
        return in.f + Profile::splice(B, Profile::constant(1), a);
    };

    DecorationLaplace out;
    out.c_star = compute_C(mech, Profile::indicator(0, INFINITY, 1), r_schedule, opt).C;
    auto gl = gauss_laguerre(16);
    double c0 = compute_C(mech, F(0), r_schedule, opt).C;
    double integral = 0;
    std::vector<double> used;
    if (in.lambda == 0)
    {
        integral = compute_C(mech, F(INFINITY), r_schedule, opt).C;
    }
    else
    {
        for (std::size_t k = 0; k < gl.nodes.size(); ++k)
        {
            // C(F_a) <= C(f + 1) and the weights decay like e^{-y}
            if (gl.weights[k] < 1e-10)
                break;
            used.push_back(gl.nodes[k]);
            integral += gl.weights[k] * compute_C(mech, F(gl.nodes[k] / in.lambda), r_schedule, opt).C;
        }
    }
    out.limit = (c0 - integral) / out.c_star;

    for (double t : t_schedule)
    {
        double lo = std::min({in.f.lo(), B.lo(), 0.0}) - kSqrt2 * t - 8 * std::sqrt(t) - 20;
        double hi = std::max({in.f.hi(), B.hi(), 0.0}) + 8 * std::sqrt(t) + 20;
        auto grid = Grid1D::covering(lo, hi, opt.dx, opt.dt);
        double x0 = -kSqrt2 * t;
        auto at = [&](Profile const& p) { return solve_kpp(mech, p, {t}, grid).fields.back().at(x0); };
        double denom = 1 - std::exp(-at(Profile::indicator(0, INFINITY, 1)));
        double first = 0;
        if (in.lambda == 0)
            first = std::exp(-at(F(INFINITY)));
        else
            for (std::size_t k = 0; k < used.size(); ++k)
                first += gl.weights[k] * std::exp(-at(F(used[k] / in.lambda)));
        double ratio = (first - std::exp(-at(F(0)))) / denom;
        out.finite_t.emplace_back(t, ratio);
    }
    return out;
}

IotaResult iota_estimate(BranchingMechanism const& mech, Profile const& phi,
                         std::vector<double> const& lambdas,
                         std::vector<double> const& r_schedule, FrontOptions const& opt)
{
    require(phi.left_value() == 0 && phi.right_value() == 0, ErrorCode::InvalidArgument,
            "iota needs compactly supported phi");
    IotaResult out;
    double left = phi.lo();
    for (double b : phi.breaks())
    {
        if (b > left && b < phi.hi())
        {
            out.weight += integrate([&phi](double x) { return phi(x) * std::exp(-kSqrt2 * x); },
                                    left, b, 1e-12);
            left = b;
        }
    }
    out.weight += integrate([&phi](double x) { return phi(x) * std::exp(-kSqrt2 * x); }, left,
                            phi.hi(), 1e-12);
    require(out.weight > 0, ErrorCode::InvalidArgument, "phi vanishes");
    for (double lam : lambdas)
    {
        double c = compute_C(mech, phi.scaled(lam), r_schedule, opt).C;
        if (!out.ratios.empty() && c / lam > out.ratios.back().second * (1 + 1e-3))
            out.monotone = false;
        out.ratios.emplace_back(lam, c / lam);
    }
    out.iota = out.ratios.back().second / out.weight;
    return out;
}

}  // namespace sbx
