#include "sbx/kpp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "sbx/error.hpp"

namespace sbx
{
Grid1D Grid1D::covering(double x_min, double x_max, double dx, double dt)
{
    require(x_max > x_min && dx > 0 && dt > 0, ErrorCode::InvalidArgument, "bad grid request");
    auto cells = static_cast<std::size_t>(std::ceil((x_max - x_min) / dx - 1e-9));
    Grid1D g;
    g.x_min = x_min;
    g.n = std::max<std::size_t>(cells, 2) + 1;
    g.x_max = x_min + dx * static_cast<double>(g.n - 1);
    g.dt = dt;
    return g;
}

Grid1D Grid1D::standard(double T, double dx, double dt)
{
    double half = 20 + kSqrt2 * T;
    // keep 0 on a node
    double cells = std::ceil(half / dx);
    return covering(-cells * dx, cells * dx, dx, dt);
}

std::size_t Field::index_of(double x) const
{
    double s = (x - grid.x_min) / grid.dx();
    if (s <= 0)
        return 0;
    auto i = static_cast<std::size_t>(std::llround(s));
    return std::min(i, grid.n - 1);
}

double Field::at(double x) const
{
    double s = (x - grid.x_min) / grid.dx();
    if (s <= 0)
        return values.front();
    if (s >= static_cast<double>(grid.n - 1))
        return values.back();
    auto i = static_cast<std::size_t>(s);
    double w = s - static_cast<double>(i);
    return (1 - w) * values[i] + w * values[i + 1];
}

double Field::sup_on(double lo, double hi) const
{
    double m = 0;
    for (std::size_t i = 0; i < grid.n; ++i)
    {
        double x = grid.x(i);
        if (x >= lo && x <= hi)
            m = std::max(m, values[i]);
    }
    return m;
}

double sup_distance(Field const& a, Field const& b, double lo, double hi)
{
    double m = 0;
    for (std::size_t i = 0; i < a.grid.n; ++i)
    {
        double x = a.grid.x(i);
        if (x >= lo && x <= hi)
            m = std::max(m, std::abs(a.values[i] - b.at(x)));
    }
    return m;
}

// ---- Profile ---------------------------------------------------------------

Profile::Profile(RealFn f, std::vector<double> breaks, double lo, double hi)
    : f_(std::move(f)), breaks_(std::move(breaks)), lo_(lo), hi_(hi)
{
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
}

Profile Profile::constant(double c)
{
    return Profile([c](double) { return c; }, {}, 0, 0);
}

Profile Profile::indicator(double a, double b, double height)
{
    require(a < b, ErrorCode::InvalidArgument, "indicator needs a < b");
    std::vector<double> br;
    if (std::isfinite(a))
        br.push_back(a);
    if (std::isfinite(b))
        br.push_back(b);
    if (br.empty())
        return constant(height);
    double lo = br.front() - 1;
    double hi = br.back() + 1;
    return Profile([a, b, height](double x) { return (x > a && x < b) ? height : 0.0; }, br, lo,
                   hi);
}

Profile Profile::from_field(Field const& field)
{
    auto shared = std::make_shared<Field>(field);
    return Profile([shared](double x) { return shared->at(x); }, {}, field.grid.x_min,
                   field.grid.x_max);
}

double Profile::cell_average(double a, double b) const
{
    if (!(b > a))
        return (*this)(a);
    // 3-point Gauss-Legendre on each smooth piece
    static constexpr double node = 0.77459666924148337704;
    auto piece = [this](double l, double r) {
        double c = 0.5 * (l + r), h = 0.5 * (r - l);
        return h * (5.0 / 9 * (*this)(c - h * node) + 8.0 / 9 * (*this)(c)
                    + 5.0 / 9 * (*this)(c + h * node));
    };
    double total = 0, left = a;
    for (double br : breaks_)
    {
        if (br <= a)
            continue;
        if (br >= b)
            break;
        total += piece(left, br);
        left = br;
    }
    total += piece(left, b);
    return total / (b - a);
}

Profile Profile::operator+(Profile const& other) const
{
    auto f1 = f_, f2 = other.f_;
    double l1 = lo_, h1 = hi_, l2 = other.lo_, h2 = other.hi_;
    auto br = breaks_;
    br.insert(br.end(), other.breaks_.begin(), other.breaks_.end());
    return Profile(
        [=](double x) {
            return f1(std::clamp(x, l1, h1)) + f2(std::clamp(x, l2, h2));
        },
        br, std::min(lo_, other.lo_), std::max(hi_, other.hi_));
}

Profile Profile::scaled(double c) const
{
    auto f = f_;
    return Profile([f, c](double x) { return c * f(x); }, breaks_, lo_, hi_);
}

Profile Profile::shifted(double s) const
{
    auto f = f_;
    std::vector<double> br;
    for (double b : breaks_)
        br.push_back(b - s);
    return Profile([f, s](double y) { return f(y + s); }, br, lo_ - s, hi_ - s);
}

Profile Profile::splice(Profile const& left, Profile const& right, double a)
{
    std::vector<double> br{a};
    for (double b : left.breaks_)
        if (b < a)
            br.push_back(b);
    for (double b : right.breaks_)
        if (b > a)
            br.push_back(b);
    return Profile([left, right, a](double x) { return x <= a ? left(x) : right(x); }, br,
                   std::min(left.lo_, a - 1), std::max(right.hi_, a + 1));
}

// ---- reaction ----------------------------------------------------------------

namespace
{
class Reaction
{
  public:
    explicit Reaction(BranchingMechanism const& m)
        : alpha_(m.alpha()), beta_(m.beta()), levy_bound_(0), mech_(m)
    {
        switch (m.levy().kind())
        {
            case LevyMeasure::Kind::Zero: kind_ = Kind::Quadratic; break;
            case LevyMeasure::Kind::Atomic:
                kind_ = Kind::Atomic;
                for (auto const& a : m.levy().atoms())
                {
                    w_.push_back(a.weight);
                    y_.push_back(a.location);
                    levy_bound_ += a.weight * a.location;
                }
                break;
            case LevyMeasure::Kind::ExpPoly: kind_ = Kind::Table; build_table(); break;
        }
    }

    double psi(double v) const
    {
        if (v <= 0)
            return -alpha_ * v;
        switch (kind_)
        {
            case Kind::Quadratic: return -alpha_ * v + beta_ * v * v;
            case Kind::Atomic:
            {
                double s = -alpha_ * v + beta_ * v * v;
                for (std::size_t i = 0; i < w_.size(); ++i)
                {
                    double x = v * y_[i];
                    s += w_[i] * (x < 1e-3 ? x * x * (0.5 - x / 6 + x * x / 24) : std::expm1(-x) + x);
                }
                return s;
            }
            case Kind::Table: return table_psi(v);
        }
        return 0;
    }

    // bound on |psi'| over [0, v]
    double lipschitz(double v) const
    {
        double vv = std::max(v, 0.0);
        switch (kind_)
        {
            case Kind::Quadratic: return std::abs(alpha_) + 2 * beta_ * vv;
            case Kind::Atomic: return std::abs(alpha_) + 2 * beta_ * vv + levy_bound_;
            case Kind::Table: return std::abs(alpha_) + std::abs(table_dpsi(vv));
        }
        return 1;
    }

    double flow(double v, double h) const
    {
        if (kind_ == Kind::Quadratic)
        {
            double a = alpha_, b = beta_;
            if (b == 0)
                return v * std::exp(a * h);
            if (a == 0)
                return v / (1 + b * v * h);
            double em1 = std::expm1(a * h);
            return v * (1 + em1) / (1 + (b / a) * v * em1);
        }
        double rem = h;
        while (rem > 0)
        {
            double hs = std::min(rem, 0.1 / std::max(lipschitz(v), 1e-12));
            double k1 = -psi(v);
            double k2 = -psi(v + 0.5 * hs * k1);
            double k3 = -psi(v + 0.5 * hs * k2);
            double k4 = -psi(v + hs * k3);
            v += hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            rem -= hs;
        }
        return v;
    }

  private:
    enum class Kind
    {
        Quadratic,
        Atomic,
        Table,
    };

    static constexpr double t_lo = -10 * 2.302585092994046;  // log(1e-10)
    static constexpr double t_hi = 6 * 2.302585092994046;    // log(1e6)
    static constexpr int t_n = 2001;

    void build_table()
    {
        tp_.resize(t_n);
        tdp_.resize(t_n);
        double step = (t_hi - t_lo) / (t_n - 1);
        for (int i = 0; i < t_n; ++i)
        {
            double v = std::exp(t_lo + step * i);
            tp_[i] = mech_.psi(v);
            tdp_[i] = mech_.psi_deriv(v, 1);
        }
    }

    double table_psi(double v) const
    {
        double t = std::log(v);
        if (t <= t_lo)
            return -alpha_ * v;
        if (t >= t_hi)
            return mech_.psi(v);
        double step = (t_hi - t_lo) / (t_n - 1);
        double s = (t - t_lo) / step;
        int i = std::min(static_cast<int>(s), t_n - 2);
        // cubic Hermite in v
        double v0 = std::exp(t_lo + step * i), v1 = std::exp(t_lo + step * (i + 1));
        double hh = v1 - v0, u = (v - v0) / hh;
        double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
        double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
        return h00 * tp_[i] + h10 * hh * tdp_[i] + h01 * tp_[i + 1] + h11 * hh * tdp_[i + 1];
    }

    double table_dpsi(double v) const
    {
        if (v <= 0)
            return -alpha_;
        double t = std::log(v);
        if (t <= t_lo)
            return -alpha_;
        if (t >= t_hi)
            return mech_.psi_deriv(v, 1);
        double step = (t_hi - t_lo) / (t_n - 1);
        int i = std::min(static_cast<int>((t - t_lo) / step) + 1, t_n - 1);
        return tdp_[i];
    }

    Kind kind_;
    double alpha_;
    double beta_;
    double levy_bound_;
    std::vector<double> w_, y_;
    std::vector<double> tp_, tdp_;
    BranchingMechanism mech_;
};

// (A - tau B) u_new = rhs with A, B the compact fourth-order pair.
class Diffusion
{
  public:
    Diffusion(std::size_t n, double dx, double tau) : n_(n), cp_(n), inv_(n)
    {
        double k = 1.0 / (2 * dx * dx);
        off_ = 1.0 / 12 - tau * k;
        diag_ = 10.0 / 12 + 2 * tau * k;
        edge_ = 2.0 / 12 - 2 * tau * k;
        // Thomas factorization, constant matrix
        for (std::size_t i = 0; i < n_; ++i)
        {
            double lower = (i == 0) ? 0 : (i == n_ - 1 ? edge_ : off_);
            double upper = (i == 0) ? edge_ : (i == n_ - 1 ? 0 : off_);
            double denom = diag_ - (i ? lower * cp_[i - 1] : 0);
            inv_[i] = 1 / denom;
            cp_[i] = upper * inv_[i];
        }
    }

    void solve(std::vector<double>& d) const
    {
        for (std::size_t i = 0; i < n_; ++i)
        {
            double lower = (i == 0) ? 0 : (i == n_ - 1 ? edge_ : off_);
            d[i] = (d[i] - (i ? lower * d[i - 1] : 0)) * inv_[i];
        }
        for (std::size_t i = n_ - 1; i-- > 0;)
            d[i] -= cp_[i] * d[i + 1];
    }

  private:
    std::size_t n_;
    double off_, diag_, edge_;
    std::vector<double> cp_, inv_;
};

// out = (A + tau B) u
void apply_explicit(std::vector<double> const& u, std::vector<double>& out, double dx, double tau)
{
    std::size_t n = u.size();
    double k = tau / (2 * dx * dx);
    double a = 1.0 / 12 + k, c = 10.0 / 12 - 2 * k, e = 2.0 / 12 + 2 * k;
    out[0] = c * u[0] + e * u[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = a * (u[i - 1] + u[i + 1]) + c * u[i];
    out[n - 1] = e * u[n - 2] + c * u[n - 1];
}

std::vector<double> sample_initial(Profile const& p, Grid1D const& g, bool point)
{
    std::vector<double> v(g.n);
    double dx = g.dx();
    for (std::size_t i = 0; i < g.n; ++i)
    {
        double x = g.x(i);
        if (point)
            v[i] = p(x);
        else
            v[i] = p.cell_average(std::max(x - 0.5 * dx, g.x_min), std::min(x + 0.5 * dx, g.x_max));
        require(std::isfinite(v[i]) && v[i] >= 0, ErrorCode::InvalidArgument,
                "initial data must be finite and nonnegative");
    }
    return v;
}

KppSolution run_scheme(BranchingMechanism const& mech, Profile const& initial,
                       std::vector<double> const& times, Grid1D const& grid,
                       SolverOptions const& opt)
{
    require(grid.n >= 3 && grid.dt > 0, ErrorCode::InvalidArgument, "bad grid");
    require(std::is_sorted(times.begin(), times.end()) && (times.empty() || times.front() >= 0),
            ErrorCode::InvalidArgument, "times must be sorted and nonnegative");
    Reaction reaction(mech);
    double dx = grid.dx();
    // point sampling for smooth data; jumps get cell averages and a damped start
    bool point = initial.breaks().empty();
    std::vector<double> u = sample_initial(initial, grid, point);
    std::vector<double> work(grid.n);

    KppSolution sol;
    double t = 0;
    int steps_done = 0;

    auto react = [&](double h) {
        double mx = 0;
        for (double& v : u)
        {
            if (v != 0)
                v = reaction.flow(v, h);
            mx = std::max(mx, v);
        }
        sol.max_value = std::max(sol.max_value, mx);
        if (!(mx <= opt.blowup))
            throw Error(ErrorCode::BlowUp, "solution exceeded " + std::to_string(opt.blowup));
    };
    auto clip = [&]() {
        for (double& v : u)
            if (v < 0)
            {
                sol.largest_clip = std::max(sol.largest_clip, -v);
                v = 0;
            }
    };

    for (double target : times)
    {
        if (target > t)
        {
            auto m = static_cast<long>(std::ceil((target - t) / grid.dt - 1e-9));
            m = std::max(m, 1L);
            double h = (target - t) / static_cast<double>(m);
            Diffusion cn(grid.n, dx, 0.5 * h);
            std::unique_ptr<Diffusion> be;
            react(0.5 * h);
            for (long j = 0; j < m; ++j)
            {
                if (!point && steps_done < 2)
                {
                    if (!be)
                        be = std::make_unique<Diffusion>(grid.n, dx, 0.5 * h);
                    for (int half = 0; half < 2; ++half)
                    {
                        // A u
                        apply_explicit(u, work, dx, 0.0);
                        be->solve(work);
                        u.swap(work);
                    }
                }
                else
                {
                    apply_explicit(u, work, dx, 0.5 * h);
                    cn.solve(work);
                    u.swap(work);
                }
                clip();
                ++steps_done;
                react(j + 1 < m ? h : 0.5 * h);
            }
            t = target;
        }
        double slope = std::max(std::abs(u[1] - u[0]), std::abs(u[grid.n - 1] - u[grid.n - 2])) / dx;
        sol.max_boundary_slope = std::max(sol.max_boundary_slope, slope);
        if (opt.check_flux && slope > opt.flux_tol)
            throw Error(ErrorCode::BoundaryLeak,
                        "boundary slope " + std::to_string(slope) + " at t=" + std::to_string(t));
        sol.fields.push_back(Field{grid, t, u});
    }
    return sol;
}
}  // namespace

double reaction_flow(BranchingMechanism const& mech, double v, double h)
{
    return Reaction(mech).flow(v, h);
}

KppSolution solve_kpp(BranchingMechanism const& mech, Profile const& initial,
                      std::vector<double> const& times, Grid1D const& grid,
                      SolverOptions const& opt)
{
    return run_scheme(mech, initial, times, grid, opt);
}

KppSolution solve_subcritical(BranchingMechanism const& mech, Profile const& initial,
                              std::vector<double> const& times, Grid1D const& grid,
                              SolverOptions const& opt)
{
    return run_scheme(mech.subcritical(), initial, times, grid, opt);
}

ImmigrationField immigration_laplace(BranchingMechanism const& mech, Profile const& f, double t,
                                     Grid1D const& grid, SolverOptions const& opt)
{
    auto u = solve_kpp(mech, f, {t}, grid, opt).fields.back();
    auto us = solve_subcritical(mech, f, {t}, grid, opt).fields.back();
    ImmigrationField out{u, 0};
    for (std::size_t i = 0; i < grid.n; ++i)
    {
        double v = 1 - u.values[i] + us.values[i];
        double c = std::clamp(v, 0.0, 1.0);
        out.clip = std::max(out.clip, std::abs(v - c));
        out.V.values[i] = c;
    }
    require(out.clip <= 1e-6, ErrorCode::ClipExceeded,
            "V_f left [0,1] by " + std::to_string(out.clip));
    return out;
}

}  // namespace sbx
