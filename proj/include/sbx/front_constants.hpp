#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sbx/kpp_solver.hpp"

namespace sbx
{
struct FrontOptions
{
    double dx = 0.05;
    double dt = 0.01;
    //! Integrand cutoff relative to its peak.
    double tail_ratio = 1e-12;
};

struct CrEntry
{
    double r;
    //! sqrt(2/pi) int_0^inf y e^{sqrt2 y} u(r, -y - sqrt2 r) dy
    double value;
    //! Same integral without the sqrt(2/pi) prefactor.
    double value_bare;
};

struct FrontConstants
{
    std::vector<CrEntry> table;
    //! Extrapolated limit, with the sqrt(2/pi) prefactor.
    double C = 0;
    double C_bare = 0;
    bool converged = false;
    double relative_change = 0;
    double c_star = std::numeric_limits<double>::quiet_NaN();
    double c_tilde_0 = std::numeric_limits<double>::quiet_NaN();
    double iota_estimate = std::numeric_limits<double>::quiet_NaN();
};

inline double sqrt_2_over_pi()
{
    return std::sqrt(2.0 / M_PI);
}

//! int_0^inf y e^{sqrt2 y} phi(-y) dy; throws NotInH when it diverges.
double h_norm(Profile const& phi);

//! Grid for C_r with -sqrt2 r on a node.
Grid1D front_grid(Profile const& phi, double r, double dx, double dt);

//! Bare integral int_0^inf y e^{sqrt2 y} u(-y - sqrt2 r) dy by the trapezoid rule.
double front_integral(Field const& u, double r, double tail_ratio = 1e-12);

/*!
 * C_r(phi) for each r of the schedule. The limit is extrapolated from the
 * last three entries with the error model
 *   C_r = C (1 - k log r / sqrt r) - b / sqrt r + d / r,  k = 3 / (2 sqrt pi).
 * The flag compares the last two raw entries, relative to the limit.
 */
FrontConstants compute_C(BranchingMechanism const& mech, Profile const& phi,
                         std::vector<double> const& r_schedule = {20, 40, 80},
                         FrontOptions const& opt = {});

struct TildeResult
{
    Field field;
    bool divergent = false;
    bool converged = false;
    double lambda_used = 0;
    //! (lambda, sup of u on the core region)
    std::vector<std::pair<double, double>> growth;
    //! sup distance between successive lambda fields on the core region
    std::vector<double> cauchy;
};

//! Limit in lambda of u with initial data phi 1_{(-inf,0]} + lambda 1_{(0,inf)}.
TildeResult tilde_u(BranchingMechanism const& mech, Profile const& phi, double t,
                    Grid1D const& grid, std::vector<double> lambdas = {1e2, 1e3, 1e4},
                    SolverOptions const& opt = {});

//! C~(phi) from C(u~_phi(r0, . - sqrt2 r0)); throws NotInH when u~ diverges.
FrontConstants tilde_C(BranchingMechanism const& mech, Profile const& phi,
                       std::vector<double> const& r_schedule = {20, 40, 80},
                       double r0 = 1, FrontOptions const& opt = {});

struct WaveResult
{
    //! PDE profile recentred so that w(0) = 1/2, on nodes x - X(T).
    std::vector<double> x;
    std::vector<double> w;
    double residual = 0;
    bool monotone = false;
    double left_gap = 0;
    double right_value = 0;
    double front_drift = 0;
    //! ODE tail constant A of w(x) ~ A x e^{-sqrt2 x}, pinned at w(0) = 1/2.
    double ode_constant = 0;
    double window_spread = 0;
    //! Limit s* of X(t) - m(t).
    double front_shift = 0;
    //! A e^{sqrt2 s*}, the tail constant of u(t, m(t) + z) ~ C z e^{-sqrt2 z}.
    double wave_constant = 0;
    //! max over [5, 15] of w / (x e^{-sqrt2 x}) from the PDE profile.
    double pde_ratio = 0;
    double ode_pde_gap = 0;
};

WaveResult travelling_wave(BranchingMechanism const& mech, double T_large, double dx = 0.02,
                           double dt = 0.01);

struct RecenteredRow
{
    double t;
    double sup_discrepancy;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double shift_consistency;
};

std::vector<RecenteredRow> recentered_limit_check(BranchingMechanism const& mech,
                                                  Profile const& phi, double C,
                                                  std::vector<double> const& dm_bank,
                                                  std::vector<double> const& t_schedule,
                                                  std::vector<double> const& x_window,
                                                  FrontOptions const& opt = {});

struct DecorationInput
{
    Profile f = Profile::constant(0);
    Profile g = Profile::constant(0);
    Profile h = Profile::constant(0);
    double s = 1;
    double lambda = 0;
};

struct DecorationLaplace
{
    double limit = 0;
    double c_star = 0;
    //! (t, finite-t ratio)
    std::vector<std::pair<double, double>> finite_t;
};

DecorationLaplace decoration_laplace(BranchingMechanism const& mech, DecorationInput const& in,
                                     std::vector<double> const& t_schedule,
                                     std::vector<double> const& r_schedule = {20, 40, 80},
                                     FrontOptions const& opt = {});

struct IotaResult
{
    std::vector<std::pair<double, double>> ratios;  // (lambda, C(lambda phi)/lambda)
    bool monotone = true;
    double iota = 0;
    double weight = 0;  // int phi e^{-sqrt2 x} dx
};

IotaResult iota_estimate(BranchingMechanism const& mech, Profile const& phi,
                         std::vector<double> const& lambdas = {1e2, 1e3, 1e4},
                         std::vector<double> const& r_schedule = {20, 40, 80},
                         FrontOptions const& opt = {});

}  // namespace sbx
