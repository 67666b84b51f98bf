#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sbx/mechanism.hpp"
#include "sbx/quadrature.hpp"

namespace sbx
{
inline constexpr double kSqrt2 = 1.4142135623730950488;

//! Uniform grid with homogeneous Neumann boundaries at both ends.
struct Grid1D
{
    double x_min = 0;
    double x_max = 1;
    std::size_t n = 3;
    double dt = 0.01;

    double dx() const { return (x_max - x_min) / static_cast<double>(n - 1); }
    double x(std::size_t i) const { return x_min + dx() * static_cast<double>(i); }

    //! Grid covering [x_min, x_max] with spacing close to (at most) dx.
    static Grid1D covering(double x_min, double x_max, double dx, double dt);
    //! Default domain [-20 - sqrt2 T, 20 + sqrt2 T].
    static Grid1D standard(double T, double dx = 0.05, double dt = 0.01);
};

//! Function sampled on a grid at a given time.
struct Field
{
    Grid1D grid;
    double time = 0;
    std::vector<double> values;

    //! Linear interpolation, constant beyond the ends.
    double at(double x) const;
    double sup_on(double lo, double hi) const;
    std::size_t index_of(double x) const;
};

double sup_distance(Field const& a, Field const& b, double lo, double hi);

/*!
 * Bounded nonnegative function on the line, smooth between breakpoints and
 * constant outside [lo, hi]. Initial data is cell-averaged from it, which
 * turns a jump into a one-cell linear ramp.
 */
class Profile
{
  public:
    Profile() : Profile(constant(0)) {}
    Profile(RealFn f, std::vector<double> breaks, double lo, double hi);

    static Profile constant(double c);
    //! height on (a, b); either end may be infinite.
    static Profile indicator(double a, double b, double height = 1);
    //! Linear interpolation of a field, constant beyond its grid.
    static Profile from_field(Field const& field);

    double operator()(double x) const { return f_(clamp(x)); }
    double cell_average(double a, double b) const;

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double left_value() const { return f_(lo_); }
    double right_value() const { return f_(hi_); }
    std::vector<double> const& breaks() const { return breaks_; }

    Profile operator+(Profile const& other) const;
    Profile scaled(double c) const;
    //! (T_x phi)(y) = phi(x + y).
    Profile shifted(double x) const;
    //! phi on (-inf, a], other on (a, inf).
    static Profile splice(Profile const& left, Profile const& right, double a);

  private:
    double clamp(double x) const { return x < lo_ ? lo_ : (x > hi_ ? hi_ : x); }

    RealFn f_;
    std::vector<double> breaks_;
    double lo_;
    double hi_;
};

struct SolverOptions
{
    double dx = 0.05;
    double dt = 0.01;
    double flux_tol = 1e-8;
    double blowup = 1e12;
    bool check_flux = true;
};

struct KppSolution
{
    std::vector<Field> fields;
    double max_boundary_slope = 0;
    double largest_clip = 0;
    double max_value = 0;
};

/*!
 * Solve u_t = u_xx / 2 - psi(u) by Strang splitting: exact or RK4 reaction
 * half steps around a Crank-Nicolson diffusion step. The diffusion uses the
 * fourth-order compact Laplacian; the first two steps are replaced by
 * implicit Euler half steps to damp the jump in indicator data.
 */
KppSolution solve_kpp(BranchingMechanism const& mech, Profile const& initial,
                      std::vector<double> const& times, Grid1D const& grid,
                      SolverOptions const& opt = {});

//! Same scheme with psi*(u) = psi(u + lambda*).
KppSolution solve_subcritical(BranchingMechanism const& mech, Profile const& initial,
                              std::vector<double> const& times, Grid1D const& grid,
                              SolverOptions const& opt = {});

//! Node-wise solution of v' = -psi(v) over time h.
double reaction_flow(BranchingMechanism const& mech, double v, double h);

struct ImmigrationField
{
    Field V;
    double clip = 0;
};

//! V_f = 1 - u_f + u*_f, clipped into [0, 1].
ImmigrationField immigration_laplace(BranchingMechanism const& mech, Profile const& f, double t,
                                     Grid1D const& grid, SolverOptions const& opt = {});

//! m(t) = sqrt2 t - 3/(2 sqrt2) log t.
inline double bramson_m(double t)
{
    return kSqrt2 * t - 3.0 / (2.0 * kSqrt2) * std::log(t);
}

}  // namespace sbx
