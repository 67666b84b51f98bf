#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sbx/quadrature.hpp"

namespace sbx
{
//! Lévy measure on (0, inf): zero, finitely many atoms, or a power density
//! c y^(-1-a) e^(-b y) on (y_min, y_max).
class LevyMeasure
{
  public:
    enum class Kind
    {
        Zero,
        Atomic,
        ExpPoly,
    };

    struct Atom
    {
        double weight;
        double location;
    };

    struct Density
    {
        double c = 0;
        double a = 0;
        double b = 0;
        double y_min = 0;
        double y_max = std::numeric_limits<double>::infinity();
    };

    LevyMeasure() = default;
    static LevyMeasure zero() { return {}; }
    static LevyMeasure atomic(std::vector<Atom> atoms);
    static LevyMeasure exp_poly(Density d);

    Kind kind() const { return kind_; }
    std::vector<Atom> const& atoms() const { return atoms_; }
    Density const& density() const { return density_; }

    //! Integral of g against the measure.
    double integrate(RealFn const& g) const;

    /*!
     * Finiteness of the integral of y^p e^(-lam y) near 0 and infinity,
     * decided analytically from the parameters.
     */
    bool moment_finite(double p, double lam) const;

  private:
    Kind kind_ = Kind::Zero;
    std::vector<Atom> atoms_;
    Density density_;
};

//! psi(lam) = -alpha lam + beta lam^2 + int (e^{-lam y} - 1 + lam y) pi(dy).
class BranchingMechanism
{
  public:
    /*!
     * Construct a mechanism. Alpha may be of either sign so that shifted
     * (subcritical) mechanisms share the representation.
     */
    BranchingMechanism(double alpha, double beta, LevyMeasure levy = {});

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    LevyMeasure const& levy() const { return levy_; }
    bool quadratic() const { return levy_.kind() == LevyMeasure::Kind::Zero; }

    double psi(double lam) const;
    //! k-th derivative, k >= 1.
    double psi_deriv(double lam, int k) const;
    //! psi'(s) - psi'(0), computed without cancellation.
    double psi_prime_increment(double s) const;

    //! Positive root of psi (cached).
    double lambda_star() const;

    //! psi(. + s) - psi(s) as a mechanism.
    BranchingMechanism shifted(double s) const;
    //! psi*(lam) = psi(lam + lambda*).
    BranchingMechanism subcritical() const;

    bool is_normalized(double tol = 1e-10) const;

    std::string describe() const;

  private:
    double alpha_;
    double beta_;
    LevyMeasure levy_;
    mutable std::optional<double> lambda_star_;
};

double eval_psi(BranchingMechanism const& m, double lam);
double eval_psi_deriv(BranchingMechanism const& m, double lam, int k);
double find_lambda_star(BranchingMechanism const& m);

//! Factors mapping the normalized process back to the original one.
struct ScaleRecord
{
    double time_factor = 1;
    double space_factor = 1;
    double mass_factor = 1;

    bool identity() const
    {
        return time_factor == 1 && space_factor == 1 && mass_factor == 1;
    }
};

struct NormalizedMechanism
{
    BranchingMechanism mechanism;
    ScaleRecord scale;
};

//! psi~(lam) = psi(lambda* lam) / (alpha lambda*).
NormalizedMechanism normalize_mechanism(BranchingMechanism const& m);

struct ConditionEntry
{
    Verdict verdict = Verdict::Indeterminate;
    std::string evidence;
    bool holds() const { return verdict == Verdict::Finite; }
};

struct A3Fit
{
    bool holds = false;
    double a = 0;
    double b = 0;
    double gamma = 0;
    double min_margin = 0;
};

struct ConditionReport
{
    bool a1 = false;
    double lambda_star = 0;
    bool a2 = false;
    std::optional<double> a2_witness;
    std::string a2_evidence;
    A3Fit a3;
    ConditionEntry llogl;
    ConditionEntry extra_2_19;
    bool extra_nonpositive_flag = false;
};

ConditionReport check_conditions(BranchingMechanism const& m);

//! Tail moment int_1^inf y^{1+beta} pi(dy), classified over decades.
SeriesEvidence tail_moment_evidence(BranchingMechanism const& m, double beta);

struct EquivalenceReport
{
    double beta = 0;
    SeriesEvidence tail;
    SeriesEvidence inner;
    bool agree = false;
};

//! Compare int_1^inf y^{1+beta} pi(dy) with int_0^1 (1 + psi'(s)) s^{-1-beta} ds.
EquivalenceReport check_lemmaA2_equivalence(BranchingMechanism const& m, double beta);

//! Root of e^{-y} = 2 - y on (1, 2).
double remark_root_y0();

namespace bank
{
BranchingMechanism binary();
BranchingMechanism remark_atom();
BranchingMechanism mixture();
//! density y^{-2.5} on (1, inf) with alpha chosen so psi'(0) = -1.
BranchingMechanism power_tail();
}  // namespace bank

}  // namespace sbx
