#include "context.hpp"

namespace sbx::detail
{
namespace
{
Json indicator(double a, double b, double height)
{
    Json j = {{"kind", "indicator"}, {"height", height}};
    j["a"] = std::isinf(a) ? Json() : Json(a);
    j["b"] = std::isinf(b) ? Json() : Json(b);
    return j;
}

Json gaussian(double height, double center, double width)
{
    return {{"kind", "gaussian"}, {"height", height}, {"center", center}, {"width", width}};
}
}  // namespace

std::vector<Entry> const& registry()
{
    static std::vector<Entry> const entries = {
        {{"skeleton-derive",
          "offspring law of the skeleton and its generating identity",
          "skeleton offspring generating function built from the derivatives of psi",
          {{"residual_tol", 1e-12}, {"mass_tol", 1e-10}, {"tail_tol", 1e-12}}},
         skeleton_derive},
        {{"kpp-duality",
          "Monte Carlo product functional of the skeleton against the K-P-P solution, plus "
          "solver invariants",
          "McKean representation of the K-P-P equation through the skeleton",
          {{"t", 2.0},
           {"x", 0.0},
           {"replicas", 100000},
           {"allowance", 1e-3},
           {"phis",
            Json::array({indicator(0, INFINITY, 0.5), indicator(-1, 1, 1.0),
                         gaussian(0.3, 0.5, 1.0)})},
           {"invariants", true}}},
         kpp_duality},
        {{"martingales",
          "mean-preservation tests for the derivative and additive martingales",
          "derivative martingales of the skeleton and of the superprocess",
          {{"replicas", 100000},
           {"times", {1.0, 2.0, 5.0, 10.0}},
           {"sbm_replicas", 100000},
           {"sbm_times", {0.5, 1.0, 1.5, 2.0}},
           {"eps", 0.05},
           {"drift", 0.01},
           {"threshold", 4.0}}},
         martingales},
        {{"front-constant",
          "front constant C(phi): convergence flag, shift covariance, transport and "
          "comparison with the largest constant",
          "front constant as the limit of weighted tail integrals of the K-P-P solution",
          {{"phi", indicator(0, INFINITY, 1.0)},
           {"flag_schedule", {10.0, 20.0, 40.0}},
           {"schedule", {20.0, 40.0, 80.0}},
           {"shifts", {-1.0, 0.5}},
           {"shift_tol", 0.02},
           {"f", indicator(-1, INFINITY, 0.7)},
           {"s", 2.0},
           {"transport_tol", 0.03}}},
         front_constant},
        {{"travelling-wave",
          "recentred long-time K-P-P profile against the travelling wave equation",
          "critical travelling wave of the K-P-P equation",
          {{"T", 300.0},
           {"dx", 0.02},
           {"dt", 0.01},
           {"residual_tol", 1e-3},
           {"limit_tol", 1e-6},
           {"constant_tol", 0.15}}},
         travelling_wave_recipe},
        {{"max-law-gumbel",
          "law of the recentred skeleton maximum against the randomly shifted Gumbel law",
          "randomly shifted Gumbel limit of the maximum",
          {{"replicas", 100000},
           {"times", {5.0, 10.0}},
           {"cdf_nodes", 4000},
           {"pde_times", {5.0, 10.0, 20.0, 40.0, 80.0, 160.0}}}},
         max_law_gumbel},
        {{"poissonization",
          "paired Laplace functionals of the skeleton and of the superprocess",
          "the skeleton is a Poisson random measure given the superprocess",
          {{"eps", 0.05},
           {"t", 1.0},
           {"replicas", 100000},
           {"g", indicator(-1, 1, 0.7)},
           {"k_sigma", 3.0}}},
         poissonization},
        {{"extremal-process",
          "derivative martingale limits of the skeleton and of the superprocess, and the "
          "recentred superprocess Laplace functional",
          "extremal process of the superprocess seen from its front",
          {{"T", 10.0},
           {"eps", 0.05},
           {"bbm_replicas", 50000},
           {"sbm_replicas", 1200},
           {"ks_tol", 0.05},
           {"laplace_time", 8.0},
           {"phi", indicator(-2, 0, 0.5)},
           {"g", indicator(-1, 0, 0.7)},
           {"laplace_allowance", 0.02}}},
         extremal_process},
        {{"decoration-bank",
          "decorations of the skeleton seen from an exceptional maximum",
          "decoration of the extremal process and its integral representation",
          {{"times", {4.0, 8.0}},
           {"attempts", {200000, 400000}},
           {"z_shift", 0.0},
           {"phi", indicator(-1, 1, 0.3)},
           {"closure_tol", 0.1},
           {"nodes", 4000}}},
         decoration_bank},
        {{"conditioned-sbm",
          "superprocess and skeleton decorations conditioned on an exceptional maximum",
          "superprocess seen from its maximum under the exceptional event",
          {{"eps", 0.1},
           {"t", 3.0},
           {"z_shift", 0.0},
           {"attempts", 20000}}},
         conditioned_sbm},
        {{"dichotomy-4.13",
          "finiteness of the maximum: behaviour of u tilde and the constant iota",
          "dichotomy for the finiteness of the extremal maximum",
          {{"t", 1.0},
           {"lambdas", {1e2, 1e3, 1e4}},
           {"schedule", {10.0, 20.0}},
           {"iota_tol", 1e-3}}},
         dichotomy},
        {{"appendix-A2",
          "finite/infinite classification of the tail moment and of the inner integral",
          "equivalence of the tail moment and the integral of 1 + psi'",
          {{"betas", {0.25, 0.75}},
           {"presets", {"binary", "remark", "mixture", "power_tail"}}}},
         appendix_equivalence},
    };
    return entries;
}

}  // namespace sbx::detail
