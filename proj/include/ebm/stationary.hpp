#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ebm/model.hpp"

namespace ebm {

/// Which part of the S-curve a stationary solution belongs to.
enum class BranchTag {
    IceCovered,  ///< u < mu everywhere, no free boundary
    Lower,       ///< free boundary in (0, r*): larger ice caps, unstable
    Upper,       ///< free boundary in (r*, 1): smaller ice caps, stable
    Fold,        ///< lambda = lambda1, free boundary exactly at r*
};

std::string branch_name(BranchTag tag);

/// One hyperbolic piece  u(x) = a cosh(omega x) + b sinh(omega x) + c.
struct HyperbolicPiece {
    double a{}, b{}, c{};
    double value(double omega, double x) const;
    double slope(double omega, double x) const;
};

/// A monotone stationary solution in closed form. Piecewise when a free
/// boundary is present: the warm piece on [0, x_fb] solves the equation
/// with co-albedo 1, the icy piece on [x_fb, 1] with co-albedo f0.
struct StationarySolution {
    ModelParams params;
    BranchTag branch{BranchTag::IceCovered};
    std::optional<double> x_fb;  ///< crossing u = mu, absent on IceCovered
    HyperbolicPiece warm;        ///< used for x <= x_fb (ignored if no x_fb)
    HyperbolicPiece icy;         ///< used for x >  x_fb, or everywhere

    double u(double x) const;
    double du(double x) const;
    /// max |u| = u(0) (monotone nonincreasing, nonnegative).
    double sup_norm() const { return u(0); }
};

/// Critical solar constants and the fold position of the transmission
/// curve. JSON/CSV field names follow these member names.
struct CriticalValues {
    double lambda1{};  ///< minimum of mu * transmission_ratio: fold of the S
    double lambda2{};  ///< mu omega^2 cosh(omega) / (f0 (cosh(omega) - 1))
    double r_star{};   ///< argmin of the transmission ratio, in (0,1)
};

/// Ordered super/subsolution pair sandwiching the Upper solution.
/// Both are continuous, kinked (not C1) at their own break point.
struct BarrierPair {
    ModelParams params;
    double theta{};    ///< lambda offset used to build the pair
    double delta{};    ///< boundary value at x = 1 (+delta above, -delta below)
    double epsilon{};  ///< measured sup distance of the tube from the Upper solution
    double upper_break{}, lower_break{};
    HyperbolicPiece up_warm, up_icy, lo_warm, lo_icy;

    double upper(double x) const;
    double lower(double x) const;
};

/// Ratio lambda/mu at which a C1 solution can place its free boundary at r.
/// Positive on (0,1); decreasing up to r*, increasing after.
double transmission_ratio(const ModelParams& params, double r);

/// d/dr of transmission_ratio (analytic).
double transmission_ratio_slope(const ModelParams& params, double r);

/// Arcsinh term of the fold condition; the fold position satisfies
/// r = (fold_shift(r) + 1) / 2. Negative for r > 0.
double fold_shift(const ModelParams& params, double r);

/// Unique fixed point r* in (0,1) of r -> (fold_shift(r)+1)/2; equals the
/// argmin of transmission_ratio. Fixed-point iteration with bisection on
/// the slope as fallback.
double solve_r_star(const ModelParams& params, double tol = 1e-13);

/// lambda1 = mu * transmission_ratio(r*), lambda2 = closed form.
CriticalValues compute_critical(const ModelParams& params);

/// All free-boundary positions at params.lambda, classified.
struct FreeBoundaries {
    std::vector<std::pair<BranchTag, double>> roots;
    /// True when lambda == lambda2 (within tolerance): the Lower root sits
    /// exactly at 0 and is reported here instead of in roots.
    bool lower_degenerate_at_zero{false};
    CriticalValues critical;
};
FreeBoundaries solve_free_boundaries(const ModelParams& params);

/// The everywhere-icy equilibrium. Requires lambda < lambda2, otherwise
/// its maximum would reach mu and the constant-f0 equation no longer
/// applies; throws NoBranch.
StationarySolution build_ice_covered(const ModelParams& params);

/// Piecewise equilibrium with free boundary x_fb; x_fb must satisfy the
/// transmission condition for params.lambda (throws TransmissionError
/// otherwise). The icy-piece coefficients come from a 2x2 linear solve for
/// the interpolation conditions u(x_fb) = mu, u(1) = 0.
StationarySolution build_free_boundary_solution(const ModelParams& params,
                                                double x_fb);

/// Every monotone equilibrium at params.lambda (composition used by the
/// CLI and the exact-count tests).
std::vector<StationarySolution> enumerate_equilibria(const ModelParams& params);

double sup_norm(const StationarySolution& sol);

/// Barriers of the attraction tube around the Upper solution: the upper
/// barrier solves the equation with lambda+theta and boundary value delta
/// at x = 1, the lower one with lambda-theta and -delta. epsilon is the
/// measured sup distance (grid of grid_n+1 points).
BarrierPair build_barriers(const ModelParams& params, double theta,
                           double delta, int grid_n = 10000);

/// Certifies cosh(omega) > transmission denominator on a tensor grid over
/// (x, eps) in (0,1)^2, which is what makes lambda1 > mu omega^2.
bool transmission_gap_positive(double omega, int grid_n);

}  // namespace ebm
