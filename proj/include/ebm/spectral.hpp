#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ebm/stationary.hpp"

namespace ebm {

/// Linearization of the flow around a free-boundary equilibrium: the
/// co-albedo jump contributes a Dirac well of strength lambda (1 - f0) at
/// the free boundary,
///
///   -U'' - lambda (1-f0) delta_{x_fb} U + omega^2 U = eta U,
///   U'(0) = 0, U(1) = 0.
///
/// x_fb = 0 is accepted as the degenerate limit of the Lower branch at
/// lambda2 (the well sits at the symmetry axis).
struct EigenProblem {
    ModelParams params;
    double x_fb{};
    BranchTag branch{BranchTag::Lower};
};

enum class EigenMethod { Shooting, Matrix, Both };

std::string method_name(EigenMethod m);

struct EigenResult {
    double eta1{};     ///< principal eigenvalue
    double tau{};      ///< sqrt(omega^2 - eta1) when eta1 < omega^2, else 0
    EigenMethod method{EigenMethod::Shooting};
    double residual{};            ///< dispersion or jump-condition residual
    std::vector<double> xs;       ///< eigenfunction sample abscissae
    std::vector<double> U;        ///< samples, normalized U(0) = 1, U > 0 inside
};

/// Scalar transmission relation for the hyperbolic ansatz (eta < omega^2,
/// U = cosh(tau x) left of the well, proportional to sinh(tau (1-x)) right
/// of it):
///
///   D(tau) = tau tanh(tau x_fb) + tau coth(tau (1 - x_fb)) - lambda (1 - f0).
///
/// Strictly increasing in tau; D(0+) = 1/(1-x_fb) - lambda (1-f0), so a
/// positive root exists iff lambda (1-f0) > 1/(1-x_fb).
double dispersion(const EigenProblem& problem, double tau);

/// Root-solve D(tau) = 0 (bisection + Newton polish) and assemble the
/// piecewise-hyperbolic eigenfunction. Returns nullopt when D has no
/// positive root (then eta1 >= omega^2 and the matrix method is
/// authoritative).
std::optional<EigenResult> principal_eigenvalue_shooting(
    const EigenProblem& problem, double tol = 1e-13, int samples = 1001);

/// Shooting kernel for an arbitrary well mass: the principal mode of
///   -U'' - mass delta_{x_fb} U + omega^2 U = eta U,  U'(0)=0, U(1)=0,
/// below omega^2. principal_eigenvalue_shooting calls this with
/// mass = lambda (1 - f0); the experiments call it with the Jacobian-scaled
/// mass lambda (1 - f0) / |u'(x_fb)| of the flow linearization.
std::optional<EigenResult> hyperbolic_mode(double omega, double x_fb,
                                           double mass, double tol = 1e-13,
                                           int samples = 1001);

/// Independent oracle: mass-lumped finite differences on a uniform grid of
/// n cells, the Dirac well lumped into its nearest node, Neumann ghost at
/// x = 0 (half cell) and Dirichlet at x = 1. Smallest eigenvalue of the
/// resulting symmetric tridiagonal matrix by Sturm-sequence bisection,
/// eigenvector by inverse iteration. First-order accurate.
EigenResult principal_eigenvalue_matrix(const EigenProblem& problem, int n);

/// Preferred path: shooting when the hyperbolic root exists (method Both,
/// matrix value discarded), matrix otherwise.
EigenResult principal_eigenvalue(const EigenProblem& problem,
                                 int matrix_n = 10000);

/// One row of the instability sign table.
struct SignScanRow {
    double omega{};
    double lambda{};
    BranchTag branch{};
    double x_fb{};
    double eta1{};
    double tau{};
    EigenMethod method{};
    double residual{};
    std::string status{"ok"};
};

/// For every omega in omega_list and lambda = lambda1 + frac (lambda2 -
/// lambda1), the sign of eta1 on the Lower branch (the claim under test:
/// all negative for omega < 1) and, as exploratory output, on the Upper
/// branch. Per-cell failures are recorded in status.
std::vector<SignScanRow> instability_sign_scan(
    const ModelParams& family, const std::vector<double>& omega_list,
    const std::vector<double>& lambda_fractions, int matrix_n = 10000);

}  // namespace ebm
