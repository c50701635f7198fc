#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ebm/model.hpp"
#include "ebm/stationary.hpp"

namespace ebm {

/// Uniform grid of n cells on [0,1], nodes x_j = j/n, j = 0..n.
struct Grid {
    int n{};
    double dx{};

    static Grid uniform(int n);
    double x(int j) const { return j * dx; }
    bool operator==(const Grid& o) const { return n == o.n; }
};

/// Nodal field with the Dirichlet value u(1) = 0 always enforced.
struct Field {
    Grid grid;
    std::vector<double> values;  ///< size n+1
    double time{0.0};

    Field() = default;
    Field(const Grid& g, std::vector<double> vals, double t = 0.0);

    /// Sample a callable u0(x) on the grid (boundary node clamped to 0).
    static Field sample(const Grid& g, const std::function<double(double)>& u0,
                        double t = 0.0);
    static Field constant(const Grid& g, double value, double t = 0.0);
};

struct DistanceMetrics {
    double linf{};
    double l2{};      ///< trapezoid
    double h1semi{};  ///< first-difference seminorm
};

/// Discrete norms of a - b; throws GridError on mismatched grids.
DistanceMetrics distance_metrics(const Field& a, const Field& b);

/// Sign changes of u - mu, each located by linear interpolation.
std::vector<double> detect_crossings(const Field& field, double mu);

struct FbPoint {
    double time{};
    std::vector<double> crossings;
    std::optional<double> x_fb;  ///< present iff exactly one crossing
};

struct StepDiagnostics {
    double time{};
    double sup{};
    double l2{};
    double h1semi{};
    double increment_inf{};      ///< sup |u_new - u_old| of the step
    double fb_margin{};          ///< min |slope| across crossings, 0 if none
};

struct Trajectory {
    std::vector<Field> snapshots;          ///< includes initial and final states
    std::vector<FbPoint> fb_track;         ///< one entry per step
    std::vector<StepDiagnostics> diagnostics;
    bool blew_up{false};
    bool converged{false};   ///< increment < 1e-9 for 100 consecutive steps
    double converged_time{};
};

/// Default regularization half-width tied to the grid: the jump must span
/// several cells or the free boundary stalls on the lattice. Pass the
/// equilibrium slope at the free boundary when one is available.
double default_regularization_width(const Grid& grid,
                                    std::optional<double> fb_slope,
                                    double mu);

/// One semi-implicit step of u_t - u_xx + omega^2 u = lambda beta_eps(u):
/// implicit diffusion + absorption (tridiagonal solve), explicit reaction.
/// Unconditionally stable for the linear part; order-preserving (M-matrix
/// and monotone beta_eps). Throws NumericalBlowup on non-finite values.
Field step(const Field& field, const ModelParams& params,
           const RegularizedAlbedo& reg, double dt);

/// Repeated stepping with snapshot capture every snapshot_every steps,
/// per-step free-boundary tracking and diagnostics. dt <= 0 selects the
/// default dt = dx. On blow-up the partial trajectory is returned with
/// blew_up set.
Trajectory integrate(const Field& u0, const ModelParams& params,
                     const RegularizedAlbedo& reg, double dt, double t_final,
                     int snapshot_every = 100);

enum class TimeDirection { Up, Down };

/// True iff consecutive snapshots are pointwise ordered in the given
/// direction up to tol.
bool check_monotone_in_time(const Trajectory& traj, TimeDirection direction,
                            double tol);

/// Transversality diagnostic for the ice-line crossing.
struct NondegeneracyReport {
    std::vector<double> theta_samples;  ///< ascending
    std::vector<double> measures;       ///< meas{|u - mu| <= theta}, node count * dx
    double fitted_C{};                  ///< max measures[i]/theta[i]
    double theta0{};                    ///< largest theta sample
    bool degenerate{false};             ///< measure/theta blows up under refinement
};

NondegeneracyReport check_nondegeneracy(const Field& field, double mu,
                                        std::vector<double> theta_list);

/// Discrete Lyapunov functional of the regularized flow,
///   E[u] = sum (Du)^2/2 dx + sum w_j (omega^2 u_j^2 / 2 - lambda B_eps(u_j)),
/// nonincreasing along every semi-implicit trajectory.
double energy(const Field& field, const ModelParams& params,
              const RegularizedAlbedo& reg);

}  // namespace ebm
