#include "ebm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ebm {

namespace {

void validate_problem(const EigenProblem& problem) {
    problem.params.validate();
    if (!(problem.x_fb >= 0.0 && problem.x_fb < 1.0))
        throw DomainError("eigenproblem free boundary must lie in [0,1), got " +
                          std::to_string(problem.x_fb));
}

double well_strength(const EigenProblem& problem) {
    return problem.params.lambda * (1.0 - problem.params.f0);
}

// D(tau) via tau/tanh to avoid cosh overflow.
double dispersion_raw(double tau, double a, double s, double q) {
    return tau * std::tanh(tau * a) + tau / std::tanh(tau * s) - q;
}

double dispersion_slope(double tau, double a, double s) {
    const double ta = std::tanh(tau * a);
    const double ts = std::tanh(tau * s);
    return ta + tau * a * (1.0 - ta * ta) +
           1.0 / ts - tau * s * (1.0 - ts * ts) / (ts * ts);
}

struct Tridiag {
    std::vector<double> diag;
    std::vector<double> off;  // size diag.size() - 1
};

// Half-mass symmetrization of the mass-lumped operator: node 0 owns half a
// cell, so its generalized row is scaled by sqrt(2) on both sides.
Tridiag assemble(const EigenProblem& problem, int n) {
    const double dx = 1.0 / n;
    const double om2 = problem.params.omega * problem.params.omega;
    const double q = well_strength(problem);
    Tridiag T;
    T.diag.assign(n, 2.0 / (dx * dx) + om2);
    T.off.assign(n - 1, -1.0 / (dx * dx));
    T.off[0] = -std::sqrt(2.0) / (dx * dx);
    int k = static_cast<int>(std::lround(problem.x_fb / dx));
    k = std::clamp(k, 0, n - 1);
    T.diag[k] -= (k == 0 ? 2.0 : 1.0) * q / dx;  // lumped mass dx/2 at node 0
    return T;
}

// Number of eigenvalues of T strictly below sigma (Sturm sequence).
int count_below(const Tridiag& T, double sigma) {
    const double tiny = 1e-300;
    int count = 0;
    double p = T.diag[0] - sigma;
    if (p < 0) ++count;
    for (size_t i = 1; i < T.diag.size(); ++i) {
        if (p == 0.0) p = tiny;
        p = T.diag[i] - sigma - T.off[i - 1] * T.off[i - 1] / p;
        if (p < 0) ++count;
    }
    return count;
}

double smallest_eigenvalue(const Tridiag& T) {
    double lo = T.diag[0], hi = T.diag[0];
    for (size_t i = 0; i < T.diag.size(); ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::abs(T.off[i - 1]);
        if (i + 1 < T.diag.size()) radius += std::abs(T.off[i]);
        lo = std::min(lo, T.diag[i] - radius);
        hi = std::max(hi, T.diag[i] + radius);
    }
    const double scale = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    for (int it = 0; it < 200 && hi - lo > 1e-14 * scale; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(T, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Solve (T - sigma I) v = b by LDL^T; pivots clamped away from zero so the
// near-singular shift of inverse iteration cannot divide by zero.
void shifted_solve(const Tridiag& T, double sigma, std::vector<double>& v,
                   const std::vector<double>& b) {
    const size_t n = T.diag.size();
    std::vector<double> d(n), l(n - 1), y(n);
    d[0] = T.diag[0] - sigma;
    const double floor_pivot = 1e-12;
    if (std::abs(d[0]) < floor_pivot) d[0] = floor_pivot;
    for (size_t i = 1; i < n; ++i) {
        l[i - 1] = T.off[i - 1] / d[i - 1];
        d[i] = T.diag[i] - sigma - l[i - 1] * T.off[i - 1];
        if (std::abs(d[i]) < floor_pivot) d[i] = floor_pivot;
    }
    y[0] = b[0];
    for (size_t i = 1; i < n; ++i) y[i] = b[i] - l[i - 1] * y[i - 1];
    v[n - 1] = y[n - 1] / d[n - 1];
    for (size_t i = n - 1; i-- > 0;)
        v[i] = y[i] / d[i] - l[i] * v[i + 1];
}

}  // namespace

std::string method_name(EigenMethod m) {
    switch (m) {
        case EigenMethod::Shooting: return "Shooting";
        case EigenMethod::Matrix: return "Matrix";
        case EigenMethod::Both: return "Both";
    }
    return "Unknown";
}

double dispersion(const EigenProblem& problem, double tau) {
    validate_problem(problem);
    if (!(tau > 0.0))
        throw DomainError("dispersion defined for tau > 0, got " +
                          std::to_string(tau));
    return dispersion_raw(tau, problem.x_fb, 1.0 - problem.x_fb,
                          well_strength(problem));
}

std::optional<EigenResult> hyperbolic_mode(double omega, double x_fb,
                                           double mass, double tol,
                                           int samples) {
    if (!(omega > 0.0)) throw InvalidParams("omega must be positive");
    if (!(x_fb >= 0.0 && x_fb < 1.0))
        throw DomainError("free boundary must lie in [0,1)");
    if (!(tol > 0.0)) throw InvalidParams("tolerance must be positive");
    const double a = x_fb;
    const double s = 1.0 - a;
    if (mass <= 1.0 / s) return std::nullopt;  // eta1 >= omega^2

    double lo = 1e-12, hi = mass + 1.0;
    if (dispersion_raw(lo, a, s, mass) >= 0.0) lo = 1e-16;
    for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dispersion_raw(mid, a, s, mass) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    double tau = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double f = dispersion_raw(tau, a, s, mass);
        const double df = dispersion_slope(tau, a, s);
        const double next = tau - f / df;
        if (!(next > 0.0)) break;
        tau = next;
    }

    EigenResult res;
    res.eta1 = omega * omega - tau * tau;
    res.tau = tau;
    res.method = EigenMethod::Shooting;
    res.residual = std::abs(dispersion_raw(tau, a, s, mass));
    const double match = std::cosh(tau * a) / std::sinh(tau * s);
    res.xs.resize(samples);
    res.U.resize(samples);
    for (int i = 0; i < samples; ++i) {
        const double x = static_cast<double>(i) / (samples - 1);
        res.xs[i] = x;
        res.U[i] = x <= a ? std::cosh(tau * x)
                          : match * std::sinh(tau * (1.0 - x));
    }
    return res;
}

std::optional<EigenResult> principal_eigenvalue_shooting(
    const EigenProblem& problem, double tol, int samples) {
    validate_problem(problem);
    return hyperbolic_mode(problem.params.omega, problem.x_fb,
                           well_strength(problem), tol, samples);
}

EigenResult principal_eigenvalue_matrix(const EigenProblem& problem, int n) {
    validate_problem(problem);
    if (n < 100) throw InvalidParams("matrix discretization needs n >= 100");
    const Tridiag T = assemble(problem, n);
    const double eta = smallest_eigenvalue(T);

    // inverse iteration just below eta
    const double shift = std::max(1e-8, 1e-8 * std::abs(eta));
    std::vector<double> v(n, 1.0), next(n);
    for (int it = 0; it < 3; ++it) {
        shifted_solve(T, eta - shift, next, v);
        double norm = 0.0;
        for (double x : next) norm = std::max(norm, std::abs(x));
        if (norm == 0.0) throw ConvergenceError("inverse iteration collapsed");
        for (size_t i = 0; i < next.size(); ++i) v[i] = next[i] / norm;
    }
    double res_norm = 0.0, v_norm = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        double r = (T.diag[i] - eta) * v[i];
        if (i > 0) r += T.off[i - 1] * v[i - 1];
        if (i + 1 < v.size()) r += T.off[i] * v[i + 1];
        res_norm = std::max(res_norm, std::abs(r));
        v_norm = std::max(v_norm, std::abs(v[i]));
    }

    EigenResult out;
    const double om = problem.params.omega;
    out.eta1 = eta;
    out.tau = eta < om * om ? std::sqrt(om * om - eta) : 0.0;
    out.method = EigenMethod::Matrix;
    out.residual = res_norm / v_norm;

    // undo the half-mass scaling at node 0, fix sign, normalize U(0) = 1
    const double dx = 1.0 / n;
    out.xs.resize(n + 1);
    out.U.resize(n + 1);
    double u0 = std::sqrt(2.0) * v[0];
    if (u0 == 0.0) throw ConvergenceError("eigenvector vanished at x = 0");
    for (int j = 0; j < n; ++j) {
        out.xs[j] = j * dx;
        out.U[j] = (j == 0 ? std::sqrt(2.0) * v[0] : v[j]) / u0;
    }
    out.xs[n] = 1.0;
    out.U[n] = 0.0;
    return out;
}

EigenResult principal_eigenvalue(const EigenProblem& problem, int matrix_n) {
    if (auto res = principal_eigenvalue_shooting(problem)) return *res;
    return principal_eigenvalue_matrix(problem, matrix_n);
}

std::vector<SignScanRow> instability_sign_scan(
    const ModelParams& family, const std::vector<double>& omega_list,
    const std::vector<double>& lambda_fractions, int matrix_n) {
    std::vector<SignScanRow> rows;
    for (double om : omega_list) {
        ModelParams p = family;
        p.omega = om;
        p.lambda = 1.0;  // placeholder until the fraction fixes it
        CriticalValues cv;
        try {
            cv = compute_critical(p);
        } catch (const std::exception& e) {
            SignScanRow row;
            row.omega = om;
            row.status = std::string("error: ") + e.what();
            rows.push_back(row);
            continue;
        }
        for (double frac : lambda_fractions) {
            const double lam = cv.lambda1 + frac * (cv.lambda2 - cv.lambda1);
            const ModelParams pl = p.with_lambda(lam);

            const auto emit = [&](BranchTag tag, double x_fb) {
                SignScanRow row;
                row.omega = om;
                row.lambda = lam;
                row.branch = tag;
                row.x_fb = x_fb;
                try {
                    const EigenResult r =
                        principal_eigenvalue({pl, x_fb, tag}, matrix_n);
                    row.eta1 = r.eta1;
                    row.tau = r.tau;
                    row.method = r.method;
                    row.residual = r.residual;
                } catch (const std::exception& e) {
                    row.eta1 = std::numeric_limits<double>::quiet_NaN();
                    row.status = std::string("error: ") + e.what();
                }
                rows.push_back(row);
            };

            try {
                const FreeBoundaries fb = solve_free_boundaries(pl);
                bool lower_done = false;
                for (const auto& [tag, root] : fb.roots) {
                    if (tag == BranchTag::Lower || tag == BranchTag::Fold) {
                        emit(BranchTag::Lower, root);
                        lower_done = true;
                    } else if (tag == BranchTag::Upper) {
                        emit(BranchTag::Upper, root);
                    }
                }
                if (!lower_done && fb.lower_degenerate_at_zero)
                    emit(BranchTag::Lower, 0.0);  // lambda2 limit
            } catch (const std::exception& e) {
                SignScanRow row;
                row.omega = om;
                row.lambda = lam;
                row.status = std::string("error: ") + e.what();
                rows.push_back(row);
            }
        }
    }
    return rows;
}

}  // namespace ebm
