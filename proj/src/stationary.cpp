#include "ebm/stationary.hpp"

#include <algorithm>
#include <cmath>

namespace ebm {

namespace {

// Denominator of the transmission ratio; smooth on [0,1], positive on
// [0,1), zero at r = 1. Increasing up to r*, decreasing after.
double denominator(double omega, double f0, double r) {
    const double wr = omega * r;
    const double ws = omega - wr;
    return std::sinh(wr) * std::sinh(ws) - f0 * std::cosh(wr) +
           f0 * std::cosh(wr) * std::cosh(ws);
}

double denominator_slope(double omega, double f0, double r) {
    const double wr = omega * r;
    return omega * ((1.0 - f0) * std::sinh(omega - 2.0 * wr) -
                    f0 * std::sinh(wr));
}

// Relative tolerance of the fold classification |lambda - lambda1|.
constexpr double kFoldTol = 1e-10;

// Acceptable relative mismatch of the transmission condition when a caller
// supplies its own free boundary.
constexpr double kTransmissionTol = 1e-8;

// Bisection for the root of denominator(r) = target on [lo, hi], assuming
// a sign change of d - target, followed by Newton polish.
double refine_root(const ModelParams& p, double target, double lo, double hi) {
    const double om = p.omega;
    const double f0 = p.f0;
    double flo = denominator(om, f0, lo) - target;
    double fhi = denominator(om, f0, hi) - target;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw BracketError("no sign change of the transmission condition in [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        const double fm = denominator(om, f0, mid) - target;
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double r = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        const double f = denominator(om, f0, r) - target;
        const double df = denominator_slope(om, f0, r);
        if (df == 0.0) break;
        const double next = r - f / df;
        if (next <= lo - 1e-12 || next >= hi + 1e-12) break;
        r = next;
    }
    return r;
}

HyperbolicPiece solve_icy_piece(const ModelParams& p, double lam, double x_fb,
                                double right_value) {
    // interpolation conditions u(x_fb) = mu, u(1) = right_value for
    // u = A cosh(omega x) + B sinh(omega x) + K, K = lam f0 / omega^2
    const double om = p.omega;
    const double K = lam * p.f0 / (om * om);
    const double cf = std::cosh(om * x_fb), sf = std::sinh(om * x_fb);
    const double c1 = std::cosh(om), s1 = std::sinh(om);
    const double det = cf * s1 - sf * c1;  // sinh(omega (1 - x_fb)) > 0
    const double rhs_f = p.mu - K;
    const double rhs_1 = right_value - K;
    return {(rhs_f * s1 - rhs_1 * sf) / det, (rhs_1 * cf - rhs_f * c1) / det, K};
}

HyperbolicPiece solve_warm_piece(const ModelParams& p, double lam, double x_fb) {
    const double om = p.omega;
    return {(p.mu * om * om - lam) / (om * om * std::cosh(om * x_fb)), 0.0,
            lam / (om * om)};
}

}  // namespace

std::string branch_name(BranchTag tag) {
    switch (tag) {
        case BranchTag::IceCovered: return "IceCovered";
        case BranchTag::Lower: return "Lower";
        case BranchTag::Upper: return "Upper";
        case BranchTag::Fold: return "Fold";
    }
    return "Unknown";
}

double HyperbolicPiece::value(double omega, double x) const {
    return a * std::cosh(omega * x) + b * std::sinh(omega * x) + c;
}

double HyperbolicPiece::slope(double omega, double x) const {
    return omega * (a * std::sinh(omega * x) + b * std::cosh(omega * x));
}

double StationarySolution::u(double x) const {
    if (x_fb && x <= *x_fb) return warm.value(params.omega, x);
    return icy.value(params.omega, x);
}

double StationarySolution::du(double x) const {
    if (x_fb && x <= *x_fb) return warm.slope(params.omega, x);
    return icy.slope(params.omega, x);
}

double BarrierPair::upper(double x) const {
    return (x <= upper_break ? up_warm : up_icy).value(params.omega, x);
}

double BarrierPair::lower(double x) const {
    return (x <= lower_break ? lo_warm : lo_icy).value(params.omega, x);
}

double transmission_ratio(const ModelParams& params, double r) {
    params.validate();
    if (!(r > 0.0 && r < 1.0))
        throw DomainError("transmission ratio defined for r in (0,1), got " +
                          std::to_string(r));
    const double om = params.omega;
    return om * om * std::cosh(om) / denominator(om, params.f0, r);
}

double transmission_ratio_slope(const ModelParams& params, double r) {
    if (!(r > 0.0 && r < 1.0))
        throw DomainError("transmission ratio defined for r in (0,1), got " +
                          std::to_string(r));
    const double om = params.omega;
    const double d = denominator(om, params.f0, r);
    return -om * om * std::cosh(om) * denominator_slope(om, params.f0, r) /
           (d * d);
}

double fold_shift(const ModelParams& params, double r) {
    const double om = params.omega;
    return std::asinh(params.f0 / (params.f0 - 1.0) * std::sinh(om * r)) / om;
}

double solve_r_star(const ModelParams& params, double tol) {
    params.validate();
    if (!(tol > 0.0)) throw InvalidParams("tolerance must be positive");
    const auto map = [&](double r) { return 0.5 * (fold_shift(params, r) + 1.0); };

    double r = 0.5;
    bool ok = false;
    for (int i = 0; i < 100; ++i) {
        const double next = map(r);
        if (!(next > 0.0 && next < 1.0)) break;
        if (std::abs(next - r) <= 0.25 * tol) {
            r = next;
            ok = true;
            break;
        }
        r = next;
    }
    if (!ok || std::abs(map(r) - r) > tol) {
        // The fixed-point map can expand near f0 -> 1; bisect on the
        // denominator slope instead, which changes sign exactly once.
        double lo = 1e-12, hi = 1.0 - 1e-12;
        double flo = denominator_slope(params.omega, params.f0, lo);
        double fhi = denominator_slope(params.omega, params.f0, hi);
        if ((flo > 0) == (fhi > 0))
            throw ConvergenceError("fold-position bisection lost its bracket");
        for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = denominator_slope(params.omega, params.f0, mid);
            if ((fm > 0) == (flo > 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        r = 0.5 * (lo + hi);
    }
    // polish on the stationarity condition of the denominator
    for (int i = 0; i < 3; ++i) {
        const double om = params.omega, f0 = params.f0;
        const double q = (1.0 - f0) * std::sinh(om - 2.0 * om * r) -
                         f0 * std::sinh(om * r);
        const double dq = -2.0 * om * (1.0 - f0) * std::cosh(om - 2.0 * om * r) -
                          om * f0 * std::cosh(om * r);
        const double next = r - q / dq;
        if (!(next > 0.0 && next < 1.0)) break;
        r = next;
    }
    if (std::abs(map(r) - r) > tol)
        throw ConvergenceError("fold-position iteration did not reach tolerance");
    return r;
}

CriticalValues compute_critical(const ModelParams& params) {
    params.validate();
    const double om = params.omega;
    CriticalValues cv;
    cv.r_star = solve_r_star(params);
    cv.lambda1 = params.mu * transmission_ratio(params, cv.r_star);
    cv.lambda2 = params.mu * om * om * std::cosh(om) /
                 (params.f0 * (std::cosh(om) - 1.0));
    return cv;
}

FreeBoundaries solve_free_boundaries(const ModelParams& params) {
    params.validate();
    FreeBoundaries out;
    out.critical = compute_critical(params);
    const double lam = params.lambda;
    const double lam1 = out.critical.lambda1;
    const double lam2 = out.critical.lambda2;
    const double rs = out.critical.r_star;
    const double om = params.omega;
    const double target = om * om * std::cosh(om) * params.mu / lam;

    if (lam < lam1 * (1.0 - kFoldTol)) return out;  // no free boundary at all
    if (std::abs(lam - lam1) <= kFoldTol * lam1) {
        out.roots.emplace_back(BranchTag::Fold, rs);
        return out;
    }

    const double h = 1e-9;
    if (std::abs(lam - lam2) <= kFoldTol * lam2) {
        out.lower_degenerate_at_zero = true;
    } else if (lam < lam2) {
        out.roots.emplace_back(BranchTag::Lower,
                               refine_root(params, target, 0.0, rs - h));
    }
    out.roots.emplace_back(BranchTag::Upper,
                           refine_root(params, target, rs + h, 1.0 - 1e-15));
    return out;
}

StationarySolution build_ice_covered(const ModelParams& params) {
    params.validate();
    const double om = params.omega;
    const double lam2 = params.mu * om * om * std::cosh(om) /
                        (params.f0 * (std::cosh(om) - 1.0));
    if (params.lambda >= lam2)
        throw NoBranch("ice-covered branch requires lambda < lambda2 = " +
                       std::to_string(lam2));
    StationarySolution sol;
    sol.params = params;
    sol.branch = BranchTag::IceCovered;
    const double K = params.lambda * params.f0 / (om * om);
    sol.icy = {-K / std::cosh(om), 0.0, K};
    sol.warm = sol.icy;
    return sol;
}

StationarySolution build_free_boundary_solution(const ModelParams& params,
                                                double x_fb) {
    params.validate();
    if (!(x_fb > 0.0 && x_fb < 1.0))
        throw DomainError("free boundary must lie in (0,1), got " +
                          std::to_string(x_fb));
    const double ratio = params.lambda / params.mu;
    const double have = transmission_ratio(params, x_fb);
    if (std::abs(have - ratio) > kTransmissionTol * ratio)
        throw TransmissionError(
            "x_fb = " + std::to_string(x_fb) +
            " violates the transmission condition: ratio " + std::to_string(have) +
            " vs lambda/mu " + std::to_string(ratio));

    const CriticalValues cv = compute_critical(params);
    StationarySolution sol;
    sol.params = params;
    if (std::abs(params.lambda - cv.lambda1) <= kFoldTol * cv.lambda1)
        sol.branch = BranchTag::Fold;
    else
        sol.branch = x_fb < cv.r_star ? BranchTag::Lower : BranchTag::Upper;
    sol.x_fb = x_fb;
    sol.warm = solve_warm_piece(params, params.lambda, x_fb);
    sol.icy = solve_icy_piece(params, params.lambda, x_fb, 0.0);
    return sol;
}

std::vector<StationarySolution> enumerate_equilibria(const ModelParams& params) {
    std::vector<StationarySolution> out;
    const FreeBoundaries fb = solve_free_boundaries(params);
    if (params.lambda < fb.critical.lambda2)
        out.push_back(build_ice_covered(params));
    for (const auto& [tag, root] : fb.roots)
        out.push_back(build_free_boundary_solution(params, root));
    return out;
}

double sup_norm(const StationarySolution& sol) { return sol.sup_norm(); }

BarrierPair build_barriers(const ModelParams& params, double theta,
                           double delta, int grid_n) {
    params.validate();
    if (!(theta > 0.0) || !(delta > 0.0))
        throw InvalidParams("barrier offsets theta and delta must be positive");
    const CriticalValues cv = compute_critical(params);
    if (params.lambda <= cv.lambda1)
        throw NoBranch("barriers need the Upper branch: lambda <= lambda1");
    if (params.lambda - theta <= cv.lambda1)
        throw NoBranch("lambda - theta <= lambda1: the shifted Upper branch "
                       "does not exist");

    const double om = params.omega;
    const auto upper_root = [&](double lam) {
        const double target = om * om * std::cosh(om) * params.mu / lam;
        return refine_root(params, target, cv.r_star + 1e-9, 1.0 - 1e-15);
    };

    BarrierPair bp;
    bp.params = params;
    bp.theta = theta;
    bp.delta = delta;
    const double lam_up = params.lambda + theta;
    const double lam_lo = params.lambda - theta;
    bp.upper_break = upper_root(lam_up);
    bp.lower_break = upper_root(lam_lo);
    bp.up_warm = solve_warm_piece(params, lam_up, bp.upper_break);
    bp.up_icy = solve_icy_piece(params, lam_up, bp.upper_break, delta);
    bp.lo_warm = solve_warm_piece(params, lam_lo, bp.lower_break);
    bp.lo_icy = solve_icy_piece(params, lam_lo, bp.lower_break, -delta);

    const StationarySolution ubar = build_free_boundary_solution(
        params, upper_root(params.lambda));
    double eps = 0.0;
    for (int i = 0; i <= grid_n; ++i) {
        const double x = static_cast<double>(i) / grid_n;
        const double u = ubar.u(x);
        eps = std::max(eps, std::max(bp.upper(x) - u, u - bp.lower(x)));
    }
    bp.epsilon = eps;
    return bp;
}

bool transmission_gap_positive(double omega, int grid_n) {
    if (grid_n < 2) throw InvalidParams("grid_n must be at least 2");
    const double c = std::cosh(omega);
    for (int i = 1; i <= grid_n; ++i) {
        const double x = static_cast<double>(i) / (grid_n + 1);
        for (int j = 1; j <= grid_n; ++j) {
            const double eps = static_cast<double>(j) / (grid_n + 1);
            if (c - denominator(omega, eps, x) <= 0.0) return false;
        }
    }
    return true;
}

}  // namespace ebm
