#include "ebm/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ebm {

namespace {

// Thomas factorization of I + dt (A + omega^2 I) over the unknowns
// u_0..u_{n-1}; A is the second-difference operator with a Neumann ghost at
// x = 0 (row 0 couples to u_1 with weight -2 dt/dx^2) and Dirichlet at x = 1.
// An M-matrix: the solve preserves pointwise order.
struct Stepper {
    int n{};
    double dt{};
    std::vector<double> sub, den, cp;

    Stepper(const Grid& g, double omega, double dt_)
        : n(g.n), dt(dt_), sub(g.n, 0.0), den(g.n), cp(g.n - 1) {
        const double dx2 = g.dx * g.dx;
        const double diag = 1.0 + dt * (2.0 / dx2 + omega * omega);
        std::vector<double> sup(n - 1, -dt / dx2);
        sup[0] = -2.0 * dt / dx2;
        for (int i = 1; i < n; ++i) sub[i] = -dt / dx2;
        den[0] = diag;
        cp[0] = sup[0] / den[0];
        for (int i = 1; i < n; ++i) {
            den[i] = diag - sub[i] * cp[i - 1];
            if (i < n - 1) cp[i] = sup[i] / den[i];
        }
    }

    // rhs is overwritten with the solution.
    void solve(std::vector<double>& rhs) const {
        rhs[0] /= den[0];
        for (int i = 1; i < n; ++i)
            rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / den[i];
        for (int i = n - 2; i >= 0; --i) rhs[i] -= cp[i] * rhs[i + 1];
    }
};

Field advance(const Field& field, const ModelParams& params,
              const RegularizedAlbedo& reg, const Stepper& st) {
    const int n = field.grid.n;
    std::vector<double> rhs(n);
    for (int j = 0; j < n; ++j)
        rhs[j] = field.values[j] + st.dt * params.lambda * reg.value(field.values[j]);
    st.solve(rhs);
    rhs.push_back(0.0);
    for (double v : rhs)
        if (!std::isfinite(v))
            throw NumericalBlowup("non-finite value during time stepping at t = " +
                                  std::to_string(field.time));
    return Field(field.grid, std::move(rhs), field.time + st.dt);
}

StepDiagnostics diagnose(const Field& f, const Field& prev, double mu) {
    StepDiagnostics d;
    d.time = f.time;
    const int n = f.grid.n;
    const double dx = f.grid.dx;
    double l2 = 0.0, h1 = 0.0, sup = 0.0, inc = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double w = (j == 0 || j == n) ? 0.5 * dx : dx;
        l2 += w * f.values[j] * f.values[j];
        sup = std::max(sup, std::abs(f.values[j]));
        inc = std::max(inc, std::abs(f.values[j] - prev.values[j]));
        if (j < n) {
            const double diff = f.values[j + 1] - f.values[j];
            h1 += diff * diff / dx;
        }
    }
    d.sup = sup;
    d.l2 = std::sqrt(l2);
    d.h1semi = std::sqrt(h1);
    d.increment_inf = inc;

    d.fb_margin = 0.0;
    bool first = true;
    for (int j = 0; j < n; ++j) {
        const double a = f.values[j] - mu, b = f.values[j + 1] - mu;
        if ((a > 0 && b < 0) || (a < 0 && b > 0) || a == 0.0) {
            const double slope = std::abs(f.values[j + 1] - f.values[j]) / dx;
            d.fb_margin = first ? slope : std::min(d.fb_margin, slope);
            first = false;
        }
    }
    return d;
}

}  // namespace

Grid Grid::uniform(int n) {
    if (n < 16) throw InvalidParams("grid needs at least 16 cells, got " +
                                    std::to_string(n));
    return Grid{n, 1.0 / n};
}

Field::Field(const Grid& g, std::vector<double> vals, double t)
    : grid(g), values(std::move(vals)), time(t) {
    if (static_cast<int>(values.size()) != g.n + 1)
        throw GridError("field needs n+1 = " + std::to_string(g.n + 1) +
                        " nodal values, got " + std::to_string(values.size()));
    values.back() = 0.0;
}

Field Field::sample(const Grid& g, const std::function<double(double)>& u0,
                    double t) {
    std::vector<double> vals(g.n + 1);
    for (int j = 0; j <= g.n; ++j) vals[j] = u0(g.x(j));
    return Field(g, std::move(vals), t);
}

Field Field::constant(const Grid& g, double value, double t) {
    return Field(g, std::vector<double>(g.n + 1, value), t);
}

DistanceMetrics distance_metrics(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw GridError("fields live on different grids");
    DistanceMetrics m;
    const int n = a.grid.n;
    const double dx = a.grid.dx;
    double l2 = 0.0, h1 = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double d = a.values[j] - b.values[j];
        m.linf = std::max(m.linf, std::abs(d));
        l2 += ((j == 0 || j == n) ? 0.5 * dx : dx) * d * d;
        if (j < n) {
            const double dd = (a.values[j + 1] - b.values[j + 1]) -
                              (a.values[j] - b.values[j]);
            h1 += dd * dd / dx;
        }
    }
    m.l2 = std::sqrt(l2);
    m.h1semi = std::sqrt(h1);
    return m;
}

std::vector<double> detect_crossings(const Field& field, double mu) {
    std::vector<double> out;
    const int n = field.grid.n;
    for (int j = 0; j <= n; ++j) {
        const double a = field.values[j] - mu;
        if (a == 0.0) {
            // plateau at mu reported once, at its left edge
            if (j == 0 || field.values[j - 1] != mu)
                out.push_back(field.grid.x(j));
            continue;
        }
        if (j == n) break;
        const double b = field.values[j + 1] - mu;
        if ((a > 0 && b < 0) || (a < 0 && b > 0))
            out.push_back(field.grid.x(j) + field.grid.dx * a / (a - b));
    }
    return out;
}

double default_regularization_width(const Grid& grid,
                                    std::optional<double> fb_slope,
                                    double mu) {
    if (fb_slope && *fb_slope != 0.0)
        return std::max(4.0 * grid.dx * std::abs(*fb_slope), 1e-8);
    return 4.0 * grid.dx * mu;
}

Field step(const Field& field, const ModelParams& params,
           const RegularizedAlbedo& reg, double dt) {
    params.validate();
    if (!(dt > 0.0)) throw InvalidParams("time step must be positive");
    for (double v : field.values)
        if (!std::isfinite(v))
            throw NumericalBlowup("non-finite value in the input field");
    const Stepper st(field.grid, params.omega, dt);
    return advance(field, params, reg, st);
}

Trajectory integrate(const Field& u0, const ModelParams& params,
                     const RegularizedAlbedo& reg, double dt, double t_final,
                     int snapshot_every) {
    params.validate();
    if (!(t_final > 0.0)) throw InvalidParams("t_final must be positive");
    if (snapshot_every < 1) snapshot_every = 1;
    if (dt <= 0.0) dt = u0.grid.dx;

    Trajectory traj;
    traj.snapshots.push_back(u0);
    const long total = std::lround(std::ceil(t_final / dt - 1e-12));
    const Stepper st(u0.grid, params.omega, dt);

    Field cur = u0;
    int calm_streak = 0;
    for (long s = 1; s <= total; ++s) {
        Field next;
        try {
            next = advance(cur, params, reg, st);
        } catch (const NumericalBlowup&) {
            traj.blew_up = true;
            traj.snapshots.push_back(cur);
            return traj;
        }
        StepDiagnostics d = diagnose(next, cur, params.mu);
        FbPoint fb;
        fb.time = next.time;
        fb.crossings = detect_crossings(next, params.mu);
        if (fb.crossings.size() == 1) fb.x_fb = fb.crossings[0];
        traj.fb_track.push_back(std::move(fb));

        if (d.increment_inf < 1e-9) {
            if (++calm_streak == 100 && !traj.converged) {
                traj.converged = true;
                traj.converged_time = next.time;
            }
        } else {
            calm_streak = 0;
        }
        traj.diagnostics.push_back(d);
        cur = std::move(next);
        if (s % snapshot_every == 0 && s != total) traj.snapshots.push_back(cur);
    }
    traj.snapshots.push_back(cur);
    return traj;
}

bool check_monotone_in_time(const Trajectory& traj, TimeDirection direction,
                            double tol) {
    if (traj.snapshots.size() < 2)
        throw InvalidParams("monotonicity needs at least two snapshots");
    for (size_t k = 1; k < traj.snapshots.size(); ++k) {
        const auto& prev = traj.snapshots[k - 1].values;
        const auto& cur = traj.snapshots[k].values;
        for (size_t j = 0; j < cur.size(); ++j) {
            const double d = cur[j] - prev[j];
            if (direction == TimeDirection::Up ? d < -tol : d > tol)
                return false;
        }
    }
    return true;
}

NondegeneracyReport check_nondegeneracy(const Field& field, double mu,
                                        std::vector<double> theta_list) {
    NondegeneracyReport rep;
    std::sort(theta_list.begin(), theta_list.end());
    if (theta_list.empty() || theta_list.front() <= 0.0)
        throw InvalidParams("theta samples must be positive");
    if (theta_list.back() >= mu)
        throw InvalidParams("theta samples must stay below mu");
    rep.theta_samples = theta_list;
    rep.theta0 = theta_list.back();

    rep.measures.reserve(theta_list.size());
    for (double theta : theta_list) {
        int count = 0;
        for (double v : field.values)
            if (std::abs(v - mu) <= theta) ++count;
        rep.measures.push_back(count * field.grid.dx);
    }
    for (size_t i = 0; i < theta_list.size(); ++i)
        rep.fitted_C = std::max(rep.fitted_C, rep.measures[i] / theta_list[i]);

    // A transversal crossing keeps measure/theta bounded; a flat one makes
    // it blow up as theta shrinks.
    const double ratio_small = rep.measures.front() / theta_list.front();
    const double ratio_large = rep.measures.back() / theta_list.back();
    rep.degenerate = rep.measures.front() > 0.0 &&
                     ratio_small > 4.0 * std::max(ratio_large, 1e-300);
    return rep;
}

double energy(const Field& field, const ModelParams& params,
              const RegularizedAlbedo& reg) {
    const int n = field.grid.n;
    const double dx = field.grid.dx;
    const double om2 = params.omega * params.omega;
    double e = 0.0;
    for (int j = 0; j < n; ++j) {
        const double diff = field.values[j + 1] - field.values[j];
        e += diff * diff / (2.0 * dx);
        const double w = (j == 0) ? 0.5 * dx : dx;
        e += w * (0.5 * om2 * field.values[j] * field.values[j] -
                  params.lambda * reg.primitive(field.values[j]));
    }
    return e;
}

}  // namespace ebm
