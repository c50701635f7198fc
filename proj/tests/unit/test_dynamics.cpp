#include <doctest.h>

#include <cmath>
#include <random>

#include "ebm/dynamics.hpp"
#include "ebm/stationary.hpp"

using namespace ebm;

namespace {
const ModelParams kFamily{1.0, 1.0, 0.5, 1.0};

ModelParams mid_params() {
    const CriticalValues cv = compute_critical(kFamily);
    return kFamily.with_lambda(0.5 * (cv.lambda1 + cv.lambda2));
}

StationarySolution upper_at(const ModelParams& p) {
    const auto fb = solve_free_boundaries(p);
    return build_free_boundary_solution(p, fb.roots.back().second);
}

StationarySolution lower_at(const ModelParams& p) {
    const auto fb = solve_free_boundaries(p);
    REQUIRE(fb.roots.front().first == BranchTag::Lower);
    return build_free_boundary_solution(p, fb.roots.front().second);
}

Field sample_solution(const Grid& g, const StationarySolution& sol) {
    return Field::sample(g, [&](double x) { return sol.u(x); });
}

Field random_field(const Grid& g, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double a[5];
    for (double& c : a) c = coef(rng);
    return Field::sample(g, [&](double x) {
        double v = 0.0;
        for (int k = 0; k < 5; ++k)
            v += a[k] * std::cos((k + 0.5) * M_PI * x);
        return amplitude * v;
    });
}
}  // namespace

TEST_CASE("grid and field plumbing") {
    CHECK_THROWS_AS(Grid::uniform(8), InvalidParams);
    const Grid g = Grid::uniform(32);
    CHECK(g.dx == doctest::Approx(1.0 / 32));
    CHECK(g.x(32) == 1.0);

    CHECK_THROWS_AS(Field(g, std::vector<double>(10, 0.0)), GridError);
    std::vector<double> vals(33, 1.0);
    const Field f(g, vals);
    CHECK(f.values.back() == 0.0);  // Dirichlet node always clamped

    const Field a = Field::constant(g, 0.5);
    const Field b = Field::constant(Grid::uniform(64), 0.5);
    CHECK_THROWS_AS(distance_metrics(a, b), GridError);
}

TEST_CASE("distance metrics: zero, constant offset, branch separation") {
    const Grid g = Grid::uniform(200);
    const Field a = Field::constant(g, 0.7);
    CHECK(distance_metrics(a, a).linf == 0.0);
    CHECK(distance_metrics(a, a).l2 == 0.0);
    CHECK(distance_metrics(a, a).h1semi == 0.0);

    Field b = a;
    for (int j = 0; j < g.n; ++j) b.values[j] += 0.25;
    CHECK(distance_metrics(a, b).linf == doctest::Approx(0.25));

    const ModelParams p = mid_params();
    const Field up = sample_solution(g, upper_at(p));
    const Field lo = sample_solution(g, lower_at(p));
    const DistanceMetrics m = distance_metrics(up, lo);
    CHECK(m.linf > 0.1);
    CHECK(m.l2 > 0.05);
    CHECK(m.h1semi > 0.05);
}

TEST_CASE("crossing detection: interpolation, multiplicity, plateau") {
    const Grid g = Grid::uniform(100);
    // linear profile crossing mu = 1 exactly at x = 0.355
    const Field lin = Field::sample(g, [](double x) { return 2.0 - x / 0.355; });
    const auto one = detect_crossings(lin, 1.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(0.355).epsilon(1e-12));

    const Field wavy =
        Field::sample(g, [](double x) { return 1.0 + std::sin(6.0 * M_PI * x); });
    CHECK(detect_crossings(wavy, 1.0).size() > 2);

    const Field flat = Field::constant(g, 1.0);
    const auto plateau = detect_crossings(flat, 1.0);
    CHECK(plateau.size() == 1);
    CHECK(plateau[0] == 0.0);

    const Field below = Field::constant(g, 0.2);
    CHECK(detect_crossings(below, 1.0).empty());
}

TEST_CASE("one step: homogeneous zero state, bad inputs") {
    const Grid g = Grid::uniform(64);
    const Field zero = Field::constant(g, 0.0);
    ModelParams p = kFamily.with_lambda(1e-300);  // essentially homogeneous
    const RegularizedAlbedo reg(p, 0.01);
    const Field next = step(zero, p, reg, g.dx);
    for (double v : next.values) CHECK(std::abs(v) < 1e-290);

    CHECK_THROWS_AS(step(zero, p, reg, 0.0), InvalidParams);
    Field poisoned = zero;
    poisoned.values[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(step(poisoned, p, reg, g.dx), NumericalBlowup);
}

TEST_CASE("a sampled equilibrium is nearly fixed under one step") {
    const ModelParams p = mid_params();
    for (int n : {250, 500, 1000}) {
        const Grid g = Grid::uniform(n);
        const StationarySolution ubar = upper_at(p);
        const Field u = sample_solution(g, ubar);
        const RegularizedAlbedo reg(
            p, default_regularization_width(g, ubar.du(*ubar.x_fb), p.mu));
        const Field next = step(u, p, reg, g.dx);
        double move = 0.0;
        for (int j = 0; j <= g.n; ++j)
            move = std::max(move, std::abs(next.values[j] - u.values[j]));
        const double bound =
            10.0 * p.lambda * (g.dx * g.dx + reg.epsilon * g.dx);
        CHECK(move <= bound);
    }
}

TEST_CASE("discrete comparison principle on random ordered pairs") {
    std::mt19937_64 rng(43);
    const ModelParams p = mid_params();
    const Grid g = Grid::uniform(200);
    const RegularizedAlbedo reg(p, default_regularization_width(g, {}, p.mu));
    for (int trial = 0; trial < 10; ++trial) {
        const Field u0 = random_field(g, rng, 0.8);
        Field v0 = u0;
        std::uniform_real_distribution<double> w(0.0, 0.5);
        for (int j = 0; j < g.n; ++j)
            v0.values[j] += w(rng) * (1.0 + std::sin(3.0 * M_PI * g.x(j)));
        const Trajectory tu = integrate(u0, p, reg, g.dx, 30 * g.dx, 1);
        const Trajectory tv = integrate(v0, p, reg, g.dx, 30 * g.dx, 1);
        REQUIRE(tu.snapshots.size() == tv.snapshots.size());
        for (size_t k = 0; k < tu.snapshots.size(); ++k)
            for (int j = 0; j <= g.n; ++j)
                CHECK(tu.snapshots[k].values[j] <=
                      tv.snapshots[k].values[j] + 1e-12);
    }
}

TEST_CASE("energy never increases along the semi-implicit flow") {
    std::mt19937_64 rng(47);
    const ModelParams p = mid_params();
    const Grid g = Grid::uniform(200);
    const RegularizedAlbedo reg(p, default_regularization_width(g, {}, p.mu));
    for (int trial = 0; trial < 10; ++trial) {
        Field u = random_field(g, rng, 1.5);
        double e = energy(u, p, reg);
        for (int s = 0; s < 50; ++s) {
            u = step(u, p, reg, g.dx);
            const double e_next = energy(u, p, reg);
            CHECK(e_next <= e + 1e-10);
            e = e_next;
        }
    }
}

TEST_CASE("monotone-in-time from a shifted lower solution") {
    const ModelParams p = mid_params();
    const CriticalValues cv = compute_critical(p);
    const double theta = 0.1 * (cv.lambda2 - cv.lambda1);
    const Grid g = Grid::uniform(300);
    const StationarySolution start = lower_at(p.with_lambda(p.lambda - theta));
    const Field u0 = sample_solution(g, start);
    const RegularizedAlbedo reg(
        p, default_regularization_width(g, start.du(*start.x_fb), p.mu));
    const Trajectory traj = integrate(u0, p, reg, g.dx, 10.0, 50);
    CHECK(check_monotone_in_time(traj, TimeDirection::Up, 10.0 * reg.epsilon));
    CHECK_FALSE(
        check_monotone_in_time(traj, TimeDirection::Down, 10.0 * reg.epsilon));

    // the free-boundary track moves right, substantially
    REQUIRE_FALSE(traj.fb_track.empty());
    std::optional<double> prev;
    for (const auto& pt : traj.fb_track) {
        REQUIRE(pt.crossings.size() == 1);
        if (prev) CHECK(*pt.x_fb >= *prev - g.dx);
        prev = pt.x_fb;
    }
    CHECK(*traj.fb_track.back().x_fb >
          *traj.fb_track.front().x_fb + 0.1);
}

TEST_CASE("an equilibrium start passes both monotonicity directions") {
    const ModelParams p = mid_params();
    const Grid g = Grid::uniform(300);
    const StationarySolution ubar = upper_at(p);
    const Field u0 = sample_solution(g, ubar);
    const RegularizedAlbedo reg(
        p, default_regularization_width(g, ubar.du(*ubar.x_fb), p.mu));
    const Trajectory traj = integrate(u0, p, reg, g.dx, 5.0, 100);
    CHECK(check_monotone_in_time(traj, TimeDirection::Up, 10 * reg.epsilon));
    CHECK(check_monotone_in_time(traj, TimeDirection::Down, 10 * reg.epsilon));
}

TEST_CASE("equilibrium drift shrinks at least 3x under refinement") {
    const ModelParams p = mid_params();
    const StationarySolution ubar = upper_at(p);
    const auto drift_at = [&](int n) {
        const Grid g = Grid::uniform(n);
        const Field u0 = sample_solution(g, ubar);
        const RegularizedAlbedo reg(
            p, default_regularization_width(g, ubar.du(*ubar.x_fb), p.mu));
        const Trajectory traj = integrate(u0, p, reg, g.dx, 10.0, 20);
        double worst = 0.0;
        for (const auto& snap : traj.snapshots)
            worst = std::max(worst, distance_metrics(snap, u0).linf);
        return worst;
    };
    const double coarse = drift_at(400);
    const double fine = drift_at(800);  // halves dx and the tied eps_reg
    CHECK(fine < coarse / 3.0);
    CHECK(coarse < 1e-2);
}

TEST_CASE("integrate declares convergence and survives blow-up input") {
    const ModelParams p = mid_params();
    const Grid g = Grid::uniform(128);
    const StationarySolution ubar = upper_at(p);
    const Field u0 = sample_solution(g, ubar);
    const RegularizedAlbedo reg(
        p, default_regularization_width(g, ubar.du(*ubar.x_fb), p.mu));
    const Trajectory traj = integrate(u0, p, reg, g.dx, 20.0, 100);
    CHECK(traj.converged);
    CHECK(traj.converged_time < 20.0);
    CHECK_FALSE(traj.blew_up);
    CHECK(traj.diagnostics.back().increment_inf < 1e-9);

    Field poisoned = u0;
    poisoned.values[5] = std::numeric_limits<double>::quiet_NaN();
    const Trajectory dead = integrate(poisoned, p, reg, g.dx, 1.0, 10);
    CHECK(dead.blew_up);
    CHECK(dead.snapshots.size() >= 1);
}

TEST_CASE("non-degeneracy: transversal crossing, flat field, no crossing") {
    const ModelParams p = mid_params();
    const Grid g = Grid::uniform(4000);
    const StationarySolution ubar = upper_at(p);
    const Field u = sample_solution(g, ubar);
    const double slope = std::abs(ubar.du(*ubar.x_fb));
    const auto rep = check_nondegeneracy(
        u, p.mu, {1e-3 * p.mu, 3e-3 * p.mu, 1e-2 * p.mu, 3e-2 * p.mu});
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.fitted_C > 1.0 / slope);   // analytic value 2/slope, factor 2 down
    CHECK(rep.fitted_C < 4.0 / slope);   // and factor 2 up
    for (size_t i = 1; i < rep.measures.size(); ++i)
        CHECK(rep.measures[i] >= rep.measures[i - 1]);

    const Field flat = Field::constant(g, p.mu);
    const auto degenerate = check_nondegeneracy(
        flat, p.mu, {1e-3 * p.mu, 1e-2 * p.mu, 1e-1 * p.mu});
    CHECK(degenerate.degenerate);
    CHECK(degenerate.measures.front() > 1.0 - 1e-9);

    const Field cold = Field::constant(g, 0.1 * p.mu);
    const auto silent = check_nondegeneracy(
        cold, p.mu, {1e-3 * p.mu, 1e-2 * p.mu, 1e-1 * p.mu});
    CHECK_FALSE(silent.degenerate);
    CHECK(silent.fitted_C == 0.0);
    for (double m : silent.measures) CHECK(m == 0.0);

    CHECK_THROWS_AS(check_nondegeneracy(u, p.mu, {2.0 * p.mu}), InvalidParams);
    CHECK_THROWS_AS(check_nondegeneracy(u, p.mu, {}), InvalidParams);
}

TEST_CASE("default regularization width policy") {
    const Grid g = Grid::uniform(100);
    CHECK(default_regularization_width(g, -0.5, 2.0) ==
          doctest::Approx(4.0 * g.dx * 0.5));
    CHECK(default_regularization_width(g, {}, 2.0) ==
          doctest::Approx(4.0 * g.dx * 2.0));
    CHECK(default_regularization_width(g, 0.0, 2.0) ==
          doctest::Approx(4.0 * g.dx * 2.0));
    CHECK(default_regularization_width(Grid::uniform(100000000), -1e-9, 1.0) ==
          doctest::Approx(1e-8));
}
