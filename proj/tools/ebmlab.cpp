// ebmlab: equilibria, bifurcation diagrams, spectral stability and parabolic
// simulation of the one-dimensional energy-balance model
//   u_t - u_xx + omega^2 u = lambda f(u),  u_x(0)=0, u(1)=0,
// with a co-albedo f jumping from f0 to 1 at the ice-line temperature mu.
//
// Every subcommand is a pure function of (config file + flags + seed):
// identical inputs produce byte-identical outputs.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebm/bifurcation.hpp"
#include "ebm/dynamics.hpp"
#include "ebm/experiments.hpp"
#include "ebm/io.hpp"
#include "ebm/spectral.hpp"
#include "ebm/stationary.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitGatedFailure = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitSolverError = 3;

// The config file is a flat JSON object whose keys match flag names; it is
// loaded before CLI11 parses, so it supplies defaults and flags win.
json load_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in)
                throw ebm::InvalidParams(std::string("cannot open config file ") +
                                         argv[i + 1]);
            json j;
            in >> j;
            if (!j.is_object())
                throw ebm::InvalidParams("config file must hold a JSON object");
            return j;
        }
    }
    return json::object();
}

struct Common {
    ebm::ModelParams params;
    std::string config_path;  // consumed by load_config; registered for --help
};

void add_params(CLI::App* cmd, Common& c, const json& cfg, bool with_lambda) {
    cmd->add_option("--config", c.config_path,
                    "flat JSON config; flags override its values");
    cmd->add_option("--omega", c.params.omega, "absorption coefficient")
        ->capture_default_str()
        ->default_val(cfg.value("omega", 1.0));
    cmd->add_option("--mu", c.params.mu, "ice-line threshold temperature")
        ->capture_default_str()
        ->default_val(cfg.value("mu", 1.0));
    cmd->add_option("--f0", c.params.f0, "bare co-albedo, in (0,1)")
        ->capture_default_str()
        ->default_val(cfg.value("f0", 0.5));
    if (with_lambda)
        cmd->add_option("--lambda", c.params.lambda, "solar-constant parameter")
            ->capture_default_str()
            ->default_val(cfg.value("lambda", 1.0));
}

json params_echo(const ebm::ModelParams& p) {
    return {{"omega", p.omega}, {"mu", p.mu}, {"f0", p.f0}, {"lambda", p.lambda}};
}

void emit(const std::string& text, const std::string& out_path) {
    if (!out_path.empty()) ebm::atomic_write(out_path, text);
    std::cout << text << '\n';
}

double resolve_lambda(ebm::ModelParams& p, double lambda_frac) {
    if (lambda_frac >= 0.0) {
        const ebm::CriticalValues cv = ebm::compute_critical(p.with_lambda(1.0));
        p.lambda = cv.lambda1 + lambda_frac * (cv.lambda2 - cv.lambda1);
    }
    return p.lambda;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-balance model laboratory"};
    app.require_subcommand(1);

    json cfg;
    try {
        cfg = load_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    // ---- critical
    Common cc;
    auto* cmd_critical = app.add_subcommand(
        "critical", "critical solar constants lambda1, lambda2 and the fold r*");
    add_params(cmd_critical, cc, cfg, false);
    std::string critical_out = cfg.value("out", std::string{});
    cmd_critical->add_option("--out", critical_out, "write JSON here as well");

    // ---- equilibria
    Common ce;
    auto* cmd_equilibria = app.add_subcommand(
        "equilibria", "enumerate all monotone equilibria at a given lambda");
    add_params(cmd_equilibria, ce, cfg, true);
    int eq_resolution = cfg.value("resolution", 1001);
    bool eq_mirror = cfg.value("mirror", false);
    std::string eq_prefix = cfg.value("out", std::string("equilibria"));
    cmd_equilibria->add_option("--resolution", eq_resolution, "profile points")
        ->capture_default_str();
    cmd_equilibria->add_flag("--mirror", eq_mirror,
                             "extend profiles evenly to x in [-1,1]");
    cmd_equilibria->add_option("--out", eq_prefix, "output path prefix")
        ->capture_default_str();

    // ---- bifurcate
    Common cb;
    auto* cmd_bifurcate =
        app.add_subcommand("bifurcate", "trace the S-shaped bifurcation diagram");
    add_params(cmd_bifurcate, cb, cfg, false);
    double bf_min = cfg.value("lambda-min", 0.0);
    double bf_max = cfg.value("lambda-max", 0.0);
    int bf_steps = cfg.value("steps", 400);
    bool bf_refine = cfg.value("refine-fold", false);
    std::string bf_prefix = cfg.value("out", std::string("bifurcation"));
    cmd_bifurcate
        ->add_option("--lambda-min", bf_min, "sweep start (0 = 0.5 lambda1)")
        ->capture_default_str();
    cmd_bifurcate
        ->add_option("--lambda-max", bf_max, "sweep end (0 = 1.5 lambda2)")
        ->capture_default_str();
    cmd_bifurcate->add_option("--steps", bf_steps, "uniform sweep points")
        ->capture_default_str();
    cmd_bifurcate->add_flag("--refine-fold", bf_refine,
                            "add geometric refinement lambda1 (1 + 2^-k)");
    cmd_bifurcate->add_option("--out", bf_prefix, "output path prefix")
        ->capture_default_str();

    // ---- eigen
    Common cg;
    auto* cmd_eigen = app.add_subcommand(
        "eigen", "principal eigenvalue of the linearization at an equilibrium");
    add_params(cmd_eigen, cg, cfg, true);
    double eig_frac = cfg.value("lambda-frac", -1.0);
    std::string eig_branch = cfg.value("branch", std::string("lower"));
    int eig_n = cfg.value("n", 10000);
    std::string eig_dump = cfg.value("dump-eigenfunction", std::string{});
    bool eig_scan = cfg.value("scan", false);
    std::vector<double> scan_omega = {0.25, 0.5, 0.75, 0.99};
    std::vector<double> scan_frac = {0.1, 0.5, 1.0};
    std::string eig_out = cfg.value("out", std::string{});
    cmd_eigen
        ->add_option("--lambda-frac", eig_frac,
                     "set lambda = lambda1 + frac (lambda2 - lambda1)")
        ->capture_default_str();
    cmd_eigen->add_option("--branch", eig_branch, "lower or upper")
        ->capture_default_str();
    cmd_eigen->add_option("--n", eig_n, "matrix discretization cells")
        ->capture_default_str();
    cmd_eigen->add_option("--dump-eigenfunction", eig_dump,
                          "write eigenfunction CSV here");
    cmd_eigen->add_flag("--scan", eig_scan,
                        "sign scan over omega and lambda fractions");
    cmd_eigen->add_option("--scan-omega", scan_omega, "scan omega values")
        ->expected(-1);
    cmd_eigen->add_option("--scan-frac", scan_frac, "scan lambda fractions")
        ->expected(-1);
    cmd_eigen->add_option("--out", eig_out, "output path (JSON or scan CSV)");

    // ---- simulate
    Common cs;
    auto* cmd_simulate =
        app.add_subcommand("simulate", "integrate the regularized parabolic flow");
    add_params(cmd_simulate, cs, cfg, true);
    double sim_frac = cfg.value("lambda-frac", -1.0);
    std::string sim_init = cfg.value("init", std::string("lower-minus-theta"));
    double sim_theta = cfg.value("theta", 0.0);
    int sim_n = cfg.value("n", 2000);
    double sim_dt = cfg.value("dt", 0.0);
    double sim_tfinal = cfg.value("t-final", 50.0);
    int sim_snap = cfg.value("snapshot-every", 100);
    double sim_epsreg = cfg.value("eps-reg", 0.0);
    std::string sim_prefix = cfg.value("out", std::string("simulation"));
    cmd_simulate
        ->add_option("--lambda-frac", sim_frac,
                     "set lambda = lambda1 + frac (lambda2 - lambda1)")
        ->capture_default_str();
    cmd_simulate
        ->add_option("--init", sim_init,
                     "ice | upper | lower | lower-minus-theta | "
                     "lower-plus-theta | zero")
        ->capture_default_str();
    cmd_simulate
        ->add_option("--theta", sim_theta,
                     "lambda offset of the shifted initial data "
                     "(0 = 0.02 (lambda2 - lambda1))")
        ->capture_default_str();
    cmd_simulate->add_option("--n", sim_n, "grid cells")->capture_default_str();
    cmd_simulate->add_option("--dt", sim_dt, "time step (0 = dx)")
        ->capture_default_str();
    cmd_simulate->add_option("--t-final", sim_tfinal, "integration horizon")
        ->capture_default_str();
    cmd_simulate
        ->add_option("--snapshot-every", sim_snap, "steps between snapshots")
        ->capture_default_str();
    cmd_simulate
        ->add_option("--eps-reg", sim_epsreg,
                     "regularization half-width (0 = grid-tied default)")
        ->capture_default_str();
    cmd_simulate->add_option("--out", sim_prefix, "output path prefix")
        ->capture_default_str();

    // ---- experiment
    Common cx;
    auto* cmd_experiment = app.add_subcommand(
        "experiment", "scripted pass/fail reproductions of the claims");
    add_params(cmd_experiment, cx, cfg, true);
    std::string exp_name;
    cmd_experiment
        ->add_option("name", exp_name, "stability | instability | eigen-consistency")
        ->required();
    double exp_frac = cfg.value("lambda-frac", 0.5);
    double exp_theta = cfg.value("theta", 0.0);
    double exp_delta = cfg.value("delta", 0.0);
    int exp_n = cfg.value("n", 2000);
    double exp_dt = cfg.value("dt", 0.0);
    double exp_tfinal = cfg.value("t-final", 0.0);
    std::uint64_t exp_seed = cfg.value("seed", 20240913ULL);
    std::string exp_out = cfg.value("out", std::string{});
    std::string exp_archive = cfg.value("archive", std::string{});
    bool exp_lambda_given = false;
    cmd_experiment
        ->add_option("--lambda-frac", exp_frac,
                     "set lambda = lambda1 + frac (lambda2 - lambda1)")
        ->capture_default_str();
    cmd_experiment->add_flag("--use-lambda", exp_lambda_given,
                             "take --lambda literally instead of --lambda-frac");
    cmd_experiment->add_option("--theta", exp_theta, "offset (0 = default)")
        ->capture_default_str();
    cmd_experiment->add_option("--delta", exp_delta, "barrier boundary value")
        ->capture_default_str();
    cmd_experiment->add_option("--n", exp_n, "grid cells")->capture_default_str();
    cmd_experiment->add_option("--dt", exp_dt, "time step (0 = dx)")
        ->capture_default_str();
    cmd_experiment
        ->add_option("--t-final", exp_tfinal, "horizon (0 = 50/omega^2)")
        ->capture_default_str();
    cmd_experiment->add_option("--seed", exp_seed, "perturbation battery seed")
        ->capture_default_str();
    cmd_experiment->add_option("--out", exp_out, "report path");
    cmd_experiment->add_option("--archive", exp_archive,
                               "prefix for archived trajectory CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (*cmd_critical) {
            cc.params.lambda = 1.0;  // unused by the criticals
            cc.params.validate();
            const ebm::CriticalValues cv = ebm::compute_critical(cc.params);
            const auto fold = ebm::build_free_boundary_solution(
                cc.params.with_lambda(cv.lambda1), cv.r_star);
            json j;
            j["omega"] = cc.params.omega;
            j["mu"] = cc.params.mu;
            j["f0"] = cc.params.f0;
            j["lambda1"] = cv.lambda1;
            j["lambda2"] = cv.lambda2;
            j["r_star"] = cv.r_star;
            j["lambda1_exceeds_mu_omega2"] =
                cv.lambda1 > cc.params.mu * cc.params.omega * cc.params.omega;
            j["fold_sup_norm"] = fold.sup_norm();
            j["fold_sup_norm_exceeds_mu"] = fold.sup_norm() > cc.params.mu;
            emit(j.dump(2), critical_out);
            return kExitOk;
        }

        if (*cmd_equilibria) {
            ce.params.validate();
            const auto sols = ebm::enumerate_equilibria(ce.params);
            json j;
            j["params"] = params_echo(ce.params);
            j["resolution"] = eq_resolution;
            j["mirror"] = eq_mirror;
            j["count"] = sols.size();
            j["branches"] = json::array();
            for (const auto& sol : sols) {
                json b;
                b["branch"] = ebm::branch_name(sol.branch);
                b["x_fb"] = sol.x_fb ? json(*sol.x_fb) : json(nullptr);
                b["sup_norm"] = sol.sup_norm();
                const std::string path =
                    eq_prefix + "_" + ebm::branch_name(sol.branch) + ".csv";
                ebm::atomic_write(path,
                                  ebm::profile_csv(sol, eq_resolution, eq_mirror));
                b["profile"] = path;
                j["branches"].push_back(b);
            }
            ebm::atomic_write(eq_prefix + "_summary.json", j.dump(2));
            std::cout << j.dump(2) << '\n';
            return kExitOk;
        }

        if (*cmd_bifurcate) {
            cb.params.lambda = 1.0;
            cb.params.validate();
            const ebm::CriticalValues cv = ebm::compute_critical(cb.params);
            if (bf_min <= 0.0) bf_min = 0.5 * cv.lambda1;
            if (bf_max <= 0.0) bf_max = 1.5 * cv.lambda2;
            const ebm::BifurcationCurve curve =
                ebm::trace(cb.params, bf_min, bf_max, bf_steps, bf_refine);
            const ebm::SShapeReport report = ebm::verify_s_shape(curve);
            ebm::atomic_write(bf_prefix + ".csv", ebm::curve_csv(curve));
            json j;
            j["params"] = {{"omega", cb.params.omega},
                           {"mu", cb.params.mu},
                           {"f0", cb.params.f0}};
            j["lambda_min"] = bf_min;
            j["lambda_max"] = bf_max;
            j["steps"] = bf_steps;
            j["refine_fold"] = bf_refine;
            j["lambda1"] = curve.critical.lambda1;
            j["lambda2"] = curve.critical.lambda2;
            j["r_star"] = curve.critical.r_star;
            j["s_shape"] = json::parse(report.to_json());
            ebm::atomic_write(bf_prefix + "_summary.json", j.dump(2));
            std::cout << j.dump(2) << '\n';
            return report.pass ? kExitOk : kExitGatedFailure;
        }

        if (*cmd_eigen) {
            cg.params.validate();
            if (eig_scan) {
                const auto rows = ebm::instability_sign_scan(
                    cg.params, scan_omega, scan_frac, eig_n);
                const std::string csv = ebm::sign_scan_csv(rows);
                emit(csv, eig_out);
                for (const auto& r : rows)
                    if (r.status != "ok") return kExitSolverError;
                return kExitOk;
            }
            resolve_lambda(cg.params, eig_frac);
            const ebm::FreeBoundaries fb = ebm::solve_free_boundaries(cg.params);
            std::optional<double> x_fb;
            const bool want_lower = eig_branch == "lower";
            if (!want_lower && eig_branch != "upper")
                throw ebm::InvalidParams("--branch must be lower or upper");
            for (const auto& [tag, root] : fb.roots) {
                if (tag == ebm::BranchTag::Fold) x_fb = root;
                if (want_lower && tag == ebm::BranchTag::Lower) x_fb = root;
                if (!want_lower && tag == ebm::BranchTag::Upper) x_fb = root;
            }
            if (!x_fb && want_lower && fb.lower_degenerate_at_zero) x_fb = 0.0;
            if (!x_fb)
                throw ebm::NoBranch("requested branch absent at lambda = " +
                                    std::to_string(cg.params.lambda));
            const ebm::EigenProblem problem{
                cg.params, *x_fb,
                want_lower ? ebm::BranchTag::Lower : ebm::BranchTag::Upper};
            const ebm::EigenResult res =
                ebm::principal_eigenvalue(problem, eig_n);
            if (!eig_dump.empty())
                ebm::atomic_write(eig_dump, ebm::eigenfunction_csv(res));
            json j;
            j["params"] = params_echo(cg.params);
            j["branch"] = eig_branch;
            j["x_fb"] = *x_fb;
            j["eta1"] = res.eta1;
            j["tau"] = res.tau;
            j["method"] = ebm::method_name(res.method);
            j["residual"] = res.residual;
            j["n"] = eig_n;
            emit(j.dump(2), eig_out);
            return kExitOk;
        }

        if (*cmd_simulate) {
            cs.params.validate();
            resolve_lambda(cs.params, sim_frac);
            const ebm::CriticalValues cv = ebm::compute_critical(cs.params);
            if (sim_theta <= 0.0) sim_theta = 0.02 * (cv.lambda2 - cv.lambda1);
            const ebm::Grid grid = ebm::Grid::uniform(sim_n);

            std::optional<ebm::StationarySolution> init_sol;
            if (sim_init == "ice")
                init_sol = ebm::build_ice_covered(cs.params);
            else if (sim_init == "zero")
                init_sol = std::nullopt;
            else {
                double lam = cs.params.lambda;
                if (sim_init == "lower-minus-theta")
                    lam -= sim_theta;
                else if (sim_init == "lower-plus-theta")
                    lam += sim_theta;
                else if (sim_init != "lower" && sim_init != "upper")
                    throw ebm::InvalidParams("unknown --init " + sim_init);
                const ebm::FreeBoundaries fb =
                    ebm::solve_free_boundaries(cs.params.with_lambda(lam));
                const bool want_upper = sim_init == "upper";
                for (const auto& [tag, root] : fb.roots) {
                    if (tag == ebm::BranchTag::Fold ||
                        (want_upper && tag == ebm::BranchTag::Upper) ||
                        (!want_upper && tag == ebm::BranchTag::Lower))
                        init_sol = ebm::build_free_boundary_solution(
                            cs.params.with_lambda(lam), root);
                }
                if (!init_sol)
                    throw ebm::NoBranch("initial branch absent at lambda = " +
                                        std::to_string(lam));
            }

            ebm::Field u0 =
                init_sol
                    ? ebm::Field::sample(grid,
                                         [&](double x) { return init_sol->u(x); })
                    : ebm::Field::constant(grid, 0.0);
            std::optional<double> slope;
            if (init_sol && init_sol->x_fb && *init_sol->x_fb > 0.0)
                slope = init_sol->du(*init_sol->x_fb);
            const double eps_reg =
                sim_epsreg > 0.0
                    ? sim_epsreg
                    : ebm::default_regularization_width(grid, slope, cs.params.mu);
            const ebm::RegularizedAlbedo reg(cs.params, eps_reg);
            const ebm::Trajectory traj =
                ebm::integrate(u0, cs.params, reg, sim_dt, sim_tfinal, sim_snap);

            ebm::atomic_write(sim_prefix + "_snapshots.csv",
                              ebm::trajectory_csv(traj));
            ebm::atomic_write(sim_prefix + "_fb.csv", ebm::fb_track_csv(traj));
            ebm::atomic_write(sim_prefix + "_diagnostics.csv",
                              ebm::diagnostics_csv(traj));
            json j;
            j["params"] = params_echo(cs.params);
            j["init"] = sim_init;
            j["theta"] = sim_theta;
            j["n"] = sim_n;
            j["dt"] = sim_dt > 0 ? sim_dt : grid.dx;
            j["t_final"] = sim_tfinal;
            j["eps_reg"] = eps_reg;
            j["snapshot_every"] = sim_snap;
            j["snapshots"] = traj.snapshots.size();
            j["blew_up"] = traj.blew_up;
            j["converged"] = traj.converged;
            if (traj.converged) j["converged_time"] = traj.converged_time;
            if (!traj.fb_track.empty() && traj.fb_track.back().x_fb)
                j["final_x_fb"] = *traj.fb_track.back().x_fb;
            ebm::atomic_write(sim_prefix + "_summary.json", j.dump(2));
            std::cout << j.dump(2) << '\n';
            return traj.blew_up ? kExitSolverError : kExitOk;
        }

        if (*cmd_experiment) {
            cx.params.validate();
            if (!exp_lambda_given) resolve_lambda(cx.params, exp_frac);
            ebm::ExperimentConfig config;
            config.params = cx.params;
            config.theta = exp_theta;
            config.delta = exp_delta;
            config.n = exp_n;
            config.dt = exp_dt;
            config.t_final = exp_tfinal;
            config.seed = exp_seed;
            config.archive_prefix = exp_archive;

            ebm::ExperimentReport report;
            if (exp_name == "stability")
                report = ebm::run_stability(config);
            else if (exp_name == "instability")
                report = ebm::run_instability(config);
            else if (exp_name == "eigen-consistency")
                report = ebm::run_eigen_consistency(config);
            else
                throw ebm::InvalidParams("unknown experiment " + exp_name);

            const std::string out_path =
                exp_out.empty() ? "experiment_" + exp_name + ".json" : exp_out;
            ebm::atomic_write(out_path, report.to_json());
            std::cout << report.to_json() << '\n';
            return report.verdict ? kExitOk : kExitGatedFailure;
        }
    } catch (const ebm::InvalidParams& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolverError;
    }
    return kExitBadInput;
}
