#include "ebm/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ebm {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

std::string profile_csv(const StationarySolution& sol, int resolution,
                        bool mirror) {
    if (resolution < 2) throw InvalidParams("profile needs at least 2 points");
    std::ostringstream os;
    os << "x,u,uprime,piece\n";
    const auto row = [&](double x) {
        const double ax = std::abs(x);
        const bool warm = sol.x_fb && ax <= *sol.x_fb;
        const double up = sol.du(ax) * (x < 0 ? -1.0 : 1.0);
        os << format_double(x) << ',' << format_double(sol.u(ax)) << ','
           << format_double(up) << ',' << (warm ? "ice_free" : "ice") << '\n';
    };
    if (mirror)
        for (int i = resolution - 1; i > 0; --i)
            row(-static_cast<double>(i) / (resolution - 1));
    for (int i = 0; i < resolution; ++i)
        row(static_cast<double>(i) / (resolution - 1));
    return os.str();
}

std::string profile_header_json(const StationarySolution& sol) {
    nlohmann::json j;
    j["branch"] = branch_name(sol.branch);
    if (sol.x_fb)
        j["x_fb"] = *sol.x_fb;
    else
        j["x_fb"] = nullptr;
    j["sup_norm"] = sol.sup_norm();
    j["params"] = {{"omega", sol.params.omega},
                   {"mu", sol.params.mu},
                   {"f0", sol.params.f0},
                   {"lambda", sol.params.lambda}};
    return j.dump(2);
}

std::string curve_csv(const BifurcationCurve& curve) {
    std::ostringstream os;
    os << "lambda,branch,sup_norm,x_fb,status\n";
    for (const auto& rec : curve.records) {
        os << format_double(rec.lambda) << ',' << branch_name(rec.branch) << ','
           << format_double(rec.sup_norm) << ',';
        if (rec.x_fb) os << format_double(*rec.x_fb);
        os << ',' << rec.status << '\n';
    }
    return os.str();
}

std::string sign_scan_csv(const std::vector<SignScanRow>& rows) {
    std::ostringstream os;
    os << "omega,lambda,branch,x_fb,eta1,tau,method,residual,status\n";
    for (const auto& r : rows) {
        os << format_double(r.omega) << ',' << format_double(r.lambda) << ','
           << branch_name(r.branch) << ',' << format_double(r.x_fb) << ','
           << format_double(r.eta1) << ',' << format_double(r.tau) << ','
           << method_name(r.method) << ',' << format_double(r.residual) << ','
           << r.status << '\n';
    }
    return os.str();
}

std::string eigenfunction_csv(const EigenResult& result) {
    std::ostringstream os;
    os << "x,U\n";
    for (size_t i = 0; i < result.xs.size(); ++i)
        os << format_double(result.xs[i]) << ',' << format_double(result.U[i])
           << '\n';
    return os.str();
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,x,u\n";
    for (const auto& snap : traj.snapshots)
        for (int j = 0; j <= snap.grid.n; ++j)
            os << format_double(snap.time) << ',' << format_double(snap.grid.x(j))
               << ',' << format_double(snap.values[j]) << '\n';
    return os.str();
}

std::string fb_track_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,n_crossings,x_fb\n";
    for (const auto& pt : traj.fb_track) {
        os << format_double(pt.time) << ',' << pt.crossings.size() << ',';
        if (pt.x_fb) os << format_double(*pt.x_fb);
        os << '\n';
    }
    return os.str();
}

std::string diagnostics_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,sup,l2,h1semi,increment_inf,fb_margin\n";
    for (const auto& d : traj.diagnostics)
        os << format_double(d.time) << ',' << format_double(d.sup) << ','
           << format_double(d.l2) << ',' << format_double(d.h1semi) << ','
           << format_double(d.increment_inf) << ',' << format_double(d.fb_margin)
           << '\n';
    return os.str();
}

}  // namespace ebm
