#pragma once

#include <string>
#include <vector>

#include "ebm/bifurcation.hpp"
#include "ebm/dynamics.hpp"
#include "ebm/spectral.hpp"
#include "ebm/stationary.hpp"

namespace ebm {

/// 17 significant digits: round-trip safe for binary64.
std::string format_double(double v);

/// Write via a temp file + rename so concurrent writers never interleave.
void atomic_write(const std::string& path, const std::string& content);

/// Profile CSV "x,u,uprime,piece" at the requested resolution; mirror
/// duplicates the profile to x in [-1,0) by even reflection.
std::string profile_csv(const StationarySolution& sol, int resolution,
                        bool mirror = false);

/// JSON header for a profile: branch, x_fb, sup_norm, params.
std::string profile_header_json(const StationarySolution& sol);

/// "lambda,branch,sup_norm,x_fb,status" rows.
std::string curve_csv(const BifurcationCurve& curve);

/// "omega,lambda,branch,x_fb,eta1,tau,method,residual,status" rows.
std::string sign_scan_csv(const std::vector<SignScanRow>& rows);

/// "x,U" rows of an eigenfunction.
std::string eigenfunction_csv(const EigenResult& result);

/// Long-format snapshots "t,x,u".
std::string trajectory_csv(const Trajectory& traj);

/// "t,n_crossings,x_fb" (x_fb empty unless exactly one crossing).
std::string fb_track_csv(const Trajectory& traj);

/// "t,sup,l2,h1semi,increment_inf,fb_margin".
std::string diagnostics_csv(const Trajectory& traj);

}  // namespace ebm
