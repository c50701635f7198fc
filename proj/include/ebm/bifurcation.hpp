#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ebm/stationary.hpp"

namespace ebm {

/// One point of the (lambda, sup-norm) diagram.
struct BifurcationRecord {
    double lambda{};
    BranchTag branch{};
    double sup_norm{};
    std::optional<double> x_fb;
    std::string status{"ok"};  ///< "ok", "degenerate-endpoint", or an error marker
};

struct BifurcationCurve {
    std::vector<BifurcationRecord> records;  ///< sorted by (lambda, branch)
    CriticalValues critical;
    ModelParams family;  ///< lambda field meaningless here
};

/// Sweep lambda over a uniform grid on [lambda_min, lambda_max] with
/// lambda1 and lambda2 inserted exactly (when inside the window), emitting
/// one record per existing branch. refine_fold adds lambda1 (1 + 2^-k),
/// k = 1..20, to resolve the square-root fold. Failed points are recorded
/// with an error marker, never dropped.
BifurcationCurve trace(const ModelParams& family, double lambda_min,
                       double lambda_max, int steps, bool refine_fold = false);

/// Monotonicity/continuity audit of a traced curve.
struct SShapeReport {
    bool pass{false};
    std::vector<std::string> violations;  ///< offending lambda pairs, if any
    double fold_sup_norm{};               ///< value at lambda1 (exceeds mu)
    double lower_endpoint_sup{};          ///< Lower value at lambda2 (should be mu)
    std::vector<double> fold_gap_h;       ///< h samples for the fold-rate probe
    std::vector<double> fold_gap;         ///< gamma_upper - gamma_lower at lambda1+h
    std::string to_json() const;
};

/// Asserts: ice-covered line strictly increasing, Lower strictly
/// decreasing, Upper strictly increasing, Lower meets Upper at lambda1 and
/// the value mu at lambda2. The fold-gap decay is reported, not gated.
SShapeReport verify_s_shape(const BifurcationCurve& curve);

}  // namespace ebm
