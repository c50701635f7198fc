#include "ebm/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace ebm {

namespace {

int branch_order(BranchTag t) {
    switch (t) {
        case BranchTag::IceCovered: return 0;
        case BranchTag::Fold: return 1;
        case BranchTag::Lower: return 2;
        case BranchTag::Upper: return 3;
    }
    return 4;
}

bool close(double a, double b) {
    return std::abs(a - b) <= 1e-14 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

BifurcationCurve trace(const ModelParams& family, double lambda_min,
                       double lambda_max, int steps, bool refine_fold) {
    if (!(lambda_min > 0.0) || !(lambda_min < lambda_max))
        throw InvalidParams("need 0 < lambda_min < lambda_max");
    if (steps < 2) throw InvalidParams("need at least 2 sweep points");

    BifurcationCurve curve;
    curve.family = family;
    curve.critical = compute_critical(family.with_lambda(lambda_min));

    std::vector<double> lambdas;
    lambdas.reserve(steps + 24);
    for (int i = 0; i < steps; ++i)
        lambdas.push_back(lambda_min +
                          (lambda_max - lambda_min) * i / (steps - 1));
    for (double crit : {curve.critical.lambda1, curve.critical.lambda2})
        if (crit >= lambda_min && crit <= lambda_max) lambdas.push_back(crit);
    if (refine_fold) {
        for (int k = 1; k <= 20; ++k) {
            const double lam = curve.critical.lambda1 * (1.0 + std::ldexp(1.0, -k));
            if (lam >= lambda_min && lam <= lambda_max) lambdas.push_back(lam);
        }
    }
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end(), close),
                  lambdas.end());

    for (double lam : lambdas) {
        const ModelParams p = family.with_lambda(lam);
        if (lam < curve.critical.lambda2) {
            BifurcationRecord rec{lam, BranchTag::IceCovered, 0.0, std::nullopt,
                                  "ok"};
            try {
                rec.sup_norm = build_ice_covered(p).sup_norm();
            } catch (const std::exception& e) {
                rec.sup_norm = std::numeric_limits<double>::quiet_NaN();
                rec.status = std::string("error: ") + e.what();
            }
            curve.records.push_back(rec);
        }
        try {
            const FreeBoundaries fb = solve_free_boundaries(p);
            for (const auto& [tag, root] : fb.roots) {
                BifurcationRecord rec{lam, tag, 0.0, root, "ok"};
                try {
                    rec.sup_norm =
                        build_free_boundary_solution(p, root).sup_norm();
                } catch (const std::exception& e) {
                    rec.sup_norm = std::numeric_limits<double>::quiet_NaN();
                    rec.status = std::string("error: ") + e.what();
                }
                curve.records.push_back(rec);
            }
            if (fb.lower_degenerate_at_zero) {
                // x_fb = 0: the warm piece vanishes and the maximum equals
                // mu exactly, independent of the parameters.
                curve.records.push_back({lam, BranchTag::Lower, family.mu, 0.0,
                                         "degenerate-endpoint"});
            }
        } catch (const std::exception& e) {
            curve.records.push_back({lam, BranchTag::Lower,
                                     std::numeric_limits<double>::quiet_NaN(),
                                     std::nullopt,
                                     std::string("error: ") + e.what()});
        }
    }

    std::sort(curve.records.begin(), curve.records.end(),
              [](const BifurcationRecord& a, const BifurcationRecord& b) {
                  if (a.lambda != b.lambda) return a.lambda < b.lambda;
                  return branch_order(a.branch) < branch_order(b.branch);
              });
    return curve;
}

SShapeReport verify_s_shape(const BifurcationCurve& curve) {
    SShapeReport rep;
    std::vector<const BifurcationRecord*> star, lower, upper;
    const BifurcationRecord* fold = nullptr;
    for (const auto& rec : curve.records) {
        if (rec.status.rfind("error", 0) == 0) {
            rep.violations.push_back("record error at lambda " +
                                     std::to_string(rec.lambda) + ": " +
                                     rec.status);
            continue;
        }
        switch (rec.branch) {
            case BranchTag::IceCovered: star.push_back(&rec); break;
            case BranchTag::Lower: lower.push_back(&rec); break;
            case BranchTag::Upper: upper.push_back(&rec); break;
            case BranchTag::Fold: fold = &rec; break;
        }
    }

    const auto check_monotone = [&](std::vector<const BifurcationRecord*> recs,
                                    bool increasing, const std::string& name) {
        for (size_t i = 1; i < recs.size(); ++i) {
            const double prev = recs[i - 1]->sup_norm;
            const double cur = recs[i]->sup_norm;
            const bool ok = increasing ? cur > prev : cur < prev;
            if (!ok) {
                std::ostringstream os;
                os << name << " not strictly " << (increasing ? "increasing" : "decreasing")
                   << " between lambda " << recs[i - 1]->lambda << " and "
                   << recs[i]->lambda;
                rep.violations.push_back(os.str());
            }
        }
    };

    // The fold record heads both free-boundary branches: including it makes
    // the joint continuity part of the monotonicity sweep.
    auto lower_seq = lower;
    auto upper_seq = upper;
    if (fold) {
        lower_seq.insert(lower_seq.begin(), fold);
        upper_seq.insert(upper_seq.begin(), fold);
        rep.fold_sup_norm = fold->sup_norm;
        if (!(rep.fold_sup_norm > curve.family.mu))
            rep.violations.push_back("fold value does not exceed mu");
    } else {
        rep.violations.push_back("no Fold record: lambda1 not inside the sweep");
    }
    check_monotone(star, true, "ice-covered line");
    check_monotone(lower_seq, false, "Lower branch");
    check_monotone(upper_seq, true, "Upper branch");

    if (!lower.empty()) {
        const auto* last = lower.back();
        rep.lower_endpoint_sup = last->sup_norm;
        const bool at_lambda2 = std::abs(last->lambda - curve.critical.lambda2) <=
                                1e-10 * curve.critical.lambda2;
        if (!at_lambda2)
            rep.violations.push_back(
                "Lower branch does not extend to lambda2 inside the sweep");
        else if (std::abs(last->sup_norm - curve.family.mu) > 1e-9)
            rep.violations.push_back(
                "Lower branch does not meet mu at lambda2: got " +
                std::to_string(last->sup_norm));
    } else {
        rep.violations.push_back("no Lower-branch records in the sweep");
    }

    // gap between the free-boundary branches at shared lambdas, sorted by
    // distance from the fold (reported; the decay rate is a heuristic)
    size_t li = 0;
    for (const auto* up : upper) {
        while (li < lower.size() && lower[li]->lambda < up->lambda) ++li;
        if (li < lower.size() && close(lower[li]->lambda, up->lambda)) {
            rep.fold_gap_h.push_back(up->lambda - curve.critical.lambda1);
            rep.fold_gap.push_back(up->sup_norm - lower[li]->sup_norm);
        }
    }

    rep.pass = rep.violations.empty();
    return rep;
}

std::string SShapeReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass;
    j["violations"] = violations;
    j["fold_sup_norm"] = fold_sup_norm;
    j["lower_endpoint_sup"] = lower_endpoint_sup;
    j["fold_gap_h"] = fold_gap_h;
    j["fold_gap"] = fold_gap;
    return j.dump(2);
}

}  // namespace ebm
