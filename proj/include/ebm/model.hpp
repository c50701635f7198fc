#pragma once

#include <string>

#include "ebm/errors.hpp"

namespace ebm {

/// Parameters of the energy-balance problem
///
///   -u'' + omega^2 u = lambda f(u)   on (0,1),   u'(0) = 0, u(1) = 0,
///
/// where f is the discontinuous co-albedo jumping from f0 to 1 at the
/// ice-line temperature mu:
///
///   f(v) = f0 + (1 - f0) H(v - mu),   H(0) = 1.
struct ModelParams {
    double omega{1.0};   ///< absorption coefficient, > 0
    double mu{1.0};      ///< ice-line threshold temperature, > 0
    double f0{0.5};      ///< bare (icy) co-albedo, in (0,1)
    double lambda{1.0};  ///< solar-constant parameter, > 0

    /// Throws InvalidParams naming the violated bound.
    void validate() const;

    /// Copy with a different lambda.
    ModelParams with_lambda(double lam) const {
        ModelParams p = *this;
        p.lambda = lam;
        return p;
    }
};

/// Closed interval of reals; degenerate (lo == hi) off the jump.
struct Interval {
    double lo{};
    double hi{};
    bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Discontinuous co-albedo f(v) with the convention H(0) = 1, so the
/// ice-free set is {v >= mu}.
double coalbedo(const ModelParams& params, double v);

/// Set-valued completion of f: the jump at v = mu is filled with [f0, 1];
/// elsewhere the degenerate interval {f(v)}.
Interval coalbedo_graph(const ModelParams& params, double v);

/// Smooth monotone surrogate for the co-albedo jump: a C1 cubic ramp from
/// f0 to 1 over [mu - epsilon, mu + epsilon].
struct RegularizedAlbedo {
    ModelParams params;
    double epsilon{};  ///< ramp half-width, > 0

    RegularizedAlbedo(const ModelParams& p, double eps);

    /// Ramp value: f0 below mu-epsilon, 1 above mu+epsilon,
    /// f0 + (1-f0)(3t^2 - 2t^3) with t = (v-mu+epsilon)/(2 epsilon) inside.
    double value(double v) const;

    /// Exact primitive of value() vanishing at 0 (used by the discrete
    /// Lyapunov functional).
    double primitive(double v) const;
};

inline double coalbedo_regularized(const RegularizedAlbedo& reg, double v) {
    return reg.value(v);
}

/// Flat JSON {"omega":..., "mu":..., "f0":..., "lambda":...}.
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& json_text);

}  // namespace ebm
