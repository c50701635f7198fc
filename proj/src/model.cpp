#include "ebm/model.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace ebm {

void ModelParams::validate() const {
    if (!std::isfinite(omega) || omega <= 0.0)
        throw InvalidParams("omega must be a positive finite real (got " +
                            std::to_string(omega) + ")");
    if (!std::isfinite(mu) || mu <= 0.0)
        throw InvalidParams("mu must be a positive finite real (got " +
                            std::to_string(mu) + ")");
    if (!std::isfinite(f0) || f0 <= 0.0 || f0 >= 1.0)
        throw InvalidParams("f0 must lie strictly inside (0,1) (got " +
                            std::to_string(f0) + ")");
    if (!std::isfinite(lambda) || lambda <= 0.0)
        throw InvalidParams("lambda must be a positive finite real (got " +
                            std::to_string(lambda) + ")");
}

double coalbedo(const ModelParams& params, double v) {
    return v >= params.mu ? 1.0 : params.f0;
}

Interval coalbedo_graph(const ModelParams& params, double v) {
    if (v == params.mu) return {params.f0, 1.0};
    const double f = coalbedo(params, v);
    return {f, f};
}

RegularizedAlbedo::RegularizedAlbedo(const ModelParams& p, double eps)
    : params(p), epsilon(eps) {
    params.validate();
    if (!std::isfinite(eps) || eps <= 0.0)
        throw InvalidParams("regularization width epsilon must be positive (got " +
                            std::to_string(eps) + ")");
}

double RegularizedAlbedo::value(double v) const {
    const double mu = params.mu;
    const double f0 = params.f0;
    if (v <= mu - epsilon) return f0;
    if (v >= mu + epsilon) return 1.0;
    const double t = (v - mu + epsilon) / (2.0 * epsilon);
    return f0 + (1.0 - f0) * (3.0 * t * t - 2.0 * t * t * t);
}

double RegularizedAlbedo::primitive(double v) const {
    const double mu = params.mu;
    const double f0 = params.f0;
    const double lo = mu - epsilon;
    const double hi = mu + epsilon;
    if (v <= lo) return f0 * v;
    // ramp contribution: 2 eps (1-f0) (t^3 - t^4/2) with t = (v-lo)/(2 eps)
    if (v <= hi) {
        const double t = (v - lo) / (2.0 * epsilon);
        return f0 * v + 2.0 * epsilon * (1.0 - f0) * (t * t * t - 0.5 * t * t * t * t);
    }
    return f0 * v + epsilon * (1.0 - f0) + (v - hi) * (1.0 - f0);
}

std::string params_to_json(const ModelParams& params) {
    nlohmann::json j;
    j["omega"] = params.omega;
    j["mu"] = params.mu;
    j["f0"] = params.f0;
    j["lambda"] = params.lambda;
    return j.dump();
}

ModelParams params_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    ModelParams p;
    p.omega = j.at("omega").get<double>();
    p.mu = j.at("mu").get<double>();
    p.f0 = j.at("f0").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.validate();
    return p;
}

}  // namespace ebm
