#include <doctest.h>

#include <cmath>
#include <random>

#include "ebm/model.hpp"

using namespace ebm;

TEST_CASE("coalbedo jumps at mu with the right-continuous convention") {
    ModelParams p{1.0, 1.0, 0.5, 1.0};
    CHECK(coalbedo(p, 0.3) == 0.5);
    CHECK(coalbedo(p, 1.0) == 1.0);  // value AT the threshold is ice-free
    ModelParams q{1.0, 2.0, 0.25, 1.0};
    CHECK(coalbedo(q, 3.0) == 1.0);
}

TEST_CASE("coalbedo graph fills the jump with [f0, 1]") {
    ModelParams p{1.0, 1.0, 0.5, 1.0};
    const Interval at_jump = coalbedo_graph(p, 1.0);
    CHECK(at_jump.lo == 0.5);
    CHECK(at_jump.hi == 1.0);
    const Interval below = coalbedo_graph(p, 0.0);
    CHECK(below.lo == 0.5);
    CHECK(below.hi == 0.5);
    const Interval above = coalbedo_graph(p, 2.0);
    CHECK(above.lo == 1.0);
    CHECK(above.hi == 1.0);
    // the graph always contains the pointwise value
    for (double v : {0.0, 0.5, 1.0, 1.5}) {
        CHECK(coalbedo_graph(p, v).contains(coalbedo(p, v)));
    }
}

TEST_CASE("regularized ramp endpoints and midpoint") {
    ModelParams p{1.0, 1.0, 0.5, 1.0};
    const RegularizedAlbedo reg(p, 0.05);
    CHECK(reg.value(p.mu - reg.epsilon) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(reg.value(p.mu + reg.epsilon) == doctest::Approx(1.0).epsilon(1e-15));
    // midpoint of the symmetric cubic ramp: (f0 + 1) / 2
    CHECK(reg.value(p.mu) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(RegularizedAlbedo(p, 0.0), InvalidParams);
    CHECK_THROWS_AS(RegularizedAlbedo(p, -1.0), InvalidParams);
}

TEST_CASE("regularized ramp is monotone, bounded, and exact off the ramp") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dv(-2.0, 4.0);
    ModelParams p{1.0, 1.0, 0.3, 1.0};
    const RegularizedAlbedo reg(p, 0.2);
    for (int i = 0; i < 500; ++i) {
        double a = dv(rng), b = dv(rng);
        if (a > b) std::swap(a, b);
        const double fa = reg.value(a), fb = reg.value(b);
        CHECK(fa <= fb);
        CHECK(fa >= p.f0);
        CHECK(fb <= 1.0);
        if (std::abs(a - p.mu) > reg.epsilon) CHECK(fa == coalbedo(p, a));
    }
}

TEST_CASE("primitive differentiates back to the ramp") {
    ModelParams p{1.0, 1.0, 0.4, 1.0};
    const RegularizedAlbedo reg(p, 0.1);
    const double h = 1e-6;
    for (double v : {-0.5, 0.89, 0.95, 1.0, 1.05, 1.11, 2.0}) {
        const double deriv = (reg.primitive(v + h) - reg.primitive(v - h)) / (2 * h);
        CHECK(deriv == doctest::Approx(reg.value(v)).epsilon(1e-6));
    }
    CHECK(reg.primitive(0.0) == 0.0);
}

TEST_CASE("parameter validation names the violated bound") {
    CHECK_THROWS_AS((ModelParams{-1.0, 1.0, 0.5, 1.0}.validate()), InvalidParams);
    CHECK_THROWS_AS((ModelParams{1.0, 0.0, 0.5, 1.0}.validate()), InvalidParams);
    CHECK_THROWS_AS((ModelParams{1.0, 1.0, 0.0, 1.0}.validate()), InvalidParams);
    CHECK_THROWS_AS((ModelParams{1.0, 1.0, 1.0, 1.0}.validate()), InvalidParams);
    CHECK_THROWS_AS((ModelParams{1.0, 1.0, 0.5, -2.0}.validate()), InvalidParams);
    try {
        ModelParams{1.0, 1.0, 1.5, 1.0}.validate();
        CHECK(false);
    } catch (const InvalidParams& e) {
        CHECK(std::string(e.what()).find("f0") != std::string::npos);
    }
    CHECK_NOTHROW((ModelParams{1.0, 1.0, 0.5, 1.0}.validate()));
}

TEST_CASE("params JSON round trip") {
    ModelParams p{0.7, 1.3, 0.25, 4.75};
    const ModelParams q = params_from_json(params_to_json(p));
    CHECK(q.omega == p.omega);
    CHECK(q.mu == p.mu);
    CHECK(q.f0 == p.f0);
    CHECK(q.lambda == p.lambda);
    CHECK_THROWS_AS(params_from_json(R"({"omega":1,"mu":1,"f0":2,"lambda":1})"),
                    InvalidParams);
}
