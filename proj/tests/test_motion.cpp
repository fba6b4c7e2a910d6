#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "immtrack/motion.hpp"
#include "immtrack/rng.hpp"

using namespace immtrack;

namespace {

StateVec random_state(Rng& rng) {
    StateVec s;
    s << rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0), rng.uniform(-5.0, 5.0),
        rng.uniform(-5.0, 5.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-0.3, 0.3), rng.uniform(5.0, 40.0), rng.uniform(5.0, 40.0);
    return s;
}

}  // namespace

TEST_CASE("cv unit velocity step") {
    StateVec s = StateVec::Zero();
    s(kIdxVx) = 1.0;
    s(kIdxW) = s(kIdxH) = 10.0;
    const StateVec out = transition(ModelId::kCv, s, 1.0);
    CHECK(out(kIdxCx) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out(kIdxCy) == doctest::Approx(0.0));
    CHECK(out(kIdxVx) == 1.0);
    CHECK(out(kIdxW) == 10.0);
    CHECK(out(kIdxH) == 10.0);
}

TEST_CASE("ca quadratic displacement") {
    StateVec s = StateVec::Zero();
    s(kIdxVx) = 2.0;
    s(kIdxAx) = 0.5;
    s(kIdxVy) = -1.0;
    s(kIdxAy) = 0.25;
    const double dt = 2.0;
    const StateVec out = transition(ModelId::kCa, s, dt);
    CHECK(out(kIdxCx) == doctest::Approx(2.0 * dt + 0.5 * 0.5 * dt * dt).epsilon(1e-15));
    CHECK(out(kIdxCy) == doctest::Approx(-1.0 * dt + 0.5 * 0.25 * dt * dt).epsilon(1e-15));
    CHECK(out(kIdxVx) == doctest::Approx(2.0 + 0.5 * dt).epsilon(1e-15));
    CHECK(out(kIdxVy) == doctest::Approx(-1.0 + 0.25 * dt).epsilon(1e-15));
}

TEST_CASE("ct quarter turn hand value") {
    // omega = pi/2 per frame, v = (1,0): displacement (2/pi, 2/pi), velocity
    // rotates onto (0,1).
    StateVec s = StateVec::Zero();
    s(kIdxVx) = 1.0;
    s(kIdxOmega) = std::numbers::pi / 2.0;
    const StateVec out = transition(ModelId::kCt, s, 1.0);
    CHECK(out(kIdxCx) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(out(kIdxCy) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(out(kIdxVx) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(out(kIdxVy) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ct small-omega limit equals cv") {
    // The curvature terms scale as omega*v, so omega = 1e-12 probes the
    // analytic limit; omega = 0 must reproduce CV exactly.
    Rng rng(99u);
    for (int i = 0; i < 100; ++i) {
        StateVec s = random_state(rng);
        s(kIdxOmega) = 1e-12;
        const StateVec ct = transition(ModelId::kCt, s, 1.0);
        const StateVec cv = transition(ModelId::kCv, s, 1.0);
        CHECK((ct - cv).cwiseAbs().maxCoeff() < 1e-9);

        s(kIdxOmega) = 0.0;
        const StateVec ct0 = transition(ModelId::kCt, s, 1.0);
        const StateVec cv0 = transition(ModelId::kCv, s, 1.0);
        CHECK((ct0 - cv0).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("ct preserves speed") {
    Rng rng(12u);
    for (int i = 0; i < 200; ++i) {
        const StateVec s = random_state(rng);
        const StateVec out = transition(ModelId::kCt, s, 1.0);
        const double before = std::hypot(s(kIdxVx), s(kIdxVy));
        const double after = std::hypot(out(kIdxVx), out(kIdxVy));
        CHECK(after == doctest::Approx(before).epsilon(1e-9));
    }
}

TEST_CASE("cv and ca transitions are linear") {
    Rng rng(5u);
    for (ModelId m : {ModelId::kCv, ModelId::kCa}) {
        for (int i = 0; i < 50; ++i) {
            const StateVec a = random_state(rng);
            const StateVec b = random_state(rng);
            const StateVec zero = StateVec::Zero();
            const StateVec lhs = transition(m, a + b, 1.5);
            const StateVec rhs =
                transition(m, a, 1.5) + transition(m, b, 1.5) - transition(m, zero, 1.5);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("extent passes through every model") {
    Rng rng(31u);
    for (ModelId m : {ModelId::kCv, ModelId::kCa, ModelId::kCt}) {
        const StateVec s = random_state(rng);
        const StateVec out = transition(m, s, 1.0);
        CHECK(out(kIdxW) == s(kIdxW));
        CHECK(out(kIdxH) == s(kIdxH));
    }
}

TEST_CASE("transition is deterministic") {
    Rng rng(8u);
    const StateVec s = random_state(rng);
    for (ModelId m : {ModelId::kCv, ModelId::kCa, ModelId::kCt}) {
        const StateVec a = transition(m, s, 1.0);
        const StateVec b = transition(m, s, 1.0);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("process noise symmetric psd") {
    const NoiseConfig cfg;
    for (ModelId m : {ModelId::kCv, ModelId::kCa, ModelId::kCt}) {
        const StateMat q = process_noise(m, 1.0, cfg);
        CHECK((q - q.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<StateMat> es(q);
        CHECK(es.eigenvalues().minCoeff() >= 0.0);
    }
}

TEST_CASE("doubling velocity noise quadruples the driven variances") {
    NoiseConfig base;
    NoiseConfig doubled = base;
    doubled.sigma_cv_vel = 2.0 * base.sigma_cv_vel;
    const StateMat q1 = process_noise(ModelId::kCv, 1.0, base);
    const StateMat q2 = process_noise(ModelId::kCv, 1.0, doubled);
    for (int idx : {kIdxCx, kIdxCy, kIdxVx, kIdxVy}) {
        CHECK(q2(idx, idx) == doctest::Approx(4.0 * q1(idx, idx)).epsilon(1e-12));
    }
    // Components the velocity scale does not drive are untouched.
    CHECK(q2(kIdxW, kIdxW) == doctest::Approx(q1(kIdxW, kIdxW)).epsilon(1e-12));
    CHECK(q2(kIdxH, kIdxH) == doctest::Approx(q1(kIdxH, kIdxH)).epsilon(1e-12));
}

TEST_CASE("measurement projection") {
    StateVec s = StateVec::Zero();
    s(kIdxCx) = 1.0;
    s(kIdxCy) = 2.0;
    s(kIdxW) = 3.0;
    s(kIdxH) = 4.0;
    const Vec4 z = measurement_fn(s);
    CHECK(z(0) == 1.0);
    CHECK(z(1) == 2.0);
    CHECK(z(2) == 3.0);
    CHECK(z(3) == 4.0);

    StateVec t = s;
    t(kIdxVx) = 9.0;
    t(kIdxAy) = -3.0;
    t(kIdxOmega) = 0.5;
    CHECK((measurement_fn(t) - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("model names") {
    CHECK(std::string(model_name(ModelId::kCv)) == "CV");
    CHECK(std::string(model_name(ModelId::kCa)) == "CA");
    CHECK(std::string(model_name(ModelId::kCt)) == "CT");
}
