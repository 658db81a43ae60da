#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "adsim/plant.hpp"

using namespace adsim;

namespace {

// 1-D cart: x' = v, v' = p, v clamped to [0, 10].
TruthPlant cart_plant() {
    TruthPlant p;
    p.state_dim = 2;
    p.control_dim = 1;
    p.drift = [](double, const Vec& x, Vec& dx) { dx[0] = x[1]; };
    p.control_term = [](double, const Vec&, const Vec& u, Vec& dx) { dx[1] += u[0]; };
    p.clamp = [](Vec& x) {
        if (x[1] < 0.0) x[1] = 0.0;
        if (x[1] > 10.0) x[1] = 10.0;
    };
    return p;
}

}  // namespace

TEST_CASE("session integrates lazily and interpolates between nodes") {
    TruthSession s(cart_plant(), {0.0, 1.0}, 0.0, 0.01, 1);
    s.advance_to(1.0);
    CHECK(s.frontier() == Catch::Approx(1.0));
    Vec x = s.state_at(1.0);
    CHECK(x[0] == Catch::Approx(1.0).epsilon(1e-9));  // x = v t with v constant
    CHECK(x[1] == Catch::Approx(1.0));
    // between nodes: linear interpolation of a linear motion is exact
    CHECK(s.state_at(0.505)[0] == Catch::Approx(0.505).epsilon(1e-9));
    // advancing backwards is a no-op
    s.advance_to(0.5);
    CHECK(s.frontier() == Catch::Approx(1.0));
}

TEST_CASE("controls hold between actuations and clamping enforces bounds") {
    TruthSession s(cart_plant(), {0.0, 0.0}, 0.0, 0.01, 1);
    s.set_control({2.0});
    s.advance_to(2.0);
    CHECK(s.state_at(2.0)[1] == Catch::Approx(4.0));  // v = a t
    s.set_control({100.0});
    s.advance_to(3.0);
    CHECK(s.state_at(3.0)[1] == Catch::Approx(10.0));  // clamped
    s.set_control({-100.0});
    s.advance_to(4.0);
    CHECK(s.state_at(4.0)[1] == Catch::Approx(0.0));  // clamped below
}

TEST_CASE("disturbance is bounded, seeded, and reproducible") {
    TruthPlant p = cart_plant();
    p.disturbance_amplitude = {0.0, 0.5};

    TruthSession a(p, {0.0, 5.0}, 0.0, 0.01, 99);
    TruthSession b(p, {0.0, 5.0}, 0.0, 0.01, 99);
    TruthSession c(p, {0.0, 5.0}, 0.0, 0.01, 100);
    a.advance_to(1.0);
    b.advance_to(1.0);
    c.advance_to(1.0);
    CHECK(a.state_at(1.0) == b.state_at(1.0));
    CHECK(a.state_at(1.0) != c.state_at(1.0));
    // |v' deviation| <= 0.5, so over 1 s the speed moves at most 0.5
    CHECK(std::abs(a.state_at(1.0)[1] - 5.0) <= 0.5 + 1e-9);
}

TEST_CASE("trajectory queries outside the integrated range are errors") {
    TruthSession s(cart_plant(), {0.0, 1.0}, 0.0, 0.01, 1);
    s.advance_to(0.5);
    CHECK_THROWS_AS(s.state_at(0.7), Error);
    CHECK_THROWS_AS(TruthSession(cart_plant(), {0.0}, 0.0, 0.01, 1), DimensionError);
}
