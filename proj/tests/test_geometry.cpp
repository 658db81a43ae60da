#include <catch2/catch_amalgamated.hpp>

#include "adsim/geometry.hpp"

using namespace adsim;

TEST_CASE("distance is the weighted Euclidean metric") {
    CHECK(distance({0.0, 0.0}, {3.0, 4.0}) == Catch::Approx(5.0));
    // weights (4, 1): sqrt(4*1 + 1*4) = sqrt(8)
    MetricSpec m{{4.0, 1.0}};
    CHECK(distance({0.0, 0.0}, {1.0, 2.0}, m) == Catch::Approx(std::sqrt(8.0)));
    CHECK(distance({1.5}, {1.5}) == 0.0);
}

TEST_CASE("distance reports both dimensions on mismatch") {
    try {
        distance({0.0, 0.0}, {1.0});
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        CHECK(e.expected == 2);
        CHECK(e.got == 1);
        CHECK(std::string(e.what()).find("2") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("box membership with signed margins") {
    Zone b = Zone::box({0.0, 0.0}, {10.0, 4.0});
    CHECK(zone_contains(b, {1.0, 2.0}));
    CHECK(zone_contains(b, {1.0, 2.0}, 0.999));
    CHECK(zone_contains(b, {1.0, 2.0}, 1.0));       // depth exactly 1
    CHECK_FALSE(zone_contains(b, {1.0, 2.0}, 1.001));
    CHECK(zone_contains(b, {0.0, 0.0}));            // boundary is inside at margin 0
    CHECK_FALSE(zone_contains(b, {-0.5, 2.0}));
    CHECK(zone_contains(b, {-0.5, 2.0}, -0.5));     // grown by 0.5 reaches it
    CHECK_FALSE(zone_contains(b, {-0.5, 2.0}, -0.4));
    // outside off a corner: Euclidean distance to the box
    CHECK(zone_contains(b, {-3.0, -4.0}, -5.0));
    CHECK_FALSE(zone_contains(b, {-3.0, -4.0}, -4.9));
}

TEST_CASE("box margins respect metric weights") {
    // weight 4 doubles the metric length of the first axis
    MetricSpec m{{4.0, 1.0}};
    Zone b = Zone::box({0.0, 0.0}, {10.0, 10.0});
    CHECK(zone_contains(b, {1.0, 5.0}, 2.0, m));    // face distance 1 * sqrt(4) = 2
    CHECK_FALSE(zone_contains(b, {1.0, 5.0}, 2.1, m));
}

TEST_CASE("ball membership") {
    Zone s = Zone::ball({0.0, 0.0}, 2.0);
    CHECK(zone_contains(s, {1.0, 0.0}, 1.0));
    CHECK_FALSE(zone_contains(s, {1.0, 0.0}, 1.1));
    CHECK(zone_contains(s, {3.0, 0.0}, -1.0));
    CHECK_FALSE(zone_contains(s, {3.0, 0.0}, -0.9));
}

TEST_CASE("union and intersection margins are conservative, growth is not lost") {
    Zone u = Zone::any_of({Zone::box({0.0}, {2.0}), Zone::box({1.0}, {3.0})});
    CHECK(zone_contains(u, {1.5}));
    // true depth in [0,3] is 1.5, but the conservative answer is the best
    // child depth, 0.5
    CHECK(zone_contains(u, {1.5}, 0.4));
    CHECK_FALSE(zone_contains(u, {1.5}, 0.6));
    // growth distributes exactly over unions
    CHECK(zone_contains(u, {3.5}, -0.5));
    CHECK_FALSE(zone_contains(u, {3.5}, -0.4));

    Zone i = Zone::all_of({Zone::box({0.0}, {2.0}), Zone::box({1.0}, {3.0})});
    CHECK(zone_contains(i, {1.5}));
    CHECK(zone_contains(i, {1.5}, 0.5));
    CHECK_FALSE(zone_contains(i, {1.5}, 0.6));
    CHECK_FALSE(zone_contains(i, {0.5}));
    CHECK(zone_contains(i, {0.5}, -0.5));
}

TEST_CASE("complement flips the margin") {
    Zone c = Zone::outside(Zone::ball({0.0, 0.0}, 1.0));
    CHECK(zone_contains(c, {2.0, 0.0}));
    CHECK(zone_contains(c, {2.0, 0.0}, 1.0));
    CHECK_FALSE(zone_contains(c, {2.0, 0.0}, 1.1));
    CHECK_FALSE(zone_contains(c, {0.5, 0.0}));
    CHECK(zone_contains(c, {0.95, 0.0}, -0.1));  // within 0.1 of the complement
}

TEST_CASE("empty union is the empty zone") {
    Zone u = Zone::any_of({});
    CHECK_FALSE(zone_contains(u, {0.0}));
    Zone i = Zone::all_of({});
    CHECK_FALSE(zone_contains(i, {0.0}));
}

TEST_CASE("zone bounds") {
    auto b = zone_bounds(Zone::box({0.0, 1.0}, {2.0, 3.0}));
    REQUIRE(b);
    CHECK(b->lo == Vec{0.0, 1.0});
    CHECK(b->hi == Vec{2.0, 3.0});

    MetricSpec m{{4.0, 1.0}};
    auto s = zone_bounds(Zone::ball({0.0, 0.0}, 2.0), m);
    REQUIRE(s);
    CHECK(s->lo[0] == Catch::Approx(-1.0));  // radius 2 / sqrt(4)
    CHECK(s->hi[1] == Catch::Approx(2.0));

    auto u = zone_bounds(Zone::any_of({Zone::box({0.0}, {1.0}), Zone::box({5.0}, {6.0})}));
    REQUIRE(u);
    CHECK(u->lo[0] == 0.0);
    CHECK(u->hi[0] == 6.0);

    CHECK_FALSE(zone_bounds(Zone::outside(Zone::ball({0.0}, 1.0))));
}

TEST_CASE("degenerate box constructions are rejected") {
    CHECK_THROWS_AS(Zone::box({1.0}, {0.0}), ConfigError);
    CHECK_THROWS_AS(Zone::ball({0.0}, -1.0), ConfigError);
}
