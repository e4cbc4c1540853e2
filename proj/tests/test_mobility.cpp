#include <doctest.h>

#include <cmath>
#include <map>

#include "csam/mobility.hpp"

using namespace csam;

namespace {
ScenarioConfig road(double length_m, double density) {
    ScenarioConfig c;
    c.road_length_m = length_m;
    c.vehicle_density_per_km = density;
    return c;
}
}  // namespace

TEST_CASE("vehicle counts follow density x length") {
    CHECK(vehicle_count(road(4000, 125)) == 500);
    CHECK(vehicle_count(road(1000, 25)) == 25);
    CHECK(vehicle_count(road(1000, 0)) == 0);
}

TEST_CASE("100 vehicles over 6 lanes spread 16 or 17 per lane") {
    Rng rng(3);
    const auto vs = spawn_vehicles(road(4000, 25), rng);
    REQUIRE(vs.size() == 100);
    std::map<std::pair<int, int>, int> per_lane;
    for (const auto& v : vs) ++per_lane[{static_cast<int>(v.direction), v.lane}];
    REQUIRE(per_lane.size() == 6);
    int total = 0;
    for (const auto& [lane, n] : per_lane) {
        CHECK((n == 16 || n == 17));
        total += n;
    }
    CHECK(total == 100);
    for (const auto& v : vs) {
        CHECK(v.position_m >= 0.0);
        CHECK(v.position_m < 4000.0);
        CHECK(v.speed_mps == doctest::Approx(std::vector<double>{17, 18, 19}[static_cast<std::size_t>(v.lane)]));
    }
}

TEST_CASE("spawning is deterministic per seed") {
    Rng a(5), b(5), c(6);
    const auto va = spawn_vehicles(road(1000, 25), a);
    const auto vb = spawn_vehicles(road(1000, 25), b);
    const auto vc = spawn_vehicles(road(1000, 25), c);
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i].position_m == vb[i].position_m);
    CHECK(va[0].position_m != vc[0].position_m);
}

TEST_CASE("constant-speed advance with wrap-around") {
    const RoadLayout layout = RoadLayout::from(road(4000, 0));
    Vehicle v;
    v.speed_mps = 17;
    v.position_m = 100;
    CHECK(advance(v, 1.0, layout).position_m == doctest::Approx(117));
    v.speed_mps = 18;
    v.position_m = 3999;
    CHECK(advance(v, 1.0, layout).position_m == doctest::Approx(17));
    v.direction = Direction::Backward;
    v.speed_mps = 19;
    v.position_m = 10;
    CHECK(advance(v, 1.0, layout).position_m == doctest::Approx(3991));
}

TEST_CASE("wrap-aware euclidean distance") {
    const RoadLayout layout = RoadLayout::from(road(4000, 0));
    CHECK(distance(RoadPoint{12, 3}, RoadPoint{12, 3}, layout) == 0.0);
    CHECK(distance(RoadPoint{0, 1.85}, RoadPoint{3990, 1.85}, layout) == doctest::Approx(10.0));
    const double oracle = std::sqrt(30.0 * 30.0 + 4.0 * 4.0);
    CHECK(distance(RoadPoint{100, 0}, RoadPoint{130, 4}, layout) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(longitudinal_offset(3990, 10, layout) == doctest::Approx(20));
    CHECK(longitudinal_offset(10, 3990, layout) == doctest::Approx(-20));
}

TEST_CASE("lane offsets mirror across the median") {
    const RoadLayout layout = RoadLayout::from(road(4000, 0));
    for (int lane = 0; lane < 3; ++lane) {
        CHECK(layout.lane_offset(Direction::Forward, lane) > 0.0);
        CHECK(layout.lane_offset(Direction::Backward, lane) == -layout.lane_offset(Direction::Forward, lane));
    }
}
