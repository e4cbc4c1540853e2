#include "csam/mobility.hpp"

#include <cmath>
#include <numbers>

namespace csam {

RoadLayout RoadLayout::from(const ScenarioConfig& cfg) {
    return {cfg.road_length_m, cfg.lane_width_m, cfg.lanes_per_direction};
}

double RoadLayout::lane_offset(Direction dir, int lane) const {
    double y = (lanes_per_direction - lane - 0.5) * lane_width_m;
    return dir == Direction::Forward ? y : -y;
}

double RoadLayout::wrap(double x) const {
    double r = std::fmod(x, road_length_m);
    if (r < 0.0) r += road_length_m;
    // fmod of a tiny negative can round up to exactly L
    if (r >= road_length_m) r = 0.0;
    return r;
}

double Vehicle::heading_rad() const { return direction == Direction::Forward ? 0.0 : std::numbers::pi; }

int vehicle_count(const ScenarioConfig& cfg) {
    return static_cast<int>(std::lround(cfg.vehicle_density_per_km * cfg.road_length_m / 1000.0));
}

std::vector<Vehicle> spawn_vehicles(const ScenarioConfig& cfg, Rng& rng) {
    const RoadLayout road = RoadLayout::from(cfg);
    const int n = vehicle_count(cfg);
    const int lanes_total = 2 * cfg.lanes_per_direction;
    std::vector<Vehicle> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Round-robin lane assignment; the first (n mod lanes) lanes get one extra vehicle.
        int slot = i % lanes_total;
        Vehicle v;
        v.id = static_cast<VehicleId>(i);
        v.direction = slot < cfg.lanes_per_direction ? Direction::Forward : Direction::Backward;
        v.lane = slot % cfg.lanes_per_direction;
        v.speed_mps = cfg.lane_speeds_mps[static_cast<std::size_t>(v.lane)];
        v.lateral_offset_m = road.lane_offset(v.direction, v.lane);
        v.position_m = road.wrap(rng.uniform(0.0, cfg.road_length_m));
        out.push_back(v);
    }
    return out;
}

Vehicle advance(const Vehicle& v, double dt_s, const RoadLayout& road) {
    Vehicle out = v;
    out.position_m = road.wrap(v.position_m + v.velocity() * dt_s);
    return out;
}

void advance(std::vector<Vehicle>& vehicles, double dt_s, const RoadLayout& road) {
    for (auto& v : vehicles) v = advance(v, dt_s, road);
}

double longitudinal_offset(double from_x, double to_x, const RoadLayout& road) {
    double d = std::fmod(to_x - from_x, road.road_length_m);
    const double half = road.road_length_m / 2.0;
    if (d > half) d -= road.road_length_m;
    if (d <= -half) d += road.road_length_m;
    return d;
}

double distance(const RoadPoint& a, const RoadPoint& b, const RoadLayout& road) {
    double dx = longitudinal_offset(a.x, b.x, road);
    double dy = b.y - a.y;
    return std::hypot(dx, dy);
}

double distance(const Vehicle& a, const Vehicle& b, const RoadLayout& road) {
    return distance(a.point(), b.point(), road);
}

}  // namespace csam
