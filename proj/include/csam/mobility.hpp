#pragma once

#include <cstdint>
#include <vector>

#include "csam/rng.hpp"
#include "csam/scenario.hpp"
#include "csam/sim_time.hpp"

namespace csam {

using VehicleId = std::uint32_t;

enum class Direction { Forward, Backward };

struct RoadLayout {
    double road_length_m = 4000.0;
    double lane_width_m = 3.7;
    int lanes_per_direction = 3;

    static RoadLayout from(const ScenarioConfig& cfg);

    /// Lateral centerline offset. Forward lanes sit at positive y, backward
    /// lanes mirrored at negative y; lane 0 is the outermost (slowest) lane.
    double lane_offset(Direction dir, int lane) const;
    double total_width() const { return 2.0 * lanes_per_direction * lane_width_m; }
    /// Wraps an along-road coordinate into [0, road_length).
    double wrap(double x) const;
};

/// Planar position on the road: x along the road, y lateral.
struct RoadPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Constant-speed vehicle. Position is stored at a reference time and
/// evaluated in closed form, so no fixed mobility tick is needed.
struct Vehicle {
    VehicleId id = 0;
    int lane = 0;
    Direction direction = Direction::Forward;
    double position_m = 0.0;
    double speed_mps = 0.0;
    double lateral_offset_m = 0.0;

    /// Signed along-road velocity.
    double velocity() const { return direction == Direction::Forward ? speed_mps : -speed_mps; }
    double heading_rad() const;
    RoadPoint point() const { return {position_m, lateral_offset_m}; }
};

std::vector<Vehicle> spawn_vehicles(const ScenarioConfig& cfg, Rng& rng);

/// Number of vehicles for the configured density and road length.
int vehicle_count(const ScenarioConfig& cfg);

Vehicle advance(const Vehicle& v, double dt_s, const RoadLayout& road);
void advance(std::vector<Vehicle>& vehicles, double dt_s, const RoadLayout& road);

/// Euclidean distance with the shortest (wrap-aware) longitudinal separation.
double distance(const RoadPoint& a, const RoadPoint& b, const RoadLayout& road);
double distance(const Vehicle& a, const Vehicle& b, const RoadLayout& road);

/// Shortest signed longitudinal offset from a to b, in (-L/2, L/2].
double longitudinal_offset(double from_x, double to_x, const RoadLayout& road);

}  // namespace csam
