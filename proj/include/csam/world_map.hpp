#pragma once

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "csam/codec.hpp"
#include "csam/mobility.hpp"

namespace csam {

enum class ObjectKind { Known, Unknown };

/// Ground-truth entity. Every vehicle is a Known car; unknown objects are
/// static obstacles whose occupancy is described by cubes.
struct WorldObject {
    ObjectId id = 0;
    ObjectKind kind = ObjectKind::Known;
    ObjectType type = ObjectType::Car;
    double extent_x = 4.5;
    double extent_y = 1.8;
    RoadPoint center;
    double speed = 0.0;
    double heading = 0.0;
    double yaw = 0.0;
    double height = 1.5;
    int native_resolution = 1;  // Unknown only

    KnownRecord as_record() const;
};

WorldObject vehicle_object(const Vehicle& v);

/// Splits an unknown object's footprint into `n` equal cubes laid along x.
std::vector<Cube> occupancy_cubes(const WorldObject& obj, int n);

/// Ground truth for a run: vehicles move at constant speed from t = 0;
/// unknown objects are static.
class World {
public:
    World(RoadLayout road, std::vector<Vehicle> vehicles_at_zero, std::vector<WorldObject> static_objects);

    const RoadLayout& road() const { return road_; }
    std::size_t vehicle_count() const { return vehicles_.size(); }
    std::size_t object_count() const { return vehicles_.size() + statics_.size(); }

    Vehicle vehicle_at(std::size_t index, double t) const;
    /// Snapshot of every object (vehicles first, ids dense from 0) at time t.
    std::vector<WorldObject> objects_at(double t) const;

private:
    RoadLayout road_;
    std::vector<Vehicle> vehicles_;
    std::vector<WorldObject> statics_;
};

/// Places unknown objects uniformly along the road with ids following the vehicles.
std::vector<WorldObject> spawn_unknown_objects(const ScenarioConfig& cfg, ObjectId first_id, Rng& rng);

enum class EntrySource { LocalSensor, Received };

struct MapEntry {
    ObjectId id = 0;
    ObjectKind kind = ObjectKind::Known;
    KnownRecord snapshot;               // for Unknown: centre and footprint reconstructed from cubes
    std::deque<HistoryEntry> history;   // newest first, at most history_len
    int resolution = 0;                 // Unknown only
    double last_update_s = 0.0;
    EntrySource source = EntrySource::LocalSensor;
    std::uint32_t sender = 0;           // valid when source == Received
};

struct OverheardRecord {
    double last_time_s = -1.0;
    /// Unknown objects: most recent overhearing time per resolution.
    std::map<int, double> by_resolution;
};

/// Per-vehicle multi-resolution map plus the ledger of records overheard from others.
class LocalMap {
public:
    explicit LocalMap(VehicleId owner = 0, int history_len = 5) : owner_(owner), history_len_(history_len) {}

    VehicleId owner() const { return owner_; }
    int history_len() const { return history_len_; }

    const MapEntry* find(ObjectId id) const;
    const std::unordered_map<ObjectId, MapEntry>& entries() const { return entries_; }
    const OverheardRecord* overheard(ObjectId id) const;
    const std::unordered_map<ObjectId, OverheardRecord>& overheard_ledger() const { return overheard_; }

    /// Local-sensor refresh: pushes the previous snapshot into history.
    void refresh_local(const WorldObject& obj, double now);
    /// Applies one received record; returns true if the entry was replaced.
    bool apply_received(const KnownRecord& rec, ObjectKind kind, const std::vector<HistoryEntry>* history,
                        int resolution, double generated_s, std::uint32_t sender, double now);

    bool operator==(const LocalMap&) const;

private:
    VehicleId owner_;
    int history_len_;
    std::unordered_map<ObjectId, MapEntry> entries_;
    std::unordered_map<ObjectId, OverheardRecord> overheard_;
};

/// Refreshes every object (other than the owner) within `radius_m` of `self`.
void sense(LocalMap& map, const WorldObject& self, std::span<const WorldObject> objects, const RoadLayout& road,
           double radius_m, double now);

/// Merges a decoded message: the sender's self block, known records (with
/// positional history blocks) and unknown records.
void fuse_received(LocalMap& map, const CsamMessage& msg, double now);

struct InformationAge {
    double age_s = 0.0;
    bool never_seen = false;
};

/// now - last_update; for objects never seen, the time since simulation start, flagged.
InformationAge information_age(const LocalMap& map, ObjectId id, double now);

}  // namespace csam
