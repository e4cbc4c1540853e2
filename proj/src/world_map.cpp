#include "csam/world_map.hpp"

#include <cmath>

namespace csam {

KnownRecord WorldObject::as_record() const {
    KnownRecord r;
    r.id = id;
    r.type = type;
    r.extent_x = extent_x;
    r.extent_y = extent_y;
    r.x = center.x;
    r.y = center.y;
    r.speed = speed;
    r.heading = heading;
    r.yaw = yaw;
    return r;
}

WorldObject vehicle_object(const Vehicle& v) {
    WorldObject o;
    o.id = v.id;
    o.kind = ObjectKind::Known;
    o.type = ObjectType::Car;
    o.center = v.point();
    o.speed = v.speed_mps;
    o.heading = v.heading_rad();
    o.yaw = v.heading_rad();
    return o;
}

std::vector<Cube> occupancy_cubes(const WorldObject& obj, int n) {
    std::vector<Cube> cubes;
    if (n < 1) return cubes;
    cubes.reserve(static_cast<std::size_t>(n));
    const double d = obj.extent_x / n;
    for (int i = 0; i < n; ++i) {
        Cube c;
        c.x = obj.center.x - obj.extent_x / 2.0 + (i + 0.5) * d;
        c.y = obj.center.y;
        c.z = d / 2.0;
        c.size = static_cast<float>(d);
        cubes.push_back(c);
    }
    return cubes;
}

World::World(RoadLayout road, std::vector<Vehicle> vehicles_at_zero, std::vector<WorldObject> static_objects)
    : road_(road), vehicles_(std::move(vehicles_at_zero)), statics_(std::move(static_objects)) {}

Vehicle World::vehicle_at(std::size_t index, double t) const { return advance(vehicles_[index], t, road_); }

std::vector<WorldObject> World::objects_at(double t) const {
    std::vector<WorldObject> out;
    out.reserve(object_count());
    for (std::size_t i = 0; i < vehicles_.size(); ++i) out.push_back(vehicle_object(vehicle_at(i, t)));
    out.insert(out.end(), statics_.begin(), statics_.end());
    return out;
}

std::vector<WorldObject> spawn_unknown_objects(const ScenarioConfig& cfg, ObjectId first_id, Rng& rng) {
    const RoadLayout road = RoadLayout::from(cfg);
    const auto n = static_cast<int>(std::lround(cfg.unknown_objects_per_km * cfg.road_length_m / 1000.0));
    std::vector<WorldObject> out;
    for (int i = 0; i < n; ++i) {
        WorldObject o;
        o.id = first_id + static_cast<ObjectId>(i);
        o.kind = ObjectKind::Unknown;
        o.extent_x = rng.uniform(0.5, 3.0);
        o.extent_y = rng.uniform(0.5, 2.0);
        o.height = 0.5;
        o.center = {road.wrap(rng.uniform(0.0, cfg.road_length_m)), rng.uniform(-road.total_width() / 2.0, road.total_width() / 2.0)};
        o.native_resolution = cfg.unknown_object_resolution;
        out.push_back(o);
    }
    return out;
}

const MapEntry* LocalMap::find(ObjectId id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

const OverheardRecord* LocalMap::overheard(ObjectId id) const {
    auto it = overheard_.find(id);
    return it == overheard_.end() ? nullptr : &it->second;
}

void LocalMap::refresh_local(const WorldObject& obj, double now) {
    if (obj.id == owner_) return;
    auto [it, inserted] = entries_.try_emplace(obj.id);
    MapEntry& e = it->second;
    if (!inserted && history_len_ > 0) {
        e.history.push_front({e.snapshot.x, e.snapshot.y, e.snapshot.speed, e.snapshot.heading, e.snapshot.yaw});
        while (static_cast<int>(e.history.size()) > history_len_) e.history.pop_back();
    }
    e.id = obj.id;
    e.kind = obj.kind;
    e.snapshot = obj.as_record();
    if (obj.kind == ObjectKind::Unknown) e.resolution = std::max(e.resolution, obj.native_resolution);
    e.last_update_s = now;
    e.source = EntrySource::LocalSensor;
    e.sender = 0;
}

namespace {

/// Freshness order: newer generation time wins; on ties local sensing beats
/// any received copy, then the lower sender id wins.
bool newer_than(double t, std::uint32_t sender, const MapEntry& e) {
    if (t != e.last_update_s) return t > e.last_update_s;
    if (e.source == EntrySource::LocalSensor) return false;
    return sender < e.sender;
}

}  // namespace

bool LocalMap::apply_received(const KnownRecord& rec, ObjectKind kind, const std::vector<HistoryEntry>* history,
                              int resolution, double generated_s, std::uint32_t sender, double now) {
    if (rec.id == owner_) return false;

    OverheardRecord& heard = overheard_[rec.id];
    heard.last_time_s = std::max(heard.last_time_s, now);
    if (kind == ObjectKind::Unknown) {
        double& t = heard.by_resolution[resolution];
        t = std::max(t, now);
    }

    auto [it, inserted] = entries_.try_emplace(rec.id);
    MapEntry& e = it->second;
    if (kind == ObjectKind::Unknown) e.resolution = std::max(e.resolution, resolution);
    if (!inserted && !newer_than(generated_s, sender, e)) return false;

    e.id = rec.id;
    e.kind = kind;
    e.snapshot = rec;
    e.history.clear();
    if (history) {
        for (const auto& h : *history) {
            if (static_cast<int>(e.history.size()) >= history_len_) break;
            e.history.push_back(h);
        }
    }
    e.last_update_s = generated_s;
    e.source = EntrySource::Received;
    e.sender = sender;
    return true;
}

bool LocalMap::operator==(const LocalMap& o) const {
    if (owner_ != o.owner_ || history_len_ != o.history_len_) return false;
    if (entries_.size() != o.entries_.size() || overheard_.size() != o.overheard_.size()) return false;
    for (const auto& [id, e] : entries_) {
        const MapEntry* f = o.find(id);
        if (!f) return false;
        if (!(e.kind == f->kind && e.snapshot == f->snapshot && e.history == f->history &&
              e.resolution == f->resolution && e.last_update_s == f->last_update_s && e.source == f->source &&
              e.sender == f->sender))
            return false;
    }
    for (const auto& [id, h] : overheard_) {
        const OverheardRecord* g = o.overheard(id);
        if (!g || g->last_time_s != h.last_time_s || g->by_resolution != h.by_resolution) return false;
    }
    return true;
}

void sense(LocalMap& map, const WorldObject& self, std::span<const WorldObject> objects, const RoadLayout& road,
           double radius_m, double now) {
    for (const auto& obj : objects) {
        if (obj.id == self.id || obj.id == map.owner()) continue;
        if (distance(self.center, obj.center, road) <= radius_m) map.refresh_local(obj, now);
    }
}

void fuse_received(LocalMap& map, const CsamMessage& msg, double now) {
    const double t = msg.generation_time_s;
    const auto* self_hist = msg.self_history.empty() ? nullptr : &msg.self_history;
    map.apply_received(msg.self, ObjectKind::Known, self_hist, 0, t, msg.sender_id, now);
    for (std::size_t i = 0; i < msg.known.size(); ++i) {
        const auto* hist = i < msg.histories.size() ? &msg.histories[i] : nullptr;
        map.apply_received(msg.known[i], ObjectKind::Known, hist, 0, t, msg.sender_id, now);
    }
    for (const auto& u : msg.unknown) {
        if (u.cubes.empty()) continue;
        KnownRecord rec;
        rec.id = u.id;
        double sx = 0.0, sy = 0.0, len = 0.0;
        for (const auto& c : u.cubes) {
            sx += c.x;
            sy += c.y;
            len += c.size;
        }
        rec.x = sx / static_cast<double>(u.cubes.size());
        rec.y = sy / static_cast<double>(u.cubes.size());
        rec.extent_x = len;
        rec.extent_y = u.cubes.front().size;
        map.apply_received(rec, ObjectKind::Unknown, nullptr, static_cast<int>(u.cubes.size()), t, msg.sender_id, now);
    }
}

InformationAge information_age(const LocalMap& map, ObjectId id, double now) {
    const MapEntry* e = map.find(id);
    if (!e) return {now, true};
    return {now - e->last_update_s, false};
}

}  // namespace csam
