#include "csam/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "csam/codec.hpp"
#include "csam/mac.hpp"
#include "csam/mobility.hpp"
#include "csam/phy.hpp"
#include "csam/world_map.hpp"

namespace csam {
namespace {

// Signals whose mean power sits this far below the noise floor are neither
// sensed nor counted as interference.
constexpr double kIgnoreBelowNoiseDb = 30.0;
constexpr double kIaMaxDistanceM = 1000.0;

struct Event {
    SimTime time;
    EventKind kind;
    std::uint32_t vehicle;
    std::uint64_t seq;
    std::uint64_t payload;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.time, a.kind, a.vehicle, a.seq) > std::tie(b.time, b.kind, b.vehicle, b.seq);
    }
};

struct Fragment {
    std::uint64_t message;
    int payload_bytes;
};

struct Reception {
    std::uint64_t tx;
    double power_mw;
    double peak_interference_mw;
    double distance_m;
    bool sensed;
    bool blocked;
};

struct Node {
    LocalMap map;
    ControllerState ctrl;
    Rng mac_rng;
    Rng select_rng;
    BackoffTimer backoff;
    CbrMeter cbr;
    std::deque<Fragment> queue;
    std::vector<Reception> rx;
    double incoming_mw = 0.0;
    int sensed = 0;
    bool transmitting = false;
    bool busy = false;
    std::uint64_t access_token = 0;
    std::uint32_t sequence = 0;
    SimTime phase;
};

struct Message {
    std::uint32_t sender = 0;
    int fragments = 0;
    int resolved = 0;
    SimTime generated;
    std::vector<std::uint8_t> bytes;
    std::vector<std::uint16_t> got;
    std::optional<CsamMessage> decoded;
    bool decode_failed = false;
};

struct OnAir {
    std::uint32_t sender;
    std::uint64_t message;
    SimTime start;
    std::vector<std::uint32_t> receivers;
};

/// Visits indices of x-sorted points whose x lies within `half` of `x` on a ring of length `len`.
template <class F>
void for_each_near(const std::vector<std::pair<double, std::uint32_t>>& sorted, double x, double half, double len,
                   F&& fn) {
    if (sorted.empty()) return;
    if (2.0 * half >= len) {
        for (const auto& p : sorted) fn(p.second);
        return;
    }
    auto visit = [&](double lo, double hi) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(lo, std::uint32_t{0}));
        for (; it != sorted.end() && it->first <= hi; ++it) fn(it->second);
    };
    const double lo = x - half;
    const double hi = x + half;
    if (lo < 0.0) {
        visit(lo + len, len);
        visit(0.0, hi);
    } else if (hi >= len) {
        visit(lo, len);
        visit(0.0, hi - len);
    } else {
        visit(lo, hi);
    }
}

class Engine {
public:
    Engine(const ScenarioConfig& cfg, const EngineOptions& opts)
        : cfg_(cfg),
          opts_(opts),
          road_(RoadLayout::from(cfg)),
          layout_(CodecLayout::from(cfg)),
          policy_(SelectionPolicy::from(cfg)),
          world_(make_world(cfg)),
          fading_rng_(Rng(cfg.seed).derive("fading")),
          out_{MetricsStore(metrics_config(cfg, opts)), {}, {}} {
        const Rng root(cfg.seed);
        Rng phase_rng = root.derive("phase");
        const SimTime window = SimTime::from_seconds(cfg.cbr_window_s);
        const ControllerState ctrl = make_controller(cfg);
        nodes_.reserve(world_.vehicle_count());
        for (std::size_t i = 0; i < world_.vehicle_count(); ++i) {
            const std::string id = std::to_string(i);
            Node n{LocalMap(static_cast<VehicleId>(i), cfg.history_len),
                   ctrl,
                   root.derive("mac/" + id),
                   root.derive("select/" + id),
                   BackoffTimer(cfg.mac),
                   CbrMeter(window),
                   {},
                   {},
                   0.0,
                   0,
                   false,
                   false,
                   0,
                   0,
                   SimTime::from_seconds(phase_rng.uniform(0.0, 1.0 / cfg.tx_frequency_hz))};
            nodes_.push_back(std::move(n));
        }
        duration_ = SimTime::from_seconds(cfg.sim_duration_s);
        epoch_ = SimTime::from_seconds(1.0 / cfg.tx_frequency_hz);
        ignore_mw_ = dbm_to_mw(cfg.phy.noise_floor_dbm - kIgnoreBelowNoiseDb);
        out_.metrics.set_run_shape(nodes_.size(), cfg.sim_duration_s);
    }

    RunOutput run() {
        const auto n = static_cast<std::uint32_t>(nodes_.size());
        if (n > 0) {
            push(SimTime{}, EventKind::SenseTick, 0, 0);
            push(SimTime::from_seconds(cfg_.metric_period_s), EventKind::MetricSample, 0, 1);
            push(SimTime::from_seconds(cfg_.cbr_window_s), EventKind::CbrSample, 0, 1);
            for (std::uint32_t v = 0; v < n; ++v) push(nodes_[v].phase, EventKind::TxEpoch, v, 0);
        }
        queue_.push({duration_, EventKind::End, 0, seq_++, 0});

        while (!queue_.empty()) {
            const Event ev = queue_.top();
            queue_.pop();
            ++out_.stats.events;
            if (!clock_.advance_to(ev.time)) ++out_.stats.causality_violations;
            if (ev.kind == EventKind::End) break;
            dispatch(ev);
        }
        return std::move(out_);
    }

private:
    static World make_world(const ScenarioConfig& cfg) {
        const Rng root(cfg.seed);
        Rng mobility = root.derive("mobility");
        Rng objects = root.derive("objects");
        auto vehicles = spawn_vehicles(cfg, mobility);
        auto statics = spawn_unknown_objects(cfg, static_cast<ObjectId>(vehicles.size()), objects);
        return World(RoadLayout::from(cfg), std::move(vehicles), std::move(statics));
    }

    static MetricsConfig metrics_config(const ScenarioConfig& cfg, const EngineOptions& opts) {
        MetricsConfig m;
        m.warmup_s = cfg.warmup_s;
        m.ia_histogram_max_s = std::max(1.0, cfg.sim_duration_s) + 1.0;
        m.keep_raw_ia = opts.keep_raw_ia;
        return m;
    }

    void push(SimTime t, EventKind kind, std::uint32_t vehicle, std::uint64_t payload) {
        if (t > duration_) return;
        queue_.push({t, kind, vehicle, seq_++, payload});
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::FragmentEnd: fragment_end(ev.payload); break;
            case EventKind::CbrSample: cbr_sample(ev.payload); break;
            case EventKind::MetricSample: metric_sample(ev.payload); break;
            case EventKind::SenseTick: sense_tick(ev.payload); break;
            case EventKind::TxEpoch: tx_epoch(ev.vehicle, ev.payload); break;
            case EventKind::FragmentStart: fragment_start(ev.vehicle, ev.payload); break;
            case EventKind::End: break;
        }
    }

    double now_s() const { return clock_.now().seconds(); }

    std::vector<RoadPoint> positions(double t) const {
        std::vector<RoadPoint> out(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) out[i] = world_.vehicle_at(i, t).point();
        return out;
    }

    static std::vector<std::pair<double, std::uint32_t>> sorted_by_x(const std::vector<WorldObject>& objs) {
        std::vector<std::pair<double, std::uint32_t>> out(objs.size());
        for (std::size_t i = 0; i < objs.size(); ++i) out[i] = {objs[i].center.x, static_cast<std::uint32_t>(i)};
        std::sort(out.begin(), out.end());
        return out;
    }

    // ---- medium state -----------------------------------------------------

    void refresh_busy(std::uint32_t v) {
        Node& node = nodes_[v];
        const bool busy = node.transmitting || node.sensed > 0;
        if (busy == node.busy) return;
        node.busy = busy;
        const SimTime now = clock_.now();
        if (busy) {
            node.cbr.set_busy(now);
            const bool was_armed = node.backoff.armed();
            node.backoff.medium_busy(now);
            if (was_armed && !node.backoff.armed()) ++node.access_token;
        } else {
            node.cbr.set_idle(now);
            node.backoff.medium_idle(now);
            try_access(v);
        }
    }

    void try_access(std::uint32_t v) {
        Node& node = nodes_[v];
        if (node.queue.empty() || node.busy || node.backoff.armed()) return;
        const SimTime t = node.backoff.arm(clock_.now(), node.mac_rng);
        push(t, EventKind::FragmentStart, v, ++node.access_token);
    }

    // ---- transmission -----------------------------------------------------

    void tx_epoch(std::uint32_t v, std::uint64_t k) {
        Node& node = nodes_[v];
        const double t = now_s();
        const Vehicle veh = world_.vehicle_at(v, t);

        SelfState self;
        self.record = vehicle_object(veh).as_record();
        for (int i = 1; i <= cfg_.history_len; ++i) {
            // Unwrapped past positions so offsets stay small across the ring seam.
            const double dt = i * cfg_.sensing_period_s;
            self.history.push_back({veh.position_m - veh.velocity() * dt, veh.lateral_offset_m, veh.speed_mps,
                                    veh.heading_rad(), veh.heading_rad()});
        }

        const std::uint32_t seq = node.sequence++ & 0xFFFFFFu;
        CsamMessage msg;
        std::size_t frame_bytes = 0;
        if (cfg_.control_enabled) {
            const double cbr = node.cbr.read(clock_.now());
            node.ctrl = update_message_size(node.ctrl, cbr);
            BuildResult built = build_csam(node.map, self, node.ctrl, policy_, cfg_, road_, t, seq, node.select_rng);
            msg = std::move(built.message);
            frame_bytes = encoded_size(msg, layout_);
            if (opts_.control_trace)
                out_.control_trace.push_back({t, v, cbr, node.ctrl.l_opt, built.plan, frame_bytes});
        } else {
            msg = build_baseline_csam(node.map, self, cfg_, road_, t, seq);
            frame_bytes = encoded_size(msg, layout_);
            // Fixed-size mode charges airtime for exactly L bytes; the self block
            // is still delivered when L is below header + self block.
            if (cfg_.fixed_message_size_bytes > 0)
                frame_bytes = static_cast<std::size_t>(cfg_.fixed_message_size_bytes);
        }
        out_.metrics.record_generated(frame_bytes);

        supersede(v);

        const std::uint64_t id = next_message_++;
        Message& m = messages_[id];
        m.sender = v;
        m.generated = clock_.now();
        m.bytes = encode(msg, layout_);
        m.got.assign(nodes_.size(), 0);
        const auto sizes = fragment_sizes(frame_bytes, cfg_.mac.fragmentation_threshold_bytes);
        m.fragments = static_cast<int>(sizes.size());
        for (int s : sizes) node.queue.push_back({id, s});
        try_access(v);

        push(node.phase + epoch_ * static_cast<std::int64_t>(k + 1), EventKind::TxEpoch, v, k + 1);
    }

    /// A fresh message replaces fragments of older messages still waiting for the channel.
    void supersede(std::uint32_t v) {
        Node& node = nodes_[v];
        while (!node.queue.empty()) {
            const std::uint64_t id = node.queue.front().message;
            node.queue.pop_front();
            ++out_.stats.fragments_superseded;
            Message& m = messages_.at(id);
            if (++m.resolved == m.fragments) finalize(id);
        }
    }

    void fragment_start(std::uint32_t v, std::uint64_t token) {
        Node& node = nodes_[v];
        if (token != node.access_token) return;
        node.backoff.consume();
        if (node.queue.empty() || node.transmitting) return;
        const Fragment f = node.queue.front();
        node.queue.pop_front();
        ++out_.stats.fragments_sent;

        const SimTime now = clock_.now();
        const double t = now.seconds();
        const std::uint64_t txid = next_tx_++;
        OnAir air{v, f.message, now, {}};

        node.transmitting = true;
        for (auto& r : node.rx) r.blocked = true;
        refresh_busy(v);

        const RoadPoint from = world_.vehicle_at(v, t).point();
        const double metric_range = out_.metrics.config().max_distance_m;
        for (std::uint32_t r = 0; r < nodes_.size(); ++r) {
            if (r == v) continue;
            const double d = distance(from, world_.vehicle_at(r, t).point(), road_);
            const double mean_dbm = mean_rx_power_dbm(cfg_.tx_power_dbm, d, cfg_.phy);
            if (d >= metric_range && dbm_to_mw(mean_dbm) < ignore_mw_) continue;
            double p_dbm = mean_dbm;
            if (cfg_.phy.fading_enabled)
                p_dbm += mw_to_dbm(fading_rng_.gamma_unit_mean(nakagami_shape(d, cfg_.phy.nakagami)));
            const double p_mw = dbm_to_mw(p_dbm);

            Node& rn = nodes_[r];
            rn.incoming_mw += p_mw;
            for (auto& rec : rn.rx)
                rec.peak_interference_mw = std::max(rec.peak_interference_mw, rn.incoming_mw - rec.power_mw);
            const bool sensed = p_dbm >= cfg_.phy.carrier_sense_dbm;
            rn.rx.push_back({txid, p_mw, std::max(0.0, rn.incoming_mw - p_mw), d, sensed, rn.transmitting});
            air.receivers.push_back(r);
            if (sensed) {
                ++rn.sensed;
                refresh_busy(r);
            }
        }
        const SimTime end = now + airtime(f.payload_bytes, cfg_.mac, cfg_.phy.data_rate_bps);
        on_air_.emplace(txid, std::move(air));
        push(end, EventKind::FragmentEnd, v, txid);
    }

    void fragment_end(std::uint64_t txid) {
        auto it = on_air_.find(txid);
        OnAir air = std::move(it->second);
        on_air_.erase(it);
        Message& m = messages_.at(air.message);
        const double start_s = air.start.seconds();

        for (std::uint32_t r : air.receivers) {
            Node& rn = nodes_[r];
            auto rec_it = std::find_if(rn.rx.begin(), rn.rx.end(), [&](const Reception& x) { return x.tx == txid; });
            const Reception rec = *rec_it;
            rn.rx.erase(rec_it);
            rn.incoming_mw = 0.0;
            for (const auto& x : rn.rx) rn.incoming_mw += x.power_mw;

            const RxResult res = sinr_decision(rec.power_mw, rec.peak_interference_mw, rec.blocked, cfg_.phy);
            const bool ok = res == RxResult::Received;
            out_.metrics.record_packet(rec.distance_m, !ok, start_s);
            if (ok && ++m.got[r] == m.fragments) deliver(r, m);
            if (rec.sensed) {
                --rn.sensed;
                refresh_busy(r);
            }
        }

        nodes_[air.sender].transmitting = false;
        refresh_busy(air.sender);
        if (++m.resolved == m.fragments) finalize(air.message);
    }

    void deliver(std::uint32_t r, Message& m) {
        if (!m.decoded && !m.decode_failed) {
            try {
                m.decoded = decode(m.bytes, layout_);
            } catch (const DecodeError&) {
                m.decode_failed = true;
                ++out_.stats.decode_failures;
            }
        }
        if (!m.decoded) return;
        fuse_received(nodes_[r].map, *m.decoded, now_s());
        ++out_.stats.messages_delivered;
    }

    void finalize(std::uint64_t id) {
        auto it = messages_.find(id);
        const Message& m = it->second;
        const double t = m.generated.seconds();
        const RoadPoint from = world_.vehicle_at(m.sender, t).point();
        std::uint32_t complete = 0;
        for (std::uint32_t r = 0; r < nodes_.size(); ++r) {
            if (r == m.sender) continue;
            const bool ok = m.got[r] == m.fragments;
            if (ok) ++complete;
            out_.metrics.record_message(distance(from, world_.vehicle_at(r, t).point(), road_), !ok, t);
        }
        out_.metrics.record_delivery(complete);
        messages_.erase(it);
    }

    // ---- periodic ---------------------------------------------------------

    void sense_tick(std::uint64_t k) {
        const double t = now_s();
        const auto objects = world_.objects_at(t);
        const auto sorted = sorted_by_x(objects);
        std::vector<WorldObject> near;
        for (std::uint32_t v = 0; v < nodes_.size(); ++v) {
            near.clear();
            for_each_near(sorted, objects[v].center.x, cfg_.sensing_radius_m, road_.road_length_m,
                          [&](std::uint32_t i) { near.push_back(objects[i]); });
            sense(nodes_[v].map, objects[v], near, road_, cfg_.sensing_radius_m, t);
        }
        push(SimTime::from_seconds(cfg_.sensing_period_s * static_cast<double>(k + 1)), EventKind::SenseTick, 0, k + 1);
    }

    void metric_sample(std::uint64_t k) {
        const double t = now_s();
        const auto objects = world_.objects_at(t);
        const auto sorted = sorted_by_x(objects);
        for (std::uint32_t v = 0; v < nodes_.size(); ++v) {
            const RoadPoint self = objects[v].center;
            for_each_near(sorted, self.x, kIaMaxDistanceM, road_.road_length_m, [&](std::uint32_t i) {
                if (i == v) return;
                const double d = distance(self, objects[i].center, road_);
                if (d <= cfg_.sensing_radius_m || d > kIaMaxDistanceM) return;
                const InformationAge ia = information_age(nodes_[v].map, objects[i].id, t);
                out_.metrics.record_ia(d, ia.age_s, ia.never_seen, t, v, objects[i].id);
            });
        }
        push(SimTime::from_seconds(cfg_.metric_period_s * static_cast<double>(k + 1)), EventKind::MetricSample, 0, k + 1);
    }

    void cbr_sample(std::uint64_t k) {
        const SimTime now = clock_.now();
        for (std::uint32_t v = 0; v < nodes_.size(); ++v)
            out_.metrics.record_cbr(now.seconds(), v, nodes_[v].cbr.read(now));
        push(SimTime::from_seconds(cfg_.cbr_window_s * static_cast<double>(k + 1)), EventKind::CbrSample, 0, k + 1);
    }

    ScenarioConfig cfg_;
    EngineOptions opts_;
    RoadLayout road_;
    CodecLayout layout_;
    SelectionPolicy policy_;
    World world_;
    Rng fading_rng_;
    RunOutput out_;

    std::vector<Node> nodes_;
    std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
    std::unordered_map<std::uint64_t, Message> messages_;
    std::unordered_map<std::uint64_t, OnAir> on_air_;
    SimClock clock_;
    SimTime duration_;
    SimTime epoch_;
    double ignore_mw_ = 0.0;
    std::uint64_t seq_ = 0;
    std::uint64_t next_message_ = 0;
    std::uint64_t next_tx_ = 0;
};

}  // namespace

RunOutput run(const ScenarioConfig& cfg, const EngineOptions& opts) {
    validate(cfg);
    Engine engine(cfg, opts);
    return engine.run();
}

std::string control_trace_csv(const std::vector<ControlTraceRow>& rows) {
    std::string out = std::string(kControlTraceCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += csv_real(r.t_s) + "," + std::to_string(r.vehicle) + "," + csv_real(r.cbr_observed) + "," +
               std::to_string(r.l_opt) + "," + std::to_string(r.plan.known) + "," +
               std::to_string(r.plan.with_history) + "," + std::to_string(r.plan.unknown) + "," +
               std::to_string(r.plan.resolution) + "," + std::to_string(r.message_bytes) + "\n";
    }
    return out;
}

}  // namespace csam
