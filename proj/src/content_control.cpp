#include "csam/content_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csam {

int compute_l_max(double rate_bps, double tx_frequency_hz, double overhead_fraction, int q_min) {
    const double bits = rate_bps * (1.0 - overhead_fraction) / (tx_frequency_hz * q_min);
    return static_cast<int>(std::floor(bits / 8.0 + 1e-9));
}

int compute_l_min(const CodecLayout& layout) { return kHeaderBytes + layout.l_self + std::min(layout.l_k, layout.l_u); }

ControllerState make_controller(const ScenarioConfig& cfg) {
    ControllerState s;
    s.l_min = compute_l_min(CodecLayout::from(cfg));
    s.l_max = std::max(s.l_min, compute_l_max(cfg.data_rate_bps(), cfg.tx_frequency_hz, cfg.overhead_fraction, cfg.q_min));
    s.l_opt = s.l_min;
    s.gain = cfg.controller_gain;
    s.cbr_target = cfg.cbr_target;
    return s;
}

ControllerState update_message_size(const ControllerState& state, double cbr_observed) {
    ControllerState next = state;
    const double raw = state.l_opt + state.gain * (state.cbr_target - cbr_observed);
    const double clamped = std::clamp(std::round(raw), double(state.l_min), double(state.l_max));
    next.l_opt = static_cast<int>(clamped);
    return next;
}

double stability_gain_bound(double cbr_slope_per_byte) { return 2.0 / cbr_slope_per_byte; }

PackPlan pack_counts(long long budget, int known, int unknown, int l_k, int l_h, int l_u, int max_resolution) {
    PackPlan plan;
    if (budget <= 0) return {};
    long long k_r = 0, k_rh = 0, u_r = 0;
    long long n = 1, n_opt = 0;
    const long long initial = budget;
    while (initial >= k_r * l_k + k_rh * l_h + n * u_r * l_u) {
        long long left = initial;
        u_r = std::min<long long>(unknown, left / (n * l_u));
        left -= n * u_r * l_u;
        k_r = std::min<long long>(known, left / l_k);
        left -= k_r * l_k;
        k_rh = std::min<long long>(k_r, left / l_h);
        n_opt = n;
        ++n;
        // With no unknown object in the message the guard no longer depends
        // on N, so the printed loop would never terminate.
        if (u_r == 0 || n > max_resolution) break;
    }
    if (k_r == 0 && u_r == 0) return {};
    plan.known = static_cast<int>(k_r);
    plan.with_history = static_cast<int>(k_rh);
    plan.unknown = static_cast<int>(u_r);
    plan.resolution = static_cast<int>(n_opt);
    return plan;
}

CandidateIds redundancy_filter(const LocalMap& map, double now, double period_s, int n_min) {
    CandidateIds out;
    const double cutoff = now - period_s;
    for (const auto& [id, entry] : map.entries()) {
        if (id == map.owner()) continue;
        const OverheardRecord* heard = map.overheard(id);
        if (entry.kind == ObjectKind::Known) {
            if (heard && heard->last_time_s > cutoff) continue;
            out.known.push_back(id);
        } else {
            bool covered = false;
            if (heard) {
                for (auto it = heard->by_resolution.lower_bound(n_min); it != heard->by_resolution.end(); ++it)
                    if (it->second > cutoff) covered = true;
            }
            if (!covered) out.unknown.push_back(id);
        }
    }
    return out;
}

CandidateIds all_candidates(const LocalMap& map) {
    CandidateIds out;
    for (const auto& [id, entry] : map.entries()) {
        if (id == map.owner()) continue;
        (entry.kind == ObjectKind::Known ? out.known : out.unknown).push_back(id);
    }
    return out;
}

SelectionPolicy SelectionPolicy::from(const ScenarioConfig& cfg) { return {cfg.r0_m, cfg.selection_mode, cfg.r_scale_m}; }

double SelectionPolicy::paper_lambda() const { return (1.0 / r0_m) * std::log(1.0 / std::fabs(1.0 - r0_m)); }

double selection_probability(double r_m, const SelectionPolicy& policy) {
    if (r_m <= policy.r0_m) return 1.0;
    double p = 0.0;
    if (policy.mode == SelectionMode::ShiftedExponential) {
        p = std::exp(-(r_m - policy.r0_m) / policy.r_scale_m);
    } else {
        const double lambda = policy.paper_lambda();
        p = lambda * std::exp(-lambda * r_m);
    }
    if (!std::isfinite(p)) return 0.0;
    return std::clamp(p, 0.0, 1.0);
}

int selection_pass(std::span<const double> probability, std::span<char> chosen, int slots, Rng& rng) {
    int added = 0;
    for (std::size_t i = 0; i < probability.size() && added < slots; ++i) {
        if (chosen[i]) continue;
        if (rng.bernoulli(probability[i])) {
            chosen[i] = 1;
            ++added;
        }
    }
    return added;
}

std::vector<ObjectId> select_objects(std::span<const Candidate> sorted, int slots, const SelectionPolicy& policy,
                                     Rng& rng, int max_passes) {
    std::vector<ObjectId> out;
    if (slots <= 0 || sorted.empty()) return out;
    if (static_cast<std::size_t>(slots) >= sorted.size()) {
        for (const auto& c : sorted) out.push_back(c.id);
        return out;
    }

    std::vector<char> chosen(sorted.size(), 0);
    std::vector<double> prob(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) prob[i] = selection_probability(sorted[i].distance_m, policy);
    const auto reachable = std::count_if(prob.begin(), prob.end(), [](double p) { return p > 0.0; });

    int count = 0;
    for (int pass = 0; pass < max_passes && count < slots && count < reachable; ++pass)
        count += selection_pass(prob, chosen, slots - count, rng);
    for (std::size_t i = 0; i < sorted.size() && count < slots; ++i) {
        if (!chosen[i]) {
            chosen[i] = 1;
            ++count;
        }
    }
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (chosen[i]) out.push_back(sorted[i].id);
    return out;
}

std::vector<Candidate> rank_by_distance(const LocalMap& map, std::span<const ObjectId> ids, const RoadPoint& origin,
                                        const RoadLayout& road) {
    std::vector<Candidate> out;
    out.reserve(ids.size());
    for (ObjectId id : ids) {
        const MapEntry* e = map.find(id);
        if (!e) continue;
        out.push_back({id, distance(origin, {e->snapshot.x, e->snapshot.y}, road)});
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        return a.distance_m != b.distance_m ? a.distance_m < b.distance_m : a.id < b.id;
    });
    return out;
}

std::vector<HistoryEntry> fixed_length_history(const MapEntry& entry, int len) {
    std::vector<HistoryEntry> out;
    out.reserve(static_cast<std::size_t>(std::max(len, 0)));
    for (const auto& h : entry.history) {
        if (static_cast<int>(out.size()) == len) break;
        out.push_back(h);
    }
    HistoryEntry fill = out.empty()
                            ? HistoryEntry{entry.snapshot.x, entry.snapshot.y, entry.snapshot.speed, entry.snapshot.heading,
                                           entry.snapshot.yaw}
                            : out.back();
    while (static_cast<int>(out.size()) < len) out.push_back(fill);
    return out;
}

namespace {

CsamMessage message_shell(const SelfState& self, std::uint32_t sender, double now, std::uint32_t sequence) {
    CsamMessage msg;
    msg.sender_id = sender;
    msg.sequence = sequence & 0xFFFFFF;
    msg.generation_time_s = now;
    msg.self = self.record;
    msg.self_history = self.history;
    return msg;
}

}  // namespace

BuildResult build_csam(const LocalMap& map, const SelfState& self, const ControllerState& state,
                       const SelectionPolicy& policy, const ScenarioConfig& cfg, const RoadLayout& road, double now,
                       std::uint32_t sequence, Rng& rng) {
    const CodecLayout layout = CodecLayout::from(cfg);
    BuildResult result;
    result.message = message_shell(self, map.owner(), now, sequence);

    CandidateIds ids = cfg.redundancy_filter ? redundancy_filter(map, now, cfg.redundancy_period_s, cfg.n_min)
                                             : all_candidates(map);
    const RoadPoint origin{self.record.x, self.record.y};
    auto known = rank_by_distance(map, ids.known, origin, road);
    auto unknown = rank_by_distance(map, ids.unknown, origin, road);

    const long long budget = static_cast<long long>(state.l_opt) - kHeaderBytes - layout.l_self;
    PackPlan plan = pack_counts(budget, static_cast<int>(known.size()), static_cast<int>(unknown.size()), layout.l_k,
                                layout.l_h, layout.l_u, cfg.n_max);
    if (layout.history_len == 0) plan.with_history = 0;

    auto chosen_known = select_objects(known, plan.known, policy, rng);
    auto chosen_unknown = select_objects(unknown, plan.unknown, policy, rng);

    CsamMessage& msg = result.message;
    for (ObjectId id : chosen_known) msg.known.push_back(map.find(id)->snapshot);
    const auto n_hist = std::min<std::size_t>(static_cast<std::size_t>(plan.with_history), chosen_known.size());
    for (std::size_t i = 0; i < n_hist; ++i)
        msg.histories.push_back(fixed_length_history(*map.find(chosen_known[i]), layout.history_len));
    for (ObjectId id : chosen_unknown) {
        const MapEntry& e = *map.find(id);
        WorldObject obj;
        obj.id = id;
        obj.kind = ObjectKind::Unknown;
        obj.extent_x = e.snapshot.extent_x;
        obj.extent_y = e.snapshot.extent_y;
        obj.center = {e.snapshot.x, e.snapshot.y};
        msg.unknown.push_back({id, occupancy_cubes(obj, plan.resolution)});
    }
    msg.resolution = msg.unknown.empty() ? 0 : plan.resolution;
    result.plan = plan;
    return result;
}

CsamMessage build_baseline_csam(const LocalMap& map, const SelfState& self, const ScenarioConfig& cfg,
                                const RoadLayout& road, double now, std::uint32_t sequence) {
    const CodecLayout layout = CodecLayout::from(cfg);
    CsamMessage msg = message_shell(self, map.owner(), now, sequence);
    std::vector<ObjectId> cars;
    for (const auto& [id, e] : map.entries())
        if (e.kind == ObjectKind::Known && e.snapshot.type == ObjectType::Car && id != map.owner()) cars.push_back(id);
    auto ranked = rank_by_distance(map, cars, {self.record.x, self.record.y}, road);

    std::size_t limit = std::numeric_limits<std::size_t>::max();
    if (cfg.fixed_message_size_bytes > 0) {
        const long long room = static_cast<long long>(cfg.fixed_message_size_bytes) - kHeaderBytes - layout.l_self;
        limit = room > 0 ? static_cast<std::size_t>(room / layout.l_k) : 0;
    }
    for (const auto& c : ranked) {
        if (c.distance_m > cfg.tx_range_m || msg.known.size() >= limit) break;
        msg.known.push_back(map.find(c.id)->snapshot);
    }
    return msg;
}

}  // namespace csam
