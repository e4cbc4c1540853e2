#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csam/codec.hpp"
#include "csam/rng.hpp"
#include "csam/scenario.hpp"
#include "csam/world_map.hpp"

namespace csam {

// ---------------------------------------------------------------------------
// Message-size control

struct ControllerState {
    int l_opt = 0;
    int l_min = 0;
    int l_max = 0;
    double gain = 2000.0;  // bytes per unit CBR error
    double cbr_target = 0.68;
};

/// R (1 - gamma) / (f Q_min) bits, returned in whole bytes (floor).
int compute_l_max(double rate_bps, double tx_frequency_hz, double overhead_fraction, int q_min);

/// Smallest message that still carries one object: header + self block + min(l_K, l_U).
int compute_l_min(const CodecLayout& layout);

/// Controller bounds from the scenario; starts at l_min.
ControllerState make_controller(const ScenarioConfig& cfg);

/// L <- clamp(L + gain (CBR* - CBR), L_min, L_max), rounded to the nearest byte.
ControllerState update_message_size(const ControllerState& state, double cbr_observed);

/// Largest gain for which the loop L <- L + gain (CBR* - c(L)) is stable when
/// the channel responds with slope dc/dL (per byte): gain < 2 / slope.
double stability_gain_bound(double cbr_slope_per_byte);

// ---------------------------------------------------------------------------
// Object-count packing

struct PackPlan {
    int known = 0;          // K_R
    int with_history = 0;   // K_R,h
    int unknown = 0;        // U_R
    int resolution = 0;     // N_OPT

    bool empty() const { return known == 0 && unknown == 0; }
    long long bytes(int l_k, int l_h, int l_u) const {
        return 1LL * known * l_k + 1LL * with_history * l_h + 1LL * resolution * unknown * l_u;
    }
    bool operator==(const PackPlan&) const = default;
};

inline constexpr int kDefaultMaxResolution = 64;

/// Greedy count packing over the object-record budget: as many unknown
/// objects as possible at the lowest resolution, then known objects, then
/// history blocks, raising the resolution while the counts still fit.
/// The loop exits once no unknown object fits and never raises N past
/// `max_resolution`. A plan that carries no object is returned as all zeros.
PackPlan pack_counts(long long budget, int known, int unknown, int l_k, int l_h, int l_u,
                     int max_resolution = kDefaultMaxResolution);

// ---------------------------------------------------------------------------
// Redundancy filter and distance-dependent selection

struct CandidateIds {
    std::vector<ObjectId> known;
    std::vector<ObjectId> unknown;
};

/// Drops known objects overheard from others within (now - T, now] and unknown
/// objects overheard at resolution >= n_min within the same window.
CandidateIds redundancy_filter(const LocalMap& map, double now, double period_s, int n_min);
/// Every entry of the map, split by kind.
CandidateIds all_candidates(const LocalMap& map);

struct SelectionPolicy {
    double r0_m = 100.0;
    SelectionMode mode = SelectionMode::ShiftedExponential;
    double r_scale_m = 100.0;

    static SelectionPolicy from(const ScenarioConfig& cfg);
    /// lambda = (1/r0) ln(1/|1 - r0|), used verbatim by PaperLiteral mode.
    double paper_lambda() const;
};

double selection_probability(double r_m, const SelectionPolicy& policy);

struct Candidate {
    ObjectId id = 0;
    double distance_m = 0.0;
};

inline constexpr int kDefaultMaxPasses = 10000;

/// One pass in ascending distance: each candidate not yet chosen joins with its
/// probability until `slots` more are chosen. Returns how many joined.
int selection_pass(std::span<const double> probability, std::span<char> chosen, int slots, Rng& rng);

/// Walks candidates (ascending distance) including each with its selection
/// probability until `slots` are filled; repeats passes over the remainder.
/// After `max_passes` passes any unfilled slots go to the nearest remaining
/// candidates. Returns chosen ids in ascending distance order.
std::vector<ObjectId> select_objects(std::span<const Candidate> sorted, int slots, const SelectionPolicy& policy,
                                     Rng& rng, int max_passes = kDefaultMaxPasses);

/// Orders candidates by (distance, id) from `origin`, using each entry's snapshot position.
std::vector<Candidate> rank_by_distance(const LocalMap& map, std::span<const ObjectId> ids, const RoadPoint& origin,
                                        const RoadLayout& road);

// ---------------------------------------------------------------------------
// Message assembly

/// Sender's own state for the self block.
struct SelfState {
    KnownRecord record;
    std::vector<HistoryEntry> history;  // exactly history_len entries
};

struct BuildResult {
    CsamMessage message;
    PackPlan plan;
};

/// Controlled CSAM: redundancy filter -> pack_counts -> select_objects -> message.
/// Encoded size never exceeds state.l_opt.
BuildResult build_csam(const LocalMap& map, const SelfState& self, const ControllerState& state,
                       const SelectionPolicy& policy, const ScenarioConfig& cfg, const RoadLayout& road, double now,
                       std::uint32_t sequence, Rng& rng);

/// Uncontrolled full-map message: every known car within tx_range_m of the
/// sender, nearest first, no history. With a fixed frame size, only the
/// records that fit are carried.
CsamMessage build_baseline_csam(const LocalMap& map, const SelfState& self, const ScenarioConfig& cfg,
                                const RoadLayout& road, double now, std::uint32_t sequence);

/// Pads (by repeating the oldest slot) or truncates to exactly `len` entries.
std::vector<HistoryEntry> fixed_length_history(const MapEntry& entry, int len);

}  // namespace csam
