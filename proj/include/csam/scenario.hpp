#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csam/radio_params.hpp"

namespace csam {

enum class SelectionMode { PaperLiteral, ShiftedExponential };

/// Complete description of one simulation run. Defaults reproduce the
/// reference highway setup (4 km, 3+3 lanes, 125 veh/km, 500 m range, 5 Hz).
struct ScenarioConfig {
    // Road and traffic
    double road_length_m = 4000.0;
    int lanes_per_direction = 3;
    std::vector<double> lane_speeds_mps{17.0, 18.0, 19.0};
    double lane_width_m = 3.7;
    double vehicle_density_per_km = 125.0;
    double unknown_objects_per_km = 0.0;
    int unknown_object_resolution = 16;

    // Radio
    double tx_power_dbm = 21.0;
    double tx_range_m = 500.0;
    double tx_frequency_hz = 5.0;
    PhyParams phy;
    MacParams mac;

    // Message-size controller
    double overhead_fraction = 0.1;
    int q_min = 25;
    double cbr_target = 0.68;
    double controller_gain = 2000.0;
    bool control_enabled = true;
    int fixed_message_size_bytes = 0;  // 0: baseline full-map message when control is off

    // Content selection
    double r0_m = 100.0;
    SelectionMode selection_mode = SelectionMode::ShiftedExponential;
    double r_scale_m = 100.0;
    bool redundancy_filter = true;
    double redundancy_period_s = 1.0;
    int n_min = 1;
    int n_max = 64;

    // Record sizes (bytes)
    int history_len = 5;
    int l_k_bytes = 60;
    int l_h_bytes = 40;
    int l_u_bytes = 32;
    int l_self_bytes = 260;

    // Sensing, timing, metrics
    double sensing_radius_m = 150.0;
    double sensing_period_s = 0.1;
    double sim_duration_s = 100.0;
    double cbr_window_s = 1.0;
    double metric_period_s = 0.1;
    double warmup_s = 10.0;
    std::uint64_t seed = 1;

    double data_rate_bps() const { return phy.data_rate_bps; }
    int fragmentation_threshold_bytes() const { return mac.fragmentation_threshold_bytes; }
};

/// Parse or validation failure. `line` is 0 for validation errors, which
/// instead name the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line, std::string key)
        : std::runtime_error(message), line_(line), key_(std::move(key)) {}
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

/// Named power/range pairs of the reference setup: 250 m -> 10 dBm,
/// 500 m -> 21 dBm, 1000 m -> 31 dBm.
struct RangePreset {
    std::string_view name;
    double range_m;
    double tx_power_dbm;
};
const std::vector<RangePreset>& range_presets();

/// Parses `key = value` lines (with `#` comments) over the defaults.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Applies one `key = value` assignment. Throws ConfigError on unknown keys
/// or malformed values (line number 0).
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

void validate(const ScenarioConfig& cfg);

/// Serializes every key so that parse_scenario(to_scenario_text(c)) == c.
std::string to_scenario_text(const ScenarioConfig& cfg);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

}  // namespace csam
