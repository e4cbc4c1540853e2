#include "csam/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace csam {
namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "' (expected " +
                          std::string(expected) + ")",
                      0, std::string(key));
}

double parse_double(std::string_view key, std::string_view v) {
    std::string s(v);
    char* end = nullptr;
    errno = 0;
    double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) bad_value(key, v, "a real number");
    return d;
}

long long parse_int(std::string_view key, std::string_view v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    std::string s(v);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "off" || s == "0" || s == "no") return false;
    bad_value(key, v, "a boolean (true/false/on/off)");
}

std::string fmt_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

struct KeySpec {
    std::string_view name;
    std::function<void(ScenarioConfig&, std::string_view, std::string_view)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

template <typename Member>
KeySpec real_key(std::string_view name, Member member) {
    return {name,
            [member](ScenarioConfig& c, std::string_view k, std::string_view v) { member(c) = parse_double(k, v); },
            [member](const ScenarioConfig& c) { return fmt_double(member(const_cast<ScenarioConfig&>(c))); }};
}

template <typename Member>
KeySpec int_key(std::string_view name, Member member) {
    return {name,
            [member](ScenarioConfig& c, std::string_view k, std::string_view v) {
                member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_int(k, v));
            },
            [member](const ScenarioConfig& c) { return std::to_string(member(const_cast<ScenarioConfig&>(c))); }};
}

template <typename Member>
KeySpec bool_key(std::string_view name, Member member) {
    return {name, [member](ScenarioConfig& c, std::string_view k, std::string_view v) { member(c) = parse_bool(k, v); },
            [member](const ScenarioConfig& c) {
                return std::string(member(const_cast<ScenarioConfig&>(c)) ? "true" : "false");
            }};
}

#define CSAM_REAL(name, expr) real_key(name, [](ScenarioConfig& c) -> double& { return expr; })
#define CSAM_INT(name, type, expr) int_key(name, [](ScenarioConfig& c) -> type& { return expr; })
#define CSAM_BOOL(name, expr) bool_key(name, [](ScenarioConfig& c) -> bool& { return expr; })

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        CSAM_REAL("road_length_m", c.road_length_m),
        CSAM_INT("lanes_per_direction", int, c.lanes_per_direction),
        {"lane_speeds_mps",
         [](ScenarioConfig& c, std::string_view k, std::string_view v) {
             c.lane_speeds_mps.clear();
             while (!v.empty()) {
                 auto comma = v.find(',');
                 auto item = trim(v.substr(0, comma));
                 if (item.empty()) bad_value(k, v, "a comma-separated list of speeds");
                 c.lane_speeds_mps.push_back(parse_double(k, item));
                 if (comma == std::string_view::npos) break;
                 v.remove_prefix(comma + 1);
             }
         },
         [](const ScenarioConfig& c) {
             std::string out;
             for (std::size_t i = 0; i < c.lane_speeds_mps.size(); ++i) {
                 if (i) out += ", ";
                 out += fmt_double(c.lane_speeds_mps[i]);
             }
             return out;
         }},
        CSAM_REAL("lane_width_m", c.lane_width_m),
        CSAM_REAL("vehicle_density_per_km", c.vehicle_density_per_km),
        CSAM_REAL("unknown_objects_per_km", c.unknown_objects_per_km),
        CSAM_INT("unknown_object_resolution", int, c.unknown_object_resolution),
        CSAM_REAL("tx_power_dbm", c.tx_power_dbm),
        CSAM_REAL("tx_range_m", c.tx_range_m),
        CSAM_REAL("tx_frequency_hz", c.tx_frequency_hz),
        CSAM_REAL("data_rate_bps", c.phy.data_rate_bps),
        CSAM_REAL("overhead_fraction", c.overhead_fraction),
        CSAM_INT("q_min", int, c.q_min),
        CSAM_REAL("cbr_target", c.cbr_target),
        CSAM_REAL("controller_gain", c.controller_gain),
        CSAM_BOOL("control_enabled", c.control_enabled),
        CSAM_INT("fixed_message_size_bytes", int, c.fixed_message_size_bytes),
        CSAM_REAL("r0_m", c.r0_m),
        {"selection_mode",
         [](ScenarioConfig& c, std::string_view k, std::string_view v) {
             if (v == "paper_literal")
                 c.selection_mode = SelectionMode::PaperLiteral;
             else if (v == "shifted_exponential")
                 c.selection_mode = SelectionMode::ShiftedExponential;
             else
                 bad_value(k, v, "paper_literal or shifted_exponential");
         },
         [](const ScenarioConfig& c) {
             return std::string(c.selection_mode == SelectionMode::PaperLiteral ? "paper_literal"
                                                                                : "shifted_exponential");
         }},
        CSAM_REAL("r_scale_m", c.r_scale_m),
        CSAM_BOOL("redundancy_filter", c.redundancy_filter),
        CSAM_REAL("redundancy_period_s", c.redundancy_period_s),
        CSAM_INT("n_min", int, c.n_min),
        CSAM_INT("n_max", int, c.n_max),
        CSAM_INT("history_len", int, c.history_len),
        CSAM_INT("l_k_bytes", int, c.l_k_bytes),
        CSAM_INT("l_h_bytes", int, c.l_h_bytes),
        CSAM_INT("l_u_bytes", int, c.l_u_bytes),
        CSAM_INT("l_self_bytes", int, c.l_self_bytes),
        CSAM_REAL("sensing_radius_m", c.sensing_radius_m),
        CSAM_REAL("sensing_period_s", c.sensing_period_s),
        CSAM_REAL("sim_duration_s", c.sim_duration_s),
        CSAM_REAL("cbr_window_s", c.cbr_window_s),
        CSAM_REAL("metric_period_s", c.metric_period_s),
        CSAM_REAL("warmup_s", c.warmup_s),
        CSAM_INT("seed", std::uint64_t, c.seed),
        CSAM_REAL("noise_floor_dbm", c.phy.noise_floor_dbm),
        CSAM_REAL("carrier_sense_dbm", c.phy.carrier_sense_dbm),
        CSAM_REAL("reception_sinr_db", c.phy.reception_sinr_db),
        CSAM_REAL("bandwidth_hz", c.phy.bandwidth_hz),
        CSAM_REAL("carrier_frequency_hz", c.phy.carrier_frequency_hz),
        CSAM_REAL("path_loss_exponent", c.phy.path_loss_exponent),
        CSAM_REAL("epsilon_r", c.phy.epsilon_r),
        CSAM_REAL("tx_antenna_height_m", c.phy.tx_antenna_height_m),
        CSAM_REAL("rx_antenna_height_m", c.phy.rx_antenna_height_m),
        CSAM_BOOL("fading_enabled", c.phy.fading_enabled),
        CSAM_REAL("nakagami_m0", c.phy.nakagami.m0),
        CSAM_REAL("nakagami_d1_m", c.phy.nakagami.d1_m),
        CSAM_REAL("nakagami_m1", c.phy.nakagami.m1),
        CSAM_REAL("nakagami_d2_m", c.phy.nakagami.d2_m),
        CSAM_REAL("nakagami_m2", c.phy.nakagami.m2),
        CSAM_INT("aifsn", int, c.mac.aifsn),
        CSAM_INT("cw_min", int, c.mac.cw_min),
        CSAM_REAL("slot_time_us", c.mac.slot_time_us),
        CSAM_REAL("sifs_us", c.mac.sifs_us),
        CSAM_REAL("preamble_plcp_us", c.mac.preamble_plcp_us),
        CSAM_INT("per_fragment_overhead_bytes", int, c.mac.per_fragment_overhead_bytes),
        CSAM_INT("fragmentation_threshold_bytes", int, c.mac.fragmentation_threshold_bytes),
    };
    return table;
}

#undef CSAM_REAL
#undef CSAM_INT
#undef CSAM_BOOL

const KeySpec* find_key(std::string_view name) {
    if (name == "density") name = "vehicle_density_per_km";
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

void apply_range_preset(ScenarioConfig& cfg, std::string_view value) {
    std::string name(value);
    if (name.back() != 'm') name += 'm';
    for (const auto& p : range_presets()) {
        if (p.name == name) {
            cfg.tx_power_dbm = p.tx_power_dbm;
            cfg.tx_range_m = p.range_m;
            return;
        }
    }
    bad_value("range", value, "one of 250m, 500m, 1000m");
}

[[noreturn]] void invalid(std::string_view key, const std::string& why) {
    throw ConfigError("invalid '" + std::string(key) + "': " + why, 0, std::string(key));
}

}  // namespace

const std::vector<RangePreset>& range_presets() {
    static const std::vector<RangePreset> presets = {
        {"250m", 250.0, 10.0},
        {"500m", 500.0, 21.0},
        {"1000m", 1000.0, 31.0},
    };
    return presets;
}

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "range") {
        apply_range_preset(cfg, value);
        return;
    }
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("unknown key '" + std::string(key) + "'", 0, std::string(key));
    spec->set(cfg, key, value);
}

ScenarioConfig parse_scenario(std::string_view text) {
    struct Assignment {
        int line;
        std::string key;
        std::string value;
    };
    std::vector<Assignment> assignments;
    int line_no = 0;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no, "");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": missing key", line_no, "");
        if (value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": missing value for '" + std::string(key) + "'",
                              line_no, std::string(key));
        assignments.push_back({line_no, std::string(key), std::string(value)});
    }

    ScenarioConfig cfg;
    // Presets first so explicit keys override them regardless of order.
    std::stable_partition(assignments.begin(), assignments.end(), [](const Assignment& a) { return a.key == "range"; });
    for (const auto& a : assignments) {
        try {
            apply_setting(cfg, a.key, a.value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(a.line) + ": " + e.what(), a.line, e.key());
        }
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

void validate(const ScenarioConfig& c) {
    auto positive = [](std::string_view key, double v) {
        if (!(v > 0.0)) invalid(key, "must be strictly positive");
    };
    positive("road_length_m", c.road_length_m);
    if (c.lanes_per_direction < 1) invalid("lanes_per_direction", "must be at least 1");
    if (static_cast<int>(c.lane_speeds_mps.size()) != c.lanes_per_direction)
        invalid("lane_speeds_mps", "needs exactly lanes_per_direction entries");
    for (double v : c.lane_speeds_mps) positive("lane_speeds_mps", v);
    positive("lane_width_m", c.lane_width_m);
    if (c.vehicle_density_per_km < 0.0) invalid("vehicle_density_per_km", "must be non-negative");
    if (c.unknown_objects_per_km < 0.0) invalid("unknown_objects_per_km", "must be non-negative");
    if (c.unknown_object_resolution < 1) invalid("unknown_object_resolution", "must be at least 1");
    positive("tx_range_m", c.tx_range_m);
    positive("tx_frequency_hz", c.tx_frequency_hz);
    positive("data_rate_bps", c.phy.data_rate_bps);
    if (!(c.overhead_fraction >= 0.0 && c.overhead_fraction < 1.0))
        invalid("overhead_fraction", "must lie in [0, 1)");
    if (c.q_min < 1) invalid("q_min", "must be at least 1");
    if (!(c.cbr_target > 0.0 && c.cbr_target < 1.0)) invalid("cbr_target", "must lie in (0, 1)");
    positive("controller_gain", c.controller_gain);
    if (c.fixed_message_size_bytes < 0) invalid("fixed_message_size_bytes", "must be non-negative");
    positive("r0_m", c.r0_m);
    positive("r_scale_m", c.r_scale_m);
    positive("redundancy_period_s", c.redundancy_period_s);
    if (c.n_min < 1) invalid("n_min", "must be at least 1");
    if (c.n_max < 1) invalid("n_max", "must be at least 1");
    if (c.history_len < 0) invalid("history_len", "must be non-negative");
    if (c.history_len > 255) invalid("history_len", "must fit in one byte");
    if (c.l_k_bytes < 60) invalid("l_k_bytes", "must hold the 60-byte known record");
    if (c.l_u_bytes < 32) invalid("l_u_bytes", "must hold the 32-byte cube record");
    if (c.history_len > 0) {
        if (c.l_h_bytes % c.history_len != 0) invalid("l_h_bytes", "must be a multiple of history_len");
        if (c.l_h_bytes / c.history_len < 8) invalid("l_h_bytes", "needs at least 8 bytes per history entry");
    }
    if (c.l_h_bytes < 1) invalid("l_h_bytes", "must be strictly positive");
    int self_need = c.l_k_bytes + (c.history_len > 0 ? c.l_h_bytes : 0);
    if (c.l_self_bytes < self_need) invalid("l_self_bytes", "must hold one known record plus its history block");
    positive("sensing_radius_m", c.sensing_radius_m);
    positive("sensing_period_s", c.sensing_period_s);
    positive("sim_duration_s", c.sim_duration_s);
    positive("cbr_window_s", c.cbr_window_s);
    positive("metric_period_s", c.metric_period_s);
    if (c.warmup_s < 0.0) invalid("warmup_s", "must be non-negative");
    if (c.phy.carrier_sense_dbm < c.phy.noise_floor_dbm)
        invalid("carrier_sense_dbm", "must not be below the noise floor");
    positive("bandwidth_hz", c.phy.bandwidth_hz);
    positive("carrier_frequency_hz", c.phy.carrier_frequency_hz);
    positive("path_loss_exponent", c.phy.path_loss_exponent);
    positive("epsilon_r", c.phy.epsilon_r);
    positive("tx_antenna_height_m", c.phy.tx_antenna_height_m);
    positive("rx_antenna_height_m", c.phy.rx_antenna_height_m);
    positive("nakagami_m0", c.phy.nakagami.m0);
    positive("nakagami_m1", c.phy.nakagami.m1);
    positive("nakagami_m2", c.phy.nakagami.m2);
    if (!(c.phy.nakagami.d1_m > 0.0 && c.phy.nakagami.d2_m >= c.phy.nakagami.d1_m))
        invalid("nakagami_d2_m", "segment edges must satisfy 0 < d1 <= d2");
    if (c.mac.aifsn < 1) invalid("aifsn", "must be at least 1");
    if (c.mac.cw_min < 1) invalid("cw_min", "must be at least 1");
    positive("slot_time_us", c.mac.slot_time_us);
    positive("sifs_us", c.mac.sifs_us);
    if (c.mac.preamble_plcp_us < 0.0) invalid("preamble_plcp_us", "must be non-negative");
    if (c.mac.per_fragment_overhead_bytes < 0) invalid("per_fragment_overhead_bytes", "must be non-negative");
    if (c.mac.fragmentation_threshold_bytes < 1) invalid("fragmentation_threshold_bytes", "must be at least 1");
}

std::string to_scenario_text(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& k : key_table()) {
        out += k.name;
        out += " = ";
        out += k.get(cfg);
        out += '\n';
    }
    return out;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    for (const auto& k : key_table())
        if (k.get(a) != k.get(b)) return false;
    return true;
}

}  // namespace csam
