#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csam/content_control.hpp"
#include "csam/metrics.hpp"
#include "csam/scenario.hpp"

namespace csam {

enum class EventKind : std::uint8_t {
    FragmentEnd = 0,
    CbrSample = 1,
    MetricSample = 2,
    SenseTick = 3,
    TxEpoch = 4,
    FragmentStart = 5,
    End = 6,
};

struct EngineOptions {
    bool keep_raw_ia = false;
    bool control_trace = false;
};

/// One controller step of one vehicle.
struct ControlTraceRow {
    double t_s = 0.0;
    std::uint32_t vehicle = 0;
    double cbr_observed = 0.0;
    int l_opt = 0;
    PackPlan plan;
    std::size_t message_bytes = 0;
};

struct EngineStats {
    std::uint64_t events = 0;
    std::uint64_t fragments_sent = 0;
    std::uint64_t fragments_superseded = 0;
    std::uint64_t messages_delivered = 0;
    std::uint64_t decode_failures = 0;
    std::uint64_t causality_violations = 0;
};

struct RunOutput {
    MetricsStore metrics;
    std::vector<ControlTraceRow> control_trace;
    EngineStats stats;
};

/// Runs one scenario to completion. Deterministic for a given config.
RunOutput run(const ScenarioConfig& cfg, const EngineOptions& opts = {});

inline constexpr const char* kControlTraceCsvHeader = "t,vehicle,cbr_observed,l_opt,K_R,K_Rh,U_R,N_OPT,message_bytes";
std::string control_trace_csv(const std::vector<ControlTraceRow>& rows);

}  // namespace csam
