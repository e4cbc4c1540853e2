#include <doctest.h>

#include "csam/engine.hpp"

using namespace csam;

namespace {

ScenarioConfig small(double duration_s = 3.0) {
    ScenarioConfig c;
    c.road_length_m = 1000.0;
    c.vehicle_density_per_km = 20.0;
    c.sim_duration_s = duration_s;
    c.warmup_s = 1.0;
    c.seed = 3;
    return c;
}

std::uint64_t total_expected(const MetricsStore& m) {
    std::uint64_t n = 0;
    for (const auto& b : m.per(false)) n += b.expected_pkt;
    return n;
}

}  // namespace

TEST_CASE("an empty road only processes the end event") {
    ScenarioConfig c = small();
    c.vehicle_density_per_km = 0.0;
    const RunOutput out = run(c);
    CHECK(out.stats.events == 1);
    CHECK(out.metrics.cbr_series().empty());
    CHECK(out.metrics.messages_generated() == 0);
}

TEST_CASE("runs are deterministic for a seed") {
    const ScenarioConfig c = small();
    const RunOutput a = run(c);
    const RunOutput b = run(c);
    CHECK(a.metrics == b.metrics);
    CHECK(a.stats.events == b.stats.events);
    CHECK(cbr_csv(a.metrics) == cbr_csv(b.metrics));

    ScenarioConfig other = c;
    other.seed = 4;
    CHECK_FALSE(run(other).metrics == a.metrics);
}

TEST_CASE("every fragment is accounted for at every in-range receiver") {
    // On a 1 km ring no receiver is beyond the 1 km metric range.
    const ScenarioConfig c = small();
    const RunOutput out = run(c);
    const std::uint64_t others = 20 - 1;
    const std::uint64_t expected = total_expected(out.metrics);
    CHECK(out.stats.fragments_sent > 0);
    CHECK(expected % others == 0);
    CHECK(expected <= out.stats.fragments_sent * others);
    CHECK(expected + 20 * others >= out.stats.fragments_sent * others);  // at most one fragment on air per sender
    CHECK(out.stats.causality_violations == 0);
    CHECK(out.stats.decode_failures == 0);
}

TEST_CASE("generation rate and cbr sampling") {
    const ScenarioConfig c = small(4.0);
    const RunOutput out = run(c);
    // 5 Hz, 20 vehicles, random phase in the first epoch.
    CHECK(out.metrics.messages_generated() == 20 * 20);
    CHECK(out.metrics.cbr_series().size() == 20 * 4);
    for (const auto& s : out.metrics.cbr_series()) {
        CHECK(s.cbr >= 0.0);
        CHECK(s.cbr <= 1.0);
    }
}

TEST_CASE("information age stays within the run") {
    ScenarioConfig c = small(5.0);
    c.sensing_radius_m = 50.0;
    EngineOptions opts;
    opts.keep_raw_ia = true;
    const RunOutput out = run(c, opts);
    REQUIRE_FALSE(out.metrics.raw_ia().empty());
    bool fresh = false;
    for (const auto& s : out.metrics.raw_ia()) {
        CHECK(s.distance_m > c.sensing_radius_m);
        if (s.never_seen) continue;
        CHECK(s.age_s >= 0.0);
        CHECK(s.age_s <= s.t_s);
        fresh = fresh || s.age_s < 0.2;
    }
    CHECK(fresh);
}

TEST_CASE("control trace stays within the controller bounds") {
    ScenarioConfig c = small(3.0);
    EngineOptions opts;
    opts.control_trace = true;
    const RunOutput out = run(c, opts);
    REQUIRE_FALSE(out.control_trace.empty());
    for (const auto& row : out.control_trace) {
        CHECK(row.l_opt >= 316);
        CHECK(row.l_opt <= 5400);
        CHECK(row.message_bytes <= static_cast<std::size_t>(row.l_opt));
    }
    CHECK(control_trace_csv(out.control_trace).rfind(kControlTraceCsvHeader, 0) == 0);
}

TEST_CASE("fixed-size mode charges exactly the configured length") {
    ScenarioConfig c = small(2.0);
    c.control_enabled = false;
    c.fixed_message_size_bytes = 3980;
    const RunOutput out = run(c);
    CHECK(out.metrics.mean_message_bytes() == 3980.0);
}
