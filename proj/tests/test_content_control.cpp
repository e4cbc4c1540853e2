#include <doctest.h>

#include <cmath>
#include <set>

#include "csam/content_control.hpp"
#include "support/pack_oracle.hpp"

using namespace csam;

namespace {

const RoadLayout kRoad{4000.0, 3.7, 3};

KnownRecord at(ObjectId id, double x) {
    KnownRecord r;
    r.id = id;
    r.extent_x = 4.5;
    r.extent_y = 1.8;
    r.x = x;
    return r;
}

/// Map of vehicle 0 holding known cars at the given along-road distances (ids 1..n).
LocalMap map_with(const std::vector<double>& xs, double received_at = 0.0) {
    LocalMap map(0);
    for (std::size_t i = 0; i < xs.size(); ++i)
        map.apply_received(at(static_cast<ObjectId>(i + 1), xs[i]), ObjectKind::Known, nullptr, 0, received_at, 99,
                           received_at);
    return map;
}

SelfState self_at_origin() {
    SelfState s;
    s.record = at(0, 0.0);
    s.history.assign(5, HistoryEntry{});
    return s;
}

}  // namespace

TEST_CASE("maximum message size") {
    CHECK(compute_l_max(6e6, 5, 0.1, 25) == 5400);
    CHECK(compute_l_max(1000, 1, 0, 1) == 125);
    CHECK(compute_l_max(6e6, 10, 0.2, 50) == 1200);
}

TEST_CASE("controller bounds from defaults") {
    const ControllerState s = make_controller(ScenarioConfig{});
    CHECK(s.l_max == 5400);
    CHECK(s.l_min == 24 + 260 + 32);
    CHECK(s.l_opt == s.l_min);
}

TEST_CASE("controller update law") {
    ControllerState s{5400, 316, 5400, 1234.0, 0.68};
    CHECK(update_message_size(s, 0.68).l_opt == 5400);
    s.l_opt = 4000;
    s.gain = 10000;
    CHECK(update_message_size(s, 0.78).l_opt == 3000);
    s.l_opt = s.l_min;
    CHECK(update_message_size(s, 0.95).l_opt == s.l_min);
    s.l_opt = 5000;
    CHECK(update_message_size(s, 0.0).l_opt == 5400);
}

TEST_CASE("controller step has the sign of the CBR error") {
    ControllerState s{2000, 316, 5400, 2000.0, 0.68};
    for (double cbr = 0.0; cbr <= 1.0; cbr += 0.01) {
        const int step = update_message_size(s, cbr).l_opt - s.l_opt;
        if (cbr < 0.68 - 1e-3) CHECK(step > 0);
        if (cbr > 0.68 + 1e-3) CHECK(step < 0);
    }
}

TEST_CASE("stability bound is two over the slope") {
    CHECK(stability_gain_bound(1.0 / 8000.0) == doctest::Approx(16000.0));
}

TEST_CASE("worked packing example") {
    const PackPlan p = pack_counts(1000, 5, 3, 60, 40, 20);
    CHECK(p == PackPlan{5, 5, 3, 8});
    CHECK(p.bytes(60, 40, 20) == 980);
    // One more resolution step would cost 300 + 200 + 540.
    CHECK(5 * 60 + 5 * 40 + 9 * 3 * 20 > 1000);
}

TEST_CASE("packing without unknown objects stops after one round") {
    CHECK(pack_counts(5400, 100, 0, 60, 40, 32) == PackPlan{90, 0, 0, 1});
}

TEST_CASE("budgets too small for any record give an empty plan") {
    CHECK(pack_counts(59, 10, 0, 60, 40, 32).empty());
    CHECK(pack_counts(59, 10, 0, 60, 40, 32) == PackPlan{});
    CHECK(pack_counts(0, 5, 3, 60, 40, 20) == PackPlan{});
    CHECK(pack_counts(-10, 5, 3, 60, 40, 20) == PackPlan{});
    CHECK(pack_counts(1000, 0, 0, 60, 40, 20) == PackPlan{});
}

TEST_CASE("resolution cap bounds N") {
    const PackPlan p = pack_counts(100000, 0, 1, 60, 40, 8, 16);
    CHECK(p.resolution == 16);
    CHECK(p.unknown == 1);
}

TEST_CASE("packer matches the oracle and respects the budget") {
    Rng rng(42);
    for (int i = 0; i < 3000; ++i) {
        const long long budget = rng.uniform_int(0, 10000);
        const int k = static_cast<int>(rng.uniform_int(0, 300));
        const int u = static_cast<int>(rng.uniform_int(0, 300));
        const int lk = static_cast<int>(rng.uniform_int(8, 128));
        const int lh = static_cast<int>(rng.uniform_int(8, 128));
        const int lu = static_cast<int>(rng.uniform_int(8, 128));
        const PackPlan got = pack_counts(budget, k, u, lk, lh, lu);
        REQUIRE(got == testing::pack_oracle(budget, k, u, lk, lh, lu, kDefaultMaxResolution));
        REQUIRE(got.bytes(lk, lh, lu) <= budget);
        REQUIRE(got.with_history <= got.known);
    }
}

TEST_CASE("redundancy filter windows") {
    LocalMap map = map_with({10.0, 20.0});
    map.apply_received(at(1, 10.0), ObjectKind::Known, nullptr, 0, 9.5, 5, 9.5);
    map.apply_received(at(2, 20.0), ObjectKind::Known, nullptr, 0, 8.5, 5, 8.5);
    map.apply_received(at(3, 30.0), ObjectKind::Unknown, nullptr, 1, 9.8, 5, 9.8);
    // Ledger entries from map_with are at t = 0; the newer ones above dominate.
    const CandidateIds c = redundancy_filter(map, 10.0, 1.0, 2);
    CHECK(std::find(c.known.begin(), c.known.end(), 1u) == c.known.end());  // heard 0.5 s ago
    CHECK(std::find(c.known.begin(), c.known.end(), 2u) != c.known.end());  // heard 1.5 s ago
    CHECK(c.unknown == std::vector<ObjectId>{3});                            // heard only at N=1 < N_min
    CHECK(redundancy_filter(map, 10.0, 1.0, 1).unknown.empty());
}

TEST_CASE("selection probability law") {
    SelectionPolicy p;
    CHECK(selection_probability(50, p) == 1.0);
    CHECK(selection_probability(100, p) == 1.0);
    CHECK(selection_probability(200, p) == doctest::Approx(std::exp(-1.0)));
    CHECK(selection_probability(200, p) == doctest::Approx(0.3679).epsilon(1e-4));
    SelectionPolicy literal{100, SelectionMode::PaperLiteral, 100};
    CHECK(literal.paper_lambda() < 0.0);
    CHECK(selection_probability(50, literal) == 1.0);
    CHECK(selection_probability(150, literal) == 0.0);
    SelectionPolicy fractional{0.5, SelectionMode::PaperLiteral, 100};
    const double lambda = 2.0 * std::log(2.0);
    CHECK(selection_probability(1.0, fractional) == doctest::Approx(std::min(1.0, lambda * std::exp(-lambda))));
}

TEST_CASE("selection inside r0 is a deterministic prefix") {
    std::vector<Candidate> c;
    for (int i = 0; i < 10; ++i) c.push_back({static_cast<ObjectId>(i), 5.0 + 9.0 * i});
    Rng rng(1);
    CHECK(select_objects(c, 4, SelectionPolicy{}, rng) == std::vector<ObjectId>{0, 1, 2, 3});
    const auto all = select_objects(c, 12, SelectionPolicy{}, rng);
    CHECK(std::set<ObjectId>(all.begin(), all.end()).size() == 10);
    CHECK(all.size() == 10);
}

TEST_CASE("repeated passes fill the slots and never repeat a candidate") {
    std::vector<Candidate> c;
    for (int i = 0; i < 30; ++i) c.push_back({static_cast<ObjectId>(i), 100.0 + 50.0 * i});
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto got = select_objects(c, 10, SelectionPolicy{}, rng);
        REQUIRE(got.size() == 10);
        REQUIRE(std::set<ObjectId>(got.begin(), got.end()).size() == 10);
    }
    // Zero-probability candidates are filled nearest first.
    SelectionPolicy literal{100, SelectionMode::PaperLiteral, 100};
    CHECK(select_objects(c, 3, literal, rng) == std::vector<ObjectId>{0, 1, 2});
}

TEST_CASE("single-pass inclusion frequency follows the law") {
    const std::vector<double> distances{50, 100, 150, 300, 180, 250};
    std::vector<double> prob;
    for (double d : distances) prob.push_back(selection_probability(d, SelectionPolicy{}));
    std::vector<int> hits(distances.size(), 0);
    Rng rng(77);
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        std::vector<char> chosen(distances.size(), 0);
        selection_pass(prob, chosen, static_cast<int>(distances.size()), rng);
        for (std::size_t i = 0; i < distances.size(); ++i) hits[i] += chosen[i];
    }
    for (std::size_t i = 0; i < distances.size(); ++i) {
        const double p = prob[i];
        const double sigma = std::sqrt(p * (1 - p) / trials);
        CHECK(std::fabs(hits[i] / double(trials) - p) <= 3 * sigma + 1e-12);
    }
}

TEST_CASE("csam with ample budget carries every candidate") {
    const LocalMap map = map_with({20, 40, 60, 80});
    ScenarioConfig cfg;
    cfg.redundancy_filter = false;
    ControllerState s = make_controller(cfg);
    s.l_opt = s.l_max;
    Rng rng(4);
    const auto built = build_csam(map, self_at_origin(), s, SelectionPolicy{}, cfg, kRoad, 1.0, 0, rng);
    CHECK(built.message.known.size() == 4);
    CHECK(built.message.histories.size() == 4);
    CHECK(encoded_size(built.message, CodecLayout::from(cfg)) <= static_cast<std::size_t>(s.l_opt));
}

TEST_CASE("saturated budget leaves less than one record of slack") {
    std::vector<double> xs;
    for (int i = 0; i < 200; ++i) xs.push_back(5.0 + 2.0 * i);
    const LocalMap map = map_with(xs);
    ScenarioConfig cfg;
    cfg.redundancy_filter = false;
    Rng rng(5);
    const CodecLayout layout = CodecLayout::from(cfg);
    for (int l_opt = 316; l_opt <= 5400; l_opt += 97) {
        ControllerState s = make_controller(cfg);
        s.l_opt = l_opt;
        const auto built = build_csam(map, self_at_origin(), s, SelectionPolicy{}, cfg, kRoad, 1.0, 0, rng);
        const auto size = static_cast<int>(encoded_size(built.message, layout));
        CHECK(size <= l_opt);
        CHECK(size > l_opt - std::max({layout.l_k, layout.l_h, layout.l_u}));
    }
}

TEST_CASE("recently overheard candidates leave a self-only message") {
    const LocalMap map = map_with({20, 40, 60}, 0.8);
    ScenarioConfig cfg;
    ControllerState s = make_controller(cfg);
    s.l_opt = s.l_max;
    Rng rng(6);
    const auto built = build_csam(map, self_at_origin(), s, SelectionPolicy{}, cfg, kRoad, 1.0, 0, rng);
    CHECK(built.message.known.empty());
    CHECK(built.message.unknown.empty());
    CHECK(built.plan.empty());
    CHECK(encoded_size(built.message, CodecLayout::from(cfg)) == 284);
}

TEST_CASE("baseline message carries cars within range, nearest first") {
    const LocalMap map = map_with({300, 100, 700, 450});
    ScenarioConfig cfg;
    const auto msg = build_baseline_csam(map, self_at_origin(), cfg, kRoad, 1.0, 0);
    REQUIRE(msg.known.size() == 3);
    CHECK(msg.known[0].id == 2u);
    CHECK(msg.known[2].id == 4u);
    CHECK(msg.histories.empty());
    cfg.fixed_message_size_bytes = 24 + 260 + 2 * 60 + 59;
    CHECK(build_baseline_csam(map, self_at_origin(), cfg, kRoad, 1.0, 0).known.size() == 2);
}

TEST_CASE("fixed-length history pads with the oldest slot") {
    MapEntry e;
    e.snapshot = at(1, 50);
    CHECK(fixed_length_history(e, 3) == std::vector<HistoryEntry>(3, HistoryEntry{50, 0, 0, 0, 0}));
    e.history = {{49, 0, 0, 0, 0}, {48, 0, 0, 0, 0}};
    const auto h = fixed_length_history(e, 4);
    CHECK(h[0].x == 49);
    CHECK(h[3].x == 48);
}
