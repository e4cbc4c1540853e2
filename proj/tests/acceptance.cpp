// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "csam/codec.hpp"
#include "csam/content_control.hpp"
#include "csam/engine.hpp"
#include "support/message_gen.hpp"
#include "support/mutate.hpp"
#include "support/pack_oracle.hpp"

using namespace csam;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ScenarioConfig load(const char* name) { return load_scenario(std::string(CSAM_SCENARIO_DIR) + "/" + name); }

Verdict l_max_arithmetic() {
    const int l = compute_l_max(6e6, 5.0, 0.1, 25);
    return {l == 5400, fmt("L_max=%d", l)};
}

Verdict baseline_sizes() {
    const std::size_t xs[] = {0, 62, 125, 250};
    const std::size_t want[] = {260, 3980, 7760, 15260};
    std::string got;
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
        const std::size_t s = baseline_message_size(xs[i]);
        ok = ok && s == want[i];
        got += fmt("%zu ", s);
    }
    return {ok, "sizes " + got};
}

Verdict packer_oracle() {
    Rng rng(31);
    int mismatches = 0, over_budget = 0;
    for (int i = 0; i < 1000; ++i) {
        const long long budget = rng.uniform_int(0, 10000);
        const int k = static_cast<int>(rng.uniform_int(0, 300));
        const int u = static_cast<int>(rng.uniform_int(0, 300));
        const int lk = static_cast<int>(rng.uniform_int(8, 128));
        const int lh = static_cast<int>(rng.uniform_int(8, 128));
        const int lu = static_cast<int>(rng.uniform_int(8, 128));
        const PackPlan got = pack_counts(budget, k, u, lk, lh, lu);
        if (!(got == testing::pack_oracle(budget, k, u, lk, lh, lu, kDefaultMaxResolution))) ++mismatches;
        if (got.bytes(lk, lh, lu) > budget) ++over_budget;
    }
    return {mismatches == 0 && over_budget == 0,
            fmt("1000 instances, %d mismatches, %d over budget", mismatches, over_budget)};
}

Verdict worked_pack() {
    const PackPlan p = pack_counts(1000, 5, 3, 60, 40, 20);
    const long long bytes = p.bytes(60, 40, 20);
    const bool ok = p == PackPlan{5, 5, 3, 8} && bytes == 980;
    return {ok, fmt("K_R=%d K_Rh=%d U_R=%d N=%d bytes=%lld", p.known, p.with_history, p.unknown, p.resolution, bytes)};
}

Verdict controller_convergence() {
    ScenarioConfig cfg;
    ControllerState s = make_controller(cfg);
    s.gain = 2000.0;
    auto cbr = [](int l) { return std::min(1.0, l / 8000.0); };
    int reached = -1;
    for (int i = 1; i <= 200; ++i) {
        s = update_message_size(s, cbr(s.l_opt));
        if (reached < 0 && std::fabs(cbr(s.l_opt) - 0.68) < 0.01) reached = i;
    }
    const double final_err = std::fabs(cbr(s.l_opt) - 0.68);
    return {reached > 0 && final_err < 0.01,
            fmt("L=%d CBR=%.4f after 200 steps, within 0.01 from step %d", s.l_opt, cbr(s.l_opt), reached)};
}

Verdict selection_law() {
    const SelectionPolicy policy;
    const double radii[] = {50, 100, 150, 300};
    std::vector<double> prob;
    for (double r : radii) prob.push_back(selection_probability(r, policy));
    const int trials = 10000;
    std::vector<int> hits(prob.size(), 0);
    Rng rng(606);
    for (int t = 0; t < trials; ++t) {
        std::vector<char> chosen(prob.size(), 0);
        selection_pass(prob, chosen, static_cast<int>(prob.size()), rng);
        for (std::size_t i = 0; i < prob.size(); ++i) hits[i] += chosen[i];
    }
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double sigma = std::sqrt(trials * prob[i] * (1 - prob[i]));
        const double dev = std::fabs(hits[i] - trials * prob[i]);
        ok = ok && dev <= 3 * sigma;
        detail += fmt("r=%g p=%.4f freq=%.4f; ", radii[i], prob[i], hits[i] / double(trials));
    }
    for (double r : {0.0, 50.0, 99.999, 100.0}) ok = ok && selection_probability(r, policy) == 1.0;
    return {ok, detail + "p=1 for r<=100"};
}

Verdict codec() {
    const CodecLayout layout;
    Rng rng(77);
    int bad_trip = 0, bad_size = 0;
    for (int i = 0; i < 10000; ++i) {
        const CsamMessage m = testing::random_message(rng, layout);
        const auto bytes = encode(m, layout);
        if (bytes.size() != testing::size_oracle(m, layout)) ++bad_size;
        if (!(decode(bytes, layout) == m)) ++bad_trip;
    }
    // In-process mutation pass; the sanitizer-instrumented fuzz target runs the full budget.
    long long fuzzed = 0, bad_fuzz = 0;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (std::chrono::steady_clock::now() < deadline) {
        for (int i = 0; i < 200; ++i, ++fuzzed) {
            const auto input = testing::mutate(encode(testing::random_message(rng, layout, 12, 4, 6), layout), rng);
            try {
                if (encoded_size(decode(input, layout), layout) != input.size()) ++bad_fuzz;
            } catch (const DecodeError& e) {
                if (e.offset() > input.size()) ++bad_fuzz;
            }
        }
    }
    return {bad_trip == 0 && bad_size == 0 && bad_fuzz == 0,
            fmt("10000 round trips (%d size, %d value mismatches), %lld mutated inputs (%lld bad)", bad_size, bad_trip,
                fuzzed, bad_fuzz)};
}

Verdict size_trend() {
    ScenarioConfig base = load("desk_sweep.cfg");
    std::vector<double> cbr;
    std::string detail;
    for (int size : {260, 3980, 7760}) {
        ScenarioConfig c = base;
        c.fixed_message_size_bytes = size;
        cbr.push_back(run(c).metrics.mean_cbr());
        detail += fmt("L=%d CBR=%.3f; ", size, cbr.back());
    }
    ScenarioConfig dense = base;
    dense.vehicle_density_per_km = 125;
    dense.fixed_message_size_bytes = 7760;
    const double dense_cbr = run(dense).metrics.mean_cbr();
    detail += fmt("density 125 L=7760 CBR=%.3f", dense_cbr);
    return {cbr[0] < cbr[1] && cbr[1] < cbr[2] && dense_cbr > 0.8, detail};
}

struct ClosedLoopRuns {
    std::vector<RunOutput> with_control;
    std::vector<RunOutput> without_control;
};

const std::uint64_t kSeeds[] = {1, 2, 3};

ClosedLoopRuns& closed_loop() {
    static std::optional<ClosedLoopRuns> runs;
    if (!runs) {
        runs.emplace();
        for (std::uint64_t seed : kSeeds) {
            ScenarioConfig c = load("desk_1km.cfg");
            c.seed = seed;
            runs->with_control.push_back(run(c));
            c.control_enabled = false;
            runs->without_control.push_back(run(c));
        }
    }
    return *runs;
}

Verdict regulation() {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < std::size(kSeeds); ++i) {
        const MetricsStore& m = closed_loop().with_control[i].metrics;
        const double cbr = m.mean_cbr(50.0, 100.0);
        ok = ok && std::fabs(cbr - 0.68) <= 0.08;
        detail += fmt("seed %llu CBR(t>50)=%.3f; ", static_cast<unsigned long long>(kSeeds[i]), cbr);
    }
    return {ok, detail};
}

Verdict control_benefit() {
    const auto& runs = closed_loop();
    const std::size_t n = std::size(kSeeds);
    const MetricsStore& shape = runs.with_control[0].metrics;
    bool ok = true;
    std::string detail = "PER on/off:";
    for (std::size_t b = 0; b < shape.bin_count() && shape.bin_lo(b) < 500.0; ++b) {
        double on = 0, off = 0;
        int seen = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p_on = runs.with_control[i].metrics.per()[b].per_pkt();
            const auto p_off = runs.without_control[i].metrics.per()[b].per_pkt();
            if (!p_on || !p_off) continue;
            on += *p_on;
            off += *p_off;
            ++seen;
        }
        if (seen == 0) continue;
        ok = ok && on < off;
        detail += fmt(" %g:%.3f/%.3f", shape.bin_lo(b), on / seen, off / seen);
    }
    double ia_on = 0, ia_off = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ia_on += runs.with_control[i].metrics.mean_ia(1000.0).value_or(INFINITY);
        ia_off += runs.without_control[i].metrics.mean_ia(1000.0).value_or(INFINITY);
    }
    ok = ok && ia_on < ia_off;
    detail += fmt("; mean IA on/off %.3f/%.3f s", ia_on / n, ia_off / n);
    return {ok, detail};
}

Verdict determinism() {
    const RunOutput& first = closed_loop().with_control[0];
    ScenarioConfig c = load("desk_1km.cfg");
    c.seed = kSeeds[0];
    const RunOutput second = run(c);
    const bool ok = cbr_csv(first.metrics) == cbr_csv(second.metrics) &&
                    per_csv(first.metrics) == per_csv(second.metrics) &&
                    ia_csv(first.metrics) == ia_csv(second.metrics) &&
                    summary_csv(first.metrics) == summary_csv(second.metrics);
    return {ok, ok ? "four CSVs byte-identical" : "CSV outputs differ"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"L_max arithmetic", l_max_arithmetic},
        {"baseline message sizes", baseline_sizes},
        {"packer oracle equivalence", packer_oracle},
        {"worked packer case", worked_pack},
        {"controller convergence", controller_convergence},
        {"selection probability law", selection_law},
        {"codec round trip and fuzz", codec},
        {"CBR grows with message size", size_trend},
        {"closed-loop CBR regulation", regulation},
        {"control lowers PER and IA", control_benefit},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failed;
        std::printf("%s %2zu %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
