// Command-line driver: single runs, parameter sweeps, packer and calibration
// helpers, and summary aggregation over run directories.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "csam/content_control.hpp"
#include "csam/engine.hpp"
#include "csam/phy.hpp"
#include "csam/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "csam_sim 1.0.0";
constexpr const char* kOutRootEnv = "CSAM_OUT_ROOT";
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Failure attributable to the invocation (bad path, bad config, bad flag).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path default_out(const std::string& leaf) {
    const char* root = std::getenv(kOutRootEnv);
    return fs::path(root && *root ? root : "out") / leaf;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

csam::ScenarioConfig load(const std::string& path) {
    if (!fs::exists(path)) throw UsageError("scenario file not found: " + path);
    try {
        return csam::load_scenario(path);
    } catch (const csam::ConfigError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

void apply_overrides(csam::ScenarioConfig& cfg, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
        try {
            csam::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        } catch (const csam::ConfigError& e) {
            throw UsageError(std::string("--set ") + s + ": " + e.what());
        }
    }
}

void validate_or_usage(const csam::ScenarioConfig& cfg) {
    try {
        csam::validate(cfg);
    } catch (const csam::ConfigError& e) {
        throw UsageError(e.what());
    }
}

std::string manifest(const csam::ScenarioConfig& cfg) {
    return std::string("# ") + kToolVersion + "\n# seed " + std::to_string(cfg.seed) +
           "\n# effective configuration; usable as --scenario to reproduce this run\n" + csam::to_scenario_text(cfg);
}

struct RunFiles {
    bool trace = false;
    bool full_run = false;
};

csam::RunOutput run_to_dir(const csam::ScenarioConfig& cfg, const fs::path& out, const RunFiles& files) {
    csam::EngineOptions opts;
    opts.control_trace = files.trace;
    csam::RunOutput result = csam::run(cfg, opts);
    fs::create_directories(out);
    write_file(out / "cbr_timeseries.csv", csam::cbr_csv(result.metrics));
    write_file(out / "per_by_distance.csv", csam::per_csv(result.metrics));
    write_file(out / "ia_by_distance.csv", csam::ia_csv(result.metrics));
    write_file(out / "summary.csv", csam::summary_csv(result.metrics));
    write_file(out / "manifest.txt", manifest(cfg));
    if (files.trace) write_file(out / "control_trace.csv", csam::control_trace_csv(result.control_trace));
    if (files.full_run) {
        write_file(out / "per_by_distance_full.csv", csam::per_csv(result.metrics, false));
        write_file(out / "ia_by_distance_full.csv", csam::ia_csv(result.metrics, false));
    }
    return result;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

const char* axis_key(const std::string& axis) {
    if (axis == "density") return "vehicle_density_per_km";
    if (axis == "tx_power") return "tx_power_dbm";
    if (axis == "message_size") return "fixed_message_size_bytes";
    if (axis == "control_enabled") return "control_enabled";
    return nullptr;
}

// ---- run --------------------------------------------------------------------

struct RunArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string control;
    std::vector<std::string> sets;
    bool trace = false;
    bool full_run = false;
};

int cmd_run(const RunArgs& a) {
    csam::ScenarioConfig cfg = load(a.scenario);
    apply_overrides(cfg, a.sets);
    if (a.seed) cfg.seed = *a.seed;
    if (!a.control.empty()) cfg.control_enabled = a.control == "on";
    validate_or_usage(cfg);
    const fs::path out = a.out.empty() ? default_out("run") : fs::path(a.out);
    const auto result = run_to_dir(cfg, out, {a.trace, a.full_run});
    std::printf("wrote %s: mean_cbr=%s offered_load_Bps=%s idr=%s\n", out.string().c_str(),
                csam::csv_real(result.metrics.mean_cbr()).c_str(), csam::csv_real(result.metrics.offered_load()).c_str(),
                csam::csv_real(result.metrics.idr_per_message()).c_str());
    return kExitOk;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
    std::string scenario;
    std::string axis;
    std::string values;
    std::string seeds = "1";
    std::string out;
    std::vector<std::string> sets;
    unsigned jobs = 0;
};

struct CellRun {
    std::size_t cell;
    std::uint64_t seed;
    bool ok = false;
    std::string error;
    double mean_cbr = 0, offered = 0, idr = 0, msg_bytes = 0;
    std::optional<double> per500, ia;
};

int cmd_sweep(const SweepArgs& a) {
    const char* key = axis_key(a.axis);
    if (!key) throw UsageError("unknown sweep axis '" + a.axis + "' (density, tx_power, message_size, control_enabled)");
    const auto values = split_list(a.values);
    if (values.empty()) throw UsageError("sweep values list is empty");
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(a.seeds)) {
        try {
            seeds.push_back(std::stoull(s));
        } catch (const std::exception&) {
            throw UsageError("bad seed '" + s + "'");
        }
    }
    if (seeds.empty()) throw UsageError("sweep seeds list is empty");

    csam::ScenarioConfig base = load(a.scenario);
    apply_overrides(base, a.sets);
    std::vector<csam::ScenarioConfig> cells;
    for (const auto& v : values) {
        csam::ScenarioConfig c = base;
        try {
            csam::apply_setting(c, key, v);
        } catch (const csam::ConfigError& e) {
            throw UsageError(a.axis + "=" + v + ": " + e.what());
        }
        cells.push_back(c);
    }

    const fs::path out = a.out.empty() ? default_out("sweep") : fs::path(a.out);
    fs::create_directories(out);
    std::vector<CellRun> runs;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (auto s : seeds) runs.push_back({c, s});

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            CellRun& r = runs[i];
            csam::ScenarioConfig cfg = cells[r.cell];
            cfg.seed = r.seed;
            try {
                csam::validate(cfg);
                const fs::path dir = out / (a.axis + "=" + values[r.cell]) / ("seed" + std::to_string(r.seed));
                const auto res = run_to_dir(cfg, dir, {});
                r.mean_cbr = res.metrics.mean_cbr();
                r.offered = res.metrics.offered_load();
                r.idr = res.metrics.idr_per_message();
                r.msg_bytes = res.metrics.mean_message_bytes();
                r.per500 = res.metrics.mean_per_pkt(500.0);
                r.ia = res.metrics.mean_ia(1000.0);
                r.ok = true;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
            std::lock_guard lock(log_mutex);
            std::fprintf(stderr, "%s=%s seed %llu: %s\n", a.axis.c_str(), values[r.cell].c_str(),
                         static_cast<unsigned long long>(r.seed), r.ok ? "ok" : r.error.c_str());
        }
    };
    const unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < std::min<std::size_t>(jobs, runs.size()); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string csv = "axis,value,runs,failed,mean_cbr,offered_load_Bps,idr,mean_message_bytes,mean_per_pkt_500m,mean_ia_s\n";
    bool any_failed = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        int n = 0, failed = 0, n_per = 0, n_ia = 0;
        double cbr = 0, off = 0, idr = 0, bytes = 0, per = 0, ia = 0;
        for (const auto& r : runs) {
            if (r.cell != c) continue;
            if (!r.ok) {
                ++failed;
                continue;
            }
            ++n;
            cbr += r.mean_cbr;
            off += r.offered;
            idr += r.idr;
            bytes += r.msg_bytes;
            if (r.per500) per += *r.per500, ++n_per;
            if (r.ia) ia += *r.ia, ++n_ia;
        }
        any_failed |= failed > 0;
        auto mean = [](double s, int k) { return k ? csam::csv_real(s / k) : std::string(); };
        csv += a.axis + "," + values[c] + "," + std::to_string(n + failed) + "," + std::to_string(failed) + "," +
               mean(cbr, n) + "," + mean(off, n) + "," + mean(idr, n) + "," + mean(bytes, n) + "," + mean(per, n_per) +
               "," + mean(ia, n_ia) + "\n";
    }
    write_file(out / "sweep_summary.csv", csv);
    std::fputs(csv.c_str(), stdout);
    return any_failed ? kExitRuntime : kExitOk;
}

// ---- summarize ----------------------------------------------------------------

int cmd_summarize(const std::vector<std::string>& dirs, const std::string& out) {
    std::string csv = std::string("run,") + csam::kSummaryCsvHeader + "\n";
    std::vector<double> sums(4, 0.0);
    int n = 0;
    for (const auto& d : dirs) {
        const fs::path path = fs::path(d) / "summary.csv";
        if (!fs::exists(path)) throw UsageError("no summary.csv in " + d);
        std::istringstream in(read_file(path));
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        if (header != csam::kSummaryCsvHeader) throw std::runtime_error(path.string() + ": unexpected header");
        const auto cols = split_list(row);
        if (cols.size() != 4) throw std::runtime_error(path.string() + ": expected 4 columns");
        for (std::size_t i = 0; i < 4; ++i) sums[i] += std::stod(cols[i]);
        ++n;
        csv += d + "," + row + "\n";
    }
    if (n > 0) {
        csv += "mean";
        for (double s : sums) csv += "," + csam::csv_real(s / n);
        csv += "\n";
    }
    if (!out.empty()) write_file(out, csv);
    std::fputs(csv.c_str(), stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative map-exchange simulator"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run one scenario and write CSV outputs");
    run->add_option("--scenario,-s", run_args.scenario, "Scenario file (key = value)")->required();
    run->add_option("--seed", run_args.seed, "Override the scenario seed");
    run->add_option("--out,-o", run_args.out, std::string("Output directory (default $") + kOutRootEnv + "/run)");
    run->add_option("--control", run_args.control, "Override control_enabled")->check(CLI::IsMember({"on", "off"}));
    run->add_option("--set", run_args.sets, "Override any scenario key (key=value, repeatable)");
    run->add_flag("--trace", run_args.trace, "Also write control_trace.csv");
    run->add_flag("--full-run", run_args.full_run, "Also write warm-up-inclusive PER and IA tables");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Run values x seeds and aggregate per-cell means");
    sweep->add_option("--scenario,-s", sweep_args.scenario, "Base scenario file")->required();
    sweep->add_option("--axis", sweep_args.axis, "density | tx_power | message_size | control_enabled")->required();
    sweep->add_option("--values", sweep_args.values, "Comma-separated axis values")->required();
    sweep->add_option("--seeds", sweep_args.seeds, "Comma-separated seeds")->capture_default_str();
    sweep->add_option("--out,-o", sweep_args.out, "Output directory");
    sweep->add_option("--set", sweep_args.sets, "Override any scenario key (key=value, repeatable)");
    sweep->add_option("--jobs,-j", sweep_args.jobs, "Parallel runs (default: hardware threads)");

    long long budget = 0;
    int k = 0, u = 0, lk = 0, lh = 0, lu = 0, max_res = csam::kDefaultMaxResolution;
    auto* pack = app.add_subcommand("pack", "Print the object-count plan for a byte budget");
    pack->add_option("budget", budget, "Object-record budget in bytes")->required()->check(CLI::NonNegativeNumber);
    pack->add_option("known", k, "Known candidates")->required()->check(CLI::NonNegativeNumber);
    pack->add_option("unknown", u, "Unknown candidates")->required()->check(CLI::NonNegativeNumber);
    pack->add_option("l_k", lk, "Known record bytes")->required()->check(CLI::PositiveNumber);
    pack->add_option("l_h", lh, "History block bytes")->required()->check(CLI::NonNegativeNumber);
    pack->add_option("l_u", lu, "Cube bytes")->required()->check(CLI::PositiveNumber);
    pack->add_option("--max-resolution", max_res, "Resolution cap")->capture_default_str();

    double range_m = 500.0;
    std::string cal_scenario;
    csam::CalibrationOptions cal_opts;
    auto* calibrate = app.add_subcommand("calibrate", "Find the transmit power that reaches a range");
    calibrate->add_option("--range", range_m, "Target range in metres")->capture_default_str();
    calibrate->add_option("--scenario,-s", cal_scenario, "Take PHY parameters from this scenario");
    calibrate->add_option("--target", cal_opts.success_target, "Success probability at range")->capture_default_str();
    calibrate->add_option("--trials", cal_opts.trials, "Fading draws")->capture_default_str();
    calibrate->add_option("--seed", cal_opts.seed, "Fading seed")->capture_default_str();

    std::vector<std::string> sum_dirs;
    std::string sum_out;
    auto* summarize = app.add_subcommand("summarize", "Tabulate summary.csv of run directories");
    summarize->add_option("dirs", sum_dirs, "Run directories")->required();
    summarize->add_option("--out,-o", sum_out, "Also write the table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(run_args);
        if (*sweep) return cmd_sweep(sweep_args);
        if (*pack) {
            const auto plan = csam::pack_counts(budget, k, u, lk, lh, lu, max_res);
            std::printf("K_R=%d K_Rh=%d U_R=%d N=%d bytes=%lld\n", plan.known, plan.with_history, plan.unknown,
                        plan.resolution, plan.bytes(lk, lh, lu));
            return kExitOk;
        }
        if (*calibrate) {
            csam::PhyParams phy;
            if (!cal_scenario.empty()) phy = load(cal_scenario).phy;
            const double p = csam::calibrate_power_for_range(range_m, phy, cal_opts);
            std::printf("range_m=%s tx_power_dbm=%.2f\n", csam::csv_real(range_m).c_str(), p);
            return kExitOk;
        }
        if (*summarize) return cmd_summarize(sum_dirs, sum_out);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
