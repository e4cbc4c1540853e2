#include "csam/phy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

namespace csam {
namespace {

constexpr double kSpeedOfLight = 299792458.0;

struct RayGeometry {
    double d_los;
    double d_ref;
    double gamma;  // real for real epsilon_r
    double phase;
};

RayGeometry geometry(double d, const PhyParams& p) {
    const double ht = p.tx_antenna_height_m;
    const double hr = p.rx_antenna_height_m;
    RayGeometry g;
    g.d_los = std::hypot(d, ht - hr);
    g.d_ref = std::hypot(d, ht + hr);
    const double sin_t = (ht + hr) / g.d_ref;
    const double cos_t = d / g.d_ref;
    const double root = std::sqrt(p.epsilon_r - cos_t * cos_t);
    g.gamma = (sin_t - root) / (sin_t + root);
    const double lambda = kSpeedOfLight / p.carrier_frequency_hz;
    g.phase = 2.0 * std::numbers::pi * (g.d_ref - g.d_los) / lambda;
    return g;
}

}  // namespace

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double two_ray_interference_factor(double distance_m, const PhyParams& params) {
    const RayGeometry g = geometry(distance_m, params);
    const std::complex<double> sum = 1.0 + g.gamma * std::polar(1.0, g.phase);
    return std::norm(sum);
}

double direct_path_loss_db(double distance_m, const PhyParams& params) {
    const double lambda = kSpeedOfLight / params.carrier_frequency_hz;
    const double d_los = geometry(distance_m, params).d_los;
    return 20.0 * std::log10(4.0 * std::numbers::pi / lambda) + 10.0 * params.path_loss_exponent * std::log10(d_los);
}

double two_ray_path_loss_db(double distance_m, const PhyParams& params) {
    return direct_path_loss_db(distance_m, params) - 10.0 * std::log10(two_ray_interference_factor(distance_m, params));
}

double smoothed_path_loss_db(double distance_m, const PhyParams& params) {
    const RayGeometry g = geometry(distance_m, params);
    // Phase decreases with distance; past the outermost peak (phase < pi) the
    // factor is monotone and has no nulls.
    double factor = g.phase <= std::numbers::pi ? two_ray_interference_factor(distance_m, params)
                                                : (1.0 + std::fabs(g.gamma)) * (1.0 + std::fabs(g.gamma));
    return direct_path_loss_db(distance_m, params) - 10.0 * std::log10(factor);
}

double mean_rx_power_dbm(double tx_power_dbm, double distance_m, const PhyParams& params) {
    return tx_power_dbm - two_ray_path_loss_db(distance_m, params);
}

double nakagami_shape(double distance_m, const NakagamiProfile& profile) {
    if (distance_m < profile.d1_m) return profile.m0;
    if (distance_m < profile.d2_m) return profile.m1;
    return profile.m2;
}

double rx_power_dbm(double tx_power_dbm, double distance_m, const PhyParams& params, Rng& rng) {
    double p = mean_rx_power_dbm(tx_power_dbm, distance_m, params);
    if (params.fading_enabled) p += mw_to_dbm(rng.gamma_unit_mean(nakagami_shape(distance_m, params.nakagami)));
    return p;
}

double reception_probability(double tx_power_dbm, double distance_m, const PhyParams& params, int trials, Rng& rng) {
    const double mean_mw = dbm_to_mw(tx_power_dbm - smoothed_path_loss_db(distance_m, params));
    const double threshold_mw = dbm_to_mw(params.noise_floor_dbm + params.reception_sinr_db);
    const double m = nakagami_shape(distance_m, params.nakagami);
    int ok = 0;
    for (int i = 0; i < trials; ++i) {
        const double gain = params.fading_enabled ? rng.gamma_unit_mean(m) : 1.0;
        if (mean_mw * gain >= threshold_mw) ++ok;
    }
    return static_cast<double>(ok) / trials;
}

double calibrate_power_for_range(double target_range_m, const PhyParams& params, const CalibrationOptions& opts) {
    if (!(target_range_m > 0.0)) throw CalibrationError("target range must be positive");
    // Common random numbers: every probe replays the same fading draws, which
    // makes the estimated success monotone in transmit power.
    const double m = nakagami_shape(target_range_m, params.nakagami);
    std::vector<double> gains(static_cast<std::size_t>(opts.trials), 1.0);
    if (params.fading_enabled) {
        Rng rng = Rng(opts.seed).derive("calibration");
        for (auto& g : gains) g = rng.gamma_unit_mean(m);
    }
    const double loss = smoothed_path_loss_db(target_range_m, params);
    const double threshold_dbm = params.noise_floor_dbm + params.reception_sinr_db;
    auto success = [&](double power_dbm) {
        const double margin_mw = dbm_to_mw(threshold_dbm - (power_dbm - loss));
        auto ok = std::count_if(gains.begin(), gains.end(), [&](double g) { return g >= margin_mw; });
        return static_cast<double>(ok) / static_cast<double>(gains.size());
    };
    double lo = opts.min_power_dbm;
    double hi = opts.max_power_dbm;
    if (success(hi) < opts.success_target)
        throw CalibrationError("target range " + std::to_string(target_range_m) + " m unreachable within power bounds");
    if (success(lo) >= opts.success_target) return lo;
    while (hi - lo > opts.tolerance_db) {
        const double mid = 0.5 * (lo + hi);
        (success(mid) >= opts.success_target ? hi : lo) = mid;
    }
    return hi;
}

double peak_interference_mw(SimTime start, SimTime end, std::span<const Interferer> concurrent) {
    // Sweep interval endpoints clipped to [start, end); ends sort before starts
    // at equal times since intervals are half-open.
    std::vector<std::pair<SimTime, double>> edges;
    for (const auto& i : concurrent) {
        SimTime s = std::max(i.start, start);
        SimTime e = std::min(i.end, end);
        if (s >= e) continue;
        double mw = dbm_to_mw(i.power_dbm);
        edges.emplace_back(s, mw);
        edges.emplace_back(e, -mw);
    }
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
    double level = 0.0, peak = 0.0;
    for (const auto& [t, delta] : edges) {
        level += delta;
        peak = std::max(peak, level);
    }
    return peak;
}

RxResult sinr_decision(double signal_mw, double peak_interference, bool half_duplex, const PhyParams& params) {
    if (half_duplex) return RxResult::LostHalfDuplex;
    const double noise = dbm_to_mw(params.noise_floor_dbm);
    const double ratio = dbm_to_mw(params.reception_sinr_db);  // dB -> linear
    if (signal_mw < noise * ratio) return RxResult::LostWeakSignal;
    if (signal_mw < ratio * (noise + peak_interference)) return RxResult::LostCollision;
    return RxResult::Received;
}

RxResult receive_outcome(double signal_dbm, SimTime start, SimTime end, std::span<const Interferer> concurrent,
                         bool receiver_transmitting, const PhyParams& params) {
    return sinr_decision(dbm_to_mw(signal_dbm), peak_interference_mw(start, end, concurrent), receiver_transmitting,
                         params);
}

}  // namespace csam
