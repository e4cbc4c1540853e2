#pragma once

#include <span>
#include <stdexcept>

#include "csam/radio_params.hpp"
#include "csam/rng.hpp"
#include "csam/sim_time.hpp"

namespace csam {

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Ground reflection coefficient and interference factor |1 + Gamma e^{i phi}|^2
/// of the two-ray interference model at horizontal distance d.
double two_ray_interference_factor(double distance_m, const PhyParams& params);

/// Log-distance loss of the direct ray: 10 log10((4 pi)^2 d^alpha / lambda^2).
double direct_path_loss_db(double distance_m, const PhyParams& params);

/// Two-ray interference path loss in dB (direct-ray loss minus the interference gain).
double two_ray_path_loss_db(double distance_m, const PhyParams& params);

/// Same model with the interference nulls removed: below the outermost
/// constructive peak the factor is replaced by its upper envelope (1 + |Gamma|)^2.
double smoothed_path_loss_db(double distance_m, const PhyParams& params);

/// Mean received power (no fading).
double mean_rx_power_dbm(double tx_power_dbm, double distance_m, const PhyParams& params);

/// Nakagami shape for a link distance.
double nakagami_shape(double distance_m, const NakagamiProfile& profile);

/// Received power including a Nakagami power draw (unit mean) when fading is enabled.
double rx_power_dbm(double tx_power_dbm, double distance_m, const PhyParams& params, Rng& rng);

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CalibrationOptions {
    double success_target = 0.9;
    double min_power_dbm = -20.0;
    double max_power_dbm = 40.0;
    int trials = 20000;
    double tolerance_db = 0.01;
    std::uint64_t seed = 7;
};

/// Interference-free single-packet success probability at `distance_m`,
/// estimated by Monte Carlo over fading, using the null-free path loss.
double reception_probability(double tx_power_dbm, double distance_m, const PhyParams& params, int trials, Rng& rng);

/// Lowest transmit power (bisection) whose single-packet success at the target
/// range meets the target probability.
double calibrate_power_for_range(double target_range_m, const PhyParams& params, const CalibrationOptions& opts = {});

enum class RxResult { Received, LostHalfDuplex, LostWeakSignal, LostCollision };

struct Interferer {
    double power_dbm = 0.0;
    SimTime start;
    SimTime end;
};

/// Reception decision for one fragment over [start, end): the receiver must not
/// transmit, the signal must clear noise + SINR threshold, and the SINR against
/// the peak summed interference (linear) must stay above threshold throughout.
RxResult receive_outcome(double signal_dbm, SimTime start, SimTime end, std::span<const Interferer> concurrent,
                         bool receiver_transmitting, const PhyParams& params);

/// Peak summed interference power (mW) over [start, end).
double peak_interference_mw(SimTime start, SimTime end, std::span<const Interferer> concurrent);

/// Decision given signal and peak interference powers in mW.
RxResult sinr_decision(double signal_mw, double peak_interference_mw, bool half_duplex, const PhyParams& params);

}  // namespace csam
