#pragma once

namespace csam {

/// Distance-segmented Nakagami shape profile (NS-3 style: m0 below d1,
/// m1 in [d1, d2), m2 from d2 on).
struct NakagamiProfile {
    double m0 = 1.5;
    double d1_m = 80.0;
    double m1 = 0.75;
    double d2_m = 200.0;
    double m2 = 0.75;
};

struct PhyParams {
    double noise_floor_dbm = -99.0;
    double carrier_sense_dbm = -94.0;
    double reception_sinr_db = 7.0;
    double bandwidth_hz = 10e6;
    double carrier_frequency_hz = 5.89e9;
    double path_loss_exponent = 2.0;
    double epsilon_r = 1.025;
    double tx_antenna_height_m = 1.5;
    double rx_antenna_height_m = 1.5;
    bool fading_enabled = true;
    NakagamiProfile nakagami;
    double data_rate_bps = 6e6;
};

struct MacParams {
    int aifsn = 2;
    int cw_min = 15;
    double slot_time_us = 13.0;
    double sifs_us = 32.0;
    double preamble_plcp_us = 40.0;
    int per_fragment_overhead_bytes = 36;
    int fragmentation_threshold_bytes = 1500;

    double aifs_us() const { return sifs_us + aifsn * slot_time_us; }
};

}  // namespace csam
