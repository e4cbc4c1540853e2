#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace csam {

struct PerBin {
    std::uint64_t expected_pkt = 0;
    std::uint64_t lost_pkt = 0;
    std::uint64_t expected_msg = 0;
    std::uint64_t lost_msg = 0;

    /// Absent (nullopt) when nothing was expected in the bin.
    std::optional<double> per_pkt() const;
    std::optional<double> per_msg() const;
};

struct IaBin {
    std::uint64_t count = 0;
    double sum_s = 0.0;
    std::uint64_t never_seen = 0;
    std::vector<std::uint32_t> histogram;  // counts per histogram step

    std::optional<double> mean_s() const;
};

struct CbrSample {
    double t_s = 0.0;
    std::uint32_t vehicle = 0;
    double cbr = 0.0;
};

struct IaRawSample {
    double t_s;
    std::uint32_t receiver;
    std::uint32_t object;
    double distance_m;
    double age_s;
    bool never_seen;
};

/// Which accumulator set a sample lands in: every sample goes to the full-run
/// set, and samples at or after the warm-up also go to the steady set.
struct MetricsConfig {
    double bin_width_m = 50.0;
    double max_distance_m = 1000.0;
    double warmup_s = 10.0;
    double ia_histogram_step_s = 0.01;
    double ia_histogram_max_s = 200.0;
    bool keep_raw_ia = false;
};

/// Distance-binned PER and IA, CBR time series, IDR and offered-load counters.
class MetricsStore {
public:
    explicit MetricsStore(MetricsConfig cfg = {});

    const MetricsConfig& config() const { return cfg_; }
    std::size_t bin_count() const { return per_.size(); }
    double bin_lo(std::size_t i) const { return cfg_.bin_width_m * static_cast<double>(i); }
    double bin_hi(std::size_t i) const { return cfg_.bin_width_m * static_cast<double>(i + 1); }
    /// Bin index for a distance, or nullopt beyond max_distance_m.
    std::optional<std::size_t> bin_of(double distance_m) const;

    void record_packet(double distance_m, bool lost, double t_s);
    void record_reception(double distance_m, double t_s) { record_packet(distance_m, false, t_s); }
    void record_loss(double distance_m, double t_s) { record_packet(distance_m, true, t_s); }
    void record_message(double distance_m, bool lost, double t_s);

    void record_ia(double distance_m, double age_s, bool never_seen, double t_s, std::uint32_t receiver = 0,
                   std::uint32_t object = 0);
    void record_cbr(double t_s, std::uint32_t vehicle, double cbr);
    /// One generated message of `frame_bytes` from any vehicle.
    void record_generated(std::size_t frame_bytes);
    /// A finalized message and the number of receivers that got every fragment.
    void record_delivery(std::uint32_t receivers_complete);

    void set_run_shape(std::size_t vehicles, double duration_s);

    const std::vector<PerBin>& per(bool steady = true) const { return steady ? per_ : per_full_; }
    const std::vector<IaBin>& ia(bool steady = true) const { return steady ? ia_ : ia_full_; }
    const std::vector<CbrSample>& cbr_series() const { return cbr_; }
    const std::vector<IaRawSample>& raw_ia() const { return raw_ia_; }

    /// 95th percentile from the histogram (resolution ia_histogram_step_s).
    std::optional<double> ia_p95(std::size_t bin, bool steady = true) const;

    double mean_cbr() const;
    /// Mean CBR over samples with from_s <= t <= to_s.
    double mean_cbr(double from_s, double to_s) const;
    /// Generated bytes per second per vehicle: equals f x mean message size.
    double offered_load() const;
    double mean_message_bytes() const;
    /// Mean number of complete deliveries per finalized message.
    double idr_per_message() const;
    std::uint64_t messages_generated() const { return messages_generated_; }
    std::uint64_t messages_finalized() const { return messages_finalized_; }
    std::uint64_t total_deliveries() const { return deliveries_; }
    std::uint64_t bytes_generated() const { return bytes_generated_; }

    /// Mean over bins of per_pkt for bins with traffic; convenience for sweeps.
    std::optional<double> mean_per_pkt(double max_distance_m, bool steady = true) const;
    /// Sample-weighted mean IA across bins up to max_distance_m.
    std::optional<double> mean_ia(double max_distance_m, bool steady = true) const;

    bool operator==(const MetricsStore&) const;

private:
    MetricsConfig cfg_;
    std::vector<PerBin> per_, per_full_;
    std::vector<IaBin> ia_, ia_full_;
    std::vector<CbrSample> cbr_;
    std::vector<IaRawSample> raw_ia_;
    std::uint64_t messages_generated_ = 0;
    std::uint64_t bytes_generated_ = 0;
    std::uint64_t messages_finalized_ = 0;
    std::uint64_t deliveries_ = 0;
    std::size_t vehicles_ = 0;
    double duration_s_ = 0.0;
};

/// Offered load of a message stream: f x L.
double offered_load(double tx_frequency_hz, double message_bytes);
double offered_load(const MetricsStore& store);

// CSV writers. Headers and column orders are fixed.
inline constexpr const char* kCbrCsvHeader = "t,vehicle,cbr";
inline constexpr const char* kPerCsvHeader = "bin_lo,bin_hi,expected,lost_pkt,lost_msg,per_pkt,per_msg";
inline constexpr const char* kIaCsvHeader = "bin_lo,bin_hi,mean_ia_s,p95_ia_s,never_seen_count";
inline constexpr const char* kSummaryCsvHeader = "mean_cbr,offered_load_Bps,idr,mean_message_bytes";

std::string cbr_csv(const MetricsStore& m);
std::string per_csv(const MetricsStore& m, bool steady = true);
std::string ia_csv(const MetricsStore& m, bool steady = true);
std::string summary_csv(const MetricsStore& m);

/// Formats a real for CSV output (fixed significant digits; deterministic).
std::string csv_real(double v);

}  // namespace csam
