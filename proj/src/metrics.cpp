#include "csam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace csam {

std::optional<double> PerBin::per_pkt() const {
    if (expected_pkt == 0) return std::nullopt;
    return static_cast<double>(lost_pkt) / static_cast<double>(expected_pkt);
}

std::optional<double> PerBin::per_msg() const {
    if (expected_msg == 0) return std::nullopt;
    return static_cast<double>(lost_msg) / static_cast<double>(expected_msg);
}

std::optional<double> IaBin::mean_s() const {
    if (count == 0) return std::nullopt;
    return sum_s / static_cast<double>(count);
}

MetricsStore::MetricsStore(MetricsConfig cfg) : cfg_(cfg) {
    const auto bins = static_cast<std::size_t>(std::ceil(cfg_.max_distance_m / cfg_.bin_width_m - 1e-9));
    per_.assign(bins, {});
    per_full_.assign(bins, {});
    const auto steps = static_cast<std::size_t>(std::ceil(cfg_.ia_histogram_max_s / cfg_.ia_histogram_step_s)) + 1;
    IaBin empty;
    empty.histogram.assign(steps, 0);
    ia_.assign(bins, empty);
    ia_full_.assign(bins, empty);
}

std::optional<std::size_t> MetricsStore::bin_of(double distance_m) const {
    if (distance_m < 0.0 || distance_m >= cfg_.max_distance_m) return std::nullopt;
    auto i = static_cast<std::size_t>(distance_m / cfg_.bin_width_m);
    return std::min(i, per_.size() - 1);
}

void MetricsStore::record_packet(double distance_m, bool lost, double t_s) {
    auto bin = bin_of(distance_m);
    if (!bin) return;
    for (auto* set : {&per_full_, &per_}) {
        if (set == &per_ && t_s < cfg_.warmup_s) continue;
        auto& b = (*set)[*bin];
        ++b.expected_pkt;
        if (lost) ++b.lost_pkt;
    }
}

void MetricsStore::record_message(double distance_m, bool lost, double t_s) {
    auto bin = bin_of(distance_m);
    if (!bin) return;
    for (auto* set : {&per_full_, &per_}) {
        if (set == &per_ && t_s < cfg_.warmup_s) continue;
        auto& b = (*set)[*bin];
        ++b.expected_msg;
        if (lost) ++b.lost_msg;
    }
}

void MetricsStore::record_ia(double distance_m, double age_s, bool never_seen, double t_s, std::uint32_t receiver,
                             std::uint32_t object) {
    auto bin = bin_of(distance_m);
    if (!bin) return;
    if (cfg_.keep_raw_ia) raw_ia_.push_back({t_s, receiver, object, distance_m, age_s, never_seen});
    for (auto* set : {&ia_full_, &ia_}) {
        if (set == &ia_ && t_s < cfg_.warmup_s) continue;
        auto& b = (*set)[*bin];
        if (never_seen) {
            ++b.never_seen;
            continue;
        }
        ++b.count;
        b.sum_s += age_s;
        auto step = static_cast<std::size_t>(std::max(0.0, age_s) / cfg_.ia_histogram_step_s);
        ++b.histogram[std::min(step, b.histogram.size() - 1)];
    }
}

void MetricsStore::record_cbr(double t_s, std::uint32_t vehicle, double cbr) { cbr_.push_back({t_s, vehicle, cbr}); }

void MetricsStore::record_generated(std::size_t frame_bytes) {
    ++messages_generated_;
    bytes_generated_ += frame_bytes;
}

void MetricsStore::record_delivery(std::uint32_t receivers_complete) {
    ++messages_finalized_;
    deliveries_ += receivers_complete;
}

void MetricsStore::set_run_shape(std::size_t vehicles, double duration_s) {
    vehicles_ = vehicles;
    duration_s_ = duration_s;
}

std::optional<double> MetricsStore::ia_p95(std::size_t bin, bool steady) const {
    const IaBin& b = ia(steady)[bin];
    if (b.count == 0) return std::nullopt;
    const auto rank = static_cast<std::uint64_t>(std::ceil(0.95 * static_cast<double>(b.count)));
    std::uint64_t seen = 0;
    for (std::size_t i = 0; i < b.histogram.size(); ++i) {
        seen += b.histogram[i];
        if (seen >= rank) return static_cast<double>(i) * cfg_.ia_histogram_step_s;
    }
    return static_cast<double>(b.histogram.size() - 1) * cfg_.ia_histogram_step_s;
}

double MetricsStore::mean_cbr() const {
    if (cbr_.empty()) return 0.0;
    double s = 0.0;
    for (const auto& c : cbr_) s += c.cbr;
    return s / static_cast<double>(cbr_.size());
}

double MetricsStore::mean_cbr(double from_s, double to_s) const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& c : cbr_) {
        if (c.t_s < from_s || c.t_s > to_s) continue;
        s += c.cbr;
        ++n;
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

double MetricsStore::offered_load() const {
    if (vehicles_ == 0 || duration_s_ <= 0.0) return 0.0;
    return static_cast<double>(bytes_generated_) / duration_s_ / static_cast<double>(vehicles_);
}

double MetricsStore::mean_message_bytes() const {
    if (messages_generated_ == 0) return 0.0;
    return static_cast<double>(bytes_generated_) / static_cast<double>(messages_generated_);
}

double MetricsStore::idr_per_message() const {
    if (messages_finalized_ == 0) return 0.0;
    return static_cast<double>(deliveries_) / static_cast<double>(messages_finalized_);
}

std::optional<double> MetricsStore::mean_per_pkt(double max_distance_m, bool steady) const {
    double s = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < bin_count(); ++i) {
        if (bin_lo(i) >= max_distance_m) break;
        if (auto p = per(steady)[i].per_pkt()) {
            s += *p;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return s / n;
}

std::optional<double> MetricsStore::mean_ia(double max_distance_m, bool steady) const {
    double s = 0.0;
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < bin_count(); ++i) {
        if (bin_lo(i) >= max_distance_m) break;
        s += ia(steady)[i].sum_s;
        n += ia(steady)[i].count;
    }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
}

bool MetricsStore::operator==(const MetricsStore& o) const {
    auto per_eq = [](const std::vector<PerBin>& a, const std::vector<PerBin>& b) {
        return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const PerBin& x, const PerBin& y) {
            return x.expected_pkt == y.expected_pkt && x.lost_pkt == y.lost_pkt && x.expected_msg == y.expected_msg &&
                   x.lost_msg == y.lost_msg;
        });
    };
    auto ia_eq = [](const std::vector<IaBin>& a, const std::vector<IaBin>& b) {
        return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const IaBin& x, const IaBin& y) {
            return x.count == y.count && x.sum_s == y.sum_s && x.never_seen == y.never_seen &&
                   x.histogram == y.histogram;
        });
    };
    auto cbr_eq = std::equal(cbr_.begin(), cbr_.end(), o.cbr_.begin(), o.cbr_.end(), [](const auto& a, const auto& b) {
        return a.t_s == b.t_s && a.vehicle == b.vehicle && a.cbr == b.cbr;
    });
    return per_eq(per_, o.per_) && per_eq(per_full_, o.per_full_) && ia_eq(ia_, o.ia_) && ia_eq(ia_full_, o.ia_full_) &&
           cbr_eq && messages_generated_ == o.messages_generated_ && bytes_generated_ == o.bytes_generated_ &&
           messages_finalized_ == o.messages_finalized_ && deliveries_ == o.deliveries_ && vehicles_ == o.vehicles_ &&
           duration_s_ == o.duration_s_;
}

double offered_load(double tx_frequency_hz, double message_bytes) { return tx_frequency_hz * message_bytes; }

double offered_load(const MetricsStore& store) { return store.offered_load(); }

std::string csv_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

namespace {
std::string opt_real(const std::optional<double>& v) { return v ? csv_real(*v) : std::string(); }
}  // namespace

std::string cbr_csv(const MetricsStore& m) {
    std::string out = std::string(kCbrCsvHeader) + "\n";
    for (const auto& c : m.cbr_series())
        out += csv_real(c.t_s) + "," + std::to_string(c.vehicle) + "," + csv_real(c.cbr) + "\n";
    return out;
}

std::string per_csv(const MetricsStore& m, bool steady) {
    std::string out = std::string(kPerCsvHeader) + "\n";
    for (std::size_t i = 0; i < m.bin_count(); ++i) {
        const PerBin& b = m.per(steady)[i];
        out += csv_real(m.bin_lo(i)) + "," + csv_real(m.bin_hi(i)) + "," + std::to_string(b.expected_pkt) + "," +
               std::to_string(b.lost_pkt) + "," + std::to_string(b.lost_msg) + "," + opt_real(b.per_pkt()) + "," +
               opt_real(b.per_msg()) + "\n";
    }
    return out;
}

std::string ia_csv(const MetricsStore& m, bool steady) {
    std::string out = std::string(kIaCsvHeader) + "\n";
    for (std::size_t i = 0; i < m.bin_count(); ++i) {
        const IaBin& b = m.ia(steady)[i];
        out += csv_real(m.bin_lo(i)) + "," + csv_real(m.bin_hi(i)) + "," + opt_real(b.mean_s()) + "," +
               opt_real(m.ia_p95(i, steady)) + "," + std::to_string(b.never_seen) + "\n";
    }
    return out;
}

std::string summary_csv(const MetricsStore& m) {
    return std::string(kSummaryCsvHeader) + "\n" + csv_real(m.mean_cbr()) + "," + csv_real(m.offered_load()) + "," +
           csv_real(m.idr_per_message()) + "," + csv_real(m.mean_message_bytes()) + "\n";
}

}  // namespace csam
