#include "csam/mac.hpp"

#include <algorithm>
#include <cmath>

namespace csam {

int fragment_count(std::size_t message_bytes, int threshold_bytes) {
    const auto t = static_cast<std::size_t>(threshold_bytes);
    return std::max<int>(1, static_cast<int>((message_bytes + t - 1) / t));
}

std::vector<int> fragment_sizes(std::size_t message_bytes, int threshold_bytes) {
    const int n = fragment_count(message_bytes, threshold_bytes);
    std::vector<int> out(static_cast<std::size_t>(n), threshold_bytes);
    out.back() = static_cast<int>(message_bytes - static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(threshold_bytes));
    return out;
}

SimTime airtime(int payload_bytes, const MacParams& mac, double rate_bps) {
    const double seconds =
        mac.preamble_plcp_us * 1e-6 + 8.0 * (payload_bytes + mac.per_fragment_overhead_bytes) / rate_bps;
    return SimTime::from_ns(static_cast<std::int64_t>(std::ceil(seconds * 1e9 - 1e-6)));
}

void CbrMeter::set_busy(SimTime t) {
    if (!busy_since_) busy_since_ = t;
}

void CbrMeter::set_idle(SimTime t) {
    if (!busy_since_) return;
    add_interval(*busy_since_, t);
    busy_since_.reset();
}

void CbrMeter::add_interval(SimTime start, SimTime end) {
    if (end <= start) return;
    if (!intervals_.empty() && start <= intervals_.back().second) {
        intervals_.back().second = std::max(intervals_.back().second, end);
    } else {
        intervals_.emplace_back(start, end);
    }
    prune(end);
}

void CbrMeter::prune(SimTime now) {
    // Keep enough history for read() and for sampling one full window back.
    const SimTime horizon = now - window_ - window_;
    while (!intervals_.empty() && intervals_.front().second < horizon) intervals_.pop_front();
}

double CbrMeter::busy_fraction(SimTime from, SimTime to) const {
    if (to <= from) return 0.0;
    std::int64_t busy = 0;
    for (const auto& [s, e] : intervals_) {
        const SimTime lo = std::max(s, from);
        const SimTime hi = std::min(e, to);
        if (hi > lo) busy += (hi - lo).ns();
    }
    if (busy_since_) {
        const SimTime lo = std::max(*busy_since_, from);
        if (to > lo) busy += (to - lo).ns();
    }
    return std::clamp(static_cast<double>(busy) / static_cast<double>((to - from).ns()), 0.0, 1.0);
}

double CbrMeter::read(SimTime now) const {
    const SimTime from = std::max(SimTime{}, now - window_);
    return busy_fraction(from, now);
}

void BackoffTimer::medium_busy(SimTime t) {
    if (!armed_) return;
    if (access_time_ <= t) return;
    if (t > countdown_start_) {
        const auto elapsed = (t - countdown_start_).ns() / SimTime::from_us(mac_.slot_time_us).ns();
        slots_ -= static_cast<int>(std::min<std::int64_t>(elapsed, slots_));
    }
    armed_ = false;
}

SimTime BackoffTimer::arm(SimTime now, Rng& rng) {
    if (slots_ < 0) slots_ = static_cast<int>(rng.uniform_int(0, mac_.cw_min));
    countdown_start_ = std::max(idle_since_ + SimTime::from_us(mac_.aifs_us()), now);
    access_time_ = countdown_start_ + SimTime::from_us(mac_.slot_time_us) * slots_;
    armed_ = true;
    return access_time_;
}

void BackoffTimer::consume() {
    armed_ = false;
    slots_ = -1;
}

std::vector<Transmission> csma_send(std::size_t message_bytes, std::uint32_t sender, double tx_power_dbm,
                                    const MacParams& mac, double rate_bps, SimTime idle_since, SimTime now, Rng& rng) {
    std::vector<Transmission> out;
    BackoffTimer timer(mac);
    timer.medium_idle(idle_since);
    const auto sizes = fragment_sizes(message_bytes, mac.fragmentation_threshold_bytes);
    SimTime t = now;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        Transmission tx;
        tx.sender = sender;
        tx.fragment_index = static_cast<int>(i);
        tx.fragment_count = static_cast<int>(sizes.size());
        tx.payload_bytes = sizes[i];
        tx.tx_power_dbm = tx_power_dbm;
        tx.start = timer.arm(t, rng);
        tx.end = tx.start + airtime(sizes[i], mac, rate_bps);
        timer.consume();
        timer.medium_idle(tx.end);
        t = tx.end;
        out.push_back(tx);
    }
    return out;
}

}  // namespace csam
