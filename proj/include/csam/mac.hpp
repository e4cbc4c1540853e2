#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "csam/radio_params.hpp"
#include "csam/rng.hpp"
#include "csam/sim_time.hpp"

namespace csam {

/// ceil(len / threshold), at least one fragment.
int fragment_count(std::size_t message_bytes, int threshold_bytes);
/// Payload bytes of each fragment; all full-size except possibly the last.
std::vector<int> fragment_sizes(std::size_t message_bytes, int threshold_bytes);

/// preamble + 8 (payload + per-fragment overhead) / rate
SimTime airtime(int payload_bytes, const MacParams& mac, double rate_bps);

/// One fragment on the air.
struct Transmission {
    std::uint32_t sender = 0;
    int fragment_index = 0;
    int fragment_count = 1;
    int payload_bytes = 0;
    SimTime start;
    SimTime end;
    double tx_power_dbm = 0.0;
};

/// Windowed channel-busy-ratio estimate from merged busy intervals.
class CbrMeter {
public:
    explicit CbrMeter(SimTime window) : window_(window) {}

    SimTime window() const { return window_; }
    void set_busy(SimTime t);
    void set_idle(SimTime t);
    bool busy() const { return busy_since_.has_value(); }
    /// Records a closed busy interval; intervals must arrive in time order.
    void add_interval(SimTime start, SimTime end);

    /// Busy fraction of [max(0, now - window), now]; 0 at t = 0.
    double read(SimTime now) const;
    /// Busy fraction of an arbitrary past span [from, to].
    double busy_fraction(SimTime from, SimTime to) const;

private:
    void prune(SimTime now);
    SimTime window_;
    std::deque<std::pair<SimTime, SimTime>> intervals_;
    std::optional<SimTime> busy_since_;
};

/// CSMA/CA countdown for a single access category: wait AIFS of idle medium,
/// then count down a uniform backoff in [0, CW_min] idle slots, freezing while
/// the medium is busy. Broadcast: no RTS/CTS, no ACK, no retries.
class BackoffTimer {
public:
    explicit BackoffTimer(const MacParams& mac) : mac_(mac) {}

    /// The node's view of the medium turned idle at t.
    void medium_idle(SimTime t) { idle_since_ = t; }
    /// The medium turned busy at t: a running countdown is frozen, keeping the
    /// slots not yet consumed. An access due exactly at t still proceeds.
    void medium_busy(SimTime t);

    /// Starts or resumes the countdown at `now` (medium idle); draws a fresh
    /// backoff when none is pending. Returns the access time.
    SimTime arm(SimTime now, Rng& rng);
    /// Clears state after a transmission so the next frame draws anew.
    void consume();

    bool armed() const { return armed_; }
    SimTime access_time() const { return access_time_; }
    int remaining_slots() const { return slots_; }
    SimTime idle_since() const { return idle_since_; }

private:
    MacParams mac_;
    SimTime idle_since_{};
    int slots_ = -1;
    bool armed_ = false;
    SimTime countdown_start_{};
    SimTime access_time_{};
};

/// Fragments a message and schedules its transmissions on an otherwise idle
/// channel starting at `now` (the node's medium idle since `idle_since`).
std::vector<Transmission> csma_send(std::size_t message_bytes, std::uint32_t sender, double tx_power_dbm,
                                    const MacParams& mac, double rate_bps, SimTime idle_since, SimTime now, Rng& rng);

}  // namespace csam
