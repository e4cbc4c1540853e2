#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace csam {

/// Simulation timestamp with nanosecond resolution. Integer ticks keep event
/// ordering exact and runs bit-reproducible.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime from_ns(std::int64_t ns) { return SimTime(ns); }
    static SimTime from_seconds(double s) { return SimTime(static_cast<std::int64_t>(std::llround(s * 1e9))); }
    static constexpr SimTime from_us(double us) { return SimTime(static_cast<std::int64_t>(us * 1e3)); }

    constexpr std::int64_t ns() const { return ns_; }
    constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

    constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
    constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
    constexpr SimTime& operator+=(SimTime o) { ns_ += o.ns_; return *this; }
    constexpr SimTime operator*(std::int64_t k) const { return SimTime(ns_ * k); }

    constexpr auto operator<=>(const SimTime&) const = default;

private:
    constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
    std::int64_t ns_ = 0;
};

/// Monotone clock owned by the event loop.
class SimClock {
public:
    SimTime now() const { return now_; }
    /// Advances to `t`; returns false (and leaves the clock unchanged) if `t` is in the past.
    bool advance_to(SimTime t) {
        if (t < now_) return false;
        now_ = t;
        return true;
    }

private:
    SimTime now_{};
};

}  // namespace csam
