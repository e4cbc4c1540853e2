#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace csam {

/// Seeded pseudo-random stream. Sub-streams are derived by label so that each
/// subsystem (mobility, MAC backoff, fading, selection) draws independently
/// and reproducibly.
class Rng {
public:
    using engine_type = std::mt19937_64;
    using result_type = engine_type::result_type;

    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    /// Deterministic child stream; same (seed, label) always yields the same stream.
    Rng derive(std::string_view label) const;

    double uniform01();
    double uniform(double lo, double hi);
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p);
    /// Gamma-distributed draw with unit mean (shape m, scale 1/m).
    double gamma_unit_mean(double shape);

    // UniformRandomBitGenerator interface so std distributions accept an Rng.
    static constexpr result_type min() { return engine_type::min(); }
    static constexpr result_type max() { return engine_type::max(); }
    result_type operator()() { return engine_(); }

private:
    std::uint64_t seed_;
    engine_type engine_;
};

Rng derive_substream(const Rng& rng, std::string_view label);

}  // namespace csam
