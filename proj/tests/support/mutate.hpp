#pragma once

#include <cstdint>
#include <vector>

#include "csam/rng.hpp"

namespace csam::testing {

/// Applies one to four random byte-level mutations.
inline std::vector<std::uint8_t> mutate(std::vector<std::uint8_t> bytes, Rng& rng) {
    const auto rounds = rng.uniform_int(1, 4);
    for (std::int64_t r = 0; r < rounds; ++r) {
        switch (rng.uniform_int(0, 6)) {
            case 0:  // bit flip
                if (!bytes.empty()) bytes[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(bytes.size()) - 1))] ^= static_cast<std::uint8_t>(1u << rng.uniform_int(0, 7));
                break;
            case 1:  // random byte
                if (!bytes.empty()) bytes[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(bytes.size()) - 1))] = static_cast<std::uint8_t>(rng());
                break;
            case 2:  // truncate
                bytes.resize(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(bytes.size()))));
                break;
            case 3:  // extend
                for (auto n = rng.uniform_int(1, 64); n > 0; --n) bytes.push_back(static_cast<std::uint8_t>(rng()));
                break;
            case 4:  // header count field
                if (bytes.size() >= 24) bytes[static_cast<std::size_t>(16 + 2 * rng.uniform_int(0, 3))] = static_cast<std::uint8_t>(rng());
                break;
            case 5:  // header count high byte
                if (bytes.size() >= 24) bytes[static_cast<std::size_t>(17 + 2 * rng.uniform_int(0, 3))] = static_cast<std::uint8_t>(rng());
                break;
            default:  // pure noise
                bytes.assign(static_cast<std::size_t>(rng.uniform_int(0, 2048)), 0);
                for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
                break;
        }
    }
    return bytes;
}


}  // namespace csam::testing
