#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csam/scenario.hpp"

namespace csam {

using ObjectId = std::uint32_t;

/// Object ids travel in 24 bits on the wire.
inline constexpr ObjectId kMaxObjectId = 0xFFFFFF;

enum class ObjectType : std::uint8_t { Car = 0, Truck = 1, Motorcycle = 2, Bicycle = 3, Pedestrian = 4 };
inline constexpr int kObjectTypeCount = 5;

/// One path-history / prediction slot: (x_C, y_C, v, H, theta).
struct HistoryEntry {
    double x = 0.0;
    double y = 0.0;
    double speed = 0.0;
    double heading = 0.0;
    double yaw = 0.0;
    bool operator==(const HistoryEntry&) const = default;
};

/// Classified object: (Type, dx, dy, x_C, y_C, v, H, theta).
struct KnownRecord {
    ObjectId id = 0;
    ObjectType type = ObjectType::Car;
    double extent_x = 0.0;
    double extent_y = 0.0;
    double x = 0.0;
    double y = 0.0;
    double speed = 0.0;
    double heading = 0.0;
    double yaw = 0.0;
    bool operator==(const KnownRecord&) const = default;
};

/// Occupied cubic sub-region (x, y, z, D) of an unknown object.
struct Cube {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    float size = 0.0f;
    bool operator==(const Cube&) const = default;
};

struct UnknownRecord {
    ObjectId id = 0;
    std::vector<Cube> cubes;
    bool operator==(const UnknownRecord&) const = default;
};

/// Byte sizes that parameterize the wire format.
struct CodecLayout {
    int l_k = 60;
    int l_h = 40;
    int l_u = 32;
    int l_self = 260;
    int history_len = 5;

    static CodecLayout from(const ScenarioConfig& cfg);
    int history_entry_bytes() const { return history_len > 0 ? l_h / history_len : 0; }
};

inline constexpr int kHeaderBytes = 24;
inline constexpr std::uint8_t kFormatTag = 0x01;
/// Fixed payload bytes of a known record before reserved padding.
inline constexpr int kKnownRecordCoreBytes = 60;
inline constexpr int kCubeCoreBytes = 32;
inline constexpr int kHistoryEntryCoreBytes = 8;

/// Quantization steps of the 8-byte history entry.
inline constexpr double kHistoryPositionStep = 0.01;  // metres, relative to the record centre
inline constexpr double kHistorySpeedStep = 0.01;     // m/s
inline constexpr double kHistoryAngleStep = 6.283185307179586 / 256.0;

struct CsamMessage {
    std::uint32_t sender_id = 0;
    std::uint32_t sequence = 0;  // 24 bits on the wire
    double generation_time_s = 0.0;

    KnownRecord self;
    std::vector<HistoryEntry> self_history;  // exactly history_len entries, or empty when history_len == 0

    std::vector<KnownRecord> known;
    /// Attached positionally to known[0 .. histories.size()).
    std::vector<std::vector<HistoryEntry>> histories;
    std::vector<UnknownRecord> unknown;
    int resolution = 0;  // cubes per unknown record; >= 1 when unknown is nonempty

    bool operator==(const CsamMessage&) const = default;
};

class EncodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structured decode failure naming the byte offset and the message section.
class DecodeError : public std::runtime_error {
public:
    DecodeError(std::size_t offset, std::string section, const std::string& what)
        : std::runtime_error("decode error at offset " + std::to_string(offset) + " (" + section + "): " + what),
          offset_(offset),
          section_(std::move(section)) {}
    std::size_t offset() const { return offset_; }
    const std::string& section() const { return section_; }

private:
    std::size_t offset_;
    std::string section_;
};

/// header + l_self + K_R*l_K + K_Rh*l_H + N*U_R*l_U
std::size_t encoded_size(std::size_t known, std::size_t with_history, std::size_t unknown, std::size_t resolution,
                         const CodecLayout& layout);
std::size_t encoded_size(const CsamMessage& msg, const CodecLayout& layout);

std::vector<std::uint8_t> encode(const CsamMessage& msg, const CodecLayout& layout);
CsamMessage decode(std::span<const std::uint8_t> bytes, const CodecLayout& layout);

/// Rounds a history entry onto the wire grid (relative to the owning record's centre).
HistoryEntry quantize_history(const HistoryEntry& entry, double ref_x, double ref_y);

/// Size of the legacy full-map beacon: 260-byte self block plus 60 bytes per mapped car.
std::size_t baseline_message_size(std::size_t mapped_cars);

}  // namespace csam
