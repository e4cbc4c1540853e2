#include "csam/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace csam {
namespace {

class Writer {
public:
    explicit Writer(std::size_t size) : buf_(size, 0) {}

    void u8(std::uint8_t v) { put(v, 1); }
    void u16(std::uint16_t v) { put(v, 2); }
    void i16(std::int16_t v) { put(static_cast<std::uint16_t>(v), 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    /// Reserved bytes stay zero.
    void skip_to(std::size_t offset) { pos_ = offset; }
    std::size_t pos() const { return pos_; }
    std::vector<std::uint8_t> take() && { return std::move(buf_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_[pos_++] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

/// Bounds-checked little-endian reader. Every read verifies the remaining
/// length first, so a malformed count can never walk past the buffer.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void section(std::string name) { section_ = std::move(name); }
    std::size_t pos() const { return pos_; }

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::int16_t i16() { return static_cast<std::int16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4))); }
    double f64() { return std::bit_cast<double>(get(8)); }

    void reserved_to(std::size_t offset) {
        need(offset - pos_);
        for (; pos_ < offset; ++pos_)
            if (bytes_[pos_] != 0) fail(pos_, "nonzero reserved byte");
    }

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) fail(pos_, "truncated input");
    }

    [[noreturn]] void fail(std::size_t offset, const std::string& what) const {
        throw DecodeError(offset, section_, what);
    }

private:
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string section_ = "header";
};

double wrap_angle(double a) {
    constexpr double two_pi = 6.283185307179586;
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

std::int16_t quantize_signed(double v, double step) {
    double q = std::round(v / step);
    if (std::isnan(q)) return 0;
    q = std::clamp(q, double(std::numeric_limits<std::int16_t>::min()), double(std::numeric_limits<std::int16_t>::max()));
    return static_cast<std::int16_t>(q);
}

std::uint16_t quantize_unsigned(double v, double step) {
    double q = std::round(v / step);
    if (std::isnan(q)) return 0;
    q = std::clamp(q, 0.0, double(std::numeric_limits<std::uint16_t>::max()));
    return static_cast<std::uint16_t>(q);
}

std::uint8_t quantize_angle(double a) {
    if (!std::isfinite(a)) return 0;
    return static_cast<std::uint8_t>(static_cast<long>(std::lround(wrap_angle(a) / kHistoryAngleStep)) & 0xFF);
}

void check_known(const KnownRecord& r) {
    if (r.id > kMaxObjectId) throw EncodeError("object id exceeds 24 bits");
    if (static_cast<int>(r.type) >= kObjectTypeCount) throw EncodeError("unknown object type");
}

void write_known(Writer& w, const KnownRecord& r, const CodecLayout& layout) {
    std::size_t start = w.pos();
    w.u32((static_cast<std::uint32_t>(r.type) << 24) | (r.id & kMaxObjectId));
    for (double v : {r.extent_x, r.extent_y, r.x, r.y, r.speed, r.heading, r.yaw}) w.f64(v);
    w.skip_to(start + static_cast<std::size_t>(layout.l_k));
}

KnownRecord read_known(Reader& rd, const CodecLayout& layout) {
    std::size_t start = rd.pos();
    rd.need(static_cast<std::size_t>(layout.l_k));
    KnownRecord r;
    std::uint32_t tag = rd.u32();
    auto type = tag >> 24;
    if (type >= kObjectTypeCount) rd.fail(start, "invalid object type " + std::to_string(type));
    r.type = static_cast<ObjectType>(type);
    r.id = tag & kMaxObjectId;
    r.extent_x = rd.f64();
    r.extent_y = rd.f64();
    r.x = rd.f64();
    r.y = rd.f64();
    r.speed = rd.f64();
    r.heading = rd.f64();
    r.yaw = rd.f64();
    rd.reserved_to(start + static_cast<std::size_t>(layout.l_k));
    return r;
}

void write_history(Writer& w, const std::vector<HistoryEntry>& hist, const KnownRecord& owner,
                   const CodecLayout& layout) {
    if (static_cast<int>(hist.size()) != layout.history_len)
        throw EncodeError("history block must hold exactly history_len entries");
    const auto entry_bytes = static_cast<std::size_t>(layout.history_entry_bytes());
    for (const auto& h : hist) {
        std::size_t start = w.pos();
        w.i16(quantize_signed(h.x - owner.x, kHistoryPositionStep));
        w.i16(quantize_signed(h.y - owner.y, kHistoryPositionStep));
        w.u16(quantize_unsigned(h.speed, kHistorySpeedStep));
        w.u8(quantize_angle(h.heading));
        w.u8(quantize_angle(h.yaw));
        w.skip_to(start + entry_bytes);
    }
}

std::vector<HistoryEntry> read_history(Reader& rd, const KnownRecord& owner, const CodecLayout& layout) {
    rd.need(static_cast<std::size_t>(layout.l_h));
    const auto entry_bytes = static_cast<std::size_t>(layout.history_entry_bytes());
    std::vector<HistoryEntry> out(static_cast<std::size_t>(layout.history_len));
    for (auto& h : out) {
        std::size_t start = rd.pos();
        h.x = owner.x + rd.i16() * kHistoryPositionStep;
        h.y = owner.y + rd.i16() * kHistoryPositionStep;
        h.speed = rd.u16() * kHistorySpeedStep;
        h.heading = rd.u8() * kHistoryAngleStep;
        h.yaw = rd.u8() * kHistoryAngleStep;
        rd.reserved_to(start + entry_bytes);
    }
    return out;
}

}  // namespace

CodecLayout CodecLayout::from(const ScenarioConfig& cfg) {
    return {cfg.l_k_bytes, cfg.l_h_bytes, cfg.l_u_bytes, cfg.l_self_bytes, cfg.history_len};
}

HistoryEntry quantize_history(const HistoryEntry& e, double ref_x, double ref_y) {
    HistoryEntry q;
    q.x = ref_x + quantize_signed(e.x - ref_x, kHistoryPositionStep) * kHistoryPositionStep;
    q.y = ref_y + quantize_signed(e.y - ref_y, kHistoryPositionStep) * kHistoryPositionStep;
    q.speed = quantize_unsigned(e.speed, kHistorySpeedStep) * kHistorySpeedStep;
    q.heading = quantize_angle(e.heading) * kHistoryAngleStep;
    q.yaw = quantize_angle(e.yaw) * kHistoryAngleStep;
    return q;
}

std::size_t encoded_size(std::size_t known, std::size_t with_history, std::size_t unknown, std::size_t resolution,
                         const CodecLayout& layout) {
    return kHeaderBytes + static_cast<std::size_t>(layout.l_self) + known * static_cast<std::size_t>(layout.l_k) +
           with_history * static_cast<std::size_t>(layout.l_h) +
           resolution * unknown * static_cast<std::size_t>(layout.l_u);
}

std::size_t encoded_size(const CsamMessage& msg, const CodecLayout& layout) {
    return encoded_size(msg.known.size(), msg.histories.size(), msg.unknown.size(),
                        msg.unknown.empty() ? 0 : static_cast<std::size_t>(msg.resolution), layout);
}

std::vector<std::uint8_t> encode(const CsamMessage& msg, const CodecLayout& layout) {
    constexpr std::size_t max_count = std::numeric_limits<std::uint16_t>::max();
    if (msg.known.size() > max_count || msg.unknown.size() > max_count) throw EncodeError("record count exceeds 16 bits");
    if (msg.histories.size() > msg.known.size()) throw EncodeError("more history blocks than known records");
    if (layout.history_len == 0 && !msg.histories.empty()) throw EncodeError("history blocks without history slots");
    if (msg.sequence > 0xFFFFFF) throw EncodeError("sequence exceeds 24 bits");
    if (!msg.unknown.empty() && (msg.resolution < 1 || msg.resolution > static_cast<int>(max_count)))
        throw EncodeError("unknown records need a resolution in [1, 65535]");
    if (static_cast<int>(msg.self_history.size()) != layout.history_len)
        throw EncodeError("self history must hold exactly history_len entries");
    check_known(msg.self);
    for (const auto& r : msg.known) check_known(r);
    for (const auto& u : msg.unknown) {
        if (u.id > kMaxObjectId) throw EncodeError("object id exceeds 24 bits");
        if (static_cast<int>(u.cubes.size()) != msg.resolution) throw EncodeError("unknown record cube count != resolution");
    }

    const int resolution = msg.unknown.empty() ? 0 : msg.resolution;
    Writer w(encoded_size(msg, layout));
    w.u32(msg.sender_id);
    w.u32((static_cast<std::uint32_t>(kFormatTag) << 24) | msg.sequence);
    w.f64(msg.generation_time_s);
    w.u16(static_cast<std::uint16_t>(msg.known.size()));
    w.u16(static_cast<std::uint16_t>(msg.histories.size()));
    w.u16(static_cast<std::uint16_t>(msg.unknown.size()));
    w.u16(static_cast<std::uint16_t>(resolution));

    const std::size_t self_start = w.pos();
    write_known(w, msg.self, layout);
    if (layout.history_len > 0) write_history(w, msg.self_history, msg.self, layout);
    w.skip_to(self_start + static_cast<std::size_t>(layout.l_self));

    for (const auto& r : msg.known) write_known(w, r, layout);
    for (std::size_t i = 0; i < msg.histories.size(); ++i) write_history(w, msg.histories[i], msg.known[i], layout);
    for (const auto& u : msg.unknown) {
        for (const auto& c : u.cubes) {
            std::size_t start = w.pos();
            w.f64(c.x);
            w.f64(c.y);
            w.f64(c.z);
            w.f32(c.size);
            w.u32(u.id);
            w.skip_to(start + static_cast<std::size_t>(layout.l_u));
        }
    }
    return std::move(w).take();
}

CsamMessage decode(std::span<const std::uint8_t> bytes, const CodecLayout& layout) {
    Reader rd(bytes);
    CsamMessage msg;
    rd.section("header");
    rd.need(kHeaderBytes);
    msg.sender_id = rd.u32();
    std::uint32_t seq = rd.u32();
    if ((seq >> 24) != kFormatTag) rd.fail(4, "unsupported format tag " + std::to_string(seq >> 24));
    msg.sequence = seq & 0xFFFFFF;
    msg.generation_time_s = rd.f64();
    const std::size_t n_known = rd.u16();
    const std::size_t n_hist = rd.u16();
    const std::size_t n_unknown = rd.u16();
    const std::size_t resolution = rd.u16();
    if (n_hist > n_known) rd.fail(18, "history count exceeds known count");
    if (n_hist > 0 && layout.history_len == 0) rd.fail(18, "history blocks without history slots");
    if (n_unknown > 0 && resolution == 0) rd.fail(22, "zero resolution with unknown records");
    if (n_unknown == 0 && resolution != 0) rd.fail(22, "resolution set without unknown records");
    msg.resolution = static_cast<int>(resolution);

    rd.section("self block");
    const std::size_t self_start = rd.pos();
    rd.need(static_cast<std::size_t>(layout.l_self));
    msg.self = read_known(rd, layout);
    if (layout.history_len > 0) msg.self_history = read_history(rd, msg.self, layout);
    rd.reserved_to(self_start + static_cast<std::size_t>(layout.l_self));

    rd.section("known records");
    rd.need(n_known * static_cast<std::size_t>(layout.l_k));
    msg.known.reserve(n_known);
    for (std::size_t i = 0; i < n_known; ++i) msg.known.push_back(read_known(rd, layout));

    rd.section("history blocks");
    rd.need(n_hist * static_cast<std::size_t>(layout.l_h));
    msg.histories.reserve(n_hist);
    for (std::size_t i = 0; i < n_hist; ++i) msg.histories.push_back(read_history(rd, msg.known[i], layout));

    rd.section("unknown records");
    rd.need(n_unknown * resolution * static_cast<std::size_t>(layout.l_u));
    msg.unknown.resize(n_unknown);
    for (auto& u : msg.unknown) {
        u.cubes.resize(resolution);
        for (std::size_t n = 0; n < resolution; ++n) {
            std::size_t start = rd.pos();
            Cube& c = u.cubes[n];
            c.x = rd.f64();
            c.y = rd.f64();
            c.z = rd.f64();
            c.size = rd.f32();
            ObjectId id = rd.u32();
            if (id > kMaxObjectId) rd.fail(start + 28, "object id exceeds 24 bits");
            if (n == 0)
                u.id = id;
            else if (id != u.id)
                rd.fail(start + 28, "cube belongs to a different object");
            rd.reserved_to(start + static_cast<std::size_t>(layout.l_u));
        }
    }

    if (rd.pos() != bytes.size()) {
        rd.section("trailer");
        rd.fail(rd.pos(), "unexpected trailing bytes");
    }
    return msg;
}

std::size_t baseline_message_size(std::size_t mapped_cars) { return 260 + 60 * mapped_cars; }

}  // namespace csam
