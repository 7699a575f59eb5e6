#pragma once

#include "rifl/bits.hpp"
#include "rifl/config.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>

namespace rifl {

/// MSB-first CRC with a 12-bit register, zero init, no reflection, no final XOR.
class Crc12 {
public:
    explicit Crc12(std::uint16_t polynomial = 0x80F);

    std::uint16_t polynomial() const { return poly_; }

    /// Feeds the low `count` bits of `bits`, most significant first.
    std::uint16_t update_bits(std::uint16_t crc, std::uint64_t bits, unsigned count) const;
    std::uint16_t update_byte(std::uint16_t crc, std::uint8_t byte) const
    {
        return static_cast<std::uint16_t>(((crc << 8) ^ table_[((crc >> 4) ^ byte) & 0xFF]) & 0xFFF);
    }
    /// Checksum of an arbitrary-length bit vector.
    std::uint16_t compute(const FrameBits& data) const;

private:
    std::uint16_t poly_;
    std::array<std::uint16_t, 256> table_{};
};

enum class Syn : std::uint8_t { Data = 0b01, Control = 0b10 };

/// Two-bit payload descriptor.
enum class MetaCode : std::uint8_t {
    Invalid = 0b00,
    ValidMid = 0b01,
    ValidEopFull = 0b10,
    ValidEopPartial = 0b11,
};

/// Last payload byte of an invalid (meta 00) Data Frame.
enum class InvalidMarker : std::uint8_t { Invalid = 0x00, FcPause = 0x01, FcResume = 0x02 };

enum class ControlCode : std::uint8_t { Idle = 0x00, PauseRequest = 0x01, RetransmitRequest = 0x02 };

const char* to_string(MetaCode m);
const char* to_string(ControlCode c);

inline constexpr std::size_t kMaxPayloadBytes = (FrameBits::kMaxBits - ProtocolConfig::kHeaderBits) / 8;

/// Payload bytes of one frame (fixed capacity, runtime length).
struct Payload {
    std::array<std::uint8_t, kMaxPayloadBytes> bytes{};
    std::uint16_t size = 0;

    Payload() = default;
    explicit Payload(std::size_t n) : size(static_cast<std::uint16_t>(n)) {}

    std::span<std::uint8_t> view() { return {bytes.data(), size}; }
    std::span<const std::uint8_t> view() const { return {bytes.data(), size}; }
    std::uint8_t& back() { return bytes[size - 1]; }
    std::uint8_t back() const { return bytes[size - 1]; }

    friend bool operator==(const Payload& a, const Payload& b);
};

struct DataFrame {
    MetaCode meta = MetaCode::Invalid;
    Payload payload;
    std::uint16_t verification = 0;

    friend bool operator==(const DataFrame&, const DataFrame&) = default;
};

struct ControlFrame {
    ControlCode code = ControlCode::Idle;
    std::uint16_t verification = 0;

    friend bool operator==(const ControlFrame&, const ControlFrame&) = default;
};

struct SynIllegal {
    std::uint8_t syn = 0;
};

struct VerificationFailure {
    enum class Reason : std::uint8_t { CodeMismatch, BadControlCode };
    Reason reason = Reason::CodeMismatch;
};

using DecodeResult = std::variant<DataFrame, ControlFrame, VerificationFailure, SynIllegal>;

/// User-side flit: up to one payload worth of bytes.
struct Flit {
    Payload data;           // `data.size` = valid byte count
    bool last = false;

    std::size_t valid_bytes() const { return data.size; }
    friend bool operator==(const Flit&, const Flit&) = default;
};

/// Wire layout (first bit first): SYN(2) | payload | meta(2) | verification(12).
/// The checksum covers meta followed by payload.
class FrameCodec {
public:
    explicit FrameCodec(const ProtocolConfig& config);

    const ProtocolConfig& config() const { return config_; }
    const Crc12& crc() const { return crc_; }
    int frame_bits() const { return frame_bits_; }
    int payload_bytes() const { return payload_bytes_; }

    /// CRC-12 of meta followed by payload.
    std::uint16_t checksum(MetaCode meta, const Payload& payload) const;

    DataFrame encode_data_frame(MetaCode meta, const Payload& payload, std::uint32_t frame_id) const;
    ControlFrame encode_control_frame(ControlCode code, std::uint32_t frame_id) const;

    FrameBits serialize(const DataFrame& frame) const;
    FrameBits serialize(const ControlFrame& frame) const;

    /// Parses and verifies one aligned, descrambled frame.
    DecodeResult decode_frame(const FrameBits& bits, std::uint32_t expected_frame_id) const;

    /// Checks a control frame on its own: legal code field and a verification
    /// code whose id part fits in frame_id_bits. Returns the code and carried id.
    std::optional<std::pair<ControlCode, std::uint32_t>> inspect_control(const FrameBits& bits) const;

    std::pair<MetaCode, Payload> pack_flit(const Flit& flit) const;
    /// Inverse of pack_flit. Throws for meta Invalid or a bad format code.
    Flit unpack_flit(MetaCode meta, const Payload& payload) const;

    /// Invalid Data Frame payload carrying the given marker in its last byte.
    Payload marker_payload(InvalidMarker marker) const;

    // Hot-path helpers used by the endpoint: build wire bits directly.
    FrameBits build_data_bits(MetaCode meta, const Payload& payload, std::uint32_t frame_id) const;
    FrameBits build_control_bits(ControlCode code, std::uint32_t frame_id) const;

    /// Payload bytes read straight out of wire bits.
    Payload read_payload(const FrameBits& bits) const;
    std::uint16_t wire_checksum(const FrameBits& bits) const;

private:
    void check_id(std::uint32_t frame_id) const;
    std::uint16_t control_checksum(ControlCode code) const;

    ProtocolConfig config_;
    Crc12 crc_;
    int frame_bits_;
    int payload_bytes_;
    std::size_t meta_pos_;
    std::size_t verification_pos_;
    std::array<std::uint16_t, 3> control_crc_{};
};

} // namespace rifl
