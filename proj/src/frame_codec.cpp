#include "rifl/frame_codec.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rifl {

Crc12::Crc12(std::uint16_t polynomial) : poly_(polynomial & 0xFFF)
{
    for (unsigned b = 0; b < 256; ++b) {
        std::uint16_t crc = static_cast<std::uint16_t>(b << 4);
        for (int k = 0; k < 8; ++k)
            crc = (crc & 0x800) ? static_cast<std::uint16_t>(((crc << 1) ^ poly_) & 0xFFF)
                                : static_cast<std::uint16_t>((crc << 1) & 0xFFF);
        table_[b] = crc;
    }
}

std::uint16_t Crc12::update_bits(std::uint16_t crc, std::uint64_t bits, unsigned count) const
{
    for (unsigned i = count; i-- > 0;) {
        const unsigned in = static_cast<unsigned>((bits >> i) & 1U);
        const unsigned fb = ((crc >> 11) & 1U) ^ in;
        crc = static_cast<std::uint16_t>((crc << 1) & 0xFFF);
        if (fb)
            crc ^= poly_;
    }
    return crc;
}

std::uint16_t Crc12::compute(const FrameBits& data) const
{
    std::uint16_t crc = 0;
    std::size_t pos = 0;
    for (; pos + 8 <= data.size(); pos += 8)
        crc = update_byte(crc, static_cast<std::uint8_t>(data.get_bits(pos, 8)));
    const auto rest = static_cast<unsigned>(data.size() - pos);
    return update_bits(crc, data.get_bits(pos, rest), rest);
}

const char* to_string(MetaCode m)
{
    switch (m) {
    case MetaCode::Invalid: return "INVALID";
    case MetaCode::ValidMid: return "VALID_MID";
    case MetaCode::ValidEopFull: return "VALID_EOP_FULL";
    case MetaCode::ValidEopPartial: return "VALID_EOP_PARTIAL";
    }
    return "?";
}

const char* to_string(ControlCode c)
{
    switch (c) {
    case ControlCode::Idle: return "IDLE";
    case ControlCode::PauseRequest: return "PAUSE_REQUEST";
    case ControlCode::RetransmitRequest: return "RETRANSMIT_REQUEST";
    }
    return "?";
}

bool operator==(const Payload& a, const Payload& b)
{
    return a.size == b.size && std::equal(a.bytes.begin(), a.bytes.begin() + a.size, b.bytes.begin());
}

FrameCodec::FrameCodec(const ProtocolConfig& config)
    : config_(config),
      crc_(config.crc_polynomial),
      frame_bits_(config.frame_size_bits),
      payload_bytes_(config.payload_bytes()),
      meta_pos_(2 + static_cast<std::size_t>(config.payload_size_bits())),
      verification_pos_(meta_pos_ + 2)
{
    config_.validate();
    for (auto code : {ControlCode::Idle, ControlCode::PauseRequest, ControlCode::RetransmitRequest}) {
        Payload p(static_cast<std::size_t>(payload_bytes_));
        p.back() = static_cast<std::uint8_t>(code);
        control_crc_[static_cast<std::size_t>(code)] = checksum(MetaCode::Invalid, p);
    }
}

void FrameCodec::check_id(std::uint32_t frame_id) const
{
    if (frame_id >= static_cast<std::uint32_t>(config_.frame_id_count()))
        throw std::invalid_argument("frame id " + std::to_string(frame_id) + " out of range for " +
                                    std::to_string(config_.frame_id_bits) + "-bit ids");
}

std::uint16_t FrameCodec::checksum(MetaCode meta, const Payload& payload) const
{
    std::uint16_t c = crc_.update_bits(0, static_cast<std::uint64_t>(meta), 2);
    for (std::size_t i = 0; i < payload.size; ++i)
        c = crc_.update_byte(c, payload.bytes[i]);
    return c;
}

std::uint16_t FrameCodec::control_checksum(ControlCode code) const
{
    return control_crc_[static_cast<std::size_t>(code)];
}

DataFrame FrameCodec::encode_data_frame(MetaCode meta, const Payload& payload, std::uint32_t frame_id) const
{
    check_id(frame_id);
    if (payload.size != payload_bytes_)
        throw std::invalid_argument("payload length " + std::to_string(payload.size * 8) + " bits, expected " +
                                    std::to_string(config_.payload_size_bits()));
    DataFrame f;
    f.meta = meta;
    f.payload = payload;
    f.verification = static_cast<std::uint16_t>(checksum(meta, payload) ^ frame_id);
    return f;
}

ControlFrame FrameCodec::encode_control_frame(ControlCode code, std::uint32_t frame_id) const
{
    check_id(frame_id);
    return ControlFrame{code, static_cast<std::uint16_t>(control_checksum(code) ^ frame_id)};
}

FrameBits FrameCodec::serialize(const DataFrame& frame) const
{
    FrameBits bits(static_cast<std::size_t>(frame_bits_));
    bits.set_bits(0, 2, static_cast<std::uint64_t>(Syn::Data));
    for (int i = 0; i < payload_bytes_; ++i)
        bits.set_bits(2 + 8 * static_cast<std::size_t>(i), 8, frame.payload.bytes[static_cast<std::size_t>(i)]);
    bits.set_bits(meta_pos_, 2, static_cast<std::uint64_t>(frame.meta));
    bits.set_bits(verification_pos_, 12, frame.verification);
    return bits;
}

FrameBits FrameCodec::serialize(const ControlFrame& frame) const
{
    FrameBits bits(static_cast<std::size_t>(frame_bits_));
    bits.set_bits(0, 2, static_cast<std::uint64_t>(Syn::Control));
    bits.set_bits(meta_pos_ - 8, 8, static_cast<std::uint64_t>(frame.code));
    bits.set_bits(verification_pos_, 12, frame.verification);
    return bits;
}

FrameBits FrameCodec::build_data_bits(MetaCode meta, const Payload& payload, std::uint32_t frame_id) const
{
    FrameBits bits(static_cast<std::size_t>(frame_bits_));
    bits.set_bits(0, 2, static_cast<std::uint64_t>(Syn::Data));
    std::uint16_t c = crc_.update_bits(0, static_cast<std::uint64_t>(meta), 2);
    for (int i = 0; i < payload_bytes_; ++i) {
        const auto b = payload.bytes[static_cast<std::size_t>(i)];
        c = crc_.update_byte(c, b);
        bits.set_bits(2 + 8 * static_cast<std::size_t>(i), 8, b);
    }
    bits.set_bits(meta_pos_, 2, static_cast<std::uint64_t>(meta));
    bits.set_bits(verification_pos_, 12, c ^ frame_id);
    return bits;
}

FrameBits FrameCodec::build_control_bits(ControlCode code, std::uint32_t frame_id) const
{
    return serialize(ControlFrame{code, static_cast<std::uint16_t>(control_checksum(code) ^ frame_id)});
}

Payload FrameCodec::read_payload(const FrameBits& bits) const
{
    Payload p(static_cast<std::size_t>(payload_bytes_));
    for (int i = 0; i < payload_bytes_; ++i)
        p.bytes[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(bits.get_bits(2 + 8 * static_cast<std::size_t>(i), 8));
    return p;
}

std::uint16_t FrameCodec::wire_checksum(const FrameBits& bits) const
{
    std::uint16_t c = crc_.update_bits(0, bits.get_bits(meta_pos_, 2), 2);
    for (int i = 0; i < payload_bytes_; ++i)
        c = crc_.update_byte(c, static_cast<std::uint8_t>(bits.get_bits(2 + 8 * static_cast<std::size_t>(i), 8)));
    return c;
}

namespace {

// Code byte if every other bit of the control field is zero.
std::optional<std::uint8_t> control_field_code(const FrameBits& bits, std::size_t meta_pos)
{
    if (bits.get_bits(meta_pos, 2) != 0)
        return std::nullopt;
    const std::size_t zero_end = meta_pos - 8;
    for (std::size_t pos = 2; pos < zero_end;) {
        const auto n = static_cast<unsigned>(std::min<std::size_t>(56, zero_end - pos));
        if (bits.get_bits(pos, n) != 0)
            return std::nullopt;
        pos += n;
    }
    return static_cast<std::uint8_t>(bits.get_bits(zero_end, 8));
}

} // namespace

DecodeResult FrameCodec::decode_frame(const FrameBits& bits, std::uint32_t expected_frame_id) const
{
    const auto syn = static_cast<std::uint8_t>(bits.get_bits(0, 2));
    if (syn == 0b00 || syn == 0b11)
        return SynIllegal{syn};
    const auto vcode = static_cast<std::uint16_t>(bits.get_bits(verification_pos_, 12));
    if (vcode != (wire_checksum(bits) ^ expected_frame_id))
        return VerificationFailure{};
    if (syn == static_cast<std::uint8_t>(Syn::Data)) {
        DataFrame f;
        f.meta = static_cast<MetaCode>(bits.get_bits(meta_pos_, 2));
        f.payload = read_payload(bits);
        f.verification = vcode;
        return f;
    }
    const auto code = control_field_code(bits, meta_pos_);
    if (!code || *code > static_cast<std::uint8_t>(ControlCode::RetransmitRequest))
        return VerificationFailure{VerificationFailure::Reason::BadControlCode};
    return ControlFrame{static_cast<ControlCode>(*code), vcode};
}

std::optional<std::pair<ControlCode, std::uint32_t>> FrameCodec::inspect_control(const FrameBits& bits) const
{
    if (bits.get_bits(0, 2) != static_cast<std::uint64_t>(Syn::Control))
        return std::nullopt;
    const auto code = control_field_code(bits, meta_pos_);
    if (!code || *code > static_cast<std::uint8_t>(ControlCode::RetransmitRequest))
        return std::nullopt;
    const auto cc = static_cast<ControlCode>(*code);
    const std::uint32_t carried = static_cast<std::uint32_t>(bits.get_bits(verification_pos_, 12)) ^ control_checksum(cc);
    if (carried >= static_cast<std::uint32_t>(config_.frame_id_count()))
        return std::nullopt;
    return std::pair{cc, carried};
}

std::pair<MetaCode, Payload> FrameCodec::pack_flit(const Flit& flit) const
{
    const auto n = static_cast<int>(flit.data.size);
    if (n < 1 || n > payload_bytes_)
        throw std::invalid_argument("flit valid byte count " + std::to_string(n) + " outside [1, " +
                                    std::to_string(payload_bytes_) + "]");
    Payload p(static_cast<std::size_t>(payload_bytes_));
    std::copy_n(flit.data.bytes.begin(), n, p.bytes.begin());
    if (n == payload_bytes_)
        return {flit.last ? MetaCode::ValidEopFull : MetaCode::ValidMid, p};
    if (!flit.last)
        throw std::invalid_argument("partial flit without last flag");
    p.back() = static_cast<std::uint8_t>(n);
    return {MetaCode::ValidEopPartial, p};
}

Flit FrameCodec::unpack_flit(MetaCode meta, const Payload& payload) const
{
    Flit f;
    switch (meta) {
    case MetaCode::Invalid:
        throw std::invalid_argument("unpack_flit: invalid Data Frame carries no flit");
    case MetaCode::ValidMid:
    case MetaCode::ValidEopFull:
        f.data = payload;
        f.data.size = static_cast<std::uint16_t>(payload_bytes_);
        f.last = meta == MetaCode::ValidEopFull;
        return f;
    case MetaCode::ValidEopPartial: {
        const int n = payload.back();
        if (n < 1 || n >= payload_bytes_)
            throw std::invalid_argument("format code " + std::to_string(n) + " out of range");
        std::copy_n(payload.bytes.begin(), n, f.data.bytes.begin());
        f.data.size = static_cast<std::uint16_t>(n);
        f.last = true;
        return f;
    }
    }
    throw std::invalid_argument("unpack_flit: bad meta code");
}

Payload FrameCodec::marker_payload(InvalidMarker marker) const
{
    Payload p(static_cast<std::size_t>(payload_bytes_));
    p.back() = static_cast<std::uint8_t>(marker);
    return p;
}

} // namespace rifl
