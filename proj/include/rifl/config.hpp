#pragma once

#include <cstdint>

namespace rifl {

/// Static protocol parameters for one link. All sizes in bits.
struct ProtocolConfig {
    int frame_size_bits = 256;
    int frame_id_bits = 8;
    int checksum_bits = 12;
    int verification_bits = 12;
    int lanes = 1;
    double line_rate_bps = 28e9; // per lane
    /// CRC-12 generator without the x^12 term: x^12+x^11+x^3+x^2+x+1.
    std::uint16_t crc_polynomial = 0x80F;

    static constexpr int kHeaderBits = 16;  // SYN + meta + verification
    static constexpr int kRollbackWindow = 16;
    static constexpr int kControlThreshold = 8;
    static constexpr int kWarmupFrames = 16;

    int payload_size_bits() const { return frame_size_bits - kHeaderBits; }
    int payload_bytes() const { return payload_size_bits() / 8; }
    int frame_id_count() const { return 1 << frame_id_bits; }
    int frame_id_mask() const { return frame_id_count() - 1; }
    /// Length of the TX replay schedule: 2.5 * 2^frame_id_bits frames.
    int replay_schedule_length() const { return frame_id_count() * 5 / 2; }
    double frame_period_s() const { return frame_size_bits / line_rate_bps; }

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;

    /// Table-2 frame-ID width (100 Gbps, 500 ns) for the given frame size.
    static ProtocolConfig for_frame_size(int frame_size_bits);
};

} // namespace rifl
