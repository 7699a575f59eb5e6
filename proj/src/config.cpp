#include "rifl/config.hpp"

#include <stdexcept>
#include <string>

namespace rifl {

void ProtocolConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("protocol config: " + what); };
    switch (frame_size_bits) {
    case 128: case 256: case 512: case 1024: case 2048:
        break;
    default:
        fail("frame_size_bits must be one of 128, 256, 512, 1024, 2048");
    }
    if (verification_bits != 12)
        fail("verification_bits must be 12");
    if (frame_size_bits != payload_size_bits() + verification_bits + 4)
        fail("frame size must equal payload + verification + 4");
    if (payload_size_bits() % 8 != 0)
        fail("payload size must be a multiple of 8 bits");
    if (verification_bits % 8 != 4)
        fail("verification size must be 4 mod 8");
    if (checksum_bits > verification_bits)
        fail("checksum_bits must not exceed verification_bits");
    if (frame_id_bits < 5 || frame_id_bits > verification_bits)
        fail("frame_id_bits must be in [5, verification_bits]");
    if (lanes < 1)
        fail("lanes must be >= 1");
    if (!(line_rate_bps > 0))
        fail("line_rate_bps must be positive");
}

ProtocolConfig ProtocolConfig::for_frame_size(int frame_size_bits)
{
    ProtocolConfig c;
    c.frame_size_bits = frame_size_bits;
    switch (frame_size_bits) {
    case 128: c.frame_id_bits = 9; break;
    case 256: c.frame_id_bits = 8; break;
    case 512: c.frame_id_bits = 7; break;
    case 1024: c.frame_id_bits = 6; break;
    case 2048: c.frame_id_bits = 5; break;
    default: break;
    }
    c.validate();
    return c;
}

} // namespace rifl
