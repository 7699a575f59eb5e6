#pragma once

#include <cstdint>
#include <vector>

// Bit-serial polynomial long division over GF(2). `poly` is the generator
// without its leading x^width term. Independent of the table-driven CRC.
inline std::uint16_t long_division_crc(std::vector<int> message, std::uint32_t poly, int width)
{
    const std::uint32_t generator = (1U << width) | poly;
    message.insert(message.end(), static_cast<std::size_t>(width), 0);
    for (std::size_t i = 0; i + static_cast<std::size_t>(width) < message.size(); ++i) {
        if (message[i] == 0)
            continue;
        for (int k = 0; k <= width; ++k)
            message[i + static_cast<std::size_t>(k)] ^= static_cast<int>((generator >> (width - k)) & 1U);
    }
    std::uint16_t rem = 0;
    for (std::size_t i = message.size() - static_cast<std::size_t>(width); i < message.size(); ++i)
        rem = static_cast<std::uint16_t>((rem << 1) | message[i]);
    return rem;
}
