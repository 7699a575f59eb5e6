#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rifl {

/// Fixed-capacity bit vector sized for the largest frame (2048 bits).
///
/// Bit 0 is the first bit on the wire. Internally bit i lives in word i/64 at
/// position 63 - i%64, so the words read as big-endian bit strings.
class FrameBits {
public:
    static constexpr std::size_t kMaxBits = 2048;
    static constexpr std::size_t kWords = kMaxBits / 64;

    FrameBits() = default;
    explicit FrameBits(std::size_t nbits);

    std::size_t size() const { return nbits_; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (63 - (i & 63))) & 1U; }
    void set(std::size_t i, bool v)
    {
        const std::uint64_t mask = std::uint64_t{1} << (63 - (i & 63));
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (63 - (i & 63)); }

    /// Reads `count` (<= 57) bits starting at `pos`; the first bit is the MSB of the result.
    std::uint64_t get_bits(std::size_t pos, unsigned count) const;
    /// Writes the low `count` (<= 57) bits of `value` starting at `pos`, MSB first.
    void set_bits(std::size_t pos, unsigned count, std::uint64_t value);

    /// Big-endian bytes, first wire bit in the MSB of byte 0. Size must be a multiple of 8.
    std::vector<std::uint8_t> to_bytes() const;
    static FrameBits from_bytes(std::span<const std::uint8_t> bytes);

    std::string to_hex() const;

    std::size_t popcount() const;

    friend bool operator==(const FrameBits& a, const FrameBits& b);
    FrameBits& operator^=(const FrameBits& other);

private:
    std::array<std::uint64_t, kWords> words_{};
    std::size_t nbits_ = 0;
};

inline std::uint64_t FrameBits::get_bits(std::size_t pos, unsigned count) const
{
    if (count == 0)
        return 0;
    const std::size_t w = pos >> 6;
    const unsigned off = pos & 63;
    // Window of 64 bits starting at `pos`.
    std::uint64_t window = words_[w] << off;
    if (off != 0 && w + 1 < kWords)
        window |= words_[w + 1] >> (64 - off);
    return window >> (64 - count);
}

inline void FrameBits::set_bits(std::size_t pos, unsigned count, std::uint64_t value)
{
    if (count == 0)
        return;
    const std::uint64_t vmask = count == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << count) - 1);
    value &= vmask;
    const std::size_t w = pos >> 6;
    const unsigned off = pos & 63;
    const unsigned first = 64 - off; // bits available in the first word
    if (count <= first) {
        const unsigned shift = first - count;
        words_[w] = (words_[w] & ~(vmask << shift)) | (value << shift);
    } else {
        const unsigned rest = count - first;
        const std::uint64_t hi_mask = (std::uint64_t{1} << first) - 1;
        words_[w] = (words_[w] & ~hi_mask) | (value >> rest);
        const unsigned shift = 64 - rest;
        const std::uint64_t lo_mask = ((std::uint64_t{1} << rest) - 1) << shift;
        words_[w + 1] = (words_[w + 1] & ~lo_mask) | ((value << shift) & lo_mask);
    }
}

/// Growable serial bit stream used for aligner input and channel tests.
class BitStream {
public:
    void push(bool bit);
    void append(const FrameBits& bits);
    void append(const BitStream& other, std::size_t from = 0);

    std::size_t size() const { return nbits_; }
    bool get(std::size_t i) const { return (words_[i >> 6] >> (63 - (i & 63))) & 1U; }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (63 - (i & 63)); }

    /// Copies `nbits` starting at `pos` into a frame-sized vector.
    FrameBits slice(std::size_t pos, std::size_t nbits) const;

    /// Drops the first `count` bits.
    void drop_front(std::size_t count);

private:
    std::vector<std::uint64_t> words_;
    std::size_t nbits_ = 0;
};

} // namespace rifl
