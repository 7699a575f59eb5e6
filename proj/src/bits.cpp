#include "rifl/bits.hpp"

#include <bit>

namespace rifl {

FrameBits::FrameBits(std::size_t nbits) : nbits_(nbits)
{
    if (nbits > kMaxBits)
        throw std::invalid_argument("FrameBits: size exceeds 2048 bits");
}

std::vector<std::uint8_t> FrameBits::to_bytes() const
{
    if (nbits_ % 8 != 0)
        throw std::invalid_argument("FrameBits::to_bytes: size not a multiple of 8");
    std::vector<std::uint8_t> out(nbits_ / 8);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (56 - 8 * (i % 8)));
    return out;
}

FrameBits FrameBits::from_bytes(std::span<const std::uint8_t> bytes)
{
    FrameBits f(bytes.size() * 8);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        f.words_[i / 8] |= std::uint64_t{bytes[i]} << (56 - 8 * (i % 8));
    return f;
}

std::string FrameBits::to_hex() const
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (auto b : to_bytes()) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 15]);
    }
    return s;
}

std::size_t FrameBits::popcount() const
{
    std::size_t n = 0;
    for (auto w : words_)
        n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

bool operator==(const FrameBits& a, const FrameBits& b)
{
    return a.nbits_ == b.nbits_ && a.words_ == b.words_;
}

FrameBits& FrameBits::operator^=(const FrameBits& other)
{
    for (std::size_t i = 0; i < kWords; ++i)
        words_[i] ^= other.words_[i];
    return *this;
}

void BitStream::push(bool bit)
{
    if ((nbits_ >> 6) >= words_.size())
        words_.push_back(0);
    if (bit)
        words_[nbits_ >> 6] |= std::uint64_t{1} << (63 - (nbits_ & 63));
    ++nbits_;
}

void BitStream::append(const FrameBits& bits)
{
    for (std::size_t i = 0; i < bits.size(); ++i)
        push(bits.get(i));
}

void BitStream::append(const BitStream& other, std::size_t from)
{
    for (std::size_t i = from; i < other.size(); ++i)
        push(other.get(i));
}

FrameBits BitStream::slice(std::size_t pos, std::size_t nbits) const
{
    FrameBits f(nbits);
    for (std::size_t i = 0; i < nbits; ++i)
        if (get(pos + i))
            f.set(i, true);
    return f;
}

void BitStream::drop_front(std::size_t count)
{
    if (count >= nbits_) {
        words_.clear();
        nbits_ = 0;
        return;
    }
    if (count % 64 == 0) {
        words_.erase(words_.begin(), words_.begin() + static_cast<std::ptrdiff_t>(count / 64));
        nbits_ -= count;
        return;
    }
    BitStream rest;
    rest.append(*this, count);
    *this = std::move(rest);
}

} // namespace rifl
