#pragma once

#include "rifl/bits.hpp"

#include <cstdint>
#include <vector>

namespace rifl {

/// Multiplicative scrambler for 1 + x^13 + x^33. The two SYN bits of each
/// frame bypass it; every other bit passes through and the state carries
/// across frames.
class Scrambler {
public:
    static constexpr unsigned kTapNear = 13;
    static constexpr unsigned kTapFar = 33;

    explicit Scrambler(std::uint64_t initial_state = 0) : history_(initial_state & kStateMask) {}

    /// Scrambles bits [first, size) of the frame in place.
    void scramble(FrameBits& frame, std::size_t first = 2);
    std::uint64_t state() const { return history_; }

private:
    static constexpr std::uint64_t kStateMask = (std::uint64_t{1} << kTapFar) - 1;
    std::uint64_t history_; // bit j = output (t - 1 - j)
};

/// Self-synchronizing inverse of Scrambler.
class Descrambler {
public:
    explicit Descrambler(std::uint64_t initial_state = 0) : history_(initial_state & kStateMask) {}

    void descramble(FrameBits& frame, std::size_t first = 2);
    std::uint64_t state() const { return history_; }

private:
    static constexpr std::uint64_t kStateMask = (std::uint64_t{1} << Scrambler::kTapFar) - 1;
    std::uint64_t history_; // bit j = input (t - 1 - j)
};

/// Recovers frame alignment from a serial bit stream by locking onto the
/// SYN position. Lock needs `lock_threshold` consecutive legal SYNs at one
/// offset; one illegal SYN drops lock and restarts the search.
class LaneAligner {
public:
    static constexpr int kDefaultLockThreshold = 64;

    explicit LaneAligner(std::size_t frame_bits, int lock_threshold = kDefaultLockThreshold);

    struct Output {
        std::vector<FrameBits> frames;
        int out_of_sync_events = 0;
    };

    /// Appends bits to the stream and returns every frame that became available.
    Output push(const BitStream& bits);
    /// Frame-sized chunk; takes a fast path when locked at offset 0.
    Output push(const FrameBits& chunk);

    bool locked() const { return locked_; }
    /// Offset of frame starts, relative to the first bit ever pushed, mod frame size.
    std::size_t bit_offset() const { return lock_offset_; }
    std::uint64_t bits_seen() const { return consumed_ + buffer_.size(); }

private:
    void process(Output& out);
    void reset_search();

    std::size_t frame_bits_;
    int lock_threshold_;
    BitStream buffer_;           // unconsumed bits; buffer_[0] is absolute position consumed_
    std::uint64_t consumed_ = 0;
    std::uint64_t scan_pos_ = 0; // next absolute position whose SYN window is unchecked
    std::vector<int> run_;       // consecutive legal SYNs per offset
    bool locked_ = false;
    std::size_t lock_offset_ = 0;
    std::uint64_t next_frame_ = 0; // absolute start of next frame when locked
};

} // namespace rifl
