#include "rifl/line_coding.hpp"

#include <algorithm>
#include <stdexcept>

namespace rifl {

namespace {

// Both taps are at least 13 bits back, so up to 13 bits can be produced from
// the history register in one step.
constexpr unsigned kChunk = Scrambler::kTapNear;

inline std::uint64_t taps(std::uint64_t history, unsigned k)
{
    const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
    return ((history >> (Scrambler::kTapNear - k)) ^ (history >> (Scrambler::kTapFar - k))) & mask;
}

} // namespace

void Scrambler::scramble(FrameBits& frame, std::size_t first)
{
    for (std::size_t pos = first; pos < frame.size();) {
        const auto k = static_cast<unsigned>(std::min<std::size_t>(kChunk, frame.size() - pos));
        const std::uint64_t out = frame.get_bits(pos, k) ^ taps(history_, k);
        frame.set_bits(pos, k, out);
        history_ = ((history_ << k) | out) & kStateMask;
        pos += k;
    }
}

void Descrambler::descramble(FrameBits& frame, std::size_t first)
{
    for (std::size_t pos = first; pos < frame.size();) {
        const auto k = static_cast<unsigned>(std::min<std::size_t>(kChunk, frame.size() - pos));
        const std::uint64_t in = frame.get_bits(pos, k);
        frame.set_bits(pos, k, in ^ taps(history_, k));
        history_ = ((history_ << k) | in) & kStateMask;
        pos += k;
    }
}

LaneAligner::LaneAligner(std::size_t frame_bits, int lock_threshold)
    : frame_bits_(frame_bits), lock_threshold_(lock_threshold), run_(frame_bits, 0)
{
    if (frame_bits < 2 || lock_threshold < 1)
        throw std::invalid_argument("LaneAligner: bad parameters");
}

void LaneAligner::reset_search()
{
    std::fill(run_.begin(), run_.end(), 0);
    locked_ = false;
}

LaneAligner::Output LaneAligner::push(const BitStream& bits)
{
    Output out;
    buffer_.append(bits);
    process(out);
    return out;
}

LaneAligner::Output LaneAligner::push(const FrameBits& chunk)
{
    Output out;
    if (locked_ && buffer_.size() == 0 && next_frame_ == consumed_ && chunk.size() == frame_bits_) {
        const auto syn = chunk.get_bits(0, 2);
        consumed_ += frame_bits_;
        if (syn == 0b01 || syn == 0b10) {
            next_frame_ = consumed_;
            out.frames.push_back(chunk);
        } else {
            ++out.out_of_sync_events;
            reset_search();
            // Rescan this chunk bit by bit.
            consumed_ -= frame_bits_;
            scan_pos_ = consumed_;
            BitStream s;
            s.append(chunk);
            buffer_ = std::move(s);
            process(out);
        }
        return out;
    }
    BitStream s;
    s.append(chunk);
    buffer_.append(s);
    process(out);
    return out;
}

void LaneAligner::process(Output& out)
{
    const std::uint64_t end = consumed_ + buffer_.size();
    auto bit_at = [&](std::uint64_t abs) { return buffer_.get(static_cast<std::size_t>(abs - consumed_)); };

    for (;;) {
        if (locked_) {
            if (next_frame_ + frame_bits_ > end)
                break;
            const bool b0 = bit_at(next_frame_);
            const bool b1 = bit_at(next_frame_ + 1);
            if (b0 != b1) {
                out.frames.push_back(buffer_.slice(static_cast<std::size_t>(next_frame_ - consumed_), frame_bits_));
                next_frame_ += frame_bits_;
                continue;
            }
            ++out.out_of_sync_events;
            reset_search();
            scan_pos_ = next_frame_;
            continue;
        }
        if (scan_pos_ + 2 > end)
            break;
        const bool legal = bit_at(scan_pos_) != bit_at(scan_pos_ + 1);
        int& run = run_[static_cast<std::size_t>(scan_pos_ % frame_bits_)];
        run = legal ? run + 1 : 0;
        if (run >= lock_threshold_) {
            locked_ = true;
            lock_offset_ = static_cast<std::size_t>(scan_pos_ % frame_bits_);
            next_frame_ = scan_pos_;
        }
        ++scan_pos_;
    }

    // Keep only bits that may still start a frame.
    const std::uint64_t keep_from = locked_ ? next_frame_ : (scan_pos_ > frame_bits_ ? scan_pos_ - frame_bits_ : 0);
    if (keep_from > consumed_) {
        const std::uint64_t drop = ((keep_from - consumed_) / 64) * 64;
        if (drop > 0) {
            buffer_.drop_front(static_cast<std::size_t>(drop));
            consumed_ += drop;
        }
    }
}

} // namespace rifl
