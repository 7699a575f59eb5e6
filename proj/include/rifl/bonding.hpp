#pragma once

#include "rifl/frame_codec.hpp"

#include <deque>
#include <vector>

namespace rifl {

/// Round-robin lane cursor shared by dispatch and gather.
class LaneCursor {
public:
    explicit LaneCursor(int lanes);
    int lanes() const { return lanes_; }
    int current() const { return current_; }
    void advance() { current_ = (current_ + 1) % lanes_; }

private:
    int lanes_;
    int current_ = 0;
};

/// Segment k goes to lane k mod N.
std::vector<std::vector<Flit>> dispatch(const std::vector<Flit>& stream, int lanes);

/// Inverse of dispatch: takes segments back in strict lane order and stops
/// at the first lane that has nothing left on its turn.
std::vector<Flit> gather(const std::vector<std::vector<Flit>>& per_lane);

/// Streaming reassembly: per-lane queues drained in lane order.
class Gatherer {
public:
    explicit Gatherer(int lanes);

    void push(int lane, const Flit& flit);
    /// Next segment if the lane whose turn it is has one.
    std::optional<Flit> pop();

    std::size_t queued(int lane) const { return queues_[static_cast<std::size_t>(lane)].size(); }
    std::size_t peak(int lane) const { return peaks_[static_cast<std::size_t>(lane)]; }

private:
    LaneCursor cursor_;
    std::vector<std::deque<Flit>> queues_;
    std::vector<std::size_t> peaks_;
};

} // namespace rifl
