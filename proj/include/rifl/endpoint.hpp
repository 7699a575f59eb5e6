#pragma once

#include "rifl/bits.hpp"
#include "rifl/config.hpp"
#include "rifl/frame_codec.hpp"
#include "rifl/line_coding.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace rifl {

enum class TxFsm : std::uint8_t { Init, SendPause, Pause, Retrans, SendRetrans, Normal };
const char* to_string(TxFsm s);

/// Flags raised by the RX side and consumed by the TX controller.
struct EventFlags {
    bool out_of_sync = false;
    bool pause_req = false;
    bool retrans_req = false;
    bool frame_error = false;
};

/// RX verification state machine (one counter pair per lane).
class RxVerifier {
public:
    explicit RxVerifier(const FrameCodec& codec);

    struct Result {
        DecodeResult decoded;
        bool delivered = false; // only meaningful for DataFrame results
    };

    Result verify(const FrameBits& bits);

    std::uint32_t frame_id() const { return frame_id_; }
    std::uint32_t threshold_id() const { return threshold_id_; }
    bool frame_error() const { return frame_error_; }
    std::uint64_t failures() const { return failures_; }

    /// Test hook: place the counters at an arbitrary point of the sequence.
    void set_counters(std::uint32_t frame_id, std::uint32_t threshold_id);

private:
    const FrameCodec* codec_;
    std::uint32_t mask_;
    std::uint32_t frame_id_ = 0;
    std::uint32_t threshold_id_ = ProtocolConfig::kRollbackWindow;
    bool frame_error_ = false;
    bool seen_data_ = false;
    std::uint64_t failures_ = 0;
};

/// Watches received frames for pause / retransmit requests and sync loss.
///
/// A request flag rises after eight matching control frames in a row.
/// Data Frames neither advance nor break a retransmit-request run, since
/// replay interleaves them with the requests; the flag drops on any other
/// control code or on two Data Frames in a row.
class EventMonitor {
public:
    explicit EventMonitor(const FrameCodec& codec) : codec_(&codec) {}

    /// `bits` is the descrambled frame, `decoded` its verification outcome.
    void observe(const FrameBits& bits, const DecodeResult& decoded);
    void observe_control(ControlCode code);
    void observe_data();
    void set_out_of_sync(bool v) { out_of_sync_ = v; }

    bool out_of_sync() const { return out_of_sync_; }
    bool pause_req() const { return pause_req_; }
    bool retrans_req() const { return retrans_req_; }

private:
    const FrameCodec* codec_;
    bool out_of_sync_ = true; // nothing received yet
    bool pause_req_ = false;
    bool retrans_req_ = false;
    int pause_run_ = 0;
    int retrans_run_ = 0;
    bool last_was_data_ = false;
};

/// ON/OFF flow-control buffer between RX and the user.
class FlowControlBuffer {
public:
    enum class State : std::uint8_t { Flowing, Paused };

    /// Capacity and thresholds in bits; each entry accounts for `entry_bits`.
    FlowControlBuffer(std::uint64_t capacity_bits, std::uint32_t entry_bits);

    /// Stores a flit. Returns FcPause when occupancy rises above the ON threshold.
    std::optional<InvalidMarker> push(const Flit& flit);
    /// Removes the oldest flit. The marker is FcResume when occupancy falls below OFF.
    struct PopResult {
        std::optional<Flit> flit;
        std::optional<InvalidMarker> notification;
    };
    PopResult pop();

    bool empty() const { return queue_.empty(); }
    std::size_t size() const { return queue_.size(); }
    std::uint64_t occupancy_bits() const { return queue_.size() * entry_bits_; }
    std::uint64_t capacity_bits() const { return capacity_bits_; }
    std::uint64_t thr_on() const { return thr_on_; }
    std::uint64_t thr_off() const { return thr_off_; }
    std::uint64_t high_water_bits() const { return high_water_; }
    std::uint64_t overflows() const { return overflows_; }
    State state() const { return state_; }

private:
    std::deque<Flit> queue_;
    std::uint64_t capacity_bits_;
    std::uint32_t entry_bits_;
    std::uint64_t thr_on_;
    std::uint64_t thr_off_;
    std::uint64_t high_water_ = 0;
    std::uint64_t overflows_ = 0;
    State state_ = State::Flowing;
};

/// Issues single-slot pause credits when the local TX clock outruns the
/// recovered RX clock.
class ClockCompensator {
public:
    void start(std::uint64_t tx_count, std::uint64_t rx_count);
    bool started() const { return started_; }
    /// Returns N = max(0, diff - lag) and raises lag to the running maximum.
    std::uint64_t tick(std::uint64_t tx_count, std::uint64_t rx_count);
    std::int64_t lag() const { return lag_; }

private:
    bool started_ = false;
    std::int64_t lag_ = 0;
};

enum class TxFrameKind : std::uint8_t { FreshData, InvalidData, FcNotification, Replayed, Control };

struct TxFrame {
    FrameBits bits;       // unscrambled
    TxFrameKind kind = TxFrameKind::InvalidData;
    ControlCode control = ControlCode::Idle;
    std::uint32_t frame_id = 0; // id used in the verification code
};

/// TX controller: six-state FSM, retransmission buffer and replay schedule.
class TxController {
public:
    explicit TxController(const FrameCodec& codec);

    struct Output {
        TxFrame frame;
        bool consumed = false; // user flit taken
    };

    /// One frame slot. `user_flit` may be null.
    Output tick(const EventFlags& flags, const Flit* user_flit);

    TxFsm state() const { return state_; }
    std::uint32_t frame_id() const { return frame_id_; }
    bool fc_paused() const { return fc_paused_; }
    void set_fc_paused(bool v) { fc_paused_ = v; }
    void add_comp_credits(std::uint64_t n) { comp_credits_ += n; }
    std::uint64_t comp_credits() const { return comp_credits_; }
    void queue_notification(InvalidMarker m) { notifications_.push_back(m); }
    int warmup_remaining() const { return warmup_remaining_; }
    bool replay_active() const { return replay_active_; }
    int replay_cursor() const { return replay_cursor_; }
    bool entered_normal() const { return entered_normal_; }
    std::uint64_t replays_started() const { return replays_started_; }

    /// Buffered frame for an id (unscrambled).
    const FrameBits& buffered(std::uint32_t id) const { return buffer_[id]; }

    /// Frame emitted at replay position `pos` of a schedule starting at `base`.
    TxFrame retrans_schedule_frame(int pos, std::uint32_t base, bool local_error) const;

private:
    TxFrame emit_data(MetaCode meta, const Payload& payload, TxFrameKind kind);
    TxFrame emit_control(ControlCode code, std::uint32_t id) const;

    const FrameCodec* codec_;
    std::uint32_t mask_;
    int id_count_;
    TxFsm state_ = TxFsm::Init;
    std::uint32_t frame_id_ = 0;
    std::vector<FrameBits> buffer_;
    int init_filled_ = 0;
    bool replay_active_ = false;
    int replay_cursor_ = 0;
    std::uint32_t replay_base_ = 0;
    bool entered_normal_ = false;
    int warmup_remaining_ = 0;
    bool fc_paused_ = false;
    std::uint64_t comp_credits_ = 0;
    std::deque<InvalidMarker> notifications_;
    std::uint64_t replays_started_ = 0;
};

struct EndpointOptions {
    ProtocolConfig protocol;
    std::uint64_t fc_capacity_bits = 0;  // 0: size from protocol defaults (caller must set)
    std::uint64_t scrambler_seed = 0x1ABCDEF01ULL;
    int lock_threshold = LaneAligner::kDefaultLockThreshold;
    bool clock_compensation = true;
};

struct EndpointStats {
    std::uint64_t ticks = 0;
    std::uint64_t frames_fresh = 0;
    std::uint64_t frames_invalid = 0;
    std::uint64_t frames_fc = 0;
    std::uint64_t frames_replayed = 0;
    std::uint64_t frames_control = 0;
    std::uint64_t idle_sent = 0;
    std::uint64_t pause_req_sent = 0;
    std::uint64_t retrans_req_sent = 0;
    std::uint64_t pause_req_after_linkup = 0;
    std::uint64_t retrans_req_after_linkup = 0;
    std::uint64_t comp_pauses_issued = 0;
    std::uint64_t frames_received = 0;
    std::uint64_t rx_failures = 0;
    std::uint64_t rx_delivered_flits = 0;
    std::uint64_t out_of_sync_events = 0;
    std::uint64_t fc_pause_received = 0;
    std::uint64_t fc_resume_received = 0;
};

/// One link endpoint: TX controller and scrambler on the way out; aligner,
/// descrambler, verifier, event monitor and flow-control buffer on the way in.
class Endpoint {
public:
    explicit Endpoint(const EndpointOptions& options);
    Endpoint(const Endpoint&) = delete;
    Endpoint& operator=(const Endpoint&) = delete;

    struct TickResult {
        FrameBits wire;      // scrambled, ready for the channel
        TxFrameKind kind = TxFrameKind::InvalidData;
        ControlCode control = ControlCode::Idle;
        bool consumed = false;
    };

    /// One TX frame slot. `offered` is the user flit waiting at the interface, if any.
    TickResult tick(const Flit* offered);

    /// Frame arriving from the channel (one frame's worth of serial bits).
    /// Returns the number of user flits delivered into the flow-control buffer.
    int receive(const FrameBits& wire);

    /// User side drains one flit from the flow-control buffer.
    std::optional<Flit> drain();

    EventFlags flags() const;
    const TxController& tx() const { return tx_; }
    TxController& tx() { return tx_; }
    const RxVerifier& rx() const { return rx_; }
    const EventMonitor& monitor() const { return monitor_; }
    const FlowControlBuffer& fc_buffer() const { return fc_; }
    const ClockCompensator& compensator() const { return comp_; }
    const EndpointStats& stats() const { return stats_; }
    const FrameCodec& codec() const { return codec_; }
    bool link_up() const { return tx_.entered_normal(); }

private:
    EndpointOptions options_;
    FrameCodec codec_;
    TxController tx_;
    Scrambler scrambler_;
    LaneAligner aligner_;
    Descrambler descrambler_;
    RxVerifier rx_;
    EventMonitor monitor_;
    FlowControlBuffer fc_;
    ClockCompensator comp_;
    EndpointStats stats_;
    int recognized_since_lock_ = 0;
};

} // namespace rifl
