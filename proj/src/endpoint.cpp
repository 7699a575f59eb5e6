#include "rifl/endpoint.hpp"

#include <algorithm>
#include <stdexcept>

namespace rifl {

const char* to_string(TxFsm s)
{
    switch (s) {
    case TxFsm::Init: return "INIT";
    case TxFsm::SendPause: return "SEND_PAUSE";
    case TxFsm::Pause: return "PAUSE";
    case TxFsm::Retrans: return "RETRANS";
    case TxFsm::SendRetrans: return "SEND_RETRANS";
    case TxFsm::Normal: return "NORMAL";
    }
    return "?";
}

// ---------------------------------------------------------------------------

RxVerifier::RxVerifier(const FrameCodec& codec)
    : codec_(&codec), mask_(static_cast<std::uint32_t>(codec.config().frame_id_mask()))
{
}

void RxVerifier::set_counters(std::uint32_t frame_id, std::uint32_t threshold_id)
{
    frame_id_ = frame_id & mask_;
    threshold_id_ = threshold_id & mask_;
    seen_data_ = true;
}

RxVerifier::Result RxVerifier::verify(const FrameBits& bits)
{
    Result r{codec_->decode_frame(bits, frame_id_), false};
    if (std::holds_alternative<DataFrame>(r.decoded)) {
        seen_data_ = true;
        frame_id_ = (frame_id_ + 1) & mask_;
        if (frame_id_ == threshold_id_) {
            threshold_id_ = (threshold_id_ + 1) & mask_;
            r.delivered = true;
        }
        // Back in the steady state (counter one behind the threshold): every
        // frame up to the last delivery has been re-verified.
        if (((frame_id_ + 1) & mask_) == threshold_id_)
            frame_error_ = false;
    } else if (std::holds_alternative<ControlFrame>(r.decoded)) {
        // Control frames never move the counters.
    } else {
        ++failures_;
        // Before the peer's first Data Frame only a failed data frame means
        // something was missed; a damaged link-up control frame does not.
        if (!seen_data_ && bits.get_bits(0, 2) != static_cast<std::uint64_t>(Syn::Data))
            return r;
        frame_id_ = (threshold_id_ - ProtocolConfig::kRollbackWindow) & mask_;
        frame_error_ = true;
    }
    return r;
}

// ---------------------------------------------------------------------------

void EventMonitor::observe(const FrameBits& bits, const DecodeResult& decoded)
{
    if (std::holds_alternative<SynIllegal>(decoded)) {
        out_of_sync_ = true;
        return;
    }
    if (auto c = codec_->inspect_control(bits))
        observe_control(c->first);
    else if (std::holds_alternative<DataFrame>(decoded))
        observe_data();
}

void EventMonitor::observe_control(ControlCode code)
{
    last_was_data_ = false;
    switch (code) {
    case ControlCode::PauseRequest:
        retrans_run_ = 0;
        retrans_req_ = false;
        if (++pause_run_ >= ProtocolConfig::kControlThreshold)
            pause_req_ = true;
        break;
    case ControlCode::RetransmitRequest:
        pause_run_ = 0;
        pause_req_ = false;
        if (++retrans_run_ >= ProtocolConfig::kControlThreshold)
            retrans_req_ = true;
        break;
    case ControlCode::Idle:
        pause_run_ = 0;
        retrans_run_ = 0;
        pause_req_ = false;
        retrans_req_ = false;
        break;
    }
}

void EventMonitor::observe_data()
{
    pause_run_ = 0;
    pause_req_ = false;
    if (last_was_data_) {
        retrans_run_ = 0;
        retrans_req_ = false;
    }
    last_was_data_ = true;
}

// ---------------------------------------------------------------------------

FlowControlBuffer::FlowControlBuffer(std::uint64_t capacity_bits, std::uint32_t entry_bits)
    : capacity_bits_(capacity_bits), entry_bits_(entry_bits)
{
    if (entry_bits == 0 || capacity_bits < 3ULL * entry_bits)
        throw std::invalid_argument("flow-control buffer must hold at least three frames");
    thr_on_ = capacity_bits * 2 / 3;
    thr_off_ = capacity_bits / 3;
}

std::optional<InvalidMarker> FlowControlBuffer::push(const Flit& flit)
{
    if (occupancy_bits() + entry_bits_ > capacity_bits_) {
        ++overflows_;
        return std::nullopt;
    }
    queue_.push_back(flit);
    high_water_ = std::max(high_water_, occupancy_bits());
    if (state_ == State::Flowing && occupancy_bits() > thr_on_) {
        state_ = State::Paused;
        return InvalidMarker::FcPause;
    }
    return std::nullopt;
}

FlowControlBuffer::PopResult FlowControlBuffer::pop()
{
    PopResult r;
    if (queue_.empty())
        return r;
    r.flit = std::move(queue_.front());
    queue_.pop_front();
    if (state_ == State::Paused && occupancy_bits() < thr_off_) {
        state_ = State::Flowing;
        r.notification = InvalidMarker::FcResume;
    }
    return r;
}

// ---------------------------------------------------------------------------

void ClockCompensator::start(std::uint64_t tx_count, std::uint64_t rx_count)
{
    started_ = true;
    lag_ = static_cast<std::int64_t>(tx_count) - static_cast<std::int64_t>(rx_count);
}

std::uint64_t ClockCompensator::tick(std::uint64_t tx_count, std::uint64_t rx_count)
{
    if (!started_)
        return 0;
    const std::int64_t diff = static_cast<std::int64_t>(tx_count) - static_cast<std::int64_t>(rx_count);
    const std::int64_t n = std::max<std::int64_t>(0, diff - lag_);
    lag_ = std::max(lag_, diff);
    return static_cast<std::uint64_t>(n);
}

// ---------------------------------------------------------------------------

TxController::TxController(const FrameCodec& codec)
    : codec_(&codec),
      mask_(static_cast<std::uint32_t>(codec.config().frame_id_mask())),
      id_count_(codec.config().frame_id_count()),
      buffer_(static_cast<std::size_t>(id_count_))
{
}

TxFrame TxController::emit_data(MetaCode meta, const Payload& payload, TxFrameKind kind)
{
    TxFrame f;
    f.bits = codec_->build_data_bits(meta, payload, frame_id_);
    f.kind = kind;
    f.frame_id = frame_id_;
    buffer_[frame_id_] = f.bits;
    frame_id_ = (frame_id_ + 1) & mask_;
    return f;
}

TxFrame TxController::emit_control(ControlCode code, std::uint32_t id) const
{
    TxFrame f;
    f.bits = codec_->build_control_bits(code, id & mask_);
    f.kind = TxFrameKind::Control;
    f.control = code;
    f.frame_id = id & mask_;
    return f;
}

TxFrame TxController::retrans_schedule_frame(int pos, std::uint32_t base, bool local_error) const
{
    const ControlCode filler = local_error ? ControlCode::RetransmitRequest : ControlCode::Idle;
    if (pos < 2 * id_count_) {
        const std::uint32_t id = (base + static_cast<std::uint32_t>(pos / 2)) & mask_;
        if (pos % 2 == 0)
            return emit_control(filler, id);
        TxFrame f;
        f.bits = buffer_[id];
        f.kind = TxFrameKind::Replayed;
        f.frame_id = id;
        return f;
    }
    return emit_control(filler, base);
}

TxController::Output TxController::tick(const EventFlags& flags, const Flit* user_flit)
{
    Output out;
    if (state_ == TxFsm::Init) {
        const auto id = static_cast<std::uint32_t>(init_filled_);
        buffer_[id] = codec_->build_data_bits(MetaCode::Invalid, codec_->marker_payload(InvalidMarker::Invalid), id);
        ++init_filled_;
        out.frame = emit_control(ControlCode::PauseRequest, 0);
        if (init_filled_ == id_count_) {
            state_ = TxFsm::SendPause;
            frame_id_ = 0;
        }
        return out;
    }

    if (flags.out_of_sync)
        state_ = TxFsm::SendPause;
    else if (flags.pause_req)
        state_ = TxFsm::Pause;
    else if (flags.retrans_req || replay_active_)
        state_ = TxFsm::Retrans;
    else if (flags.frame_error)
        state_ = TxFsm::SendRetrans;
    else
        state_ = TxFsm::Normal;

    switch (state_) {
    case TxFsm::Init:
    case TxFsm::SendPause:
        out.frame = emit_control(ControlCode::PauseRequest, frame_id_);
        break;
    case TxFsm::Pause:
        out.frame = emit_control(ControlCode::Idle, frame_id_);
        break;
    case TxFsm::SendRetrans:
        out.frame = emit_control(ControlCode::RetransmitRequest, frame_id_);
        break;
    case TxFsm::Retrans: {
        if (!replay_active_) {
            replay_active_ = true;
            replay_cursor_ = 0;
            replay_base_ = frame_id_;
            ++replays_started_;
        }
        out.frame = retrans_schedule_frame(replay_cursor_, replay_base_, flags.frame_error);
        if (++replay_cursor_ == codec_->config().replay_schedule_length()) {
            replay_cursor_ = 0;
            if (flags.retrans_req)
                ++replays_started_;
            else
                replay_active_ = false;
        }
        break;
    }
    case TxFsm::Normal: {
        if (!entered_normal_) {
            entered_normal_ = true;
            warmup_remaining_ = ProtocolConfig::kWarmupFrames;
        }
        if (!notifications_.empty()) {
            out.frame = emit_data(MetaCode::Invalid, codec_->marker_payload(notifications_.front()),
                                  TxFrameKind::FcNotification);
            notifications_.pop_front();
        } else if (warmup_remaining_ == 0 && !fc_paused_ && comp_credits_ == 0 && user_flit != nullptr) {
            const auto [meta, payload] = codec_->pack_flit(*user_flit);
            out.frame = emit_data(meta, payload, TxFrameKind::FreshData);
            out.consumed = true;
            return out;
        } else {
            if (warmup_remaining_ > 0)
                --warmup_remaining_;
            out.frame = emit_data(MetaCode::Invalid, codec_->marker_payload(InvalidMarker::Invalid),
                                  TxFrameKind::InvalidData);
        }
        if (comp_credits_ > 0)
            --comp_credits_;
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------

Endpoint::Endpoint(const EndpointOptions& options)
    : options_(options),
      codec_(options.protocol),
      tx_(codec_),
      scrambler_(options.scrambler_seed),
      aligner_(static_cast<std::size_t>(options.protocol.frame_size_bits), options.lock_threshold),
      rx_(codec_),
      monitor_(codec_),
      fc_(options.fc_capacity_bits, static_cast<std::uint32_t>(options.protocol.frame_size_bits))
{
}

EventFlags Endpoint::flags() const
{
    return EventFlags{monitor_.out_of_sync(), monitor_.pause_req(), monitor_.retrans_req(), rx_.frame_error()};
}

Endpoint::TickResult Endpoint::tick(const Flit* offered)
{
    ++stats_.ticks;
    if (options_.clock_compensation) {
        if (!comp_.started()) {
            if (tx_.entered_normal())
                comp_.start(stats_.ticks, stats_.frames_received);
        } else {
            const auto n = comp_.tick(stats_.ticks, stats_.frames_received);
            tx_.add_comp_credits(n);
            stats_.comp_pauses_issued += n;
        }
    }

    const bool was_up = tx_.entered_normal();
    auto o = tx_.tick(flags(), offered);
    TickResult r;
    r.kind = o.frame.kind;
    r.control = o.frame.control;
    r.consumed = o.consumed;
    switch (o.frame.kind) {
    case TxFrameKind::FreshData: ++stats_.frames_fresh; break;
    case TxFrameKind::InvalidData: ++stats_.frames_invalid; break;
    case TxFrameKind::FcNotification: ++stats_.frames_fc; break;
    case TxFrameKind::Replayed: ++stats_.frames_replayed; break;
    case TxFrameKind::Control:
        ++stats_.frames_control;
        if (o.frame.control == ControlCode::Idle) {
            ++stats_.idle_sent;
        } else if (o.frame.control == ControlCode::PauseRequest) {
            ++stats_.pause_req_sent;
            if (was_up)
                ++stats_.pause_req_after_linkup;
        } else {
            ++stats_.retrans_req_sent;
            if (was_up)
                ++stats_.retrans_req_after_linkup;
        }
        break;
    }
    r.wire = std::move(o.frame.bits);
    scrambler_.scramble(r.wire);
    return r;
}

int Endpoint::receive(const FrameBits& wire)
{
    ++stats_.frames_received;
    auto out = aligner_.push(wire);
    stats_.out_of_sync_events += static_cast<std::uint64_t>(out.out_of_sync_events);
    if (out.out_of_sync_events > 0) {
        recognized_since_lock_ = 0;
        monitor_.set_out_of_sync(true);
    }
    int delivered = 0;
    for (auto& frame : out.frames) {
        descrambler_.descramble(frame);
        if (recognized_since_lock_ < ProtocolConfig::kControlThreshold) {
            // Sync counts as restored once the descrambler produces
            // recognizable frames and the monitor has seen enough of them to
            // judge the peer. The verifier only sees frames after that.
            const auto probe = codec_.decode_frame(frame, rx_.frame_id());
            monitor_.observe(frame, probe);
            if (std::holds_alternative<DataFrame>(probe) || codec_.inspect_control(frame)) {
                if (++recognized_since_lock_ == ProtocolConfig::kControlThreshold)
                    monitor_.set_out_of_sync(false);
            }
            continue;
        }
        const auto res = rx_.verify(frame);
        monitor_.observe(frame, res.decoded);
        if (!std::holds_alternative<DataFrame>(res.decoded)) {
            if (!std::holds_alternative<ControlFrame>(res.decoded))
                ++stats_.rx_failures;
            continue;
        }
        if (!res.delivered)
            continue;
        const auto& df = std::get<DataFrame>(res.decoded);
        if (df.meta == MetaCode::Invalid) {
            const auto marker = static_cast<InvalidMarker>(df.payload.back());
            if (marker == InvalidMarker::FcPause) {
                tx_.set_fc_paused(true);
                ++stats_.fc_pause_received;
            } else if (marker == InvalidMarker::FcResume) {
                tx_.set_fc_paused(false);
                ++stats_.fc_resume_received;
            }
            continue;
        }
        Flit flit;
        try {
            flit = codec_.unpack_flit(df.meta, df.payload);
        } catch (const std::invalid_argument&) {
            ++stats_.rx_failures; // undetected corruption with a malformed format code
            continue;
        }
        const auto before = fc_.overflows();
        if (auto note = fc_.push(flit))
            tx_.queue_notification(*note);
        if (fc_.overflows() != before)
            continue;
        ++stats_.rx_delivered_flits;
        ++delivered;
    }
    if (!aligner_.locked())
        monitor_.set_out_of_sync(true);
    return delivered;
}

std::optional<Flit> Endpoint::drain()
{
    auto r = fc_.pop();
    if (r.notification)
        tx_.queue_notification(*r.notification);
    return r.flit;
}

} // namespace rifl
