#include "rifl/link_sim.hpp"

#include "rifl/bonding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rifl {

namespace {

__int128 gcd128(__int128 a, __int128 b)
{
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t s = a ^ (b * 0xD6E8FEB86659FD93ULL);
    return splitmix64(s);
}

double uniform01(std::uint64_t& state)
{
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

} // namespace

RationalClock::RationalClock(int frame_bits, double line_rate_bps, double ppm)
{
    if (frame_bits <= 0 || !(line_rate_bps > 0))
        throw std::invalid_argument("clock: frame size and line rate must be positive");
    const auto rate = static_cast<__int128>(std::llround(line_rate_bps));
    const auto milli_ppm = static_cast<__int128>(std::llround(ppm * 1000.0));
    // period = frame_bits / rate seconds, divided by (1 + ppm * 1e-6).
    num_ = static_cast<__int128>(frame_bits) * 1'000'000'000'000LL * 1'000'000'000LL;
    den_ = rate * (1'000'000'000LL + milli_ppm);
    if (den_ <= 0)
        throw std::invalid_argument("clock: ppm offset out of range");
    const __int128 g = gcd128(num_, den_);
    num_ /= g;
    den_ /= g;
}

std::int64_t RationalClock::time(std::uint64_t tick) const
{
    return static_cast<std::int64_t>(static_cast<__int128>(tick) * num_ / den_);
}

double RationalClock::period_ps() const
{
    return static_cast<double>(num_) / static_cast<double>(den_);
}

bool EventQueue::Later::operator()(const Event& a, const Event& b) const
{
    if (a.time != b.time)
        return a.time > b.time;
    if (a.priority != b.priority)
        return a.priority > b.priority;
    return a.seq > b.seq;
}

void EventQueue::push(std::int64_t time, int priority, int kind, int side, int lane)
{
    heap_.push(Event{time, priority, seq_++, kind, side, lane});
}

EventQueue::Event EventQueue::pop()
{
    Event e = heap_.top();
    heap_.pop();
    return e;
}

BitErrorProcess::BitErrorProcess(double ber, std::uint64_t key) : ber_(ber), key_(key)
{
    if (!(ber >= 0.0 && ber < 1.0))
        throw std::invalid_argument("bit error rate must lie in [0, 1)");
}

void BitErrorProcess::load_block(std::uint64_t block)
{
    cached_block_ = block;
    block_flips_.clear();
    if (ber_ <= 0.0)
        return;
    std::uint64_t state = mix(key_, block);
    constexpr std::uint32_t kBits = 1U << kBlockBits;
    if (ber_ >= kCandidateRate) {
        for (std::uint32_t i = 0; i < kBits; ++i)
            if (uniform01(state) < ber_)
                block_flips_.push_back(i);
        return;
    }
    // Candidates at a fixed rate; each survives with probability ber / rate.
    // Candidate positions and marks do not depend on ber, so error sets nest.
    const double log_keep = std::log1p(-kCandidateRate);
    std::uint64_t pos = 0;
    for (;;) {
        const double u = 1.0 - uniform01(state);
        pos += static_cast<std::uint64_t>(std::floor(std::log(u) / log_keep));
        if (pos >= kBits)
            break;
        const double mark = uniform01(state) * kCandidateRate;
        if (mark < ber_)
            block_flips_.push_back(static_cast<std::uint32_t>(pos));
        ++pos;
    }
}

void BitErrorProcess::flips(std::uint64_t start, std::uint32_t n, std::vector<std::uint32_t>& out)
{
    if (ber_ <= 0.0 || n == 0)
        return;
    const std::uint64_t end = start + n;
    for (std::uint64_t block = start >> kBlockBits; (block << kBlockBits) < end; ++block) {
        if (block != cached_block_)
            load_block(block);
        const std::uint64_t base = block << kBlockBits;
        const auto lo = static_cast<std::uint32_t>(std::max(start, base) - base);
        const auto hi = static_cast<std::uint32_t>(std::min<std::uint64_t>(end, base + (1ULL << kBlockBits)) - base);
        auto it = std::lower_bound(block_flips_.begin(), block_flips_.end(), lo);
        for (; it != block_flips_.end() && *it < hi; ++it)
            out.push_back(static_cast<std::uint32_t>(base + *it - start));
    }
}

double LinkScenario::max_skew_slots() const
{
    double m = 0;
    for (double s : lane_skew_slots)
        m = std::max(m, s);
    return m;
}

std::uint64_t LinkScenario::effective_fc_capacity_bits() const
{
    if (fc_capacity_bits != 0)
        return fc_capacity_bits;
    const double in_flight = protocol.line_rate_bps * rtt_s();
    const double frames = std::ceil(in_flight / protocol.frame_size_bits);
    // Headroom above the ON threshold must absorb everything that arrives
    // while the pause notification travels out and data in flight lands:
    // one RTT of frames plus rollback, monitor and skew margins.
    const double headroom_frames = frames + ProtocolConfig::kRollbackWindow + 2 * ProtocolConfig::kControlThreshold +
                                   std::ceil(max_skew_slots());
    const double by_headroom = 3.0 * headroom_frames * protocol.frame_size_bits;
    return static_cast<std::uint64_t>(std::max(std::ceil(1.5 * in_flight), by_headroom));
}

void LinkScenario::validate() const
{
    protocol.validate();
    const double in_flight_frames = protocol.line_rate_bps * rtt_s() / protocol.frame_size_bits;
    if (static_cast<double>(protocol.frame_id_count()) < in_flight_frames) {
        std::ostringstream s;
        s << "frame-ID bound violated: 2^frame_id_bits = " << protocol.frame_id_count()
          << " < line_rate * RTT / frame_size = " << in_flight_frames;
        throw std::invalid_argument(s.str());
    }
    const double fc_min = 1.5 * protocol.line_rate_bps * rtt_s();
    if (static_cast<double>(effective_fc_capacity_bits()) < fc_min) {
        std::ostringstream s;
        s << "flow-control buffer bound violated: S_FC = " << effective_fc_capacity_bits()
          << " bits < 3/2 * line_rate * RTT = " << fc_min << " bits";
        throw std::invalid_argument(s.str());
    }
    for (double b : {ber_forward, ber_reverse})
        if (!(b >= 0.0 && b < 1.0))
            throw std::invalid_argument("bit error rate must lie in [0, 1)");
    for (double p : {ppm_a, ppm_b})
        if (!(std::abs(p) < 10000.0))
            throw std::invalid_argument("clock offset must be within +-10000 ppm");
    if (cable_length_m < 0 || propagation_ns_per_m < 0 || circuit_delay_ns < 0)
        throw std::invalid_argument("delays must be non-negative");
    if (lane_skew_slots.size() > static_cast<std::size_t>(protocol.lanes))
        throw std::invalid_argument("more lane skew entries than lanes");
    for (double s : lane_skew_slots)
        if (s < 0)
            throw std::invalid_argument("lane skew must be non-negative");
    if (duration_slots == 0)
        throw std::invalid_argument("duration must be at least one frame slot");
}

bool RunResult::lossless() const
{
    return !forward.mismatch && !reverse.mismatch && forward.complete && reverse.complete;
}

namespace {

constexpr int kArrival = 0;
constexpr int kTick = 1;

struct InFlight {
    std::int64_t time;
    FrameBits bits;
};

struct QueuedFlit {
    Flit flit;
    std::uint64_t earliest;
};

struct SideState {
    std::vector<std::unique_ptr<Endpoint>> lanes;
    RationalClock clock;
    std::uint64_t tick = 0;

    std::unique_ptr<FlitSource> source;
    bool source_done = true;
    std::vector<std::deque<QueuedFlit>> tx_queue;
    LaneCursor dispatch;
    std::vector<std::deque<std::int64_t>> accept_times;
    std::uint64_t accepted = 0;
    std::uint64_t dispatched = 0;

    LaneCursor gather;
    std::vector<std::deque<std::int64_t>> deliver_times;
    std::unique_ptr<StreamValidator> validator;
    std::vector<std::int64_t> latency;
    std::vector<DrainRecord> drained;
    std::uint64_t delivered_flits = 0;
    std::uint64_t window_bytes = 0;
    std::int64_t first_delivery = -1;

    SideResult result;

    SideState(int lanes, RationalClock c)
        : clock(c),
          tx_queue(static_cast<std::size_t>(lanes)),
          dispatch(lanes),
          accept_times(static_cast<std::size_t>(lanes)),
          gather(lanes),
          deliver_times(static_cast<std::size_t>(lanes))
    {
    }
};

class Simulation {
public:
    Simulation(const LinkScenario& sc, const TrafficSpec& forward, const std::optional<TrafficSpec>& reverse)
        : sc_(sc),
          lanes_(sc.protocol.lanes),
          frame_bits_(sc.protocol.frame_size_bits),
          nominal_(frame_bits_, sc.protocol.line_rate_bps),
          fc_bits_(sc.effective_fc_capacity_bits())
    {
        sc_.validate();
        sides_.emplace_back(lanes_, RationalClock(frame_bits_, sc.protocol.line_rate_bps, sc.ppm_a));
        sides_.emplace_back(lanes_, RationalClock(frame_bits_, sc.protocol.line_rate_bps, sc.ppm_b));

        const int payload_bytes = sc.protocol.payload_bytes();
        for (int s = 0; s < 2; ++s) {
            auto& side = sides_[static_cast<std::size_t>(s)];
            for (int lane = 0; lane < lanes_; ++lane) {
                EndpointOptions o;
                o.protocol = sc.protocol;
                o.fc_capacity_bits = fc_bits_;
                o.clock_compensation = sc.clock_compensation;
                o.scrambler_seed = (s == 0 ? 0x1ABCDEF01ULL : 0x2468ACE13ULL) + 0x1000ULL * static_cast<unsigned>(lane);
                side.lanes.push_back(std::make_unique<Endpoint>(o));
            }
            side.result.lane_fc_high_water_bits.assign(static_cast<std::size_t>(lanes_), 0);
        }
        // Side A sends the forward stream; side B validates it.
        sides_[0].source = make_source(forward, payload_bytes);
        sides_[0].source_done = false;
        sides_[1].validator = std::make_unique<StreamValidator>(sides_[0].source->restart());
        if (reverse) {
            sides_[1].source = make_source(*reverse, payload_bytes);
            sides_[1].source_done = false;
            sides_[0].validator = std::make_unique<StreamValidator>(sides_[1].source->restart());
        }

        for (int d = 0; d < 2; ++d) {
            const std::uint64_t seed = d == 0 ? sc.seed_forward : sc.seed_reverse;
            const double ber = d == 0 ? sc.ber_forward : sc.ber_reverse;
            for (int lane = 0; lane < lanes_; ++lane)
                errors_[d].emplace_back(ber, mix(mix(seed, static_cast<std::uint64_t>(d) + 1),
                                                 static_cast<std::uint64_t>(lane) + 0x100));
            fifo_[d].resize(static_cast<std::size_t>(lanes_));
        }
        one_way_ps_ = static_cast<std::int64_t>(std::llround(sc.one_way_ns() * 1000.0));
        for (int lane = 0; lane < lanes_; ++lane) {
            const double skew = static_cast<std::size_t>(lane) < sc.lane_skew_slots.size()
                                    ? sc.lane_skew_slots[static_cast<std::size_t>(lane)]
                                    : 0.0;
            skew_ps_.push_back(static_cast<std::int64_t>(std::llround(skew * nominal_.period_ps())));
        }
        burst_used_.assign(sc.bursts.size(), 0);
        end_ps_ = nominal_.time(sc.duration_slots);
        const std::uint64_t drain_out = std::max<std::uint64_t>(
            50000, 40ULL * static_cast<std::uint64_t>(sc.protocol.replay_schedule_length()));
        hard_end_ps_ = nominal_.time(sc.duration_slots + drain_out);
    }

    RunResult execute()
    {
        queue_.push(0, kTick, kTick, 0, 0);
        queue_.push(0, kTick, kTick, 1, 0);
        std::int64_t now = 0;
        while (!queue_.empty()) {
            const auto ev = queue_.pop();
            now = ev.time;
            if (ev.kind == kArrival)
                arrive(ev.side, ev.lane, now);
            else
                tick(ev.side, now);
            if (now >= end_ps_ && (all_delivered() || now >= hard_end_ps_))
                break;
        }
        return collect(now);
    }

private:
    bool stalled(int s, std::uint64_t tick) const
    {
        for (const auto& st : sc_.stalls)
            if (st.side == s && tick >= st.from_tick && tick < st.until_tick)
                return true;
        return false;
    }

    bool all_delivered() const
    {
        return sides_[1].delivered_flits == sides_[0].dispatched && sides_[0].delivered_flits == sides_[1].dispatched;
    }

    void arrive(int dest, int lane, std::int64_t now)
    {
        const int dir = dest == 1 ? 0 : 1;
        auto& q = fifo_[dir][static_cast<std::size_t>(lane)];
        InFlight f = std::move(q.front());
        q.pop_front();
        auto& side = sides_[static_cast<std::size_t>(dest)];
        const int n = side.lanes[static_cast<std::size_t>(lane)]->receive(f.bits);
        for (int i = 0; i < n; ++i)
            side.deliver_times[static_cast<std::size_t>(lane)].push_back(now);
    }

    bool burst_hits(int dir, int lane, std::uint64_t tick, const Endpoint::TickResult& r)
    {
        bool hit = false;
        for (std::size_t i = 0; i < sc_.bursts.size(); ++i) {
            const auto& b = sc_.bursts[i];
            if (static_cast<int>(b.dir) != dir || (b.lane >= 0 && b.lane != lane) || tick < b.start_tick)
                continue;
            switch (b.kind) {
            case BurstSpec::Kind::Frames:
                hit = hit || tick < b.start_tick + b.count;
                break;
            case BurstSpec::Kind::FcNotifications:
                if (r.kind == TxFrameKind::FcNotification && (b.count == 0 || burst_used_[i] < b.count)) {
                    ++burst_used_[i];
                    hit = true;
                }
                break;
            case BurstSpec::Kind::RetransmitRequests:
                if (r.kind == TxFrameKind::Control && r.control == ControlCode::RetransmitRequest &&
                    (b.count == 0 || burst_used_[i] < b.count)) {
                    ++burst_used_[i];
                    hit = true;
                }
                break;
            }
        }
        return hit;
    }

    void drain(int s, std::int64_t now)
    {
        auto& side = sides_[static_cast<std::size_t>(s)];
        auto& peer = sides_[static_cast<std::size_t>(1 - s)];
        if (stalled(s, side.tick))
            return;
        for (int k = 0; k < lanes_; ++k) {
            const auto lane = static_cast<std::size_t>(side.gather.current());
            auto flit = side.lanes[lane]->drain();
            if (!flit)
                break;
            const std::int64_t delivered_at = side.deliver_times[lane].front();
            side.deliver_times[lane].pop_front();
            std::int64_t accepted_at = delivered_at;
            if (!peer.accept_times[lane].empty()) {
                accepted_at = peer.accept_times[lane].front();
                peer.accept_times[lane].pop_front();
            }
            if (side.validator)
                side.validator->check(*flit);
            side.latency.push_back(delivered_at - accepted_at);
            if (sc_.keep_samples)
                side.drained.push_back(DrainRecord{now, static_cast<std::uint32_t>(flit->data.size)});
            ++side.delivered_flits;
            if (now <= end_ps_) {
                side.window_bytes += flit->data.size;
                if (side.first_delivery < 0)
                    side.first_delivery = delivered_at;
            }
            side.gather.advance();
        }
    }

    void tick(int s, std::int64_t now)
    {
        auto& side = sides_[static_cast<std::size_t>(s)];
        const bool accepting = now < end_ps_;
        drain(s, now);

        if (accepting && !side.source_done) {
            while (side.tx_queue[static_cast<std::size_t>(side.dispatch.current())].size() < 2) {
                QueuedFlit q;
                if (!side.source->next(q.flit, q.earliest)) {
                    side.source_done = true;
                    break;
                }
                side.tx_queue[static_cast<std::size_t>(side.dispatch.current())].push_back(std::move(q));
                side.dispatch.advance();
                ++side.dispatched;
            }
        }

        const int dir = s;
        auto& dr = dir == 0 ? forward_ : reverse_;
        const std::int64_t next_time = side.clock.time(side.tick + 1);
        for (int lane = 0; lane < lanes_; ++lane) {
            const auto l = static_cast<std::size_t>(lane);
            auto& ep = *side.lanes[l];
            const bool up = ep.link_up();
            if (up && accepting) {
                ++side.result.slots_after_linkup;
                if (side.result.link_up_time_ps < 0)
                    side.result.link_up_time_ps = now;
            }
            const Flit* offer = nullptr;
            auto& q = side.tx_queue[l];
            // Flits already dispatched to a lane are still offered after the
            // window closes so the gather order has no holes.
            if (!q.empty() && q.front().earliest <= side.tick)
                offer = &q.front().flit;
            auto r = ep.tick(offer);
            if (r.consumed) {
                side.accept_times[l].push_back(now);
                q.pop_front();
                ++side.accepted;
            }

            flips_.clear();
            errors_[dir][l].flips(side.tick * static_cast<std::uint64_t>(frame_bits_),
                                  static_cast<std::uint32_t>(frame_bits_), flips_);
            if (burst_hits(dir, lane, side.tick, r))
                flips_.push_back(static_cast<std::uint32_t>(frame_bits_ / 2));
            for (auto pos : flips_)
                r.wire.flip(pos);
            ++dr.frames_on_wire;
            dr.bits_on_wire += static_cast<std::uint64_t>(frame_bits_);
            dr.bits_flipped += flips_.size();
            if (!flips_.empty()) {
                ++dr.corrupted_frames;
                if (up)
                    ++dr.corrupted_after_linkup;
            }
            const std::int64_t arrival = next_time + one_way_ps_ + skew_ps_[l];
            fifo_[dir][l].push_back(InFlight{arrival, std::move(r.wire)});
            queue_.push(arrival, kArrival, kArrival, 1 - s, lane);
        }
        ++side.tick;
        if (next_time <= hard_end_ps_)
            queue_.push(next_time, kTick, kTick, s, 0);
    }

    RunResult collect(std::int64_t now)
    {
        RunResult out;
        out.end_time_ps = now;
        out.fc_capacity_bits = fc_bits_;
        for (int s = 0; s < 2; ++s) {
            auto& side = sides_[static_cast<std::size_t>(s)];
            auto& res = side.result;
            for (std::size_t l = 0; l < side.lanes.size(); ++l) {
                const auto& ep = *side.lanes[l];
                const auto& st = ep.stats();
                auto& sum = res.stats;
                sum.ticks += st.ticks;
                sum.frames_fresh += st.frames_fresh;
                sum.frames_invalid += st.frames_invalid;
                sum.frames_fc += st.frames_fc;
                sum.frames_replayed += st.frames_replayed;
                sum.frames_control += st.frames_control;
                sum.idle_sent += st.idle_sent;
                sum.pause_req_sent += st.pause_req_sent;
                sum.retrans_req_sent += st.retrans_req_sent;
                sum.pause_req_after_linkup += st.pause_req_after_linkup;
                sum.retrans_req_after_linkup += st.retrans_req_after_linkup;
                sum.comp_pauses_issued += st.comp_pauses_issued;
                sum.frames_received += st.frames_received;
                sum.rx_failures += st.rx_failures;
                sum.rx_delivered_flits += st.rx_delivered_flits;
                sum.out_of_sync_events += st.out_of_sync_events;
                sum.fc_pause_received += st.fc_pause_received;
                sum.fc_resume_received += st.fc_resume_received;
                res.replays_started += ep.tx().replays_started();
                res.lane_fc_high_water_bits[l] = ep.fc_buffer().high_water_bits();
                res.fc_high_water_bits = std::max(res.fc_high_water_bits, ep.fc_buffer().high_water_bits());
                res.fc_overflows += ep.fc_buffer().overflows();
            }
        }
        out.a = sides_[0].result;
        out.b = sides_[1].result;

        // Direction d is sent by side d and received by side 1 - d.
        for (int d = 0; d < 2; ++d) {
            auto& dr = d == 0 ? forward_ : reverse_;
            auto& sender = sides_[static_cast<std::size_t>(d)];
            auto& receiver = sides_[static_cast<std::size_t>(1 - d)];
            dr.flits_sent = sender.accepted;
            dr.flits_delivered = receiver.delivered_flits;
            dr.bytes_delivered = receiver.window_bytes;
            const bool held = stalled(1 - d, receiver.tick);
            if (receiver.validator) {
                if (!held)
                    receiver.validator->finish(sender.accepted);
                dr.mismatch = receiver.validator->mismatch();
                dr.packets_delivered = receiver.validator->packets();
            }
            dr.complete = receiver.delivered_flits == sender.accepted && !dr.mismatch;
            if (receiver.first_delivery >= 0 && end_ps_ > receiver.first_delivery)
                dr.goodput_bps = static_cast<double>(dr.bytes_delivered) * 8.0 /
                                 (static_cast<double>(end_ps_ - receiver.first_delivery) * 1e-12);
            dr.latency = summarize_latency(receiver.latency);
            if (sc_.keep_samples) {
                dr.latency_samples_ps = std::move(receiver.latency);
                dr.drained = std::move(receiver.drained);
            }
        }
        out.forward = std::move(forward_);
        out.reverse = std::move(reverse_);

        auto& m = out.metrics;
        m.scenario_id = sc_.id;
        m.ber = sc_.ber_forward;
        m.goodput_bps = out.forward.goodput_bps;
        m.bandwidth_ratio = 1.0;
        m.latency = out.forward.latency;
        m.retrans_events = out.a.replays_started + out.b.replays_started;
        m.frames_sent = out.a.stats.ticks + out.b.stats.ticks;
        m.frames_invalid =
            out.a.stats.frames_invalid + out.a.stats.frames_fc + out.b.stats.frames_invalid + out.b.stats.frames_fc;
        return out;
    }

    LinkScenario sc_;
    int lanes_;
    int frame_bits_;
    RationalClock nominal_;
    std::uint64_t fc_bits_;
    std::vector<SideState> sides_;
    std::vector<BitErrorProcess> errors_[2];
    std::vector<std::deque<InFlight>> fifo_[2];
    std::vector<std::int64_t> skew_ps_;
    std::vector<std::uint64_t> burst_used_;
    std::vector<std::uint32_t> flips_;
    std::int64_t one_way_ps_ = 0;
    std::int64_t end_ps_ = 0;
    std::int64_t hard_end_ps_ = 0;
    EventQueue queue_;
    DirectionResult forward_;
    DirectionResult reverse_;
};

} // namespace

RunResult run(const LinkScenario& scenario, const TrafficSpec& forward, const std::optional<TrafficSpec>& reverse)
{
    Simulation sim(scenario, forward, reverse);
    return sim.execute();
}

void apply_baseline(RunResult& result, const RunResult& baseline)
{
    const double base = baseline.forward.goodput_bps;
    result.metrics.bandwidth_ratio = base > 0 ? result.forward.goodput_bps / base : 0.0;
}

} // namespace rifl
