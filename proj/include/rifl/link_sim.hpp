#pragma once

#include "rifl/config.hpp"
#include "rifl/endpoint.hpp"
#include "rifl/harness.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace rifl {

/// Tick times of a free-running clock in integer picoseconds. The period is
/// kept as an exact fraction so tick k lands at floor(k * num / den).
class RationalClock {
public:
    RationalClock(int frame_bits, double line_rate_bps, double ppm = 0.0);
    std::int64_t time(std::uint64_t tick) const;
    double period_ps() const;

private:
    __int128 num_;
    __int128 den_;
};

/// Time-ordered event queue; equal times pop by priority class, then insertion order.
class EventQueue {
public:
    struct Event {
        std::int64_t time = 0;
        int priority = 0; // lower first at equal time
        std::uint64_t seq = 0;
        int kind = 0;
        int side = 0;
        int lane = 0;
    };

    void push(std::int64_t time, int priority, int kind, int side, int lane);
    Event pop();
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const;
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t seq_ = 0;
};

/// Bernoulli bit errors from a counter-based generator. Errors for bit n
/// depend only on (key, n), and the error set at a lower BER is a subset of
/// the set at a higher BER for the same key.
class BitErrorProcess {
public:
    BitErrorProcess(double ber, std::uint64_t key);

    /// Appends offsets (relative to `start`) of flipped bits in [start, start + n).
    void flips(std::uint64_t start, std::uint32_t n, std::vector<std::uint32_t>& out);
    double ber() const { return ber_; }

    static constexpr unsigned kBlockBits = 16;
    static constexpr double kCandidateRate = 1.0 / 1024.0;

private:
    void load_block(std::uint64_t block);

    double ber_;
    std::uint64_t key_;
    std::uint64_t cached_block_ = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint32_t> block_flips_;
};

enum class Direction : std::uint8_t { AtoB = 0, BtoA = 1 };

struct BurstSpec {
    enum class Kind : std::uint8_t { Frames, FcNotifications, RetransmitRequests };
    Kind kind = Kind::Frames;
    Direction dir = Direction::AtoB;
    std::uint64_t start_tick = 0; // sender tick
    std::uint32_t count = 1;      // frames to corrupt; 0 means every match
    int lane = -1;                // -1: all lanes
};

struct DrainStall {
    int side = 1; // 0 = A, 1 = B
    std::uint64_t from_tick = 0;
    std::uint64_t until_tick = std::numeric_limits<std::uint64_t>::max();
};

struct LinkScenario {
    std::string id = "default";
    ProtocolConfig protocol;
    double cable_length_m = 10.0;
    double propagation_ns_per_m = 5.0;
    double circuit_delay_ns = 50.0;
    double ber_forward = 0.0;
    double ber_reverse = 0.0;
    std::uint64_t seed_forward = 0x5EED0001;
    std::uint64_t seed_reverse = 0x5EED0002;
    double ppm_a = 0.0;
    double ppm_b = 0.0;
    std::uint64_t duration_slots = 100000;
    std::vector<double> lane_skew_slots; // extra one-way delay per lane, both directions
    std::uint64_t fc_capacity_bits = 0;  // 0: sized automatically
    bool clock_compensation = true;
    std::vector<BurstSpec> bursts;
    std::vector<DrainStall> stalls;
    bool keep_samples = false; // latency samples and the user drain log

    double one_way_ns() const { return circuit_delay_ns + cable_length_m * propagation_ns_per_m; }
    double rtt_s() const { return 2.0 * one_way_ns() * 1e-9; }
    double max_skew_slots() const;
    /// Flow-control capacity actually used (per lane).
    std::uint64_t effective_fc_capacity_bits() const;
    /// Throws std::invalid_argument naming the violated bound.
    void validate() const;
};

struct DrainRecord {
    std::int64_t time_ps = 0; // user-side drain time
    std::uint32_t bytes = 0;
};

struct DirectionResult {
    std::uint64_t flits_sent = 0;
    std::uint64_t flits_delivered = 0;
    std::uint64_t bytes_delivered = 0;       // by the end of the measured window
    std::uint64_t packets_delivered = 0;
    double goodput_bps = 0;
    LatencySummary latency;
    std::vector<std::int64_t> latency_samples_ps; // kept when requested
    std::vector<DrainRecord> drained;             // kept when requested
    std::optional<MismatchReport> mismatch;
    bool complete = false;                   // every sent flit was delivered and checked
    std::uint64_t frames_on_wire = 0;
    std::uint64_t corrupted_frames = 0;
    std::uint64_t corrupted_after_linkup = 0;
    std::uint64_t bits_on_wire = 0;
    std::uint64_t bits_flipped = 0;
};

struct SideResult {
    EndpointStats stats;                 // summed over lanes
    std::uint64_t replays_started = 0;
    std::uint64_t slots_after_linkup = 0; // lane slots inside the measured window
    std::uint64_t fc_high_water_bits = 0; // max over lanes
    std::uint64_t fc_overflows = 0;
    std::vector<std::uint64_t> lane_fc_high_water_bits;
    std::int64_t link_up_time_ps = -1;
};

struct RunResult {
    RunMetrics metrics; // forward direction goodput and latency; counters over both sides
    DirectionResult forward;
    DirectionResult reverse;
    SideResult a;
    SideResult b;
    std::int64_t end_time_ps = 0;
    std::uint64_t fc_capacity_bits = 0;
    bool lossless() const;
};

/// Runs the scenario with forward traffic A->B and optional reverse traffic B->A.
RunResult run(const LinkScenario& scenario, const TrafficSpec& forward, const std::optional<TrafficSpec>& reverse);

/// Fills bandwidth_ratio from a matching error-free baseline.
void apply_baseline(RunResult& result, const RunResult& baseline);

} // namespace rifl
