#pragma once

#include "rifl/frame_codec.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rifl {

/// One cycle of the user-side stream.
struct TrafficRecord {
    std::uint64_t cycle = 0;
    bool valid = false;
    std::vector<std::uint8_t> data; // full bus width; bytes past valid_bytes are zero
    std::uint32_t valid_bytes = 0;
    bool last = false;
};

/// Deterministic flit stream. `restart` returns an identical stream from the start,
/// which the validator uses to regenerate the expected data.
class FlitSource {
public:
    virtual ~FlitSource() = default;
    /// Next flit and the earliest TX tick at which it may be offered.
    virtual bool next(Flit& out, std::uint64_t& earliest_tick) = 0;
    virtual std::unique_ptr<FlitSource> restart() const = 0;
};

enum class TrafficMode : std::uint8_t { Random, Fixed, Sweep, Records };

struct TrafficSpec {
    TrafficMode mode = TrafficMode::Random;
    std::uint32_t min_bytes = 1;    // Random
    std::uint32_t max_bytes = 8192; // Random
    std::uint32_t fixed_bytes = 30; // Fixed
    std::uint32_t sweep_from = 1;   // Sweep: sizes from..to by step
    std::uint32_t sweep_to = 1500;
    std::uint32_t sweep_step = 1;
    std::uint64_t sweep_bytes_per_size = 30000;
    std::uint64_t seed = 1;
    std::uint64_t max_packets = 0;      // 0: unbounded (saturating)
    std::vector<TrafficRecord> records; // Records
};

std::unique_ptr<FlitSource> make_source(const TrafficSpec& spec, int payload_bytes);

/// Splits a packet into flits of at most `payload_bytes`; only the last may be partial.
std::vector<Flit> segment_packet(const std::vector<std::uint8_t>& packet, int payload_bytes);

/// Materializes a bounded spec as cycle records, one flit per cycle.
std::vector<TrafficRecord> generate_records(const TrafficSpec& spec, int payload_bytes, std::uint64_t max_flits);

/// Records <-> flits.
std::vector<Flit> records_to_flits(const std::vector<TrafficRecord>& records);

// Traffic CSV: header `cycle,valid,data_hex,valid_bytes,last`. data_hex is the
// bus word as one hex number, so byte 0 is the rightmost two digits.
void write_traffic_csv(std::ostream& out, const std::vector<TrafficRecord>& records, int bus_bytes);
std::vector<TrafficRecord> read_traffic_csv(std::istream& in, int bus_bytes);

struct MismatchReport {
    std::uint64_t packet_index = 0;
    std::uint64_t flit_index = 0;
    std::size_t byte_offset = 0; // within the flit
    int expected = -1;           // -1: no byte (missing or extra data)
    int actual = -1;
    std::string what;

    std::string to_string() const;
};

/// Compares delivered flits to a regenerated copy of the sent stream, in order.
class StreamValidator {
public:
    explicit StreamValidator(std::unique_ptr<FlitSource> expected);

    void check(const Flit& got);
    /// Call at the end: flags flits that never arrived when `sent` exceeds the delivered count.
    void finish(std::uint64_t sent_flits);

    bool ok() const { return !mismatch_; }
    const std::optional<MismatchReport>& mismatch() const { return mismatch_; }
    std::uint64_t flits() const { return flits_; }
    std::uint64_t packets() const { return packets_; }
    std::uint64_t bytes() const { return bytes_; }

private:
    std::unique_ptr<FlitSource> expected_;
    std::optional<MismatchReport> mismatch_;
    std::uint64_t flits_ = 0;
    std::uint64_t packets_ = 0;
    std::uint64_t bytes_ = 0;
};

/// Whole-stream comparison; nullopt when identical.
std::optional<MismatchReport> compare_streams(const std::vector<Flit>& sent, const std::vector<Flit>& delivered);

struct LatencySummary {
    std::uint64_t count = 0;
    double mean_ns = 0;
    double p50_ns = 0;
    double p95_ns = 0;
    double p99_ns = 0;
    double max_ns = 0;
};

/// Nearest-rank percentile (q in (0, 1]) of a sorted sample set.
std::int64_t nearest_rank(const std::vector<std::int64_t>& sorted, double q);
/// Samples in picoseconds; sorts in place.
LatencySummary summarize_latency(std::vector<std::int64_t>& samples_ps);

struct RunMetrics {
    std::string scenario_id;
    double ber = 0;
    double goodput_bps = 0;
    double bandwidth_ratio = 1.0;
    LatencySummary latency;
    std::uint64_t retrans_events = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_invalid = 0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const RunMetrics& m);

/// Fraction of line bits carrying user bytes for back-to-back packets of `packet_bytes`.
double packet_efficiency(std::uint32_t packet_bytes, int frame_bits);

struct EfficiencyPoint {
    std::uint32_t payload_bytes = 0;
    double measured = 0;
};

/// CSV series `payload_bytes,efficiency,expected` for a payload-size sweep.
std::string efficiency_curve_csv(const std::vector<EfficiencyPoint>& points, int frame_bits);

std::string format_double(double v);

} // namespace rifl
