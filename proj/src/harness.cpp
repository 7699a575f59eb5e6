#include "rifl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rifl {

std::vector<Flit> segment_packet(const std::vector<std::uint8_t>& packet, int payload_bytes)
{
    if (packet.empty())
        throw std::invalid_argument("empty packet");
    std::vector<Flit> out;
    const auto step = static_cast<std::size_t>(payload_bytes);
    for (std::size_t pos = 0; pos < packet.size(); pos += step) {
        Flit f;
        const std::size_t n = std::min(step, packet.size() - pos);
        f.data = Payload(n);
        std::copy_n(packet.begin() + static_cast<std::ptrdiff_t>(pos), n, f.data.bytes.begin());
        f.last = pos + n == packet.size();
        out.push_back(f);
    }
    return out;
}

namespace {

class PacketSource final : public FlitSource {
public:
    PacketSource(const TrafficSpec& spec, int payload_bytes)
        : spec_(spec), payload_bytes_(payload_bytes), rng_(spec.seed)
    {
        spec_.records.clear();
        if (spec_.mode == TrafficMode::Random && (spec_.min_bytes < 1 || spec_.min_bytes > spec_.max_bytes))
            throw std::invalid_argument("traffic: need 1 <= min_bytes <= max_bytes");
        if (spec_.mode == TrafficMode::Fixed && spec_.fixed_bytes < 1)
            throw std::invalid_argument("traffic: fixed_bytes must be positive");
        if (spec_.mode == TrafficMode::Sweep &&
            (spec_.sweep_from < 1 || spec_.sweep_to < spec_.sweep_from || spec_.sweep_step < 1))
            throw std::invalid_argument("traffic: bad sweep range");
        sweep_size_ = spec_.sweep_from;
    }

    bool next(Flit& out, std::uint64_t& earliest_tick) override
    {
        if (pos_ == current_.size() && !refill())
            return false;
        out = current_[pos_++];
        earliest_tick = 0;
        return true;
    }

    std::unique_ptr<FlitSource> restart() const override
    {
        return std::make_unique<PacketSource>(spec_, payload_bytes_);
    }

private:
    std::uint32_t next_size()
    {
        switch (spec_.mode) {
        case TrafficMode::Random:
            return std::uniform_int_distribution<std::uint32_t>(spec_.min_bytes, spec_.max_bytes)(rng_);
        case TrafficMode::Fixed:
            return spec_.fixed_bytes;
        case TrafficMode::Sweep: {
            while (sweep_size_ <= spec_.sweep_to) {
                const std::uint64_t per_size = (spec_.sweep_bytes_per_size + sweep_size_ - 1) / sweep_size_;
                if (sweep_count_ < std::max<std::uint64_t>(1, per_size)) {
                    ++sweep_count_;
                    return sweep_size_;
                }
                sweep_size_ += spec_.sweep_step;
                sweep_count_ = 0;
            }
            return 0;
        }
        case TrafficMode::Records:
            break;
        }
        return 0;
    }

    bool refill()
    {
        if (spec_.max_packets != 0 && packets_ >= spec_.max_packets)
            return false;
        const std::uint32_t size = next_size();
        if (size == 0)
            return false;
        std::vector<std::uint8_t> packet(size);
        for (std::size_t i = 0; i < packet.size(); i += 8) {
            const std::uint64_t r = rng_();
            for (std::size_t k = 0; k < 8 && i + k < packet.size(); ++k)
                packet[i + k] = static_cast<std::uint8_t>(r >> (8 * k));
        }
        current_ = segment_packet(packet, payload_bytes_);
        pos_ = 0;
        ++packets_;
        return true;
    }

    TrafficSpec spec_;
    int payload_bytes_;
    std::mt19937_64 rng_;
    std::vector<Flit> current_;
    std::size_t pos_ = 0;
    std::uint64_t packets_ = 0;
    std::uint32_t sweep_size_ = 0;
    std::uint64_t sweep_count_ = 0;
};

class RecordSource final : public FlitSource {
public:
    RecordSource(std::shared_ptr<const std::vector<TrafficRecord>> records, int payload_bytes)
        : records_(std::move(records)), payload_bytes_(payload_bytes)
    {
    }

    bool next(Flit& out, std::uint64_t& earliest_tick) override
    {
        while (pos_ < records_->size() && !(*records_)[pos_].valid)
            ++pos_;
        if (pos_ == records_->size())
            return false;
        const auto& r = (*records_)[pos_++];
        if (r.valid_bytes < 1 || r.valid_bytes > static_cast<std::uint32_t>(payload_bytes_))
            throw std::invalid_argument("traffic record at cycle " + std::to_string(r.cycle) +
                                        ": valid_bytes out of range");
        if (r.valid_bytes < static_cast<std::uint32_t>(payload_bytes_) && !r.last)
            throw std::invalid_argument("traffic record at cycle " + std::to_string(r.cycle) +
                                        ": partial word without last");
        out = Flit{};
        out.data = Payload(r.valid_bytes);
        std::copy_n(r.data.begin(), std::min<std::size_t>(r.valid_bytes, r.data.size()), out.data.bytes.begin());
        out.last = r.last;
        earliest_tick = r.cycle;
        return true;
    }

    std::unique_ptr<FlitSource> restart() const override
    {
        return std::make_unique<RecordSource>(records_, payload_bytes_);
    }

private:
    std::shared_ptr<const std::vector<TrafficRecord>> records_;
    int payload_bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::unique_ptr<FlitSource> make_source(const TrafficSpec& spec, int payload_bytes)
{
    if (spec.mode == TrafficMode::Records)
        return std::make_unique<RecordSource>(std::make_shared<const std::vector<TrafficRecord>>(spec.records),
                                              payload_bytes);
    return std::make_unique<PacketSource>(spec, payload_bytes);
}

std::vector<TrafficRecord> generate_records(const TrafficSpec& spec, int payload_bytes, std::uint64_t max_flits)
{
    auto src = make_source(spec, payload_bytes);
    std::vector<TrafficRecord> out;
    Flit f;
    std::uint64_t earliest = 0;
    std::uint64_t cycle = 0;
    while (out.size() < max_flits && src->next(f, earliest)) {
        cycle = std::max(cycle, earliest);
        TrafficRecord r;
        r.cycle = cycle++;
        r.valid = true;
        r.data.assign(static_cast<std::size_t>(payload_bytes), 0);
        std::copy_n(f.data.bytes.begin(), f.data.size, r.data.begin());
        r.valid_bytes = f.data.size;
        r.last = f.last;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Flit> records_to_flits(const std::vector<TrafficRecord>& records)
{
    int width = 0;
    for (const auto& r : records)
        width = std::max(width, static_cast<int>(std::max<std::size_t>(r.data.size(), r.valid_bytes)));
    TrafficSpec spec;
    spec.mode = TrafficMode::Records;
    spec.records = records;
    auto src = make_source(spec, std::max(width, 1));
    std::vector<Flit> out;
    Flit f;
    std::uint64_t earliest = 0;
    while (src->next(f, earliest))
        out.push_back(f);
    return out;
}

void write_traffic_csv(std::ostream& out, const std::vector<TrafficRecord>& records, int bus_bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    out << "cycle,valid,data_hex,valid_bytes,last\n";
    for (const auto& r : records) {
        std::string hex(static_cast<std::size_t>(2 * bus_bytes), '0');
        for (std::size_t i = 0; i < r.data.size() && i < static_cast<std::size_t>(bus_bytes); ++i) {
            const std::size_t at = hex.size() - 2 * (i + 1);
            hex[at] = digits[r.data[i] >> 4];
            hex[at + 1] = digits[r.data[i] & 15];
        }
        out << r.cycle << ',' << (r.valid ? 1 : 0) << ',' << hex << ',' << r.valid_bytes << ',' << (r.last ? 1 : 0)
            << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        fields.push_back(f);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line_no, const char* field)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("traffic csv line " + std::to_string(line_no) + ": bad " + field + " '" + s + "'");
}

} // namespace

std::vector<TrafficRecord> read_traffic_csv(std::istream& in, int bus_bytes)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("traffic csv: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "cycle,valid,data_hex,valid_bytes,last")
        throw std::invalid_argument("traffic csv: expected header 'cycle,valid,data_hex,valid_bytes,last'");
    std::vector<TrafficRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto f = split_csv(line);
        if (f.size() != 5)
            throw std::invalid_argument("traffic csv line " + std::to_string(line_no) + ": expected 5 fields");
        TrafficRecord r;
        r.cycle = parse_uint(f[0], line_no, "cycle");
        r.valid = parse_uint(f[1], line_no, "valid") != 0;
        r.valid_bytes = static_cast<std::uint32_t>(parse_uint(f[3], line_no, "valid_bytes"));
        r.last = parse_uint(f[4], line_no, "last") != 0;
        const std::string& hex = f[2];
        if (hex.size() > static_cast<std::size_t>(2 * bus_bytes) || hex.size() % 2 != 0)
            throw std::invalid_argument("traffic csv line " + std::to_string(line_no) + ": data_hex width");
        r.data.assign(static_cast<std::size_t>(bus_bytes), 0);
        const std::size_t nbytes = hex.size() / 2;
        for (std::size_t i = 0; i < nbytes; ++i) {
            const std::size_t at = hex.size() - 2 * (i + 1);
            const int hi = hex_value(hex[at]);
            const int lo = hex_value(hex[at + 1]);
            if (hi < 0 || lo < 0)
                throw std::invalid_argument("traffic csv line " + std::to_string(line_no) + ": bad hex digit");
            r.data[i] = static_cast<std::uint8_t>(hi * 16 + lo);
        }
        if (r.valid && (r.valid_bytes < 1 || r.valid_bytes > static_cast<std::uint32_t>(bus_bytes)))
            throw std::invalid_argument("traffic csv line " + std::to_string(line_no) + ": valid_bytes out of range");
        out.push_back(std::move(r));
    }
    return out;
}

std::string MismatchReport::to_string() const
{
    std::ostringstream s;
    s << "mismatch at packet " << packet_index << ", flit " << flit_index << ", byte " << byte_offset << ": "
      << what;
    if (expected >= 0 || actual >= 0)
        s << " (expected " << expected << ", got " << actual << ")";
    return s.str();
}

namespace {

std::optional<MismatchReport> compare_flit(const Flit& want, const Flit& got, std::uint64_t packet,
                                           std::uint64_t flit)
{
    MismatchReport r;
    r.packet_index = packet;
    r.flit_index = flit;
    const std::size_t n = std::min(want.data.size, got.data.size);
    for (std::size_t i = 0; i < n; ++i)
        if (want.data.bytes[i] != got.data.bytes[i]) {
            r.byte_offset = i;
            r.expected = want.data.bytes[i];
            r.actual = got.data.bytes[i];
            r.what = "byte differs";
            return r;
        }
    if (want.data.size != got.data.size) {
        r.byte_offset = n;
        r.what = "length " + std::to_string(got.data.size) + " instead of " + std::to_string(want.data.size);
        return r;
    }
    if (want.last != got.last) {
        r.byte_offset = n;
        r.what = want.last ? "end of packet missing" : "unexpected end of packet";
        return r;
    }
    return std::nullopt;
}

} // namespace

StreamValidator::StreamValidator(std::unique_ptr<FlitSource> expected) : expected_(std::move(expected)) {}

void StreamValidator::check(const Flit& got)
{
    if (mismatch_)
        return;
    Flit want;
    std::uint64_t earliest = 0;
    if (!expected_->next(want, earliest)) {
        mismatch_ = MismatchReport{packets_, flits_, 0, -1, -1, "extra flit beyond the sent stream"};
        return;
    }
    if (auto m = compare_flit(want, got, packets_, flits_)) {
        mismatch_ = m;
        return;
    }
    ++flits_;
    bytes_ += got.data.size;
    if (got.last)
        ++packets_;
}

void StreamValidator::finish(std::uint64_t sent_flits)
{
    if (!mismatch_ && flits_ < sent_flits)
        mismatch_ = MismatchReport{packets_, flits_, 0, -1, -1,
                                   std::to_string(sent_flits - flits_) + " sent flits never delivered"};
}

std::optional<MismatchReport> compare_streams(const std::vector<Flit>& sent, const std::vector<Flit>& delivered)
{
    std::uint64_t packet = 0;
    const std::size_t n = std::min(sent.size(), delivered.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (auto m = compare_flit(sent[i], delivered[i], packet, i))
            return m;
        if (sent[i].last)
            ++packet;
    }
    if (delivered.size() > sent.size())
        return MismatchReport{packet, n, 0, -1, -1, "extra flit beyond the sent stream"};
    if (delivered.size() < sent.size())
        return MismatchReport{packet, n, 0, -1, -1,
                              std::to_string(sent.size() - delivered.size()) + " sent flits never delivered"};
    return std::nullopt;
}

std::int64_t nearest_rank(const std::vector<std::int64_t>& sorted, double q)
{
    if (sorted.empty())
        return 0;
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

LatencySummary summarize_latency(std::vector<std::int64_t>& samples_ps)
{
    LatencySummary s;
    if (samples_ps.empty())
        return s;
    std::sort(samples_ps.begin(), samples_ps.end());
    long double sum = 0;
    for (auto v : samples_ps)
        sum += static_cast<long double>(v);
    s.count = samples_ps.size();
    s.mean_ns = static_cast<double>(sum / static_cast<long double>(samples_ps.size()) / 1000.0L);
    s.p50_ns = static_cast<double>(nearest_rank(samples_ps, 0.50)) / 1000.0;
    s.p95_ns = static_cast<double>(nearest_rank(samples_ps, 0.95)) / 1000.0;
    s.p99_ns = static_cast<double>(nearest_rank(samples_ps, 0.99)) / 1000.0;
    s.max_ns = static_cast<double>(samples_ps.back()) / 1000.0;
    return s;
}

std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string metrics_csv_header()
{
    return "scenario_id,BER,goodput_bps,bandwidth_ratio,latency_avg_ns,latency_p95_ns,latency_p99_ns,"
           "retrans_events,frames_sent,frames_invalid";
}

std::string metrics_csv_row(const RunMetrics& m)
{
    std::ostringstream s;
    s << m.scenario_id << ',' << format_double(m.ber) << ',' << format_double(m.goodput_bps) << ','
      << format_double(m.bandwidth_ratio) << ',' << format_double(m.latency.mean_ns) << ','
      << format_double(m.latency.p95_ns) << ',' << format_double(m.latency.p99_ns) << ',' << m.retrans_events << ','
      << m.frames_sent << ',' << m.frames_invalid;
    return s.str();
}

double packet_efficiency(std::uint32_t packet_bytes, int frame_bits)
{
    const auto payload = static_cast<std::uint32_t>((frame_bits - ProtocolConfig::kHeaderBits) / 8);
    const std::uint32_t frames = (packet_bytes + payload - 1) / payload;
    return 8.0 * packet_bytes / (static_cast<double>(frames) * frame_bits);
}

std::string efficiency_curve_csv(const std::vector<EfficiencyPoint>& points, int frame_bits)
{
    std::ostringstream s;
    s << "payload_bytes,efficiency,expected\n";
    for (const auto& p : points)
        s << p.payload_bytes << ',' << format_double(p.measured) << ','
          << format_double(packet_efficiency(p.payload_bytes, frame_bits)) << '\n';
    return s.str();
}

} // namespace rifl
