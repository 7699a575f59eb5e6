#include "rifl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rifl::analysis {

namespace {

constexpr double kSecondsPerYear = 365.25 * 24 * 3600;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_ber(double ber)
{
    if (!(ber >= 0.0 && ber <= 1.0))
        throw std::invalid_argument("bit error rate must lie in [0, 1]");
}

double log_add(double a, double b)
{
    if (a == kNegInf)
        return b;
    if (b == kNegInf)
        return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::string num(const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace

double fer(double ber, int frame_bits)
{
    check_ber(ber);
    if (ber == 1.0)
        return 1.0;
    return -std::expm1(frame_bits * std::log1p(-ber));
}

double eff_bandwidth(int frame_bits, int verification_bits, double n_stall, double fer)
{
    const double header = 1.0 - static_cast<double>(verification_bits + 4) / frame_bits;
    return header * (1.0 - n_stall * fer);
}

double log_p_exact_errors(int i, int frame_bits, double ber)
{
    check_ber(ber);
    if (i < 0 || i > frame_bits)
        return kNegInf;
    if (ber == 0.0)
        return i == 0 ? 0.0 : kNegInf;
    if (ber == 1.0)
        return i == frame_bits ? 0.0 : kNegInf;
    const double n = frame_bits;
    const double log_choose = std::lgamma(n + 1) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1);
    return log_choose + i * std::log(ber) + (n - i) * std::log1p(-ber);
}

double p_exact_errors(int i, int frame_bits, double ber)
{
    return std::exp(log_p_exact_errors(i, frame_bits, ber));
}

double log_ffr(int checksum_bits, int hd, int frame_bits, double ber)
{
    // Sum the tail directly; 1 - sum(head) cancels to zero at low BER.
    double tail = kNegInf;
    for (int i = std::max(hd, 0); i <= frame_bits; ++i) {
        const double term = log_p_exact_errors(i, frame_bits, ber);
        tail = log_add(tail, term);
        if (term != kNegInf && term < tail - 60.0 && i > frame_bits * ber + 1)
            break;
    }
    return tail - checksum_bits * std::log(2.0);
}

double ffr(int checksum_bits, int hd, int frame_bits, double ber)
{
    return std::exp(log_ffr(checksum_bits, hd, frame_bits, ber));
}

double mtbf_years(const DesignPoint& p)
{
    const double rate = p.actual_rate_bps.value_or(p.line_rate_bps);
    if (!(rate > 0) || p.frame_bits <= 0)
        throw std::invalid_argument("rate and frame size must be positive");
    const double lf = log_ffr(p.checksum_bits, p.hd, p.frame_bits, p.ber);
    if (lf == kNegInf)
        return std::numeric_limits<double>::infinity();
    const double f = std::exp(lf);
    const double frames = std::log(p.confidence) / std::log1p(-f);
    return frames * p.frame_bits / rate / kSecondsPerYear;
}

int min_frame_id_bits(double line_rate_bps, double rtt_s, int frame_bits)
{
    const double in_flight = line_rate_bps * rtt_s / frame_bits;
    int bits = 0;
    while (std::ldexp(1.0, bits) < in_flight)
        ++bits;
    return in_flight <= 1.0 ? 0 : bits;
}

HdTable HdTable::standard()
{
    // Extended-Hamming limits for HD 4 and primitive-polynomial limits for HD 3.
    static const std::vector<HdBound> rows = {
        {3, 0, 4},      {4, 3, 11},       {5, 10, 26},      {6, 25, 57},       {7, 56, 120},
        {8, 119, 247},  {9, 246, 502},    {10, 501, 1013},  {11, 1012, 2036},  {12, 2035, 4083},
        {13, 4082, 8178}, {14, 8177, 16369}, {15, 16368, 32752}, {16, 32751, 65519},
    };
    return HdTable(rows);
}

int HdTable::hd(int width, int dataword) const
{
    for (const auto& r : rows_) {
        if (r.width != width)
            continue;
        if (dataword <= r.hd4_max_dataword)
            return 4;
        if (dataword <= r.hd3_max_dataword)
            return 3;
        return 2;
    }
    return 0;
}

int HdTable::min_width() const
{
    int w = std::numeric_limits<int>::max();
    for (const auto& r : rows_)
        w = std::min(w, r.width);
    return w;
}

int HdTable::max_width() const
{
    int w = 0;
    for (const auto& r : rows_)
        w = std::max(w, r.width);
    return w;
}

std::optional<int> min_checksum_bits(int frame_bits, double ber, double line_rate_bps, double target_years,
                                     const HdTable& table)
{
    for (int m = table.min_width(); m <= table.max_width(); ++m) {
        const int hd = table.hd(m, dataword_bits(frame_bits, m));
        if (hd == 0)
            continue;
        if (target_years <= 0)
            return m;
        DesignPoint p;
        p.frame_bits = frame_bits;
        p.checksum_bits = m;
        p.hd = hd;
        p.line_rate_bps = line_rate_bps;
        p.ber = ber;
        if (mtbf_years(p) >= target_years)
            return m;
    }
    return std::nullopt;
}

Sizing sizing(double line_rate_bps, double rtt_s)
{
    Sizing s;
    s.s_retrans_bits = line_rate_bps * rtt_s;
    s.s_fc_bits = 1.5 * line_rate_bps * rtt_s;
    s.thr_on_bits = s.s_fc_bits * 2.0 / 3.0;
    s.thr_off_bits = s.s_fc_bits / 3.0;
    return s;
}

double rtt_s(double circuit_delay_ns, double cable_m, double ns_per_m)
{
    return 2.0 * (circuit_delay_ns + cable_m * ns_per_m) * 1e-9;
}

double default_n_stall(int frame_id_bits, double line_rate_bps, double rtt_s, int frame_bits)
{
    return 2.5 * std::ldexp(1.0, frame_id_bits) + line_rate_bps * rtt_s / frame_bits;
}

std::vector<Table2Row> table2(double line_rate_bps, double rtt_s, double ber, double target_years,
                              const HdTable& table)
{
    std::vector<Table2Row> out;
    for (int s : {128, 256, 512, 1024, 2048}) {
        Table2Row r;
        r.frame_bits = s;
        r.frame_id_bits = min_frame_id_bits(line_rate_bps, rtt_s, s);
        const auto m = min_checksum_bits(s, ber, line_rate_bps, target_years, table);
        if (!m)
            throw std::runtime_error("no checksum width in the table meets the MTBF target");
        r.checksum_bits = *m;
        r.hd = table.hd(*m, dataword_bits(s, *m));
        DesignPoint p;
        p.frame_bits = s;
        p.checksum_bits = *m;
        p.hd = r.hd;
        p.line_rate_bps = line_rate_bps;
        p.ber = ber;
        r.mtbf_years = mtbf_years(p);
        out.push_back(r);
    }
    return out;
}

std::vector<Table3Row> table3(int verification_bits)
{
    std::vector<Table3Row> out;
    for (int s : {128, 256, 512, 1024, 2048})
        out.push_back({s, verification_bits, eff_bandwidth(s, verification_bits, 0.0, 0.0)});
    return out;
}

std::vector<Table4Row> table4(const DesignPoint& design, const std::vector<double>& bers,
                              const std::vector<double>& actual_rates)
{
    if (!actual_rates.empty() && actual_rates.size() != bers.size())
        throw std::invalid_argument("one actual rate per BER point");
    std::vector<Table4Row> out;
    for (std::size_t i = 0; i < bers.size(); ++i) {
        DesignPoint p = design;
        p.ber = bers[i];
        if (!actual_rates.empty())
            p.actual_rate_bps = actual_rates[i];
        out.push_back({bers[i], p.actual_rate_bps.value_or(p.line_rate_bps), mtbf_years(p)});
    }
    return out;
}

std::string table2_csv(const std::vector<Table2Row>& rows)
{
    std::ostringstream s;
    s << "frame_bits,frame_id_bits,checksum_bits,hd,mtbf_years\n";
    for (const auto& r : rows)
        s << r.frame_bits << ',' << r.frame_id_bits << ',' << r.checksum_bits << ',' << r.hd << ','
          << num("%.6g", r.mtbf_years) << '\n';
    return s.str();
}

std::string table2_markdown(const std::vector<Table2Row>& rows)
{
    std::ostringstream s;
    s << "| frame bits | frame ID bits | checksum bits | HD | MTBF (years) |\n";
    s << "|---|---|---|---|---|\n";
    for (const auto& r : rows)
        s << "| " << r.frame_bits << " | " << r.frame_id_bits << " | " << r.checksum_bits << " | " << r.hd << " | "
          << num("%.2e", r.mtbf_years) << " |\n";
    return s.str();
}

std::string table3_csv(const std::vector<Table3Row>& rows)
{
    std::ostringstream s;
    s << "frame_bits,verification_bits,efficiency\n";
    for (const auto& r : rows)
        s << r.frame_bits << ',' << r.verification_bits << ',' << num("%.10g", r.efficiency) << '\n';
    return s.str();
}

std::string table3_markdown(const std::vector<Table3Row>& rows)
{
    std::ostringstream s;
    s << "| frame bits | verification bits | efficiency |\n";
    s << "|---|---|---|\n";
    for (const auto& r : rows)
        s << "| " << r.frame_bits << " | " << r.verification_bits << " | " << num("%.5f%%", 100.0 * r.efficiency)
          << " |\n";
    for (const auto& r : rows)
        if (r.frame_bits == 256 && r.verification_bits == 12)
            s << "\nThe 256-bit row is 93.75%; the 93.25% printed in the original table is a typo.\n";
    return s.str();
}

std::string table4_csv(const std::vector<Table4Row>& rows)
{
    std::ostringstream s;
    s << "ber,actual_rate_bps,mtbf_years\n";
    for (const auto& r : rows)
        s << num("%.6g", r.ber) << ',' << num("%.6g", r.actual_rate_bps) << ',' << num("%.6g", r.mtbf_years)
          << '\n';
    return s.str();
}

std::string table4_markdown(const std::vector<Table4Row>& rows)
{
    std::ostringstream s;
    s << "| BER | actual rate (bps) | MTBF (years) |\n";
    s << "|---|---|---|\n";
    for (const auto& r : rows)
        s << "| " << num("%.2e", r.ber) << " | " << num("%.4g", r.actual_rate_bps) << " | "
          << num("%.3e", r.mtbf_years) << " |\n";
    return s.str();
}

} // namespace rifl::analysis
