#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rifl::analysis {

/// Probability that a frame of `frame_bits` carries at least one bit error.
double fer(double ber, int frame_bits);

/// Fraction of line bandwidth carrying payload: header overhead times stall loss.
double eff_bandwidth(int frame_bits, int verification_bits, double n_stall, double fer);

/// Probability of exactly i bit errors in a frame (binomial, evaluated in logs).
double p_exact_errors(int i, int frame_bits, double ber);
/// Natural log of p_exact_errors; -inf when the probability is zero.
double log_p_exact_errors(int i, int frame_bits, double ber);

/// Undetected frame ratio for an m-bit checksum detecting every pattern of fewer than `hd` bits.
double ffr(int checksum_bits, int hd, int frame_bits, double ber);
double log_ffr(int checksum_bits, int hd, int frame_bits, double ber);

struct DesignPoint {
    int frame_bits = 256;
    int checksum_bits = 12;
    int hd = 4;
    int frame_id_bits = 8;
    double line_rate_bps = 100e9;
    std::optional<double> actual_rate_bps; // when set, replaces the line rate in the MTBF frame count
    double rtt_s = 500e-9;
    double ber = 1e-7;
    double confidence = 0.99;
};

/// Time until the failure probability reaches 1 - confidence; +infinity when no frame can fail.
double mtbf_years(const DesignPoint& p);

/// Smallest ID width giving at least one unique ID per frame in flight during an RTT.
int min_frame_id_bits(double line_rate_bps, double rtt_s, int frame_bits);

/// Hamming distance of the best known m-bit CRC at a given dataword length.
struct HdBound {
    int width = 0;
    int hd4_max_dataword = 0; // longest dataword with HD >= 4
    int hd3_max_dataword = 0; // longest dataword with HD >= 3
};

class HdTable {
public:
    /// Widths 3..16 with the classic bounds (8-bit: 119 bits at HD 4; 16-bit: 32751 bits at HD 4).
    static HdTable standard();

    explicit HdTable(std::vector<HdBound> rows) : rows_(std::move(rows)) {}

    /// Hamming distance at `dataword_bits`; 2 beyond the HD-3 limit, 0 for unknown widths.
    int hd(int width, int dataword_bits) const;
    int min_width() const;
    int max_width() const;
    const std::vector<HdBound>& rows() const { return rows_; }

private:
    std::vector<HdBound> rows_;
};

/// Checksum dataword for a frame: everything except the SYN header and the checksum itself.
inline int dataword_bits(int frame_bits, int checksum_bits) { return frame_bits - 2 - checksum_bits; }

/// Smallest checksum width whose MTBF meets the target; nullopt if none in the table does.
std::optional<int> min_checksum_bits(int frame_bits, double ber, double line_rate_bps, double target_years,
                                     const HdTable& table);

struct Sizing {
    double s_retrans_bits = 0;
    double s_fc_bits = 0;
    double thr_on_bits = 0;
    double thr_off_bits = 0;
};

Sizing sizing(double line_rate_bps, double rtt_s);

/// Round-trip time of a point-to-point link with the given one-way delays.
double rtt_s(double circuit_delay_ns, double cable_m, double ns_per_m);

/// Default stall estimate: the full replay schedule plus one round trip of frames.
double default_n_stall(int frame_id_bits, double line_rate_bps, double rtt_s, int frame_bits);

struct Table2Row {
    int frame_bits = 0;
    int frame_id_bits = 0;
    int checksum_bits = 0;
    int hd = 0;
    double mtbf_years = 0;
};

std::vector<Table2Row> table2(double line_rate_bps, double rtt_s, double ber, double target_years = 100.0,
                              const HdTable& table = HdTable::standard());

struct Table3Row {
    int frame_bits = 0;
    int verification_bits = 0;
    double efficiency = 0;
};

std::vector<Table3Row> table3(int verification_bits = 12);

struct Table4Row {
    double ber = 0;
    double actual_rate_bps = 0;
    double mtbf_years = 0;
};

/// MTBF against BER for a fixed design; `actual_rates` pairs with `bers` (empty: line rate).
std::vector<Table4Row> table4(const DesignPoint& design, const std::vector<double>& bers,
                              const std::vector<double>& actual_rates = {});

std::string table2_csv(const std::vector<Table2Row>& rows);
std::string table2_markdown(const std::vector<Table2Row>& rows);
std::string table3_csv(const std::vector<Table3Row>& rows);
std::string table3_markdown(const std::vector<Table3Row>& rows);
std::string table4_csv(const std::vector<Table4Row>& rows);
std::string table4_markdown(const std::vector<Table4Row>& rows);

} // namespace rifl::analysis
