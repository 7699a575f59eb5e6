#include "doctest.h"

#include "rifl/analysis.hpp"

#include <cmath>

using namespace rifl::analysis;

namespace {

// Binomial term by repeated multiplication in long double.
long double binomial_term(int i, int n, long double p)
{
    long double c = 1;
    for (int k = 1; k <= i; ++k)
        c = c * (n - i + k) / k;
    return c * std::pow(p, i) * std::pow(1 - p, n - i);
}

double relative_error(double got, double want) { return std::abs(got - want) / std::abs(want); }

} // namespace

TEST_CASE("frame error ratio")
{
    CHECK(fer(0.0, 256) == 0.0);
    CHECK(fer(1.0, 256) == 1.0);
    const double want = 1.0 - std::pow(1.0L - 1e-7L, 256);
    CHECK(relative_error(fer(1e-7, 256), want) < 1e-9);
    CHECK(fer(1e-7, 256) == doctest::Approx(2.56e-5).epsilon(0.001));
}

TEST_CASE("frame error ratio against frame sampling")
{
    // 2e5 frames of 256 bits at BER 1e-3: expected FER about 0.226.
    std::uint64_t state = 12345;
    auto next = [&state] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    const int frames = 200000;
    int bad = 0;
    for (int f = 0; f < frames; ++f) {
        bool hit = false;
        for (int b = 0; b < 256; ++b)
            hit |= next() < 1e-3;
        bad += hit;
    }
    const double p = fer(1e-3, 256);
    const double sigma = std::sqrt(p * (1 - p) / frames);
    CHECK(std::abs(static_cast<double>(bad) / frames - p) < 4 * sigma);
}

TEST_CASE("zero-error efficiency")
{
    CHECK(eff_bandwidth(128, 12, 0, 0) == 0.875);
    CHECK(eff_bandwidth(256, 12, 0, 0) == 0.9375);
    CHECK(eff_bandwidth(512, 12, 0, 0) == 0.96875);
    CHECK(eff_bandwidth(256, 12, 100, 1e-3) == doctest::Approx(0.9375 * 0.9));
}

TEST_CASE("exact error probabilities")
{
    CHECK(p_exact_errors(0, 256, 0.0) == 1.0);
    CHECK(p_exact_errors(1, 256, 0.0) == 0.0);
    double sum = 0;
    for (int i = 0; i <= 256; ++i)
        sum += p_exact_errors(i, 256, 1e-5);
    CHECK(std::abs(sum - 1.0) < 1e-12);
    const double p4 = p_exact_errors(4, 128, 1e-7);
    CHECK(relative_error(p4, static_cast<double>(binomial_term(4, 128, 1e-7L))) < 1e-9);
    CHECK(p4 == doctest::Approx(1.07e-21).epsilon(0.01));
    for (int i : {0, 1, 3, 7})
        CHECK(relative_error(p_exact_errors(i, 512, 2e-3), static_cast<double>(binomial_term(i, 512, 2e-3L))) <
              1e-9);
}

TEST_CASE("undetected frame ratio")
{
    CHECK(ffr(8, 4, 128, 0.0) == 0.0);
    const double f8 = ffr(8, 4, 128, 1e-7);
    CHECK(f8 == doctest::Approx(4.2e-24).epsilon(0.01));
    long double tail = 0;
    for (int i = 4; i <= 12; ++i)
        tail += binomial_term(i, 128, 1e-7L);
    CHECK(relative_error(f8, static_cast<double>(tail / 256)) < 1e-9);
    CHECK(ffr(12, 4, 128, 1e-7) / f8 == doctest::Approx(1.0 / 16).epsilon(1e-12));
    // At high BER the tail approaches one.
    CHECK(ffr(0, 0, 256, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("mean time before failure")
{
    DesignPoint p;
    p.frame_bits = 128;
    p.checksum_bits = 8;
    p.hd = 4;
    p.line_rate_bps = 100e9;
    p.ber = 1e-7;
    // Independent form: frames = -ln(0.99) / FFR for small FFR.
    const long double f = [] {
        long double t = 0;
        for (int i = 4; i <= 12; ++i)
            t += binomial_term(i, 128, 1e-7L);
        return t / 256;
    }();
    const double years = static_cast<double>(-std::log(0.99L) / f * 128 / 100e9 / (365.25L * 86400));
    CHECK(relative_error(mtbf_years(p), years) < 1e-6);
    CHECK(relative_error(mtbf_years(p), 9.7e4) < 0.05);

    p.frame_bits = 2048;
    p.checksum_bits = 12;
    CHECK(relative_error(mtbf_years(p), 3.6e2) < 0.05);

    p.ber = 0.0;
    CHECK(std::isinf(mtbf_years(p)));

    // A lower delivered rate stretches the same frame count over more time.
    p.ber = 1e-7;
    const double line = mtbf_years(p);
    p.actual_rate_bps = 50e9;
    CHECK(mtbf_years(p) == doctest::Approx(2 * line));
}

TEST_CASE("MTBF is monotone in BER and frame size")
{
    DesignPoint p;
    double prev = INFINITY;
    for (double ber = 1e-11; ber <= 1e-5; ber *= 3) {
        p.ber = ber;
        const double m = mtbf_years(p);
        CHECK(m < prev);
        prev = m;
    }
    p.ber = 1e-7;
    prev = INFINITY;
    for (int s : {128, 256, 512, 1024, 2048}) {
        p.frame_bits = s;
        const double m = mtbf_years(p);
        CHECK(m < prev);
        prev = m;
    }
}

TEST_CASE("frame ID width")
{
    CHECK(min_frame_id_bits(100e9, 500e-9, 256) == 8);
    CHECK(min_frame_id_bits(100e9, 500e-9, 128) == 9);
    CHECK(min_frame_id_bits(100e9, 500e-9, 2048) == 5);
    CHECK(min_frame_id_bits(100e9, 500e-9, 50000) == 0);
    CHECK(min_frame_id_bits(100e9, 0, 256) == 0);
}

TEST_CASE("Hamming distance table")
{
    const auto t = HdTable::standard();
    CHECK(t.hd(8, 119) == 4);
    CHECK(t.hd(8, 120) == 3);
    CHECK(t.hd(16, 32751) == 4);
    CHECK(t.hd(12, 2035) == 4);
    CHECK(t.hd(12, 5000) == 2);
    CHECK(t.hd(40, 10) == 0);
    // The HD-4 limit is a shortened extended Hamming code: 2^(m-1) - 1 - m data bits.
    for (const auto& r : t.rows())
        CHECK(r.hd4_max_dataword == (1 << (r.width - 1)) - 1 - r.width);
}

TEST_CASE("checksum width")
{
    const auto t = HdTable::standard();
    CHECK(min_checksum_bits(128, 1e-7, 100e9, 100, t) == 8);
    CHECK(min_checksum_bits(1024, 1e-7, 100e9, 100, t) == 11);
    CHECK(min_checksum_bits(128, 1e-7, 100e9, 0, t) == t.min_width());
    CHECK(!min_checksum_bits(2048, 1e-2, 100e9, 100, t));
}

TEST_CASE("buffer sizing")
{
    const auto s = sizing(100e9, 500e-9);
    CHECK(s.s_retrans_bits == doctest::Approx(50000));
    CHECK(s.s_fc_bits == doctest::Approx(75000));
    CHECK(s.thr_on_bits == doctest::Approx(50000));
    CHECK(s.thr_off_bits == doctest::Approx(25000));
    const auto z = sizing(100e9, 0);
    CHECK(z.s_retrans_bits == 0);
    CHECK(z.s_fc_bits == 0);
    CHECK(z.thr_on_bits == 0);
    CHECK(z.thr_off_bits == 0);

    // 100 ns of circuit delay and 500 m of cable at the speed of light.
    const auto wide = sizing(100e9, rtt_s(100, 500, 1e9 / 299792458.0));
    CHECK(wide.s_retrans_bits / 8 <= 45000);
}

TEST_CASE("table regeneration")
{
    const auto rows = table2(100e9, 500e-9, 1e-7);
    REQUIRE(rows.size() == 5);
    const int ids[] = {9, 8, 7, 6, 5};
    const int sums[] = {8, 9, 10, 11, 12};
    const double mtbf[] = {9.7e4, 2.4e4, 5.9e3, 1.5e3, 3.6e2};
    for (int i = 0; i < 5; ++i) {
        CHECK(rows[i].frame_id_bits == ids[i]);
        CHECK(rows[i].checksum_bits == sums[i]);
        CHECK(rows[i].hd == 4);
        CHECK(relative_error(rows[i].mtbf_years, mtbf[i]) < 0.05);
    }
    const auto eff = table3();
    const double want[] = {0.875, 0.9375, 0.96875, 0.984375, 0.9921875};
    for (int i = 0; i < 5; ++i)
        CHECK(eff[i].efficiency == want[i]);
    CHECK(table3_markdown(eff).find("93.75000%") != std::string::npos);
}

TEST_CASE("MTBF against BER")
{
    DesignPoint d;
    const auto rows = table4(d, {1e-11, 1e-9, 1e-7, 1e-5}, {100e9, 100e9, 96e9, 3e9});
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].mtbf_years < rows[i - 1].mtbf_years);
    CHECK(rows[2].actual_rate_bps == 96e9);
    CHECK_THROWS(table4(d, {1e-7}, {1e9, 2e9}));
}
