#include "doctest.h"

#include "rifl/bonding.hpp"

using namespace rifl;

namespace {

std::vector<Flit> numbered(int n)
{
    std::vector<Flit> out;
    for (int i = 0; i < n; ++i) {
        Flit f;
        f.data = Payload(2);
        f.data.bytes[0] = static_cast<std::uint8_t>(i);
        f.data.bytes[1] = static_cast<std::uint8_t>(i >> 8);
        f.last = i % 5 == 4;
        out.push_back(f);
    }
    return out;
}

} // namespace

TEST_CASE("lane cursor")
{
    LaneCursor c(3);
    CHECK(c.current() == 0);
    c.advance();
    c.advance();
    CHECK(c.current() == 2);
    c.advance();
    CHECK(c.current() == 0);
}

TEST_CASE("dispatch and gather are inverse")
{
    const auto stream = numbered(23);
    for (int lanes : {1, 2, 4, 7}) {
        const auto per_lane = dispatch(stream, lanes);
        REQUIRE(per_lane.size() == static_cast<std::size_t>(lanes));
        for (int l = 0; l < lanes; ++l)
            for (std::size_t k = 0; k < per_lane[l].size(); ++k)
                CHECK(per_lane[l][k] == stream[k * lanes + l]);
        CHECK(gather(per_lane) == stream);
    }
}

TEST_CASE("gather stops at the first empty turn")
{
    auto per_lane = dispatch(numbered(8), 4);
    per_lane[2].pop_back();
    const auto got = gather(per_lane);
    CHECK(got.size() == 6);
}

TEST_CASE("skewed arrival reassembles in order")
{
    // Lane l delivers its k-th segment at time k + skew[l].
    const int lanes = 4;
    const int skew[lanes] = {0, 8, 3, 5};
    const auto stream = numbered(400);
    const auto per_lane = dispatch(stream, lanes);
    Gatherer g(lanes);
    std::vector<Flit> out;
    for (int t = 0; t < 200; ++t) {
        for (int l = 0; l < lanes; ++l) {
            const int k = t - skew[l];
            if (k >= 0 && static_cast<std::size_t>(k) < per_lane[l].size())
                g.push(l, per_lane[l][static_cast<std::size_t>(k)]);
        }
        while (auto f = g.pop())
            out.push_back(*f);
    }
    CHECK(out == stream);
    // Lane 0 runs 8 slots ahead of the slowest lane; its first segment leaves at once.
    CHECK(g.peak(0) == 8);
    CHECK(g.peak(1) == 1);
    for (int l = 0; l < lanes; ++l)
        CHECK(g.queued(l) == 0);
}

TEST_CASE("one lane three slots late")
{
    const int lanes = 4;
    const auto stream = numbered(200);
    const auto per_lane = dispatch(stream, lanes);
    Gatherer g(lanes);
    std::vector<Flit> out;
    for (int t = 0; t < 60; ++t) {
        for (int l = 0; l < lanes; ++l) {
            const int k = t - (l == 2 ? 3 : 0);
            if (k >= 0 && static_cast<std::size_t>(k) < per_lane[l].size())
                g.push(l, per_lane[l][static_cast<std::size_t>(k)]);
        }
        while (auto f = g.pop())
            out.push_back(*f);
    }
    CHECK(out == stream);
    // Three slots of delay hold three extra segments on the lanes around it.
    CHECK(g.peak(0) == 3);
    CHECK(g.peak(1) == 3);
    CHECK(g.peak(2) == 1);
    CHECK(g.peak(3) == 4);
}

TEST_CASE("dispatch of a short packet")
{
    // Five segments, end of packet in the last: lane 0 carries it as its second segment.
    auto stream = numbered(5);
    for (auto& f : stream)
        f.last = false;
    stream[4].last = true;
    const auto per_lane = dispatch(stream, 4);
    REQUIRE(per_lane[0].size() == 2);
    CHECK(per_lane[0][1].last);
    CHECK(per_lane[1].size() == 1);
    CHECK(dispatch(stream, 1)[0] == stream);
}
