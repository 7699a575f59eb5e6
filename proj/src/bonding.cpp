#include "rifl/bonding.hpp"

#include <algorithm>
#include <stdexcept>

namespace rifl {

LaneCursor::LaneCursor(int lanes) : lanes_(lanes)
{
    if (lanes < 1)
        throw std::invalid_argument("lane count must be at least 1");
}

std::vector<std::vector<Flit>> dispatch(const std::vector<Flit>& stream, int lanes)
{
    LaneCursor cursor(lanes);
    std::vector<std::vector<Flit>> out(static_cast<std::size_t>(lanes));
    for (const auto& f : stream) {
        out[static_cast<std::size_t>(cursor.current())].push_back(f);
        cursor.advance();
    }
    return out;
}

std::vector<Flit> gather(const std::vector<std::vector<Flit>>& per_lane)
{
    Gatherer g(static_cast<int>(per_lane.size()));
    for (std::size_t lane = 0; lane < per_lane.size(); ++lane)
        for (const auto& f : per_lane[lane])
            g.push(static_cast<int>(lane), f);
    std::vector<Flit> out;
    while (auto f = g.pop())
        out.push_back(std::move(*f));
    return out;
}

Gatherer::Gatherer(int lanes)
    : cursor_(lanes), queues_(static_cast<std::size_t>(lanes)), peaks_(static_cast<std::size_t>(lanes), 0)
{
}

void Gatherer::push(int lane, const Flit& flit)
{
    auto& q = queues_.at(static_cast<std::size_t>(lane));
    q.push_back(flit);
    auto& p = peaks_[static_cast<std::size_t>(lane)];
    p = std::max(p, q.size());
}

std::optional<Flit> Gatherer::pop()
{
    auto& q = queues_[static_cast<std::size_t>(cursor_.current())];
    if (q.empty())
        return std::nullopt;
    Flit f = std::move(q.front());
    q.pop_front();
    cursor_.advance();
    return f;
}

} // namespace rifl
