#pragma once

#include <cstdint>
#include <cmath>

namespace jbrsim {

using NodeId = std::uint32_t;

constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance_sq(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(const Vec2& a, const Vec2& b) {
    return std::sqrt(distance_sq(a, b));
}

// Protocol timers, multiplexed per node through the engine. `aux` separates
// instances of the same kind (query sequence numbers, request ids).
enum class TimerKind : std::uint8_t {
    SessionSettle,
    SessionRetry,
    Keepalive,
    AliveReplyTimeout,
    JanitorIdle,
    QueryTimeout,
    FloodRequestTimeout,
};

const char* timer_name(TimerKind k);

} // namespace jbrsim
