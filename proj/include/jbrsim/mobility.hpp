#pragma once

#include "jbrsim/config.hpp"
#include "jbrsim/types.hpp"

#include <random>
#include <vector>

namespace jbrsim {

// One node's random-waypoint state. A node is either paused at `position`
// (until paused_until) or moving in a straight line from leg_start toward
// `waypoint` at `speed`.
struct NodeKinematics {
    NodeId id = 0;
    Vec2 position;      // current (last sampled) position
    Vec2 waypoint;      // destination of the current leg
    Vec2 leg_start;     // where the current leg began
    double leg_start_time = 0.0;
    double speed = 0.0;
    double paused_until = 0.0;
    bool moving = false;

    [[nodiscard]] Vec2 position_at(double t) const;
    [[nodiscard]] double arrival_time() const;  // when the current leg completes
};

// Random waypoint: uniform waypoint in the field, uniform speed in
// [speed_min, speed_max], pause_time dwell at each arrival. Nodes start at a
// uniform position and begin their first leg at t=0.
class RandomWaypoint {
public:
    RandomWaypoint(double width, double height, double speed_min, double speed_max,
                   double pause_time)
        : width_(width), height_(height), speed_min_(speed_min), speed_max_(speed_max),
          pause_time_(pause_time) {}

    [[nodiscard]] NodeKinematics place_node(NodeId id, std::mt19937_64& rng) const;

    // Starts a new leg from the node's current position; requires the pause
    // to have elapsed. Degenerate draws (zero speed or zero-length leg) fall
    // back to another pause so time always advances.
    void begin_leg(NodeKinematics& node, double now, std::mt19937_64& rng) const;

    // Marks the node arrived at its waypoint and paused for pause_time.
    void arrive(NodeKinematics& node, double now) const;

    [[nodiscard]] Vec2 random_point(std::mt19937_64& rng) const;

private:
    double width_, height_;
    double speed_min_, speed_max_;
    double pause_time_;
};

} // namespace jbrsim
