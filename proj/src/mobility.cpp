#include "jbrsim/mobility.hpp"

#include <algorithm>
#include <cmath>

namespace jbrsim {

Vec2 NodeKinematics::position_at(double t) const {
    if (!moving) return position;
    const double total = distance(leg_start, waypoint);
    if (total <= 0.0) return waypoint;
    const double travelled = std::clamp((t - leg_start_time) * speed, 0.0, total);
    const double f = travelled / total;
    return Vec2{leg_start.x + (waypoint.x - leg_start.x) * f,
                leg_start.y + (waypoint.y - leg_start.y) * f};
}

double NodeKinematics::arrival_time() const {
    const double total = distance(leg_start, waypoint);
    if (speed <= 0.0) return leg_start_time;
    return leg_start_time + total / speed;
}

Vec2 RandomWaypoint::random_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> ux(0.0, width_);
    std::uniform_real_distribution<double> uy(0.0, height_);
    const double x = ux(rng);
    const double y = uy(rng);
    return Vec2{x, y};
}

NodeKinematics RandomWaypoint::place_node(NodeId id, std::mt19937_64& rng) const {
    NodeKinematics node;
    node.id = id;
    node.position = random_point(rng);
    node.leg_start = node.position;
    node.waypoint = node.position;
    node.paused_until = 0.0;
    node.moving = false;
    return node;
}

void RandomWaypoint::begin_leg(NodeKinematics& node, double now, std::mt19937_64& rng) const {
    node.position = node.position_at(now);
    node.leg_start = node.position;
    node.leg_start_time = now;
    node.waypoint = random_point(rng);
    std::uniform_real_distribution<double> us(speed_min_, speed_max_);
    node.speed = us(rng);
    if (node.speed <= 0.0 || distance(node.leg_start, node.waypoint) <= 0.0) {
        // zero-speed draw or coincident waypoint: sit this one out
        node.waypoint = node.position;
        node.moving = false;
        node.paused_until = now + std::max(pause_time_, 1.0);
        return;
    }
    node.moving = true;
}

void RandomWaypoint::arrive(NodeKinematics& node, double now) const {
    node.position = node.waypoint;
    node.leg_start = node.waypoint;
    node.moving = false;
    node.paused_until = now + pause_time_;
}

} // namespace jbrsim
