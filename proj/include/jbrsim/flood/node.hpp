#pragma once

#include "jbrsim/config.hpp"
#include "jbrsim/context.hpp"
#include "jbrsim/flood/messages.hpp"
#include "jbrsim/types.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

namespace jbrsim::flood {

using Context = ProtoContext<Message>;

// DSR-flavoured flooding baseline: broadcast a request, every node forwards
// each request id once, the destination answers along the reverse path, the
// source caches the route. Nothing periodic, no beacons.
class Node {
public:
    Node(NodeId id, const ScenarioConfig& cfg) : id_(id), cfg_(&cfg) {}

    void on_start(Context& ctx);
    void on_message(Context& ctx, NodeId from, const Message& msg);
    void on_timer(Context& ctx, TimerKind kind, std::uint64_t aux);
    void on_traffic(Context& ctx, NodeId dst, std::uint32_t payload_bytes,
                    std::uint64_t packet_id, std::uint32_t flow_id);

    [[nodiscard]] NodeId id() const { return id_; }
    [[nodiscard]] const std::map<NodeId, std::vector<NodeId>>& route_cache() const {
        return cache_;
    }

    struct Stats {
        std::uint64_t requests_sent = 0;      // fresh discoveries + retries
        std::uint64_t forwards = 0;           // rebroadcasts of foreign requests
        std::uint64_t failed_discoveries = 0;
    };
    [[nodiscard]] const Stats& stats() const { return stats_; }

private:
    struct PendingPacket {
        std::uint64_t packet_id = 0;
        NodeId dst = kNoNode;
        std::uint32_t payload_bytes = 0;
        std::uint32_t recovery_count = 0;
        std::uint32_t flow_id = 0;
    };

    struct Discovery {
        std::uint64_t seq = 0;
        std::uint32_t retries = 0;
        double started_at = 0.0;
    };

    void send_or_discover(Context& ctx, PendingPacket pkt);
    void start_discovery(Context& ctx, NodeId dst);
    void broadcast_request(Context& ctx, NodeId dst, std::uint64_t seq);
    void fail_discovery(Context& ctx, NodeId dst);
    void forward_data(Context& ctx, Message data);

    void on_request(Context& ctx, NodeId from, const Message& msg);
    void on_reply(Context& ctx, NodeId from, const Message& msg);
    void on_flood_data(Context& ctx, NodeId from, const Message& msg);
    void on_error(Context& ctx, NodeId from, const Message& msg);

    NodeId id_;
    const ScenarioConfig* cfg_;

    std::set<std::pair<NodeId, std::uint64_t>> seen_requests_;
    std::map<NodeId, std::vector<NodeId>> cache_;  // dst -> route from self
    std::map<NodeId, std::deque<PendingPacket>> pending_;
    std::map<NodeId, Discovery> discovering_;
    std::uint64_t next_seq_ = 1;
    Stats stats_;
};

} // namespace jbrsim::flood
