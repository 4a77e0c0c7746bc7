#pragma once

#include "jbrsim/config.hpp"
#include "jbrsim/context.hpp"
#include "jbrsim/jbr/messages.hpp"
#include "jbrsim/types.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace jbrsim::jbr {

using Context = ProtoContext<Message>;

enum class Role : std::uint8_t { Ordinary, Janitor };

// Election key: higher degree wins, ties go to the lower node id.
struct ElectionKey {
    std::uint32_t degree = 0;
    NodeId id = kNoNode;

    friend bool operator<(const ElectionKey& a, const ElectionKey& b) {
        if (a.degree != b.degree) return a.degree < b.degree;
        return a.id > b.id;  // lower id ranks higher
    }
    friend bool operator>(const ElectionKey& a, const ElectionKey& b) { return b < a; }
};

struct RouteCacheEntry {
    std::vector<NodeId> route;  // starts at the cache owner, ends at the destination
    double created_at = 0.0;
};

// One JBR node. All side effects go through the Context; nothing here keeps
// time or randomness of its own.
class Node {
public:
    Node(NodeId id, const ScenarioConfig& cfg) : id_(id), cfg_(&cfg) {}

    // --- engine entry points -------------------------------------------
    void on_start(Context& ctx);
    void on_message(Context& ctx, NodeId from, const Message& msg);
    void on_timer(Context& ctx, TimerKind kind, std::uint64_t aux);
    void on_traffic(Context& ctx, NodeId dst, std::uint32_t payload_bytes,
                    std::uint64_t packet_id, std::uint32_t flow_id);

    // --- inspection (tests, acceptance criteria) ------------------------
    [[nodiscard]] NodeId id() const { return id_; }
    [[nodiscard]] Role role() const { return role_; }
    [[nodiscard]] std::optional<NodeId> my_janitor() const { return my_janitor_; }
    [[nodiscard]] bool hello_session_active() const { return hello_session_active_; }
    [[nodiscard]] const std::set<NodeId>& covered_nodes() const { return covered_nodes_; }
    [[nodiscard]] const std::set<NodeId>& known_janitors() const { return known_janitors_; }
    [[nodiscard]] const std::set<NodeId>& unreachable_dests() const { return unreachable_dests_; }
    [[nodiscard]] const std::map<NodeId, std::vector<RouteCacheEntry>>& route_cache() const {
        return cache_;
    }
    [[nodiscard]] const std::map<NodeId, std::uint32_t>& neighbor_degrees() const {
        return neighbor_degrees_;
    }
    [[nodiscard]] const std::map<NodeId, NodeId>& neighbor_janitors() const {
        return neighbor_janitor_;
    }

    struct Stats {
        std::uint64_t sessions_started = 0;
        std::uint64_t keepalives_sent = 0;
        std::uint64_t keepalives_suppressed = 0;
        std::uint64_t duplicate_query_drops = 0;
        std::uint64_t queries_issued = 0;
        std::uint64_t ring_queries = 0;
        std::uint64_t full_queries = 0;
        std::uint64_t cache_route_uses = 0;
        std::uint64_t pending_overflow_drops = 0;
    };
    [[nodiscard]] const Stats& stats() const { return stats_; }

private:
    struct PendingPacket {
        std::uint64_t packet_id = 0;
        NodeId src = kNoNode;  // kNoNode means "this node"
        NodeId dst = kNoNode;
        std::uint32_t payload_bytes = 0;
        std::uint32_t recovery_count = 0;
        std::uint32_t flow_id = 0;
    };

    struct PendingQuery {
        NodeId dst = kNoNode;
        double issued_at = 0.0;
        std::uint32_t outstanding = 0;
        bool flooded = false;  // the one local-broadcast escape was used
        std::uint32_t max_hops = 0;         // search radius this query ran with
        std::uint32_t hop_count = 0;        // for a possible escape broadcast
        std::vector<NodeId> route_here;     // path from the origin to this node
        // physical path back to the janitor that forwarded us the query;
        // empty at the originating janitor
        std::vector<NodeId> upstream_path;
    };

    // A peer janitor and the one-node relay needed to reach it (kNoNode when
    // directly connected).
    struct PeerJanitor {
        NodeId janitor = kNoNode;
        NodeId relay = kNoNode;
    };

    using QueryKey = std::pair<NodeId, std::uint64_t>;  // (origin janitor, seq)

    // hello / election
    void start_hello_session(Context& ctx);
    void end_session_arm_keepalive(Context& ctx);
    void evaluate_janitor(Context& ctx);
    void become_janitor(Context& ctx);
    void demote(Context& ctx);

    // routing
    void send_data(Context& ctx, PendingPacket pkt);
    void janitor_route(Context& ctx, Message data);
    void issue_query(Context& ctx, NodeId dst, std::uint32_t max_hops);
    void forward_along_route(Context& ctx, Message data);
    void handle_link_break(Context& ctx, Message data);
    void deliver_locally(Context& ctx, NodeId from, const Message& data);
    void send_ack(Context& ctx, NodeId from, const Message& data);
    void purge_cache_links(NodeId a, NodeId b);
    void purge_cache_node(NodeId moved);
    void cache_insert(Context& ctx, NodeId dst, std::vector<NodeId> route);
    [[nodiscard]] const std::vector<NodeId>* cache_lookup(const Context& ctx, NodeId dst);
    void report_unreachable(Context& ctx, NodeId dst);
    void reject_unreachable(Context& ctx, const Message& data);
    void fail_query(Context& ctx, const QueryKey& key, bool final_verdict);
    void send_escape_flood(Context& ctx, const QueryKey& key, PendingQuery& record);
    void buffer_packet(Context& ctx, std::deque<PendingPacket>& buf, PendingPacket pkt);
    [[nodiscard]] std::vector<PeerJanitor> peer_janitors(const Context& ctx,
                                                         const std::vector<NodeId>& exclude) const;
    void send_query_branches(Context& ctx, const Message& proto, const std::vector<PeerJanitor>& peers);
    void bounce_unreachable(Context& ctx, const Message& query);

    // message handlers
    void on_hello(Context& ctx, NodeId from, const Message& msg);
    void on_hello_reply(Context& ctx, NodeId from, const Message& msg);
    void on_new_janitor(Context& ctx, NodeId from, const Message& msg);
    void on_alive_request(Context& ctx, NodeId from, const Message& msg);
    void on_alive_reply(Context& ctx, NodeId from, const Message& msg);
    void on_data(Context& ctx, NodeId from, const Message& msg);
    void on_ack(Context& ctx, NodeId from, const Message& msg);
    void on_route_query(Context& ctx, NodeId from, const Message& msg);
    void process_query(Context& ctx, NodeId from, const Message& msg, bool from_flood);
    void on_route_reply(Context& ctx, NodeId from, const Message& msg);
    void on_route_error(Context& ctx, NodeId from, const Message& msg);
    void on_route_unreachable(Context& ctx, NodeId from, const Message& msg);

    void note_service_contact(Context& ctx, NodeId peer);
    void promote_if_serving(Context& ctx, NodeId served);
    void touch_janitor_traffic(Context& ctx, NodeId peer);
    [[nodiscard]] ElectionKey self_key(const Context& ctx) const {
        return ElectionKey{ctx.degree(), id_};
    }

    NodeId id_;
    const ScenarioConfig* cfg_;

    Role role_ = Role::Ordinary;
    std::optional<NodeId> my_janitor_;
    ElectionKey my_janitor_key_{};
    bool hello_session_active_ = false;
    bool awaiting_alive_reply_ = false;
    bool keepalive_armed_ = false;

    std::map<NodeId, std::uint32_t> neighbor_degrees_;
    std::map<NodeId, NodeId> neighbor_janitor_;  // gossip from hello replies
    std::map<NodeId, NodeId> relayed_peers_;     // janitor -> relay that forwarded its claim
    std::set<NodeId> known_janitors_;
    std::set<NodeId> covered_nodes_;
    std::map<NodeId, std::vector<RouteCacheEntry>> cache_;  // newest first, two kept
    std::map<NodeId, double> negative_cache_;  // dst -> do not re-query before
    std::map<NodeId, double> cache_answers_;   // dst -> when we last answered from cache

    double last_janitor_traffic_ = -1e18;  // data/ack exchanged with my janitor
    double last_service_contact_ = -1e18;  // anything received while serving

    std::deque<PendingPacket> source_pending_;           // waiting for a janitor
    std::map<NodeId, std::deque<PendingPacket>> query_pending_;  // waiting for a route
    std::map<QueryKey, PendingQuery> pending_queries_;
    std::map<NodeId, std::uint64_t> active_query_for_dst_;  // origin-side: dst -> seq

    std::set<QueryKey> processed_queries_;
    std::set<QueryKey> flood_seen_;
    std::uint64_t next_query_seq_ = 1;

    std::set<NodeId> unreachable_dests_;
    Stats stats_;
};

} // namespace jbrsim::jbr
