#pragma once

#include "jbrsim/config.hpp"
#include "jbrsim/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace jbrsim::jbr {

enum class MsgKind : std::uint8_t {
    Hello,
    HelloReply,
    NewJanitor,
    JanitorAliveRequest,
    JanitorAliveReply,
    Data,
    Ack,
    RouteQuery,
    RouteReply,
    RouteError,
    RouteUnreachable,
};

const char* kind_name(MsgKind k);

// One struct for all eleven kinds; which fields are meaningful depends on
// `kind`. Wire size is the kind's fixed header plus 4 bytes per entry in
// `route` where a node list is carried.
struct Message {
    MsgKind kind = MsgKind::Hello;
    NodeId origin = kNoNode;  // who built this message

    std::uint32_t degree = 0;      // Hello / HelloReply / NewJanitor
    NodeId janitor_hint = kNoNode; // HelloReply: the replier's current janitor

    // Data / Ack movement. `route` is the explicit source route (empty for a
    // single-hop send); route_index points at the carrying node's slot.
    std::uint64_t packet_id = 0;
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    std::uint32_t payload_bytes = 0;
    std::vector<NodeId> route;
    std::uint32_t route_index = 0;
    std::uint32_t hop_count = 0;
    bool returning = false;  // Data heading back to its source after a break
    std::uint32_t recovery_count = 0;

    std::uint32_t flow_id = 0;        // Ack
    bool janitor_alive_flag = false;  // Ack piggyback bit

    // RouteQuery / RouteReply / RouteUnreachable bookkeeping. For a query,
    // `route` holds the physical path walked so far (janitors plus relay
    // nodes); route_index addresses the hop currently carrying the message.
    NodeId query_origin = kNoNode;
    std::uint64_t query_seq = 0;
    NodeId prev_janitor = kNoNode;  // last janitor that forwarded this query
    bool scoped_flood = false;      // dead-end query escape: local broadcast
    std::uint32_t max_hops = 0;     // query search radius; 0 = full hop budget

    NodeId broken_from = kNoNode;  // RouteError
    NodeId broken_to = kNoNode;
    std::uint64_t returned_packet = 0;

    [[nodiscard]] std::size_t wire_size(const WireSizes& w) const;
    [[nodiscard]] bool is_control() const {
        return kind != MsgKind::Data && kind != MsgKind::Ack;
    }
    [[nodiscard]] const char* name() const { return kind_name(kind); }
};

// extra detail for event traces
std::string trace_detail(const Message& m);

} // namespace jbrsim::jbr
