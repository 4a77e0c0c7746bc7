#pragma once

#include "jbrsim/config.hpp"
#include "jbrsim/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace jbrsim::flood {

enum class MsgKind : std::uint8_t {
    FloodRequest,
    FloodReply,
    FloodData,
    FloodError,
};

const char* kind_name(MsgKind k);

struct Message {
    MsgKind kind = MsgKind::FloodRequest;
    NodeId origin = kNoNode;

    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    std::uint64_t request_seq = 0;  // unique per (src, seq)
    std::vector<NodeId> route;      // accumulated (request) or full (reply/data)
    std::uint32_t route_index = 0;
    std::uint32_t hop_count = 0;

    std::uint64_t packet_id = 0;
    std::uint32_t payload_bytes = 0;
    std::uint32_t flow_id = 0;
    bool returning = false;
    std::uint32_t recovery_count = 0;

    NodeId broken_from = kNoNode;  // FloodError
    NodeId broken_to = kNoNode;
    std::uint64_t returned_packet = 0;

    [[nodiscard]] std::size_t wire_size(const WireSizes& w) const;
    [[nodiscard]] bool is_control() const { return kind != MsgKind::FloodData; }
    [[nodiscard]] const char* name() const { return kind_name(kind); }
};

std::string trace_detail(const Message& m);

} // namespace jbrsim::flood
