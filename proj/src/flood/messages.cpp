#include "jbrsim/flood/messages.hpp"

#include <sstream>

namespace jbrsim::flood {

const char* kind_name(MsgKind k) {
    switch (k) {
    case MsgKind::FloodRequest: return "FloodRequest";
    case MsgKind::FloodReply: return "FloodReply";
    case MsgKind::FloodData: return "FloodData";
    case MsgKind::FloodError: return "FloodError";
    }
    return "?";
}

std::size_t Message::wire_size(const WireSizes& w) const {
    const std::size_t per_entry = w.per_route_entry;
    switch (kind) {
    case MsgKind::FloodRequest: return w.flood_request + per_entry * route.size();
    case MsgKind::FloodReply: return w.flood_reply + per_entry * route.size();
    case MsgKind::FloodData: return w.data_header + payload_bytes + per_entry * route.size();
    case MsgKind::FloodError: return w.flood_error;
    }
    return 0;
}

std::string trace_detail(const Message& m) {
    std::ostringstream out;
    if (m.kind == MsgKind::FloodRequest || m.kind == MsgKind::FloodReply) {
        out << " req=" << m.src << ':' << m.request_seq << " dst=" << m.dst;
    } else {
        out << " pkt=" << m.packet_id << " src=" << m.src << " dst=" << m.dst;
    }
    return out.str();
}

} // namespace jbrsim::flood
