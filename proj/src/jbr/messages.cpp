#include "jbrsim/jbr/messages.hpp"

#include <sstream>

namespace jbrsim::jbr {

const char* kind_name(MsgKind k) {
    switch (k) {
    case MsgKind::Hello: return "Hello";
    case MsgKind::HelloReply: return "HelloReply";
    case MsgKind::NewJanitor: return "NewJanitor";
    case MsgKind::JanitorAliveRequest: return "JanitorAliveRequest";
    case MsgKind::JanitorAliveReply: return "JanitorAliveReply";
    case MsgKind::Data: return "Data";
    case MsgKind::Ack: return "Ack";
    case MsgKind::RouteQuery: return "RouteQuery";
    case MsgKind::RouteReply: return "RouteReply";
    case MsgKind::RouteError: return "RouteError";
    case MsgKind::RouteUnreachable: return "RouteUnreachable";
    }
    return "?";
}

std::size_t Message::wire_size(const WireSizes& w) const {
    const std::size_t per_entry = w.per_route_entry;
    switch (kind) {
    case MsgKind::Hello: return w.hello;
    case MsgKind::HelloReply: return w.hello_reply;
    case MsgKind::NewJanitor: return w.new_janitor;
    case MsgKind::JanitorAliveRequest: return w.alive_request;
    case MsgKind::JanitorAliveReply: return w.alive_reply;
    case MsgKind::Data: return w.data_header + payload_bytes + per_entry * route.size();
    case MsgKind::Ack: return w.ack;
    case MsgKind::RouteQuery: return w.route_query + per_entry * route.size();
    case MsgKind::RouteReply: return w.route_reply + per_entry * route.size();
    case MsgKind::RouteError: return w.route_error;
    case MsgKind::RouteUnreachable: return w.route_unreachable;
    }
    return 0;
}

std::string trace_detail(const Message& m) {
    std::ostringstream out;
    switch (m.kind) {
    case MsgKind::RouteQuery:
    case MsgKind::RouteReply:
    case MsgKind::RouteUnreachable:
        out << " q=" << m.query_origin << ':' << m.query_seq << " dst=" << m.dst << " idx="
            << m.route_index << " hops=" << m.hop_count << " route=[";
        for (std::size_t i = 0; i < m.route.size(); ++i) {
            if (i) out << ' ';
            out << m.route[i];
        }
        out << ']';
        break;
    case MsgKind::Data:
        out << " pkt=" << m.packet_id << " src=" << m.src << " dst=" << m.dst << " idx="
            << m.route_index << (m.returning ? " returning" : "");
        break;
    default:
        break;
    }
    return out.str();
}

} // namespace jbrsim::jbr
