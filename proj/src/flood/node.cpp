#include "jbrsim/flood/node.hpp"

#include <algorithm>

namespace jbrsim::flood {

void Node::on_start(Context& /*ctx*/) {}

void Node::on_traffic(Context& ctx, NodeId dst, std::uint32_t payload_bytes,
                      std::uint64_t packet_id, std::uint32_t flow_id) {
    PendingPacket pkt;
    pkt.packet_id = packet_id;
    pkt.dst = dst;
    pkt.payload_bytes = payload_bytes;
    pkt.flow_id = flow_id;
    send_or_discover(ctx, std::move(pkt));
}

void Node::send_or_discover(Context& ctx, PendingPacket pkt) {
    const auto it = cache_.find(pkt.dst);
    if (it != cache_.end() && it->second.size() >= 2 && ctx.in_range(it->second[1])) {
        Message data;
        data.kind = MsgKind::FloodData;
        data.origin = id_;
        data.src = id_;
        data.dst = pkt.dst;
        data.packet_id = pkt.packet_id;
        data.payload_bytes = pkt.payload_bytes;
        data.recovery_count = pkt.recovery_count;
        data.flow_id = pkt.flow_id;
        data.route = it->second;
        data.route_index = 0;
        forward_data(ctx, std::move(data));
        return;
    }
    if (it != cache_.end()) cache_.erase(it);  // stale first hop

    auto& queue = pending_[pkt.dst];
    if (queue.size() >= cfg_->pending_capacity) {
        ctx.note_dropped(queue.front().packet_id);
        queue.pop_front();
    }
    const NodeId dst = pkt.dst;
    queue.push_back(std::move(pkt));
    if (!discovering_.count(dst)) start_discovery(ctx, dst);
}

void Node::start_discovery(Context& ctx, NodeId dst) {
    Discovery d;
    d.seq = next_seq_++;
    d.retries = 0;
    d.started_at = ctx.now();
    discovering_[dst] = d;
    broadcast_request(ctx, dst, d.seq);
    ctx.arm_timer(TimerKind::FloodRequestTimeout, cfg_->flood_timeout, dst);
}

void Node::broadcast_request(Context& ctx, NodeId dst, std::uint64_t seq) {
    seen_requests_.insert({id_, seq});  // never forward our own flood
    Message req;
    req.kind = MsgKind::FloodRequest;
    req.origin = id_;
    req.src = id_;
    req.dst = dst;
    req.request_seq = seq;
    req.route = {id_};
    req.hop_count = 1;
    stats_.requests_sent += 1;
    ctx.broadcast(std::move(req));
}

void Node::on_request(Context& ctx, NodeId /*from*/, const Message& msg) {
    if (!seen_requests_.insert({msg.src, msg.request_seq}).second) {
        return;  // each request id is forwarded at most once
    }

    if (msg.dst == id_) {
        Message reply;
        reply.kind = MsgKind::FloodReply;
        reply.origin = id_;
        reply.src = msg.src;
        reply.dst = msg.dst;
        reply.request_seq = msg.request_seq;
        reply.route = msg.route;
        reply.route.push_back(id_);
        reply.route_index = static_cast<std::uint32_t>(reply.route.size() - 1);
        // walk the accumulated route backwards
        if (reply.route.size() >= 2) {
            const NodeId back = reply.route[reply.route.size() - 2];
            Message out = reply;
            out.route_index -= 1;
            if (ctx.in_range(back)) ctx.unicast(back, std::move(out));
        }
    }

    // every node, destination included, forwards a request exactly once
    if (msg.hop_count < cfg_->hop_limit) {
        Message fwd = msg;
        fwd.origin = id_;
        fwd.route.push_back(id_);
        fwd.hop_count += 1;
        stats_.forwards += 1;
        ctx.broadcast(std::move(fwd));
    }
}

void Node::on_reply(Context& ctx, NodeId /*from*/, const Message& msg) {
    const std::uint32_t idx = msg.route_index;
    if (idx >= msg.route.size() || msg.route[idx] != id_) return;
    if (idx > 0) {
        const NodeId next = msg.route[idx - 1];
        if (!ctx.in_range(next)) return;  // reply lost; source retries
        Message fwd = msg;
        fwd.route_index = idx - 1;
        ctx.unicast(next, std::move(fwd));
        return;
    }

    // back at the source
    const auto disc = discovering_.find(msg.dst);
    if (disc == discovering_.end() || disc->second.seq != msg.request_seq) {
        return;  // stale or duplicate reply
    }
    ctx.note_discovery_latency(ctx.now() - disc->second.started_at);
    discovering_.erase(disc);
    ctx.cancel_timer(TimerKind::FloodRequestTimeout, msg.dst);
    ctx.note_cache_insert(msg.route);
    cache_[msg.dst] = msg.route;

    auto buffered = pending_.find(msg.dst);
    if (buffered == pending_.end()) return;
    std::deque<PendingPacket> packets;
    packets.swap(buffered->second);
    pending_.erase(buffered);
    for (auto& pkt : packets) {
        send_or_discover(ctx, std::move(pkt));
    }
}

void Node::on_timer(Context& ctx, TimerKind kind, std::uint64_t aux) {
    if (kind != TimerKind::FloodRequestTimeout) return;
    const NodeId dst = static_cast<NodeId>(aux);
    const auto disc = discovering_.find(dst);
    if (disc == discovering_.end()) return;
    if (disc->second.retries < cfg_->flood_retries) {
        disc->second.retries += 1;
        disc->second.seq = next_seq_++;  // fresh id: old one is burned everywhere
        broadcast_request(ctx, dst, disc->second.seq);
        ctx.arm_timer(TimerKind::FloodRequestTimeout, cfg_->flood_timeout, dst);
        return;
    }
    discovering_.erase(disc);
    fail_discovery(ctx, dst);
}

void Node::fail_discovery(Context& ctx, NodeId dst) {
    stats_.failed_discoveries += 1;
    ctx.note_discovery_failed();
    auto buffered = pending_.find(dst);
    if (buffered == pending_.end()) return;
    for (const auto& pkt : buffered->second) {
        ctx.note_dropped(pkt.packet_id);
    }
    pending_.erase(buffered);
    ctx.note_unreachable(dst);
}

void Node::forward_data(Context& ctx, Message data) {
    std::uint32_t idx = data.route_index;
    if (idx >= data.route.size() || data.route[idx] != id_) return;
    if (idx + 1 >= data.route.size()) return;
    const NodeId next = data.route[idx + 1];
    if (!ctx.in_range(next)) {
        // route broke under us: tell the source, it re-floods
        const NodeId broken_from = data.route[idx];
        const NodeId broken_to = next;
        if (idx == 0) {
            // we are the source
            cache_.erase(data.dst);
            PendingPacket pkt;
            pkt.packet_id = data.packet_id;
            pkt.dst = data.dst;
            pkt.payload_bytes = data.payload_bytes;
            pkt.recovery_count = data.recovery_count + 1;
            pkt.flow_id = data.flow_id;
            if (pkt.recovery_count > cfg_->recovery_limit) {
                ctx.note_dropped(pkt.packet_id);
                return;
            }
            send_or_discover(ctx, std::move(pkt));
            return;
        }
        Message err;
        err.kind = MsgKind::FloodError;
        err.origin = id_;
        err.src = data.src;
        err.dst = data.dst;
        err.broken_from = broken_from;
        err.broken_to = broken_to;
        err.returned_packet = data.packet_id;
        err.packet_id = data.packet_id;
        err.payload_bytes = data.payload_bytes;
        err.recovery_count = data.recovery_count;
        err.route = data.route;
        err.route_index = idx - 1;
        const NodeId prev = data.route[idx - 1];
        if (ctx.in_range(prev)) {
            ctx.unicast(prev, std::move(err));
        } else {
            ctx.note_dropped(data.packet_id);  // error path broke too
        }
        return;
    }
    data.route_index = idx + 1;
    data.hop_count += 1;
    ctx.unicast(next, std::move(data));
}

void Node::on_flood_data(Context& ctx, NodeId /*from*/, const Message& msg) {
    if (msg.dst == id_) {
        ctx.note_delivered(msg.packet_id);
        return;
    }
    forward_data(ctx, msg);
}

void Node::on_error(Context& ctx, NodeId /*from*/, const Message& msg) {
    const std::uint32_t idx = msg.route_index;
    if (idx >= msg.route.size() || msg.route[idx] != id_) return;
    if (idx > 0) {
        const NodeId next = msg.route[idx - 1];
        if (!ctx.in_range(next)) return;  // error lost; next send finds out again
        Message fwd = msg;
        fwd.route_index = idx - 1;
        ctx.unicast(next, std::move(fwd));
        return;
    }
    // source: purge and re-flood the returned packet
    cache_.erase(msg.dst);
    PendingPacket pkt;
    pkt.packet_id = msg.packet_id;
    pkt.dst = msg.dst;
    pkt.payload_bytes = msg.payload_bytes;
    pkt.recovery_count = msg.recovery_count + 1;
    pkt.flow_id = msg.flow_id;
    if (pkt.recovery_count > cfg_->recovery_limit) {
        ctx.note_dropped(pkt.packet_id);
        return;
    }
    send_or_discover(ctx, std::move(pkt));
}

void Node::on_message(Context& ctx, NodeId from, const Message& msg) {
    switch (msg.kind) {
    case MsgKind::FloodRequest: on_request(ctx, from, msg); return;
    case MsgKind::FloodReply: on_reply(ctx, from, msg); return;
    case MsgKind::FloodData: on_flood_data(ctx, from, msg); return;
    case MsgKind::FloodError: on_error(ctx, from, msg); return;
    }
}

} // namespace jbrsim::flood
