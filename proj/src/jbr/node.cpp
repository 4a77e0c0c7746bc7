#include "jbrsim/jbr/node.hpp"

#include <algorithm>
#include <cassert>

namespace jbrsim::jbr {

namespace {

bool has_duplicates(const std::vector<NodeId>& route) {
    std::vector<NodeId> sorted = route;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

bool contains(const std::vector<NodeId>& v, NodeId x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

bool route_has_link(const std::vector<NodeId>& route, NodeId a, NodeId b) {
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        if ((route[i] == a && route[i + 1] == b) || (route[i] == b && route[i + 1] == a)) {
            return true;
        }
    }
    return false;
}

// Splices out the detour between position `at` and the farthest later route
// entry that is directly reachable from route[at]. Local adjacency only, so
// the shortened route stays physically valid.
void shortcut_route(const jbrsim::ProtoContext<Message>& ctx, std::vector<NodeId>& route,
                    std::size_t at) {
    if (at + 2 >= route.size()) return;
    for (std::size_t q = route.size() - 1; q > at + 1; --q) {
        if (ctx.in_range(route[q])) {
            route.erase(route.begin() + static_cast<std::ptrdiff_t>(at) + 1,
                        route.begin() + static_cast<std::ptrdiff_t>(q));
            return;
        }
    }
}

} // namespace

// --------------------------------------------------------------------------
// hello sessions and election

void Node::on_start(Context& ctx) {
    start_hello_session(ctx);
}

void Node::start_hello_session(Context& ctx) {
    if (hello_session_active_) return;  // one session at a time
    if (role_ == Role::Janitor) demote(ctx);
    hello_session_active_ = true;
    stats_.sessions_started += 1;

    // keepalive machinery stops for the whole session
    ctx.cancel_timer(TimerKind::Keepalive, 0);
    keepalive_armed_ = false;
    ctx.cancel_timer(TimerKind::AliveReplyTimeout, 0);
    awaiting_alive_reply_ = false;
    ctx.cancel_timer(TimerKind::SessionRetry, 0);

    Message hello;
    hello.kind = MsgKind::Hello;
    hello.origin = id_;
    hello.degree = ctx.degree();
    ctx.broadcast(std::move(hello));

    ctx.arm_timer(TimerKind::SessionSettle, cfg_->hello_settle, 0);
}

void Node::on_hello(Context& ctx, NodeId from, const Message& msg) {
    neighbor_degrees_[from] = msg.degree;
    Message reply;
    reply.kind = MsgKind::HelloReply;
    reply.origin = id_;
    reply.degree = ctx.degree();
    reply.janitor_hint = my_janitor_.value_or(kNoNode);
    ctx.unicast(from, std::move(reply));
}

void Node::on_hello_reply(Context& /*ctx*/, NodeId from, const Message& msg) {
    neighbor_degrees_[from] = msg.degree;
    if (msg.janitor_hint != kNoNode) {
        neighbor_janitor_[from] = msg.janitor_hint;
    }
}

void Node::evaluate_janitor(Context& ctx) {
    if (!hello_session_active_) return;  // settled early via an accepted claim
    hello_session_active_ = false;

    // forget degrees of nodes no longer in range
    for (auto it = neighbor_degrees_.begin(); it != neighbor_degrees_.end();) {
        if (!ctx.in_range(it->first)) {
            it = neighbor_degrees_.erase(it);
        } else {
            ++it;
        }
    }

    if (neighbor_degrees_.empty()) {
        // nobody answered; try again later
        my_janitor_.reset();
        ctx.arm_timer(TimerKind::SessionRetry, cfg_->timer_alive, 0);
        return;
    }

    ElectionKey best{};
    for (const auto& [nb, deg] : neighbor_degrees_) {
        const ElectionKey key{deg, nb};
        if (best.id == kNoNode || key > best) best = key;
    }
    my_janitor_ = best.id;
    my_janitor_key_ = best;

    if (self_key(ctx) > best) {
        become_janitor(ctx);
    }
    end_session_arm_keepalive(ctx);
}

void Node::end_session_arm_keepalive(Context& ctx) {
    ctx.arm_timer(TimerKind::Keepalive, cfg_->timer_alive, 0);
    keepalive_armed_ = true;

    // announce ourselves to the elected janitor right away instead of
    // sitting silent for a whole keepalive period; this is what promotes a
    // chosen node into the janitor role
    if (my_janitor_ && ctx.in_range(*my_janitor_) && !awaiting_alive_reply_ &&
        ctx.now() - last_janitor_traffic_ >= cfg_->timer_alive) {
        Message req;
        req.kind = MsgKind::JanitorAliveRequest;
        req.origin = id_;
        ctx.unicast(*my_janitor_, std::move(req));
        stats_.keepalives_sent += 1;
        awaiting_alive_reply_ = true;
        ctx.arm_timer(TimerKind::AliveReplyTimeout, cfg_->timer_alive, 0);
    }

    // a janitor is known again; release anything parked at the source
    std::deque<PendingPacket> parked;
    parked.swap(source_pending_);
    for (auto& pkt : parked) {
        send_data(ctx, std::move(pkt));
    }
}

void Node::become_janitor(Context& ctx) {
    if (role_ == Role::Janitor) return;
    role_ = Role::Janitor;
    last_service_contact_ = ctx.now();
    Message claim;
    claim.kind = MsgKind::NewJanitor;
    claim.origin = id_;
    claim.degree = ctx.degree();
    ctx.broadcast(std::move(claim));
    ctx.arm_timer(TimerKind::JanitorIdle, cfg_->timer_janitor_idle, 0);
}

void Node::demote(Context& ctx) {
    role_ = Role::Ordinary;
    covered_nodes_.clear();
    ctx.cancel_timer(TimerKind::JanitorIdle, 0);
}

void Node::on_new_janitor(Context& ctx, NodeId from, const Message& msg) {
    const NodeId claimant = msg.origin;
    if (claimant != from) {
        // a covered node passed us a claim it heard: a two-hop peer janitor,
        // reachable through the relaying node
        if (claimant != id_ && from != kNoNode) relayed_peers_[claimant] = from;
        return;
    }

    neighbor_degrees_[from] = msg.degree;
    known_janitors_.insert(from);
    relayed_peers_.erase(from);  // direct knowledge supersedes a relayed path
    const ElectionKey claim{msg.degree, from};

    // a claim solicits a reply, which is how janitors learn their
    // neighbors' janitors (and with them the two-hop peers)
    Message reply;
    reply.kind = MsgKind::HelloReply;
    reply.origin = id_;
    reply.degree = ctx.degree();
    reply.janitor_hint = my_janitor_.value_or(kNoNode);
    ctx.unicast(from, std::move(reply));

    // gateway duty: tell our own janitor about the foreign claim so the
    // overlay edge exists in both directions
    if (role_ == Role::Ordinary && my_janitor_ && *my_janitor_ != from &&
        ctx.in_range(*my_janitor_)) {
        ctx.unicast(*my_janitor_, msg);
    }

    if (hello_session_active_) {
        // accept mid-session only when the claimant beats everything this
        // session has heard, including ourselves; otherwise the settle timer
        // decides with full information
        ElectionKey best = self_key(ctx);
        for (const auto& [nb, deg] : neighbor_degrees_) {
            if (!ctx.in_range(nb)) continue;
            const ElectionKey key{deg, nb};
            if (key > best) best = key;
        }
        if (!(claim < best)) {
            my_janitor_ = from;
            my_janitor_key_ = claim;
            hello_session_active_ = false;
            ctx.cancel_timer(TimerKind::SessionSettle, 0);
            end_session_arm_keepalive(ctx);
        }
        return;
    }

    // conflicting claims resolve by (degree, lowest id)
    if (!my_janitor_ || claim > my_janitor_key_) {
        my_janitor_ = from;
        my_janitor_key_ = claim;
        if (!keepalive_armed_) {
            ctx.arm_timer(TimerKind::Keepalive, cfg_->timer_alive, 0);
            keepalive_armed_ = true;
        }
    }
}

void Node::promote_if_serving(Context& ctx, NodeId served) {
    if (served != id_ && served != kNoNode) covered_nodes_.insert(served);
    if (role_ != Role::Janitor) become_janitor(ctx);
}

void Node::note_service_contact(Context& ctx, NodeId /*peer*/) {
    last_service_contact_ = ctx.now();
}

void Node::touch_janitor_traffic(Context& ctx, NodeId peer) {
    if (my_janitor_ && peer == *my_janitor_) {
        last_janitor_traffic_ = ctx.now();
    }
}

// --------------------------------------------------------------------------
// keepalive and idle machinery

void Node::on_timer(Context& ctx, TimerKind kind, std::uint64_t aux) {
    switch (kind) {
    case TimerKind::SessionSettle:
        evaluate_janitor(ctx);
        return;
    case TimerKind::SessionRetry:
        if (!hello_session_active_ && !my_janitor_) start_hello_session(ctx);
        return;
    case TimerKind::Keepalive: {
        keepalive_armed_ = false;
        if (hello_session_active_) return;  // exclusivity: must not run in-session
        if (!my_janitor_ || !ctx.in_range(*my_janitor_)) {
            start_hello_session(ctx);
            return;
        }
        ctx.arm_timer(TimerKind::Keepalive, cfg_->timer_alive, 0);
        keepalive_armed_ = true;
        if (awaiting_alive_reply_) return;  // a request is already out
        if (ctx.now() - last_janitor_traffic_ < cfg_->timer_alive) {
            stats_.keepalives_suppressed += 1;  // piggybacked on data/ack
            return;
        }
        Message req;
        req.kind = MsgKind::JanitorAliveRequest;
        req.origin = id_;
        ctx.unicast(*my_janitor_, std::move(req));
        stats_.keepalives_sent += 1;
        awaiting_alive_reply_ = true;
        ctx.arm_timer(TimerKind::AliveReplyTimeout, cfg_->timer_alive, 0);
        return;
    }
    case TimerKind::AliveReplyTimeout:
        if (awaiting_alive_reply_) {
            awaiting_alive_reply_ = false;
            start_hello_session(ctx);
        }
        return;
    case TimerKind::JanitorIdle:
        if (role_ != Role::Janitor) return;
        if (ctx.now() - last_service_contact_ >= cfg_->timer_janitor_idle) {
            start_hello_session(ctx);
        } else {
            ctx.arm_timer(TimerKind::JanitorIdle, cfg_->timer_janitor_idle, 0);
        }
        return;
    case TimerKind::QueryTimeout:
        fail_query(ctx, QueryKey{id_, aux}, true);
        return;
    default:
        return;
    }
}

void Node::on_alive_request(Context& ctx, NodeId from, const Message& /*msg*/) {
    note_service_contact(ctx, from);
    promote_if_serving(ctx, from);
    Message reply;
    reply.kind = MsgKind::JanitorAliveReply;
    reply.origin = id_;
    ctx.unicast(from, std::move(reply));
}

void Node::on_alive_reply(Context& ctx, NodeId from, const Message& /*msg*/) {
    if (awaiting_alive_reply_ && my_janitor_ && from == *my_janitor_) {
        awaiting_alive_reply_ = false;
        ctx.cancel_timer(TimerKind::AliveReplyTimeout, 0);
    }
}

// --------------------------------------------------------------------------
// data plane

void Node::on_traffic(Context& ctx, NodeId dst, std::uint32_t payload_bytes,
                      std::uint64_t packet_id, std::uint32_t flow_id) {
    PendingPacket pkt;
    pkt.packet_id = packet_id;
    pkt.dst = dst;
    pkt.payload_bytes = payload_bytes;
    pkt.flow_id = flow_id;
    send_data(ctx, pkt);
}

void Node::send_data(Context& ctx, PendingPacket pkt) {
    Message data;
    data.kind = MsgKind::Data;
    data.origin = id_;
    data.src = id_;
    data.dst = pkt.dst;
    data.payload_bytes = pkt.payload_bytes;
    data.packet_id = pkt.packet_id;
    data.recovery_count = pkt.recovery_count;
    data.flow_id = pkt.flow_id;

    if (ctx.in_range(pkt.dst)) {
        // case 1: destination in range, no control traffic at all
        touch_janitor_traffic(ctx, pkt.dst);
        ctx.unicast(pkt.dst, std::move(data));
        return;
    }
    if (role_ == Role::Janitor) {
        // a janitor is its own janitor
        janitor_route(ctx, std::move(data));
        return;
    }
    if (my_janitor_ && ctx.in_range(*my_janitor_)) {
        touch_janitor_traffic(ctx, *my_janitor_);
        ctx.unicast(*my_janitor_, std::move(data));
        return;
    }
    // no janitor reachable: park the packet and go looking for one
    buffer_packet(ctx, source_pending_, std::move(pkt));
    start_hello_session(ctx);
}

void Node::buffer_packet(Context& ctx, std::deque<PendingPacket>& buf, PendingPacket pkt) {
    if (buf.size() >= cfg_->pending_capacity) {
        ctx.note_dropped(buf.front().packet_id);
        stats_.pending_overflow_drops += 1;
        buf.pop_front();
    }
    buf.push_back(std::move(pkt));
}

void Node::on_data(Context& ctx, NodeId from, const Message& msg) {
    note_service_contact(ctx, from);
    touch_janitor_traffic(ctx, from);

    if (msg.returning) {
        // case 2c: data walking back to its source along the traversed prefix
        const std::uint32_t idx = msg.route_index;
        if (idx == 0) {
            // back at the source: try again through the janitor machinery
            if (msg.recovery_count + 1 > cfg_->recovery_limit) {
                ctx.note_dropped(msg.packet_id);
                return;
            }
            PendingPacket pkt;
            pkt.packet_id = msg.packet_id;
            pkt.dst = msg.dst;
            pkt.payload_bytes = msg.payload_bytes;
            pkt.recovery_count = msg.recovery_count + 1;
            pkt.flow_id = msg.flow_id;
            send_data(ctx, std::move(pkt));
            return;
        }
        const NodeId next = msg.route[idx - 1];
        if (!ctx.in_range(next)) {
            ctx.note_dropped(msg.packet_id);  // return path broke too
            return;
        }
        Message fwd = msg;
        fwd.route_index = idx - 1;
        ctx.unicast(next, std::move(fwd));
        return;
    }

    if (msg.dst == id_) {
        deliver_locally(ctx, from, msg);
        return;
    }

    if (!msg.route.empty()) {
        forward_along_route(ctx, msg);
        return;
    }

    // plain handoff: the sender uses us as its janitor
    promote_if_serving(ctx, msg.src);
    janitor_route(ctx, msg);
}

void Node::deliver_locally(Context& ctx, NodeId from, const Message& data) {
    ctx.note_delivered(data.packet_id);
    send_ack(ctx, from, data);
}

void Node::send_ack(Context& ctx, NodeId from, const Message& data) {
    Message ack;
    ack.kind = MsgKind::Ack;
    ack.origin = id_;
    ack.src = id_;
    ack.dst = data.src;
    ack.flow_id = data.flow_id;
    ack.packet_id = data.packet_id;
    ack.janitor_alive_flag = role_ == Role::Janitor;

    std::vector<NodeId> path;
    if (!data.route.empty()) {
        path.assign(data.route.rbegin(), data.route.rend());
        if (path.back() != data.src) path.push_back(data.src);
    } else {
        path.push_back(id_);
        path.push_back(from);
        if (data.src != from) path.push_back(data.src);
    }
    if (path.size() < 2 || has_duplicates(path)) {
        path = {id_, data.src};  // degenerate; try the direct hop
    }
    if (!ctx.in_range(path[1])) return;  // no viable ack path; liveness rides on data

    ack.route = std::move(path);
    ack.route_index = 1;
    const NodeId next = ack.route[1];
    touch_janitor_traffic(ctx, next);
    ctx.unicast(next, std::move(ack));
}

void Node::on_ack(Context& ctx, NodeId from, const Message& msg) {
    note_service_contact(ctx, from);
    touch_janitor_traffic(ctx, from);
    // a returning ack is proof a route to its sender worked just now
    const auto cached = cache_.find(msg.src);
    if (cached != cache_.end()) {
        for (auto& e : cached->second) e.created_at = ctx.now();
    }
    const std::uint32_t idx = msg.route_index;
    if (idx + 1 >= msg.route.size()) return;  // final recipient
    const NodeId next = msg.route[idx + 1];
    if (!ctx.in_range(next)) return;  // ack lost; not recovered
    Message fwd = msg;
    fwd.route_index = idx + 1;
    touch_janitor_traffic(ctx, next);
    ctx.unicast(next, std::move(fwd));
}

// --------------------------------------------------------------------------
// janitor routing: cases 2(a), 2(b), 2(d)

void Node::janitor_route(Context& ctx, Message data) {
    const NodeId dst = data.dst;

    // (a) destination directly connected to the janitor
    if (ctx.in_range(dst)) {
        Message out = std::move(data);
        out.route.clear();
        out.route_index = 0;
        out.hop_count += 1;
        ctx.unicast(dst, std::move(out));
        return;
    }

    // (b) cached route that is fresh and still starts with a live hop
    if (const auto* cached = cache_lookup(ctx, dst)) {
        std::vector<NodeId> full;
        if (data.src != id_ && !contains(*cached, data.src)) full.push_back(data.src);
        full.insert(full.end(), cached->begin(), cached->end());
        if (!has_duplicates(full)) {
            stats_.cache_route_uses += 1;
            Message out = std::move(data);
            out.route = std::move(full);
            out.route_index = static_cast<std::uint32_t>(out.route[0] == id_ ? 0 : 1);
            forward_along_route(ctx, out);
            return;
        }
    }

    // a recently failed destination is not worth another overlay flood yet
    const auto neg = negative_cache_.find(dst);
    if (neg != negative_cache_.end()) {
        if (ctx.now() < neg->second) {
            reject_unreachable(ctx, data);
            return;
        }
        negative_cache_.erase(neg);
    }

    // (d) ask the directly connected janitors
    const bool querying = active_query_for_dst_.count(dst) != 0;
    PendingPacket pkt;
    pkt.packet_id = data.packet_id;
    pkt.dst = dst;
    pkt.payload_bytes = data.payload_bytes;
    pkt.recovery_count = data.recovery_count;
    pkt.flow_id = data.flow_id;
    // remember the real source so failure notices can find their way back
    pkt.src = data.src;
    buffer_packet(ctx, query_pending_[dst], std::move(pkt));
    if (!querying) issue_query(ctx, dst, 1);  // ring search first, expand on failure
}

std::vector<Node::PeerJanitor> Node::peer_janitors(const Context& ctx,
                                                   const std::vector<NodeId>& exclude) const {
    std::vector<PeerJanitor> peers;
    auto excluded = [&](NodeId n) { return n == id_ || contains(exclude, n); };

    // janitors heard directly
    for (const NodeId j : known_janitors_) {
        if (!excluded(j) && ctx.in_range(j)) peers.push_back(PeerJanitor{j, kNoNode});
    }
    // janitors reachable through one relay: from hello-reply gossip and from
    // claims that covered nodes forwarded to us
    auto add_two_hop = [&](NodeId j, NodeId relay) {
        if (j == kNoNode || excluded(j)) return;
        if (!ctx.in_range(relay)) return;
        if (ctx.in_range(j)) {
            // direct after all (maybe its claim was missed)
            if (std::none_of(peers.begin(), peers.end(),
                             [&](const PeerJanitor& p) { return p.janitor == j; })) {
                peers.push_back(PeerJanitor{j, kNoNode});
            }
            return;
        }
        if (excluded(relay)) return;  // relay already on the path
        auto found = std::find_if(peers.begin(), peers.end(),
                                  [&](const PeerJanitor& p) { return p.janitor == j; });
        if (found == peers.end()) {
            peers.push_back(PeerJanitor{j, relay});
        } else if (found->relay != kNoNode && relay < found->relay) {
            found->relay = relay;  // deterministic relay choice
        }
    };
    for (const auto& [nb, j] : neighbor_janitor_) add_two_hop(j, nb);
    for (const auto& [j, relay] : relayed_peers_) add_two_hop(j, relay);

    // a relayed branch through a janitor we query directly is redundant:
    // that janitor explores onward anyway
    std::set<NodeId> direct;
    for (const auto& p : peers) {
        if (p.relay == kNoNode) direct.insert(p.janitor);
    }
    std::erase_if(peers,
                  [&](const PeerJanitor& p) { return p.relay != kNoNode && direct.count(p.relay); });

    std::sort(peers.begin(), peers.end(), [](const PeerJanitor& a, const PeerJanitor& b) {
        return a.janitor < b.janitor;
    });
    return peers;
}

void Node::send_query_branches(Context& ctx, const Message& proto,
                               const std::vector<PeerJanitor>& peers) {
    for (const auto& peer : peers) {
        Message q = proto;
        if (peer.relay != kNoNode) q.route.push_back(peer.relay);
        q.route.push_back(peer.janitor);
        q.hop_count = proto.hop_count + 1;  // janitor-to-janitor hops
        q.route_index = static_cast<std::uint32_t>(proto.route.size());  // next hop
        const NodeId next_hop = q.route[q.route_index];
        ctx.unicast(next_hop, std::move(q));
    }
}

void Node::issue_query(Context& ctx, NodeId dst, std::uint32_t max_hops) {
    if (max_hops == 0 || max_hops > cfg_->hop_limit) max_hops = cfg_->hop_limit;
    const std::vector<NodeId> self_path{id_};
    auto peers = peer_janitors(ctx, self_path);

    const std::uint64_t seq = next_query_seq_++;
    const QueryKey key{id_, seq};
    PendingQuery pq;
    pq.dst = dst;
    pq.issued_at = ctx.now();
    pq.outstanding = static_cast<std::uint32_t>(peers.size());
    pq.max_hops = max_hops;
    pq.hop_count = 0;
    pq.route_here = self_path;
    pending_queries_[key] = pq;
    active_query_for_dst_[dst] = seq;
    stats_.queries_issued += 1;
    if (max_hops >= cfg_->hop_limit) {
        stats_.full_queries += 1;
    } else {
        stats_.ring_queries += 1;
    }
    processed_queries_.insert(key);  // the origin counts as processed

    if (peers.empty()) {
        if (max_hops >= cfg_->hop_limit) {
            // nobody to ask directly: one local broadcast may still find a way
            send_escape_flood(ctx, key, pending_queries_[key]);
        } else {
            // fail fast into the full-radius attempt
            fail_query(ctx, key, false);
        }
    } else {
        Message proto;
        proto.kind = MsgKind::RouteQuery;
        proto.origin = id_;
        proto.dst = dst;
        proto.query_origin = id_;
        proto.query_seq = seq;
        proto.prev_janitor = id_;
        proto.route = self_path;
        proto.max_hops = max_hops;
        send_query_branches(ctx, proto, peers);
    }
    ctx.arm_timer(TimerKind::QueryTimeout, cfg_->query_timeout, seq);
}

void Node::send_escape_flood(Context& ctx, const QueryKey& key, PendingQuery& record) {
    record.flooded = true;
    Message flood;
    flood.kind = MsgKind::RouteQuery;
    flood.origin = id_;
    flood.dst = record.dst;
    flood.query_origin = key.first;
    flood.query_seq = key.second;
    flood.prev_janitor = id_;
    flood.scoped_flood = true;
    flood.route = record.route_here;
    flood.hop_count = record.hop_count + 1;
    flood.max_hops = record.max_hops;
    ctx.broadcast(std::move(flood));
}

void Node::bounce_unreachable(Context& ctx, const Message& query) {
    // walk back to the janitor that forwarded this query, through the same
    // relay if there was one
    const auto up = std::find(query.route.begin(), query.route.end(), query.prev_janitor);
    if (up == query.route.end()) return;  // malformed; origin timeout covers it
    std::vector<NodeId> back(up, query.route.end());
    std::reverse(back.begin(), back.end());  // [me, relay?, prev_janitor]
    if (back.size() < 2 || back.front() != id_) return;

    Message u;
    u.kind = MsgKind::RouteUnreachable;
    u.origin = id_;
    u.dst = query.dst;
    u.query_origin = query.query_origin;
    u.query_seq = query.query_seq;
    u.route = std::move(back);
    u.route_index = 1;
    const NodeId next = u.route[1];
    if (!ctx.in_range(next)) return;
    ctx.unicast(next, std::move(u));
}

void Node::on_route_query(Context& ctx, NodeId from, const Message& msg) {
    note_service_contact(ctx, from);

    if (msg.scoped_flood) {
        // dead-end escape broadcast: participate once per query id
        const QueryKey key{msg.query_origin, msg.query_seq};
        if (!flood_seen_.insert(key).second) return;
        if (contains(msg.route, id_)) return;  // already on this branch's path
        Message q = msg;
        q.scoped_flood = false;
        q.route.push_back(id_);
        q.route_index = static_cast<std::uint32_t>(q.route.size() - 1);
        process_query(ctx, from, q, true);
        return;
    }

    const std::uint32_t idx = msg.route_index;
    if (idx >= msg.route.size() || msg.route[idx] != id_) return;  // misrouted
    if (idx + 1 < msg.route.size()) {
        // we are a relay on the way to a two-hop peer
        const NodeId next = msg.route[idx + 1];
        if (!ctx.in_range(next)) return;  // branch lost; origin timeout covers it
        Message fwd = msg;
        fwd.route_index = idx + 1;
        ctx.unicast(next, std::move(fwd));
        return;
    }

    process_query(ctx, from, msg, false);
}

void Node::process_query(Context& ctx, NodeId from, const Message& msg, bool from_flood) {
    const QueryKey key{msg.query_origin, msg.query_seq};
    if (processed_queries_.count(key)) {
        // visited-set check: a query id is processed at most once per node
        stats_.duplicate_query_drops += 1;
        return;
    }
    processed_queries_.insert(key);
    ctx.note_query_processed(msg.query_origin, msg.query_seq);

    // the query itself reveals the sending janitor and how to reach it
    {
        const auto up = std::find(msg.route.begin(), msg.route.end(), msg.prev_janitor);
        if (up != msg.route.end()) {
            const auto gap = msg.route.end() - up;  // 2 = direct, 3 = one relay
            if (gap == 2) {
                known_janitors_.insert(msg.prev_janitor);
            } else if (gap == 3 && msg.prev_janitor != id_) {
                relayed_peers_[msg.prev_janitor] = *(up + 1);
            }
        }
    }

    // can we answer?
    std::vector<NodeId> full;
    if (msg.dst == id_) {
        full = msg.route;
    } else if (ctx.in_range(msg.dst)) {
        full = msg.route;
        full.push_back(msg.dst);
    } else {
        // a repeat query for a destination we just answered from cache means
        // that answer did not survive contact with the network
        const auto answered = cache_answers_.find(msg.dst);
        if (answered != cache_answers_.end() &&
            ctx.now() - answered->second < cfg_->query_timeout) {
            cache_.erase(msg.dst);
            cache_answers_.erase(answered);
        }
        if (const auto* cached = cache_lookup(ctx, msg.dst)) {
            full = msg.route;
            full.insert(full.end(), cached->begin() + 1, cached->end());
            cache_answers_[msg.dst] = ctx.now();
        }
    }
    if (!full.empty() && !has_duplicates(full)) {
        Message reply;
        reply.kind = MsgKind::RouteReply;
        reply.origin = id_;
        reply.dst = msg.dst;
        reply.query_origin = msg.query_origin;
        reply.query_seq = msg.query_seq;
        reply.route = std::move(full);
        reply.route_index = static_cast<std::uint32_t>(msg.route.size() - 2);
        const NodeId back = reply.route[reply.route_index];
        if (ctx.in_range(back)) ctx.unicast(back, std::move(reply));
        return;
    }

    // a destination that just proved unreachable from here is not worth
    // another subtree exploration until the back-off passes
    const auto neg = negative_cache_.find(msg.dst);
    if (neg != negative_cache_.end()) {
        if (ctx.now() < neg->second) {
            if (!from_flood) bounce_unreachable(ctx, msg);
            return;
        }
        negative_cache_.erase(neg);
    }

    // case 2e: the hop budget is spent and the destination was not found
    const std::uint32_t radius =
        msg.max_hops == 0 ? cfg_->hop_limit : std::min(msg.max_hops, cfg_->hop_limit);
    if (msg.hop_count >= radius) {
        if (!from_flood) bounce_unreachable(ctx, msg);
        return;
    }

    PendingQuery pq;
    pq.dst = msg.dst;
    pq.issued_at = ctx.now();
    pq.max_hops = msg.max_hops == 0 ? cfg_->hop_limit : msg.max_hops;
    pq.hop_count = msg.hop_count;
    pq.route_here = msg.route;
    const auto up = std::find(msg.route.begin(), msg.route.end(), msg.prev_janitor);
    if (up != msg.route.end()) {
        pq.upstream_path.assign(up, msg.route.end());
        std::reverse(pq.upstream_path.begin(), pq.upstream_path.end());
    } else {
        pq.upstream_path = {id_, from};  // malformed path; fall back to the sender
    }

    auto peers = peer_janitors(ctx, msg.route);
    if (peers.empty()) {
        if (radius < cfg_->hop_limit) {
            // narrow search: report back instead of escalating locally
            if (!from_flood) bounce_unreachable(ctx, msg);
            return;
        }
        // dead end in the overlay: probe the neighborhood once instead of
        // giving up; anyone who can reach the destination (or knows an
        // unvisited janitor) picks the search up
        pq.outstanding = 0;
        pending_queries_[key] = pq;
        send_escape_flood(ctx, key, pending_queries_[key]);
        return;
    }

    pq.outstanding = static_cast<std::uint32_t>(peers.size());
    pending_queries_[key] = pq;

    Message proto = msg;
    proto.origin = id_;
    proto.prev_janitor = id_;
    send_query_branches(ctx, proto, peers);
}

void Node::on_route_reply(Context& ctx, NodeId from, const Message& msg_in) {
    note_service_contact(ctx, from);
    Message msg = msg_in;
    const std::uint32_t idx = msg.route_index;
    if (idx >= msg.route.size() || msg.route[idx] != id_) return;  // misrouted

    // drop any detour between us and the farthest directly reachable node on
    // the destination side of the discovered route
    shortcut_route(ctx, msg.route, idx);

    const QueryKey key{msg.query_origin, msg.query_seq};

    if (id_ == msg.query_origin && idx == 0) {
        const auto pending = pending_queries_.find(key);
        if (pending == pending_queries_.end()) return;  // late or duplicate reply
        ctx.note_discovery_latency(ctx.now() - pending->second.issued_at);
        pending_queries_.erase(pending);
        active_query_for_dst_.erase(msg.dst);
        ctx.cancel_timer(TimerKind::QueryTimeout, msg.query_seq);

        cache_insert(ctx, msg.dst, msg.route);

        auto buffered = query_pending_.find(msg.dst);
        if (buffered != query_pending_.end()) {
            std::deque<PendingPacket> packets;
            packets.swap(buffered->second);
            query_pending_.erase(buffered);
            for (auto& pkt : packets) {
                Message data;
                data.kind = MsgKind::Data;
                data.origin = id_;
                data.src = pkt.src == kNoNode ? id_ : pkt.src;
                data.dst = pkt.dst;
                data.payload_bytes = pkt.payload_bytes;
                data.packet_id = pkt.packet_id;
                data.recovery_count = pkt.recovery_count;
                data.flow_id = pkt.flow_id;
                janitor_route(ctx, std::move(data));
            }
        }
        return;
    }

    // reverse-path relay: resolve our branch record and learn the suffix
    pending_queries_.erase(key);
    if (idx + 1 < msg.route.size()) {
        std::vector<NodeId> suffix(msg.route.begin() + idx, msg.route.end());
        if (suffix.size() >= 2 && !has_duplicates(suffix)) {
            cache_insert(ctx, msg.dst, std::move(suffix));
        }
    }
    if (idx == 0) return;
    const NodeId next = msg.route[idx - 1];
    if (!ctx.in_range(next)) return;  // reply lost; origin timeout covers it
    Message fwd = msg;
    fwd.route_index = idx - 1;
    ctx.unicast(next, std::move(fwd));
}

void Node::fail_query(Context& ctx, const QueryKey& key, bool final_verdict) {
    const auto it = pending_queries_.find(key);
    if (it == pending_queries_.end()) return;

    if (key.first == id_ && it->second.upstream_path.empty() &&
        it->second.max_hops < cfg_->hop_limit) {
        // the cheap ring search missed: run the full-radius one
        const NodeId dst = it->second.dst;
        pending_queries_.erase(it);
        active_query_for_dst_.erase(dst);
        ctx.cancel_timer(TimerKind::QueryTimeout, key.second);
        issue_query(ctx, dst, cfg_->hop_limit);
        return;
    }

    if (!final_verdict && !it->second.flooded &&
        it->second.hop_count + 1 <= cfg_->hop_limit) {
        // every unicast branch came back empty; one local broadcast remains
        send_escape_flood(ctx, key, it->second);
        return;  // resolution now rides on a reply or the origin timeout
    }
    if (!final_verdict && it->second.flooded && key.first != id_) {
        return;  // already escalated; nothing further to do here
    }

    const NodeId dst = it->second.dst;
    std::vector<NodeId> upstream = it->second.upstream_path;
    const bool full_radius = it->second.max_hops >= cfg_->hop_limit;
    pending_queries_.erase(it);
    if (full_radius) {
        negative_cache_[dst] = ctx.now() + cfg_->negative_cache_ttl;
    }

    if (!upstream.empty()) {
        // pass the failure one overlay hop back
        Message u;
        u.kind = MsgKind::RouteUnreachable;
        u.origin = id_;
        u.dst = dst;
        u.query_origin = key.first;
        u.query_seq = key.second;
        u.route = std::move(upstream);
        u.route_index = 1;
        if (u.route.size() >= 2 && ctx.in_range(u.route[1])) {
            const NodeId next = u.route[1];
            ctx.unicast(next, std::move(u));
        }
        return;
    }

    // originating janitor: the whole query tree came up empty
    active_query_for_dst_.erase(dst);
    ctx.cancel_timer(TimerKind::QueryTimeout, key.second);
    ctx.note_discovery_failed();
    report_unreachable(ctx, dst);
}

void Node::report_unreachable(Context& ctx, NodeId dst) {
    auto buffered = query_pending_.find(dst);
    if (buffered == query_pending_.end()) return;
    std::deque<PendingPacket> packets;
    packets.swap(buffered->second);
    query_pending_.erase(buffered);

    for (const auto& pkt : packets) {
        const NodeId src = pkt.src == kNoNode ? id_ : pkt.src;
        ctx.note_dropped(pkt.packet_id);
        if (src == id_) {
            unreachable_dests_.insert(dst);
            ctx.note_unreachable(dst);
            continue;
        }
        Message notice;
        notice.kind = MsgKind::RouteUnreachable;
        notice.origin = id_;
        notice.dst = dst;
        notice.src = src;           // who the notice is for
        notice.query_origin = id_;  // which janitor gave up
        notice.query_seq = 0;       // final notice, not overlay bookkeeping
        ctx.unicast(src, std::move(notice));
    }
}

void Node::reject_unreachable(Context& ctx, const Message& data) {
    ctx.note_dropped(data.packet_id);
    if (data.src == id_) {
        unreachable_dests_.insert(data.dst);
        ctx.note_unreachable(data.dst);
        return;
    }
    Message notice;
    notice.kind = MsgKind::RouteUnreachable;
    notice.origin = id_;
    notice.dst = data.dst;
    notice.src = data.src;
    notice.query_origin = id_;
    notice.query_seq = 0;
    ctx.unicast(data.src, std::move(notice));
}

void Node::on_route_unreachable(Context& ctx, NodeId from, const Message& msg) {
    if (msg.query_seq == 0) {
        // final notice delivered to the source
        unreachable_dests_.insert(msg.dst);
        ctx.note_unreachable(msg.dst);
        // drop anything we were still holding for that destination
        std::deque<PendingPacket> keep;
        for (auto& pkt : source_pending_) {
            if (pkt.dst == msg.dst) {
                ctx.note_dropped(pkt.packet_id);
            } else {
                keep.push_back(pkt);
            }
        }
        source_pending_.swap(keep);
        return;
    }

    const std::uint32_t idx = msg.route_index;
    if (idx >= msg.route.size() || msg.route[idx] != id_) return;
    if (idx + 1 < msg.route.size()) {
        // relay on the way back to the sending janitor
        const NodeId next = msg.route[idx + 1];
        if (!ctx.in_range(next)) return;
        Message fwd = msg;
        fwd.route_index = idx + 1;
        ctx.unicast(next, std::move(fwd));
        return;
    }

    const QueryKey key{msg.query_origin, msg.query_seq};
    const auto it = pending_queries_.find(key);
    if (it == pending_queries_.end()) return;  // resolved or timed out already
    if (it->second.flooded) return;  // escape in flight; the timeout decides
    if (it->second.outstanding > 0) it->second.outstanding -= 1;
    if (it->second.outstanding > 0) return;
    fail_query(ctx, key, false);
    (void)from;
}

// --------------------------------------------------------------------------
// source routes and repair (case 2c)

void Node::forward_along_route(Context& ctx, Message data) {
    std::uint32_t idx = data.route_index;
    if (idx >= data.route.size() || data.route[idx] != id_) {
        // defensive resync; should not trigger with well-formed routes
        const auto self_pos = std::find(data.route.begin(), data.route.end(), id_);
        if (self_pos == data.route.end()) return;
        idx = static_cast<std::uint32_t>(self_pos - data.route.begin());
    }
    if (idx + 1 >= data.route.size()) return;  // nowhere to go
    shortcut_route(ctx, data.route, idx);
    const NodeId next = data.route[idx + 1];
    if (!ctx.in_range(next)) {
        data.route_index = idx;
        handle_link_break(ctx, std::move(data));
        return;
    }
    data.route_index = idx + 1;
    data.hop_count += 1;
    touch_janitor_traffic(ctx, next);
    ctx.unicast(next, std::move(data));
}

void Node::handle_link_break(Context& ctx, Message data) {
    const std::uint32_t idx = data.route_index;
    const NodeId broken_from = data.route[idx];
    const NodeId broken_to = data.route[idx + 1];
    purge_cache_links(broken_from, broken_to);
    purge_cache_node(broken_to);  // it left our range; we have first-hand evidence

    if (idx == 0) {
        // we are the source; recover in place
        if (my_janitor_ && broken_to == *my_janitor_) start_hello_session(ctx);
        if (data.recovery_count + 1 > cfg_->recovery_limit) {
            ctx.note_dropped(data.packet_id);
            return;
        }
        PendingPacket pkt;
        pkt.packet_id = data.packet_id;
        pkt.dst = data.dst;
        pkt.payload_bytes = data.payload_bytes;
        pkt.recovery_count = data.recovery_count + 1;
        pkt.flow_id = data.flow_id;
        send_data(ctx, std::move(pkt));
        return;
    }

    const NodeId prev = data.route[idx - 1];

    Message err;
    err.kind = MsgKind::RouteError;
    err.origin = id_;
    err.src = data.src;
    err.dst = data.dst;
    err.broken_from = broken_from;
    err.broken_to = broken_to;
    err.returned_packet = data.packet_id;
    err.route = data.route;
    err.route_index = idx - 1;

    Message ret = std::move(data);
    ret.returning = true;
    ret.route_index = idx - 1;

    const bool prev_reachable = ctx.in_range(prev);
    if (prev_reachable) {
        ctx.unicast(prev, std::move(err));
        ctx.unicast(prev, std::move(ret));
    } else {
        ctx.note_dropped(ret.packet_id);  // unrecoverable: return path broke too
    }

    // re-elect only when the lost node was our own janitor; other breaks are
    // repaired by the routing layer without tearing the election down
    if (my_janitor_ && broken_to == *my_janitor_) {
        start_hello_session(ctx);
    }
}

void Node::on_route_error(Context& ctx, NodeId /*from*/, const Message& msg) {
    purge_cache_links(msg.broken_from, msg.broken_to);
    const std::uint32_t idx = msg.route_index;
    if (idx >= msg.route.size() || msg.route[idx] != id_) return;
    if (idx == 0) return;  // source reached; the returning data re-enters send_data
    const NodeId next = msg.route[idx - 1];
    if (!ctx.in_range(next)) return;
    Message fwd = msg;
    fwd.route_index = idx - 1;
    ctx.unicast(next, std::move(fwd));
}

const std::vector<NodeId>* Node::cache_lookup(const Context& ctx, NodeId dst) {
    const auto it = cache_.find(dst);
    if (it == cache_.end()) return nullptr;
    auto& entries = it->second;
    for (auto e = entries.begin(); e != entries.end();) {
        const bool fresh = ctx.now() - e->created_at <= cfg_->route_cache_ttl;
        if (fresh && e->route.size() >= 2 && ctx.in_range(e->route[1])) {
            return &e->route;
        }
        e = entries.erase(e);
    }
    cache_.erase(it);
    return nullptr;
}

void Node::cache_insert(Context& ctx, NodeId dst, std::vector<NodeId> route) {
    ctx.note_cache_insert(route);
    auto& entries = cache_[dst];
    for (auto e = entries.begin(); e != entries.end();) {
        if (e->route == route) {
            e = entries.erase(e);
        } else {
            ++e;
        }
    }
    RouteCacheEntry entry;
    entry.route = std::move(route);
    entry.created_at = ctx.now();
    entries.insert(entries.begin(), std::move(entry));
    if (entries.size() > 2) entries.resize(2);  // primary plus one fallback
}

void Node::purge_cache_links(NodeId a, NodeId b) {
    for (auto it = cache_.begin(); it != cache_.end();) {
        auto& entries = it->second;
        std::erase_if(entries, [&](const RouteCacheEntry& e) {
            return route_has_link(e.route, a, b);
        });
        if (entries.empty()) {
            it = cache_.erase(it);
        } else {
            ++it;
        }
    }
}

void Node::purge_cache_node(NodeId moved) {
    // the node vanished from our range, so every route through it is suspect
    for (auto it = cache_.begin(); it != cache_.end();) {
        auto& entries = it->second;
        std::erase_if(entries,
                      [&](const RouteCacheEntry& e) { return contains(e.route, moved); });
        if (entries.empty()) {
            it = cache_.erase(it);
        } else {
            ++it;
        }
    }
}

// --------------------------------------------------------------------------
// dispatch

void Node::on_message(Context& ctx, NodeId from, const Message& msg) {
    switch (msg.kind) {
    case MsgKind::Hello: on_hello(ctx, from, msg); return;
    case MsgKind::HelloReply: on_hello_reply(ctx, from, msg); return;
    case MsgKind::NewJanitor: on_new_janitor(ctx, from, msg); return;
    case MsgKind::JanitorAliveRequest: on_alive_request(ctx, from, msg); return;
    case MsgKind::JanitorAliveReply: on_alive_reply(ctx, from, msg); return;
    case MsgKind::Data: on_data(ctx, from, msg); return;
    case MsgKind::Ack: on_ack(ctx, from, msg); return;
    case MsgKind::RouteQuery: on_route_query(ctx, from, msg); return;
    case MsgKind::RouteReply: on_route_reply(ctx, from, msg); return;
    case MsgKind::RouteError: on_route_error(ctx, from, msg); return;
    case MsgKind::RouteUnreachable: on_route_unreachable(ctx, from, msg); return;
    }
}

} // namespace jbrsim::jbr
