#pragma once

#include "jbrsim/config.hpp"
#include "jbrsim/context.hpp"
#include "jbrsim/event_queue.hpp"
#include "jbrsim/graph.hpp"
#include "jbrsim/metrics.hpp"
#include "jbrsim/mobility.hpp"
#include "jbrsim/rng.hpp"
#include "jbrsim/types.hpp"

#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace jbrsim {

// Optional instrumentation for a run. Tests hang independent oracles here.
struct RunHooks {
    // called after every connectivity recompute with the sampled positions
    std::function<void(const ConnectivityGraph&, const std::vector<Vec2>&)> on_recompute;
    // strict invariant observation (criterion checks)
    bool strict = false;
    std::ostream* trace = nullptr;  // one line per processed event
};

struct FlowSpec {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
};

// Deterministic single-run simulation. P supplies:
//   P::Message  - protocol message type (wire_size/is_control/name)
//   P::Node     - per-node state machine
//   P::name()   - protocol tag for metrics
template <class P>
class Simulation {
public:
    using Message = typename P::Message;
    using Node = typename P::Node;

    explicit Simulation(const ScenarioConfig& cfg, RunHooks hooks = {})
        : cfg_(cfg), hooks_(std::move(hooks)), graph_(cfg.node_count),
          waypoint_model_(cfg.field_width, cfg.field_height, cfg.speed_min, cfg.speed_max,
                          cfg.pause_time),
          ctx_(*this) {
        cfg_.validate();
        init();
    }

    void run() { run_until(cfg_.sim_duration); }

    void run_until(double t_end) {
        while (auto entry = queue_.pop_next(t_end)) {
            process(*entry);
        }
        queue_.advance_to(t_end);
    }

    // --- observation -----------------------------------------------------
    [[nodiscard]] double now() const { return queue_.now(); }
    [[nodiscard]] const ConnectivityGraph& graph() const { return graph_; }
    [[nodiscard]] const TransmissionTally& tally() const { return tally_; }
    [[nodiscard]] const AppCounters& app() const { return app_; }
    [[nodiscard]] const StrictCounters& strict_counters() const { return strict_; }
    [[nodiscard]] const Node& node(NodeId n) const { return *nodes_[n]; }
    [[nodiscard]] Node& node(NodeId n) { return *nodes_[n]; }
    [[nodiscard]] const std::vector<FlowSpec>& flows() const { return flows_; }
    [[nodiscard]] const NodeKinematics& kinematics(NodeId n) const { return kin_[n]; }
    [[nodiscard]] std::vector<Vec2> positions_at(double t) const {
        std::vector<Vec2> pos(kin_.size());
        for (std::size_t i = 0; i < kin_.size(); ++i) pos[i] = kin_[i].position_at(t);
        return pos;
    }

private:
    struct Event {
        enum class Kind : std::uint8_t {
            NodeStart,
            MobilityTick,
            MobilityArrive,
            MobilityResume,
            TimerFire,
            MessageDelivery,
            TrafficArrival,
        };
        Kind kind;
        NodeId a = kNoNode;  // node / sender
        NodeId b = kNoNode;  // receiver
        TimerKind timer = TimerKind::SessionSettle;
        std::uint64_t aux = 0;
        std::uint32_t flow = 0;
        std::uint64_t packet_id = 0;
        std::shared_ptr<const Message> msg;
    };

    struct TimerKey {
        NodeId node;
        TimerKind kind;
        std::uint64_t aux;
        bool operator==(const TimerKey&) const = default;
    };
    struct TimerKeyHash {
        std::size_t operator()(const TimerKey& k) const {
            std::size_t h = std::hash<std::uint64_t>()(
                (static_cast<std::uint64_t>(k.node) << 8) | static_cast<std::uint64_t>(k.kind));
            return h ^ (std::hash<std::uint64_t>()(k.aux) * 0x9e3779b97f4a7c15ull);
        }
    };

    // Engine-side implementation of the per-node protocol context. One
    // instance, retargeted before each dispatch (single-threaded).
    class Ctx final : public ProtoContext<Message> {
    public:
        explicit Ctx(Simulation& sim) : sim_(sim) {}
        void target(NodeId n) { self_ = n; }

        [[nodiscard]] double now() const override { return sim_.queue_.now(); }
        [[nodiscard]] NodeId self() const override { return self_; }
        [[nodiscard]] const std::vector<NodeId>& neighbors() const override {
            return sim_.graph_.neighbors(self_);
        }
        [[nodiscard]] bool in_range(NodeId peer) const override {
            return peer < sim_.cfg_.node_count && sim_.graph_.connected(self_, peer);
        }
        [[nodiscard]] std::uint32_t degree() const override {
            return sim_.graph_.degree(self_);
        }
        void unicast(NodeId to, Message msg) override { sim_.send(self_, to, std::move(msg)); }
        void broadcast(Message msg) override { sim_.send_broadcast(self_, std::move(msg)); }
        void arm_timer(TimerKind kind, double delay, std::uint64_t aux) override {
            sim_.arm_timer(self_, kind, delay, aux);
        }
        void cancel_timer(TimerKind kind, std::uint64_t aux) override {
            sim_.cancel_timer(self_, kind, aux);
        }
        void note_delivered(std::uint64_t packet_id) override {
            if (sim_.delivered_ids_.insert(packet_id).second) {
                sim_.app_.data_delivered += 1;
            }
        }
        void note_dropped(std::uint64_t /*packet_id*/) override {
            sim_.app_.packets_dropped += 1;
        }
        void note_unreachable(NodeId /*dst*/) override {
            sim_.app_.unreachable_reported += 1;
        }
        void note_discovery_latency(double seconds) override {
            sim_.app_.discovery_count += 1;
            sim_.app_.discovery_latency_sum += seconds;
        }
        void note_discovery_failed() override { sim_.app_.failed_discoveries += 1; }
        void note_query_processed(NodeId origin, std::uint64_t seq) override {
            if (!sim_.hooks_.strict) return;
            const auto key = (static_cast<std::uint64_t>(origin) << 32) ^ seq;
            if (!sim_.queries_seen_[self_].insert(key).second) {
                sim_.strict_.duplicate_query_processed += 1;
            }
        }
        void note_cache_insert(const std::vector<NodeId>& route) override {
            if (!sim_.hooks_.strict) return;
            if (!sim_.graph_.is_path(route)) {
                sim_.strict_.stale_cache_inserts += 1;
            }
        }

    private:
        Simulation& sim_;
        NodeId self_ = kNoNode;
    };
    friend class Ctx;

    void init() {
        // independent streams so protocols never perturb the scenario
        auto mob_rng = make_stream(cfg_.rng_seed, RngStream::Mobility);
        auto layout_rng = make_stream(cfg_.rng_seed, RngStream::TrafficLayout);
        auto timing_rng = make_stream(cfg_.rng_seed, RngStream::TrafficTiming);

        kin_.reserve(cfg_.node_count);
        for (NodeId i = 0; i < cfg_.node_count; ++i) {
            kin_.push_back(waypoint_model_.place_node(i, mob_rng));
        }
        mobility_rng_ = std::move(mob_rng);
        recompute_graph();

        nodes_.reserve(cfg_.node_count);
        for (NodeId i = 0; i < cfg_.node_count; ++i) {
            nodes_.push_back(std::make_unique<Node>(i, cfg_));
        }

        // flows: uniform (src, dst) pairs, dst != src, fixed for the run
        std::uniform_int_distribution<NodeId> pick(0, cfg_.node_count - 1);
        for (std::uint32_t f = 0; f < cfg_.flow_count; ++f) {
            FlowSpec flow;
            flow.src = pick(layout_rng);
            do {
                flow.dst = pick(layout_rng);
            } while (flow.dst == flow.src);
            flows_.push_back(flow);
        }

        // protocol boot, then mobility legs, in id order at t=0
        for (NodeId i = 0; i < cfg_.node_count; ++i) {
            Event e;
            e.kind = Event::Kind::NodeStart;
            e.a = i;
            queue_.schedule(0.0, std::move(e));
        }
        for (NodeId i = 0; i < cfg_.node_count; ++i) {
            Event e;
            e.kind = Event::Kind::MobilityResume;
            e.a = i;
            queue_.schedule(0.0, std::move(e));
        }
        {
            Event e;
            e.kind = Event::Kind::MobilityTick;
            queue_.schedule(cfg_.graph_tick, std::move(e));
        }

        // all packet arrivals are fixed up front; identical for any protocol
        const double t_stop = std::max(0.0, cfg_.sim_duration - cfg_.traffic_drain);
        std::exponential_distribution<double> gap(cfg_.traffic_rate);
        std::uint64_t packet_id = 0;
        for (std::uint32_t f = 0; f < cfg_.flow_count; ++f) {
            double t = gap(timing_rng);
            while (t <= t_stop) {
                Event e;
                e.kind = Event::Kind::TrafficArrival;
                e.flow = f;
                e.a = flows_[f].src;
                e.b = flows_[f].dst;
                e.packet_id = ++packet_id;
                queue_.schedule(t, std::move(e));
                t += gap(timing_rng);
            }
        }
    }

    void recompute_graph() {
        const auto positions = positions_at(queue_.now());
        graph_.recompute(positions, cfg_.tx_range);
        if (hooks_.on_recompute) hooks_.on_recompute(graph_, positions);
    }

    void send(NodeId from, NodeId to, Message msg) {
        tally_.record(msg.name(), msg.wire_size(cfg_.wire), msg.is_control());
        if (to >= cfg_.node_count || !graph_.connected(from, to)) {
            tally_.unicast_losses += 1;  // transmitted into the void
            return;
        }
        Event e;
        e.kind = Event::Kind::MessageDelivery;
        e.a = from;
        e.b = to;
        e.msg = std::make_shared<const Message>(std::move(msg));
        queue_.schedule(queue_.now() + cfg_.hop_latency, std::move(e));
    }

    void send_broadcast(NodeId from, Message msg) {
        tally_.record(msg.name(), msg.wire_size(cfg_.wire), msg.is_control());
        const auto payload = std::make_shared<const Message>(std::move(msg));
        for (const NodeId nb : graph_.neighbors(from)) {
            Event e;
            e.kind = Event::Kind::MessageDelivery;
            e.a = from;
            e.b = nb;
            e.msg = payload;
            queue_.schedule(queue_.now() + cfg_.hop_latency, std::move(e));
        }
    }

    void arm_timer(NodeId n, TimerKind kind, double delay, std::uint64_t aux) {
        const TimerKey key{n, kind, aux};
        const auto it = timers_.find(key);
        if (it != timers_.end()) {
            queue_.cancel(it->second);
            timers_.erase(it);
        }
        Event e;
        e.kind = Event::Kind::TimerFire;
        e.a = n;
        e.timer = kind;
        e.aux = aux;
        timers_[key] = queue_.schedule(queue_.now() + delay, std::move(e));
    }

    void cancel_timer(NodeId n, TimerKind kind, std::uint64_t aux) {
        const TimerKey key{n, kind, aux};
        const auto it = timers_.find(key);
        if (it == timers_.end()) return;
        queue_.cancel(it->second);
        timers_.erase(it);
    }

    void dispatch_strict_checks(NodeId n) {
        if (!hooks_.strict) return;
        const bool keepalive_armed = timers_.count(TimerKey{n, TimerKind::Keepalive, 0}) != 0;
        if (keepalive_armed && node_session_active(n)) {
            strict_.hello_exclusivity_breaks += 1;
        }
    }

    // only JBR nodes have hello sessions; detect via member presence
    template <class N = Node>
    auto node_session_active_impl(NodeId n, int) -> decltype(std::declval<N>().hello_session_active()) {
        return nodes_[n]->hello_session_active();
    }
    template <class N = Node>
    bool node_session_active_impl(NodeId /*n*/, long) {
        return false;
    }
    bool node_session_active(NodeId n) { return node_session_active_impl(n, 0); }

    void trace_event(const typename EventQueue<Event>::Entry& entry) {
        if (!hooks_.trace) return;
        const Event& e = entry.payload;
        char head[64];
        std::snprintf(head, sizeof(head), "%.6f", entry.fire_time);
        std::ostringstream details;
        const char* kind = "?";
        switch (e.kind) {
        case Event::Kind::NodeStart:
            kind = "start";
            details << "node=" << e.a;
            break;
        case Event::Kind::MobilityTick:
            kind = "mobility";
            details << "tick epoch=" << graph_.epoch();
            break;
        case Event::Kind::MobilityArrive:
            kind = "mobility";
            details << "arrive node=" << e.a;
            break;
        case Event::Kind::MobilityResume:
            kind = "mobility";
            details << "resume node=" << e.a;
            break;
        case Event::Kind::TimerFire:
            kind = "timer";
            details << "node=" << e.a << " timer=" << timer_name(e.timer) << " aux=" << e.aux;
            break;
        case Event::Kind::MessageDelivery:
            kind = "delivery";
            details << "from=" << e.a << " to=" << e.b << " kind=" << e.msg->name()
                    << trace_detail(*e.msg);
            break;
        case Event::Kind::TrafficArrival:
            kind = "traffic";
            details << "flow=" << e.flow << " src=" << e.a << " dst=" << e.b
                    << " packet=" << e.packet_id;
            break;
        }
        (*hooks_.trace) << head << '\t' << kind << '\t' << details.str() << '\n';
    }

    void process(typename EventQueue<Event>::Entry& entry) {
        trace_event(entry);
        Event& e = entry.payload;
        switch (e.kind) {
        case Event::Kind::NodeStart:
            ctx_.target(e.a);
            nodes_[e.a]->on_start(ctx_);
            dispatch_strict_checks(e.a);
            return;

        case Event::Kind::MobilityTick: {
            recompute_graph();
            Event next;
            next.kind = Event::Kind::MobilityTick;
            queue_.schedule(queue_.now() + cfg_.graph_tick, std::move(next));
            return;
        }

        case Event::Kind::MobilityArrive: {
            auto& kin = kin_[e.a];
            waypoint_model_.arrive(kin, queue_.now());
            recompute_graph();  // waypoint arrivals refresh connectivity too
            Event next;
            next.kind = Event::Kind::MobilityResume;
            next.a = e.a;
            queue_.schedule(kin.paused_until, std::move(next));
            return;
        }

        case Event::Kind::MobilityResume: {
            auto& kin = kin_[e.a];
            waypoint_model_.begin_leg(kin, queue_.now(), mobility_rng_);
            Event next;
            if (kin.moving) {
                next.kind = Event::Kind::MobilityArrive;
                next.a = e.a;
                queue_.schedule(kin.arrival_time(), std::move(next));
            } else {
                next.kind = Event::Kind::MobilityResume;
                next.a = e.a;
                queue_.schedule(kin.paused_until, std::move(next));
            }
            return;
        }

        case Event::Kind::TimerFire: {
            const TimerKey key{e.a, e.timer, e.aux};
            const auto it = timers_.find(key);
            if (it == timers_.end() || it->second != entry.sequence) {
                return;  // cancelled or superseded
            }
            timers_.erase(it);
            ctx_.target(e.a);
            nodes_[e.a]->on_timer(ctx_, e.timer, e.aux);
            dispatch_strict_checks(e.a);
            return;
        }

        case Event::Kind::MessageDelivery:
            ctx_.target(e.b);
            nodes_[e.b]->on_message(ctx_, e.a, *e.msg);
            dispatch_strict_checks(e.b);
            return;

        case Event::Kind::TrafficArrival:
            app_.data_generated += 1;
            ctx_.target(e.a);
            nodes_[e.a]->on_traffic(ctx_, e.b, cfg_.payload_bytes, e.packet_id, e.flow);
            dispatch_strict_checks(e.a);
            return;
        }
    }

    ScenarioConfig cfg_;
    RunHooks hooks_;
    EventQueue<Event> queue_;
    ConnectivityGraph graph_;
    RandomWaypoint waypoint_model_;
    std::mt19937_64 mobility_rng_;
    std::vector<NodeKinematics> kin_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<FlowSpec> flows_;
    std::unordered_map<TimerKey, typename EventQueue<Event>::Handle, TimerKeyHash> timers_;
    TransmissionTally tally_;
    AppCounters app_;
    StrictCounters strict_;
    std::unordered_set<std::uint64_t> delivered_ids_;
    std::unordered_map<NodeId, std::unordered_set<std::uint64_t>> queries_seen_;
    Ctx ctx_;
};

} // namespace jbrsim
