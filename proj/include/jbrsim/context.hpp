#pragma once

#include "jbrsim/types.hpp"

#include <cstdint>
#include <vector>

namespace jbrsim {

// Everything a protocol state machine may do to the outside world. The
// engine implements this per node; unit tests substitute a recording fake,
// so node transitions stay synchronous (state, input) -> (state, effects).
template <class Msg>
class ProtoContext {
public:
    virtual ~ProtoContext() = default;

    [[nodiscard]] virtual double now() const = 0;
    [[nodiscard]] virtual NodeId self() const = 0;

    // Link layer view: current radio adjacency of this node (sorted).
    [[nodiscard]] virtual const std::vector<NodeId>& neighbors() const = 0;
    [[nodiscard]] virtual bool in_range(NodeId peer) const = 0;
    [[nodiscard]] virtual std::uint32_t degree() const = 0;

    virtual void unicast(NodeId to, Msg msg) = 0;
    virtual void broadcast(Msg msg) = 0;

    // Arming a (kind, aux) pair that is already armed replaces it.
    virtual void arm_timer(TimerKind kind, double delay, std::uint64_t aux) = 0;
    virtual void cancel_timer(TimerKind kind, std::uint64_t aux) = 0;

    // Application outcome hooks.
    virtual void note_delivered(std::uint64_t packet_id) = 0;
    virtual void note_dropped(std::uint64_t packet_id) = 0;
    virtual void note_unreachable(NodeId dst) = 0;
    virtual void note_discovery_latency(double seconds) = 0;
    virtual void note_discovery_failed() = 0;

    // Observability hooks for test-mode invariant checks.
    virtual void note_query_processed(NodeId query_origin, std::uint64_t query_seq) = 0;
    virtual void note_cache_insert(const std::vector<NodeId>& route) = 0;
};

} // namespace jbrsim
