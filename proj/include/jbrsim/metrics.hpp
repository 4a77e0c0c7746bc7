#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace jbrsim {

// Every radio transmission lands here exactly once, keyed by message kind.
// Broadcasts count as one transmission regardless of how many neighbors hear
// them; receptions are never counted.
struct TransmissionTally {
    struct PerKind {
        std::uint64_t packets = 0;
        std::uint64_t bytes = 0;
    };

    std::map<std::string, PerKind> by_kind;
    std::uint64_t control_packets = 0;
    std::uint64_t control_bytes = 0;
    std::uint64_t data_packets = 0;  // Data + Ack plane
    std::uint64_t data_bytes = 0;
    std::uint64_t unicast_losses = 0;  // unicast sent to an out-of-range node

    void record(const std::string& kind, std::uint64_t bytes, bool control) {
        auto& pk = by_kind[kind];
        pk.packets += 1;
        pk.bytes += bytes;
        if (control) {
            control_packets += 1;
            control_bytes += bytes;
        } else {
            data_packets += 1;
            data_bytes += bytes;
        }
    }

    [[nodiscard]] std::uint64_t kind_count(const std::string& kind) const {
        const auto it = by_kind.find(kind);
        return it == by_kind.end() ? 0 : it->second.packets;
    }
};

// Application-level outcome counters, filled by the protocol through its
// context hooks.
struct AppCounters {
    std::uint64_t data_generated = 0;
    std::uint64_t data_delivered = 0;
    std::uint64_t packets_dropped = 0;       // buffer overflow, repair give-up
    std::uint64_t unreachable_reported = 0;  // notices that reached the source
    std::uint64_t failed_discoveries = 0;
    std::uint64_t discovery_count = 0;
    double discovery_latency_sum = 0.0;

    [[nodiscard]] double discovery_latency_mean() const {
        return discovery_count == 0 ? 0.0 : discovery_latency_sum / discovery_count;
    }
};

// Test-mode invariant counters (engine strict checks).
struct StrictCounters {
    std::uint64_t duplicate_query_processed = 0;
    std::uint64_t stale_cache_inserts = 0;
    std::uint64_t hello_exclusivity_breaks = 0;
};

} // namespace jbrsim
