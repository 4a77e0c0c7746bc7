#pragma once

#include "jbrsim/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace jbrsim {

// Fixed header bytes per message kind, plus 4 bytes per carried route/visited
// node id. Only relative overhead matters for the metrics, so these are plain
// config knobs.
struct WireSizes {
    std::uint32_t hello = 12;
    std::uint32_t hello_reply = 12;
    std::uint32_t new_janitor = 16;
    std::uint32_t alive_request = 12;
    std::uint32_t alive_reply = 12;
    std::uint32_t data_header = 20;
    std::uint32_t ack = 16;
    std::uint32_t route_query = 24;
    std::uint32_t route_reply = 24;
    std::uint32_t route_error = 28;
    std::uint32_t route_unreachable = 16;
    std::uint32_t flood_request = 24;
    std::uint32_t flood_reply = 24;
    std::uint32_t flood_error = 28;
    std::uint32_t per_route_entry = 4;
};

struct ScenarioConfig {
    double field_width = 1300.0;   // meters
    double field_height = 1300.0;  // meters
    std::uint32_t node_count = 50;
    double tx_range = 250.0;       // meters
    double speed_min = 1.0;        // m/s
    double speed_max = 20.0;       // m/s
    double pause_time = 60.0;      // seconds spent at each waypoint
    double traffic_rate = 0.5;     // packets/s per flow, exponential inter-arrival
    double mobility_rate = 1.0;    // analytic-model mu, carried for reporting
    double sim_duration = 1800.0;  // seconds
    std::uint32_t hop_limit = 16;
    double timer_alive = 15.0;         // keepalive period / reply window
    double timer_janitor_idle = 30.0;  // janitor idle threshold
    double hop_latency = 0.002;        // seconds per link transmission
    std::uint64_t rng_seed = 1;
    std::uint32_t flow_count = 10;

    // engine details
    double graph_tick = 1.0;      // connectivity recompute period
    double hello_settle = 0.1;    // hello replies collected before electing
    double query_timeout = 2.0;       // janitor route query give-up window
    double negative_cache_ttl = 10.0; // back-off after a failed discovery
    double route_cache_ttl = 30.0;    // cached routes go stale after this
    double flood_timeout = 2.0;       // flood request reply window
    std::uint32_t flood_retries = 2;
    std::uint32_t payload_bytes = 64;
    std::uint32_t pending_capacity = 64;  // per-node buffered packets, drop-oldest
    std::uint32_t recovery_limit = 8;     // per-packet route-repair attempts
    double traffic_drain = 5.0;           // arrivals stop this long before the end

    WireSizes wire;

    // Throws ConfigError when an invariant fails.
    void validate() const;
};

// Flat key=value scenario file; '#' starts a comment, blank lines are
// ignored, unknown keys are errors.
ScenarioConfig load_scenario(std::istream& in);
ScenarioConfig load_scenario_file(const std::string& path);

// Applies a single key=value assignment (shared by the file loader and the
// CLI's --set flags).
void apply_scenario_key(ScenarioConfig& cfg, const std::string& key, const std::string& value);

} // namespace jbrsim
