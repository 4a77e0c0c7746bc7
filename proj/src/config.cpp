#include "jbrsim/config.hpp"

#include "jbrsim/errors.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace jbrsim {

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const auto u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    auto dbl = [](double ScenarioConfig::*field) {
        return [field](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.*field = parse_double(k, v);
        };
    };
    auto u32 = [](std::uint32_t ScenarioConfig::*field) {
        return [field](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.*field = static_cast<std::uint32_t>(parse_u64(k, v));
        };
    };
    auto wire = [](std::uint32_t WireSizes::*field) {
        return [field](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.wire.*field = static_cast<std::uint32_t>(parse_u64(k, v));
        };
    };
    static const std::map<std::string, Setter> table = {
        {"field_width", dbl(&ScenarioConfig::field_width)},
        {"field_height", dbl(&ScenarioConfig::field_height)},
        {"node_count", u32(&ScenarioConfig::node_count)},
        {"tx_range", dbl(&ScenarioConfig::tx_range)},
        {"speed_min", dbl(&ScenarioConfig::speed_min)},
        {"speed_max", dbl(&ScenarioConfig::speed_max)},
        {"pause_time", dbl(&ScenarioConfig::pause_time)},
        {"traffic_rate", dbl(&ScenarioConfig::traffic_rate)},
        {"mobility_rate", dbl(&ScenarioConfig::mobility_rate)},
        {"sim_duration", dbl(&ScenarioConfig::sim_duration)},
        {"hop_limit", u32(&ScenarioConfig::hop_limit)},
        {"timer_alive", dbl(&ScenarioConfig::timer_alive)},
        {"timer_janitor_idle", dbl(&ScenarioConfig::timer_janitor_idle)},
        {"hop_latency", dbl(&ScenarioConfig::hop_latency)},
        {"rng_seed",
         [](ScenarioConfig& c, const std::string& k, const std::string& v) {
             c.rng_seed = parse_u64(k, v);
         }},
        {"flow_count", u32(&ScenarioConfig::flow_count)},
        {"graph_tick", dbl(&ScenarioConfig::graph_tick)},
        {"hello_settle", dbl(&ScenarioConfig::hello_settle)},
        {"query_timeout", dbl(&ScenarioConfig::query_timeout)},
        {"negative_cache_ttl", dbl(&ScenarioConfig::negative_cache_ttl)},
        {"route_cache_ttl", dbl(&ScenarioConfig::route_cache_ttl)},
        {"flood_timeout", dbl(&ScenarioConfig::flood_timeout)},
        {"flood_retries", u32(&ScenarioConfig::flood_retries)},
        {"payload_bytes", u32(&ScenarioConfig::payload_bytes)},
        {"pending_capacity", u32(&ScenarioConfig::pending_capacity)},
        {"recovery_limit", u32(&ScenarioConfig::recovery_limit)},
        {"traffic_drain", dbl(&ScenarioConfig::traffic_drain)},
        {"wire_hello", wire(&WireSizes::hello)},
        {"wire_hello_reply", wire(&WireSizes::hello_reply)},
        {"wire_new_janitor", wire(&WireSizes::new_janitor)},
        {"wire_alive_request", wire(&WireSizes::alive_request)},
        {"wire_alive_reply", wire(&WireSizes::alive_reply)},
        {"wire_data_header", wire(&WireSizes::data_header)},
        {"wire_ack", wire(&WireSizes::ack)},
        {"wire_route_query", wire(&WireSizes::route_query)},
        {"wire_route_reply", wire(&WireSizes::route_reply)},
        {"wire_route_error", wire(&WireSizes::route_error)},
        {"wire_route_unreachable", wire(&WireSizes::route_unreachable)},
        {"wire_flood_request", wire(&WireSizes::flood_request)},
        {"wire_flood_reply", wire(&WireSizes::flood_reply)},
        {"wire_flood_error", wire(&WireSizes::flood_error)},
        {"wire_per_route_entry", wire(&WireSizes::per_route_entry)},
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

void apply_scenario_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) {
        throw ConfigError("unknown scenario key: '" + key + "'");
    }
    it->second(cfg, key, value);
}

ScenarioConfig load_scenario(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
        }
        apply_scenario_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    return load_scenario(in);
}

void ScenarioConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid scenario: ") + what);
    };
    require(field_width > 0.0, "field_width must be > 0");
    require(field_height > 0.0, "field_height must be > 0");
    require(tx_range > 0.0, "tx_range must be > 0");
    require(node_count >= 2, "node_count must be >= 2");
    require(speed_min >= 0.0, "speed_min must be >= 0");
    require(speed_min <= speed_max, "speed_min must be <= speed_max");
    require(pause_time >= 0.0, "pause_time must be >= 0");
    require(hop_limit >= 1, "hop_limit must be >= 1");
    require(sim_duration >= 0.0, "sim_duration must be >= 0");
    require(traffic_rate > 0.0, "traffic_rate must be > 0");
    require(timer_alive > 0.0, "timer_alive must be > 0");
    require(timer_janitor_idle > 0.0, "timer_janitor_idle must be > 0");
    require(hop_latency >= 0.0, "hop_latency must be >= 0");
    require(graph_tick > 0.0, "graph_tick must be > 0");
    require(hello_settle > 0.0, "hello_settle must be > 0");
    require(pending_capacity >= 1, "pending_capacity must be >= 1");
}

const char* timer_name(TimerKind k) {
    switch (k) {
    case TimerKind::SessionSettle: return "session-settle";
    case TimerKind::SessionRetry: return "session-retry";
    case TimerKind::Keepalive: return "keepalive";
    case TimerKind::AliveReplyTimeout: return "alive-timeout";
    case TimerKind::JanitorIdle: return "janitor-idle";
    case TimerKind::QueryTimeout: return "query-timeout";
    case TimerKind::FloodRequestTimeout: return "flood-timeout";
    }
    return "?";
}

} // namespace jbrsim
