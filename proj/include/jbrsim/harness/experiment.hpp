#pragma once

#include "jbrsim/analytic/model.hpp"
#include "jbrsim/config.hpp"
#include "jbrsim/engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace jbrsim::harness {

enum class Protocol { Jbr, Flood };

const char* protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);  // throws ConfigError

// One row of the experiment CSV; field order is the column order.
struct MetricsRecord {
    std::string protocol;
    double pause_time = 0.0;
    std::uint32_t node_count = 0;
    std::uint64_t seed = 0;
    std::uint64_t control_packet_count = 0;
    std::uint64_t control_byte_count = 0;
    std::uint64_t data_delivered = 0;
    std::uint64_t data_generated = 0;
    double delivery_ratio = 1.0;  // 1 by convention when nothing was generated
    std::uint64_t route_errors = 0;
    std::uint64_t route_unreachables = 0;
    double discovery_latency_mean = 0.0;
};

std::string csv_header();
std::string csv_row(const MetricsRecord& r);

struct SweepSpec {
    std::vector<double> pause_times;
    std::vector<std::uint32_t> node_counts;
    std::vector<std::uint64_t> seeds;
    std::vector<Protocol> protocols;

    void validate() const;  // nonempty lists
};

// One full simulation run. Hooks are optional test instrumentation.
MetricsRecord run_experiment(const ScenarioConfig& cfg, Protocol protocol,
                             RunHooks hooks = {});

// Cartesian product of the spec over a base scenario; rows come back sorted
// by (protocol, node_count, pause_time, seed) no matter the execution order.
std::vector<MetricsRecord> run_sweep(const SweepSpec& spec, const ScenarioConfig& base);

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

// Per-(protocol, node_count, pause_time) mean/stddev over seeds.
void write_summary_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

// ---- analytic evaluation ----------------------------------------------------

struct AnalyticOptions {
    std::vector<std::string> select;  // empty or {"all"} = everything
    bool with_mc = false;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
};

// Evaluates the selected formulas on the given parameters, one CSV row per
// formula per variant. Unknown selections are config errors.
void evaluate_analytics(std::ostream& out, const analytic::AnalyticParams& params,
                        const AnalyticOptions& options);

} // namespace jbrsim::harness
