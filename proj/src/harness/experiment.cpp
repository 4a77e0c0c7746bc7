#include "jbrsim/harness/experiment.hpp"

#include "jbrsim/errors.hpp"
#include "jbrsim/flood/node.hpp"
#include "jbrsim/jbr/node.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

namespace jbrsim::harness {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct JbrProtocol {
    using Message = jbr::Message;
    using Node = jbr::Node;
    static const char* name() { return "jbr"; }
};

struct FloodProtocol {
    using Message = flood::Message;
    using Node = flood::Node;
    static const char* name() { return "flood"; }
};

template <class P>
MetricsRecord run_one(const ScenarioConfig& cfg, RunHooks hooks) {
    Simulation<P> sim(cfg, std::move(hooks));
    sim.run();

    MetricsRecord rec;
    rec.protocol = P::name();
    rec.pause_time = cfg.pause_time;
    rec.node_count = cfg.node_count;
    rec.seed = cfg.rng_seed;
    rec.control_packet_count = sim.tally().control_packets;
    rec.control_byte_count = sim.tally().control_bytes;
    rec.data_delivered = sim.app().data_delivered;
    rec.data_generated = sim.app().data_generated;
    rec.delivery_ratio =
        rec.data_generated == 0
            ? 1.0
            : static_cast<double>(rec.data_delivered) / static_cast<double>(rec.data_generated);
    rec.route_errors =
        sim.tally().kind_count("RouteError") + sim.tally().kind_count("FloodError");
    rec.route_unreachables = sim.app().unreachable_reported + sim.app().failed_discoveries;
    rec.discovery_latency_mean = sim.app().discovery_latency_mean();
    return rec;
}

} // namespace

const char* protocol_name(Protocol p) {
    return p == Protocol::Jbr ? "jbr" : "flood";
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "jbr") return Protocol::Jbr;
    if (name == "flood") return Protocol::Flood;
    throw ConfigError("unknown protocol: '" + name + "' (expected jbr or flood)");
}

MetricsRecord run_experiment(const ScenarioConfig& cfg, Protocol protocol, RunHooks hooks) {
    cfg.validate();
    switch (protocol) {
    case Protocol::Jbr: return run_one<JbrProtocol>(cfg, std::move(hooks));
    case Protocol::Flood: return run_one<FloodProtocol>(cfg, std::move(hooks));
    }
    throw ConfigError("unknown protocol");
}

void SweepSpec::validate() const {
    if (pause_times.empty()) throw ConfigError("sweep: pause_times is empty");
    if (node_counts.empty()) throw ConfigError("sweep: node_counts is empty");
    if (seeds.empty()) throw ConfigError("sweep: seeds is empty");
    if (protocols.empty()) throw ConfigError("sweep: protocols is empty");
}

std::vector<MetricsRecord> run_sweep(const SweepSpec& spec, const ScenarioConfig& base) {
    spec.validate();
    base.validate();

    std::vector<MetricsRecord> records;
    for (const Protocol protocol : spec.protocols) {
        for (const std::uint32_t nodes : spec.node_counts) {
            for (const double pause : spec.pause_times) {
                for (const std::uint64_t seed : spec.seeds) {
                    ScenarioConfig cfg = base;
                    cfg.node_count = nodes;
                    cfg.pause_time = pause;
                    cfg.rng_seed = seed;
                    try {
                        records.push_back(run_experiment(cfg, protocol));
                    } catch (const std::exception& e) {
                        throw ConfigError("sweep failed at protocol=" +
                                          std::string(protocol_name(protocol)) +
                                          " nodes=" + std::to_string(nodes) +
                                          " pause=" + fmt(pause) +
                                          " seed=" + std::to_string(seed) + ": " + e.what());
                    }
                }
            }
        }
    }
    std::sort(records.begin(), records.end(), [](const MetricsRecord& a, const MetricsRecord& b) {
        return std::tie(a.protocol, a.node_count, a.pause_time, a.seed) <
               std::tie(b.protocol, b.node_count, b.pause_time, b.seed);
    });
    return records;
}

std::string csv_header() {
    return "protocol,pause_time,node_count,seed,control_packet_count,control_byte_count,"
           "data_delivered,data_generated,delivery_ratio,route_errors,route_unreachables,"
           "discovery_latency_mean";
}

std::string csv_row(const MetricsRecord& r) {
    std::string row = r.protocol;
    row += ',' + fmt(r.pause_time);
    row += ',' + std::to_string(r.node_count);
    row += ',' + std::to_string(r.seed);
    row += ',' + std::to_string(r.control_packet_count);
    row += ',' + std::to_string(r.control_byte_count);
    row += ',' + std::to_string(r.data_delivered);
    row += ',' + std::to_string(r.data_generated);
    row += ',' + fmt(r.delivery_ratio);
    row += ',' + std::to_string(r.route_errors);
    row += ',' + std::to_string(r.route_unreachables);
    row += ',' + fmt(r.discovery_latency_mean);
    return row;
}

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
    out << csv_header() << '\n';
    for (const auto& r : records) {
        out << csv_row(r) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
    struct Acc {
        std::vector<double> control_packets, control_bytes, delivery, latency;
    };
    std::map<std::tuple<std::string, std::uint32_t, double>, Acc> groups;
    for (const auto& r : records) {
        auto& acc = groups[{r.protocol, r.node_count, r.pause_time}];
        acc.control_packets.push_back(static_cast<double>(r.control_packet_count));
        acc.control_bytes.push_back(static_cast<double>(r.control_byte_count));
        acc.delivery.push_back(r.delivery_ratio);
        acc.latency.push_back(r.discovery_latency_mean);
    }

    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (const double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto stddev = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean(v);
        double s = 0.0;
        for (const double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };

    out << "protocol,node_count,pause_time,runs,control_packets_mean,control_packets_std,"
           "control_bytes_mean,control_bytes_std,delivery_ratio_mean,delivery_ratio_std,"
           "discovery_latency_mean,discovery_latency_std\n";
    for (const auto& [key, acc] : groups) {
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << fmt(std::get<2>(key)) << ','
            << acc.control_packets.size() << ',' << fmt(mean(acc.control_packets)) << ','
            << fmt(stddev(acc.control_packets)) << ',' << fmt(mean(acc.control_bytes)) << ','
            << fmt(stddev(acc.control_bytes)) << ',' << fmt(mean(acc.delivery)) << ','
            << fmt(stddev(acc.delivery)) << ',' << fmt(mean(acc.latency)) << ','
            << fmt(stddev(acc.latency)) << '\n';
    }
}

// ---- analytic evaluation -------------------------------------------------------

namespace {

struct AnalyticRow {
    std::string formula;
    std::string variant;
    std::string params;
    double value = 0.0;
    bool has_mc = false;
    double mc_estimate = 0.0;
    double mc_half_width = 0.0;
};

void emit(std::ostream& out, const AnalyticRow& row) {
    out << row.formula << ',' << row.variant << ',' << row.params << ',' << fmt(row.value);
    if (row.has_mc) {
        out << ',' << fmt(row.mc_estimate) << ',' << fmt(row.mc_half_width);
    } else {
        out << ",,";
    }
    out << '\n';
}

} // namespace

void evaluate_analytics(std::ostream& out, const analytic::AnalyticParams& p,
                        const AnalyticOptions& options) {
    using namespace analytic;
    p.validate();

    const std::vector<std::string> known = {
        "p_route_broken", "p_routing_success", "expected_ratios", "routing_cost",
        "p_janitor_route", "binomial_janitor_count", "p_discovery_success",
        "p_packet_success",
    };
    std::vector<std::string> selected = options.select;
    if (selected.empty() || (selected.size() == 1 && selected[0] == "all")) {
        selected = known;
    }
    for (const auto& s : selected) {
        if (std::find(known.begin(), known.end(), s) == known.end()) {
            throw ConfigError("unknown analytic selection: '" + s + "'");
        }
    }
    auto wanted = [&](const char* name) {
        return std::find(selected.begin(), selected.end(), name) != selected.end();
    };

    out << "formula,variant,params,value,mc_estimate,mc_half_width\n";

    if (wanted("p_route_broken")) {
        AnalyticRow row;
        row.formula = "p_route_broken";
        row.variant = "closed";
        row.params = "mu=" + fmt(p.mu) + ";lambda=" + fmt(p.lambda_rate);
        row.value = p_route_broken(p.mu, p.lambda_rate);
        if (options.with_mc) {
            row.has_mc = true;
            row.mc_estimate = p_route_broken_mc(p.mu, p.lambda_rate, options.trials, options.seed);
            row.mc_half_width =
                1.96 * std::sqrt(row.value * (1.0 - row.value) / static_cast<double>(options.trials));
        }
        emit(out, row);
    }

    if (wanted("p_routing_success")) {
        const std::string params = "p_l=" + fmt(p.p_l) + ";p_js=" + fmt(p.p_js);
        AnalyticRow literal;
        literal.formula = "p_routing_success";
        literal.variant = "literal";
        literal.params = params;
        literal.value = p_routing_success(p.p_l, p.p_js, SuccessMode::Literal);
        AnalyticRow conj = literal;
        conj.variant = "conjunction";
        conj.value = p_routing_success(p.p_l, p.p_js, SuccessMode::Conjunction);
        if (options.with_mc) {
            conj.has_mc = true;
            conj.mc_estimate = p_routing_success_mc(p.p_l, p.p_js, options.trials, options.seed);
            conj.mc_half_width =
                1.96 * std::sqrt(conj.value * (1.0 - conj.value) / static_cast<double>(options.trials));
        }
        emit(out, literal);
        emit(out, conj);
    }

    if (wanted("expected_ratios")) {
        const std::string params = "p_s=" + fmt(p.p_s) + ";e_l=" + fmt(p.e_l) +
                                   ";k=" + fmt(p.k) + ";k_hat=" + fmt(p.k_hat);
        AnalyticRow s;
        s.formula = "expected_success_ratio";
        s.variant = "closed";
        s.params = params;
        s.value = expected_success_ratio(p.p_s, p.e_l, p.k, p.k_hat);
        emit(out, s);
        AnalyticRow f;
        f.formula = "expected_failure_ratio";
        f.variant = "closed";
        f.params = params;
        f.value = expected_failure_ratio(p.p_s, p.e_l, p.k, p.k_hat);
        emit(out, f);
    }

    if (wanted("routing_cost")) {
        const auto cost = routing_cost(p);
        const std::string params = "q=" + fmt(p.q) + ";z=" + fmt(p.z) + ";e_l=" + fmt(p.e_l) +
                                   ";k=" + fmt(p.k) + ";k_hat=" + fmt(p.k_hat);
        AnalyticRow rf;
        rf.formula = "routing_cost_c_rf";
        rf.variant = "closed";
        rf.params = params;
        rf.value = cost.c_rf;
        emit(out, rf);
        AnalyticRow rs = rf;
        rs.formula = "routing_cost_c_rs";
        rs.value = cost.c_rs;
        emit(out, rs);
        AnalyticRow cr = rf;
        cr.formula = "routing_cost_c_r";
        cr.variant = "product";
        cr.value = cost.c_r;
        emit(out, cr);
        if (cost.alt_defined) {
            AnalyticRow alt = rf;
            alt.formula = "routing_cost_c_r";
            alt.variant = "ratio";
            alt.value = cost.c_r_alt;
            emit(out, alt);
        } else {
            AnalyticRow alt = rf;
            alt.formula = "routing_cost_c_r";
            alt.variant = "ratio-undefined";
            alt.value = std::nan("");
            emit(out, alt);
        }
    }

    if (wanted("p_janitor_route")) {
        const double p_b = p_route_broken(p.mu, p.lambda_rate);
        const std::string params = "p_b=" + fmt(p_b) + ";e_n=" + fmt(p.e_n);
        AnalyticRow literal;
        literal.formula = "p_janitor_route";
        literal.variant = "literal";
        literal.params = params;
        literal.value = p_janitor_route(p_b, p.e_n, JanitorRouteVariant::Literal);
        emit(out, literal);
        AnalyticRow atleast = literal;
        atleast.variant = "at-least-one";
        atleast.value = p_janitor_route(p_b, p.e_n, JanitorRouteVariant::AtLeastOne);
        if (options.with_mc) {
            atleast.has_mc = true;
            atleast.mc_estimate = p_janitor_route_mc(
                p_b, static_cast<std::uint32_t>(p.e_n), options.trials, options.seed);
            atleast.mc_half_width = 1.96 * std::sqrt(atleast.value * (1.0 - atleast.value) /
                                                     static_cast<double>(options.trials));
        }
        emit(out, atleast);
    }

    if (wanted("binomial_janitor_count")) {
        const double p_b = p_route_broken(p.mu, p.lambda_rate);
        const double tau = std::pow(1.0 - p_b, 3.0);
        const auto e_n = static_cast<std::uint32_t>(p.e_n);
        for (std::uint32_t k = 0; k <= e_n; ++k) {
            AnalyticRow row;
            row.formula = "binomial_janitor_count";
            row.variant = "k=" + std::to_string(k);
            row.params = "e_n=" + std::to_string(e_n) + ";tau=" + fmt(tau);
            row.value = binomial_janitor_count(e_n, tau, k);
            emit(out, row);
        }
    }

    if (wanted("p_discovery_success")) {
        const auto d = p_discovery_success(p.p_0, p.k_cap, p.e_n);
        const std::string params =
            "p_0=" + fmt(p.p_0) + ";k_cap=" + fmt(p.k_cap) + ";e_n=" + fmt(p.e_n);
        AnalyticRow f0;
        f0.formula = "p_discovery_success";
        f0.variant = "p_f0";
        f0.params = params;
        f0.value = d.p_f0;
        emit(out, f0);
        AnalyticRow f1 = f0;
        f1.variant = "p_f1";
        f1.value = d.p_f1;
        emit(out, f1);
        AnalyticRow pr = f0;
        pr.variant = "p_r";
        pr.value = d.p_r;
        if (options.with_mc) {
            pr.has_mc = true;
            pr.mc_estimate = p_discovery_success_mc(p.p_0, static_cast<std::uint32_t>(p.k_cap),
                                                    static_cast<std::uint32_t>(p.e_n),
                                                    options.trials, options.seed);
            pr.mc_half_width = 1.96 * std::sqrt(pr.value * (1.0 - pr.value) /
                                                static_cast<double>(options.trials));
        }
        emit(out, pr);
    }

    if (wanted("p_packet_success")) {
        const double p_b = p_route_broken(p.mu, p.lambda_rate);
        PacketSuccessInput in;
        in.per_link_failure = p_b;
        in.e_l = p.e_l;
        in.recovery_success = p_discovery_success(p.p_0, p.k_cap, p.e_n).p_r;
        const std::string params = "per_link_failure=" + fmt(in.per_link_failure) +
                                   ";e_l=" + fmt(in.e_l) +
                                   ";recovery=" + fmt(in.recovery_success);
        const auto mc = p_packet_success_mc(
            in, options.with_mc ? options.trials : std::max<std::uint64_t>(options.trials, 1000),
            options.seed);
        AnalyticRow row;
        row.formula = "p_packet_success";
        row.variant = "monte-carlo";
        row.params = params;
        row.value = p_packet_success_closed(in);
        row.has_mc = true;
        row.mc_estimate = mc.estimate;
        row.mc_half_width = mc.half_width;
        emit(out, row);
    }
}

} // namespace jbrsim::harness
