#include "jbrsim/config.hpp"
#include "jbrsim/errors.hpp"
#include "jbrsim/harness/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using jbrsim::ConfigError;
using jbrsim::ScenarioConfig;
namespace harness = jbrsim::harness;

ScenarioConfig build_config(const std::string& config_path,
                            const std::vector<std::string>& overrides) {
    ScenarioConfig cfg;
    if (!config_path.empty()) {
        cfg = jbrsim::load_scenario_file(config_path);
    }
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        }
        jbrsim::apply_scenario_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw ConfigError("cannot open output file: " + path);
    return file;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"janitor-based routing simulator and model evaluator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "scenario file (key=value lines)");
    app.add_option("--set", overrides, "override a scenario key, e.g. --set node_count=100");

    // run: one experiment, one CSV row
    auto* run_cmd = app.add_subcommand("run", "run a single experiment");
    std::string run_protocol = "jbr";
    std::string run_out;
    run_cmd->add_option("--protocol", run_protocol, "jbr or flood")->capture_default_str();
    run_cmd->add_option("--out", run_out, "output CSV path (default stdout)");

    // trace: one experiment with the event trace on stdout
    auto* trace_cmd = app.add_subcommand("trace", "run one experiment and print the event trace");
    std::string trace_protocol = "jbr";
    trace_cmd->add_option("--protocol", trace_protocol, "jbr or flood")->capture_default_str();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run a pause-time sweep");
    std::vector<double> pause_times{0.0, 30.0, 60.0, 120.0, 300.0, 600.0, 900.0};
    std::vector<std::uint32_t> node_counts{50, 100};
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::string> protocols{"jbr", "flood"};
    std::string sweep_out;
    std::string summary_out;
    sweep_cmd->add_option("--pause-times", pause_times, "pause times, seconds")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--nodes", node_counts, "node counts")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--seeds", seeds, "run seeds")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--protocols", protocols, "protocols to run")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "output CSV path (default stdout)");
    sweep_cmd->add_option("--summary-out", summary_out, "per-scenario mean/std CSV path");

    // analytic
    auto* analytic_cmd = app.add_subcommand("analytic", "evaluate the analytical model");
    std::vector<std::string> select{"all"};
    bool with_mc = false;
    std::uint64_t trials = 1'000'000;
    std::uint64_t mc_seed = 1;
    std::string analytic_out;
    jbrsim::analytic::AnalyticParams params;
    analytic_cmd->add_option("--select", select, "formulas to evaluate (or 'all')")
        ->delimiter(',')
        ->capture_default_str();
    analytic_cmd->add_flag("--mc", with_mc, "add Monte Carlo check columns");
    analytic_cmd->add_option("--trials", trials, "Monte Carlo trials")->capture_default_str();
    analytic_cmd->add_option("--seed", mc_seed, "Monte Carlo seed")->capture_default_str();
    analytic_cmd->add_option("--out", analytic_out, "output CSV path (default stdout)");
    analytic_cmd->add_option("--mu", params.mu, "location-change rate")->capture_default_str();
    analytic_cmd->add_option("--lambda", params.lambda_rate, "packet arrival rate")
        ->capture_default_str();
    analytic_cmd->add_option("--e-l", params.e_l, "expected route length")->capture_default_str();
    analytic_cmd->add_option("--e-n", params.e_n, "janitor count")->capture_default_str();
    analytic_cmd->add_option("--k", params.k, "hops before the janitor")->capture_default_str();
    analytic_cmd->add_option("--k-hat", params.k_hat, "hops after the janitor")
        ->capture_default_str();
    analytic_cmd->add_option("--k-cap", params.k_cap, "hop budget K")->capture_default_str();
    analytic_cmd->add_option("--p-l", params.p_l, "per-link success probability")
        ->capture_default_str();
    analytic_cmd->add_option("--p-js", params.p_js, "janitor route-find probability")
        ->capture_default_str();
    analytic_cmd->add_option("--p-0", params.p_0, "per-hop discovery success probability")
        ->capture_default_str();
    analytic_cmd->add_option("--p-s", params.p_s, "end-to-end success probability")
        ->capture_default_str();
    analytic_cmd->add_option("--q", params.q, "failure-cost weight")->capture_default_str();
    analytic_cmd->add_option("--z", params.z, "routing-cost scale")->capture_default_str();
    analytic_cmd->add_option("--c-ls", params.c_ls, "cost of a successful link transmission")
        ->capture_default_str();
    analytic_cmd->add_option("--c-lf", params.c_lf, "cost of a link failure")->capture_default_str();
    analytic_cmd->add_option("--c-qd", params.c_qd, "cost of a query drop")->capture_default_str();
    analytic_cmd->add_option("--c-ru", params.c_ru, "cost of route unsuccessful")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto cfg = build_config(config_path, overrides);
            const auto record =
                harness::run_experiment(cfg, harness::protocol_from_name(run_protocol));
            std::ofstream file;
            auto& out = open_or_stdout(file, run_out);
            out << harness::csv_header() << '\n' << harness::csv_row(record) << '\n';
        } else if (trace_cmd->parsed()) {
            const auto cfg = build_config(config_path, overrides);
            jbrsim::RunHooks hooks;
            hooks.trace = &std::cout;
            const auto record = harness::run_experiment(
                cfg, harness::protocol_from_name(trace_protocol), std::move(hooks));
            std::cerr << harness::csv_header() << '\n' << harness::csv_row(record) << '\n';
        } else if (sweep_cmd->parsed()) {
            const auto cfg = build_config(config_path, overrides);
            harness::SweepSpec spec;
            spec.pause_times = pause_times;
            spec.node_counts = node_counts;
            spec.seeds = seeds;
            for (const auto& name : protocols) {
                spec.protocols.push_back(harness::protocol_from_name(name));
            }
            const auto records = harness::run_sweep(spec, cfg);
            {
                std::ofstream file;
                auto& out = open_or_stdout(file, sweep_out);
                harness::write_csv(out, records);
            }
            if (!summary_out.empty()) {
                std::ofstream file;
                auto& out = open_or_stdout(file, summary_out);
                harness::write_summary_csv(out, records);
            }
        } else if (analytic_cmd->parsed()) {
            harness::AnalyticOptions options;
            options.select = select;
            options.with_mc = with_mc;
            options.trials = trials;
            options.seed = mc_seed;
            std::ofstream file;
            auto& out = open_or_stdout(file, analytic_out);
            harness::evaluate_analytics(out, params, options);
        }
    } catch (const jbrsim::InvariantViolation& e) {
        std::cerr << "internal invariant violation: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
