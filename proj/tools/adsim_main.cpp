// Command-line surface: run scenarios, verify strategy tables, check the
// one-window measurement property, export traces.
//
// Exit codes: 0 success, 1 the run/check/verification reported a negative
// result, 2 configuration or usage errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adsim/config.hpp"

namespace {

using namespace adsim;

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_opt,
            std::optional<double> horizon, const std::string& trace_path,
            bool quiet) {
    LoadedConfig cfg = load_scenario_file(config_path);
    if (!cfg.make_spec)
        throw ConfigError("config \"" + cfg.name + "\" declares no runnable scenario");
    std::uint64_t seed = seed_opt.value_or(cfg.default_seed);
    ScenarioSpec spec = cfg.make_spec(seed);
    if (horizon) {
        if (*horizon <= 0.0) throw ConfigError("--horizon must be positive");
        spec.horizon_s = *horizon;
    }
    if (!quiet)
        for (const auto& note : spec.notes) std::cout << "note: " << note << "\n";

    Trace trace;
    RunReport rep = run_scenario(spec, seed, &trace);

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw ConfigError("cannot open trace output: " + trace_path);
        write_jsonl(trace, out);
    }

    if (!quiet) {
        std::cout << "scenario " << spec.name << ", seed " << seed << ", "
                  << rep.steps << " steps\n";
        for (std::size_t i = 0; i < rep.agent_names.size(); ++i)
            std::cout << "  " << rep.agent_names[i] << ": "
                      << (rep.agent_finished[i] ? "reached end" : "did not finish")
                      << "\n";
        for (const auto& [name, count] : rep.violation_counts)
            std::cout << "  violation: " << name << " x" << count << "\n";
        std::cout << "final state: " << vec_to_string(rep.final_truth) << "\n";
    }
    bool ok = rep.all_finished && rep.success && rep.violations.empty();
    std::cout << (ok ? "run ok" : "run FAILED") << "\n";
    if (!ok && !quiet) {
        for (const auto& v : rep.violations) std::cout << "  " << v << "\n";
        if (!rep.success && rep.all_finished)
            std::cout << "  final state missed the goal zone\n";
    }
    return ok ? 0 : 1;
}

int cmd_verify(const std::string& config_path, std::optional<double> grid_density,
               const std::string& report_path, bool quiet) {
    LoadedConfig cfg = load_scenario_file(config_path);
    if (cfg.tables.empty())
        throw ConfigError("config \"" + cfg.name + "\" declares no strategy tables");
    VerifySettings vs = cfg.verify;
    if (grid_density) {
        if (*grid_density <= 0.0) throw ConfigError("--grid-density must be positive");
        vs.grid_step = *grid_density;
    }

    Json report{{"scenario", cfg.name},
                {"grid_step", vs.grid_step},
                {"sound_margin", vs.sound_margin},
                {"cover_margin", vs.cover_margin},
                {"tables", Json::array()}};
    bool all_ok = true;
    for (const auto& [name, table] : cfg.tables) {
        Json jt{{"name", name}, {"vertices", Json::array()}};
        std::map<TripleId, bool> complete;
        for (const auto& tri : table.triples) {
            CompletenessReport cr;
            if (tri.is_end) {
                cr.id = tri.id;
                cr.complete = true;
                cr.vacuous = true;
            } else {
                GridSpec grid = verification_grid(table, tri.id, vs.grid_step,
                                                  vs.cap_per_axis);
                cr = completeness_at(table, tri.id, grid, vs.sound_margin,
                                     vs.cover_margin);
            }
            complete[tri.id] = cr.complete;
            Json jv{{"id", tri.id.str()},
                    {"complete", cr.complete},
                    {"vacuous", cr.vacuous},
                    {"points_checked", cr.compat.points_checked}};
            std::string witness;
            if (cr.compat.unsound_witness) witness = cr.compat.unsound_witness->what;
            if (cr.compat.uncovered_witness)
                witness = cr.compat.uncovered_witness->what;
            if (!witness.empty()) jv["witness"] = witness;
            if (!quiet) {
                std::cout << "  " << tri.id.str() << ": "
                          << (cr.complete
                                  ? (cr.vacuous ? "complete (end)" : "complete")
                                  : "INCOMPLETE")
                          << "\n";
                if (!witness.empty()) std::cout << "    " << witness << "\n";
            }
            jt["vertices"].push_back(std::move(jv));
        }
        StrategyGraph graph = build_strategy_graph(
            table, [&](const TripleId& id) { return complete.at(id); });
        VerifyReport vr = verify_strategy(graph);
        jt["graph_verified"] = vr.verified;
        if (vr.counterexample) jt["counterexample"] = vr.counterexample->describe();
        report["tables"].push_back(std::move(jt));
        all_ok = all_ok && vr.verified;
        if (!quiet || !vr.verified) {
            std::cout << "table " << name << ": "
                      << (vr.verified ? "strategy verified" : "strategy FAILED")
                      << "\n";
            if (vr.counterexample)
                std::cout << "  " << vr.counterexample->describe() << "\n";
        }
    }
    report["verified"] = all_ok;
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw ConfigError("cannot open report output: " + report_path);
        out << report.dump(2) << "\n";
    }
    std::cout << (all_ok ? "verified" : "FAILED") << "\n";
    return all_ok ? 0 : 1;
}

int cmd_lee(const std::string& config_path, const std::string& mode,
            std::optional<double> lambda, std::optional<double> epsilon,
            std::optional<double> eta, std::optional<std::size_t> samples,
            std::optional<std::uint64_t> seed) {
    LoadedConfig cfg = load_scenario_file(config_path);
    if (cfg.lee.empty())
        throw ConfigError("config \"" + cfg.name + "\" declares no lee checks");
    const LeeSetup* chosen = nullptr;
    if (mode.empty()) {
        chosen = &cfg.lee.front();
    } else {
        for (const auto& l : cfg.lee)
            if (l.name == mode) chosen = &l;
        if (chosen == nullptr)
            throw ConfigError("no lee check named \"" + mode + "\" in " + cfg.name);
    }
    LeeCheck check = chosen->check;
    if (lambda) check.lambda = *lambda;
    if (epsilon) check.epsilon = *epsilon;
    if (eta) check.eta = *eta;
    if (samples) {
        if (*samples == 0) throw ConfigError("--samples must be positive");
        check.n_samples = *samples;
    }
    if (seed) check.seed = *seed;

    LeeReport rep = check_lee_property(check);
    std::cout << "check " << chosen->name << ": lambda=" << check.lambda
              << " epsilon=" << check.epsilon << " eta=" << check.eta
              << " samples=" << rep.n_samples << "\n";
    std::cout << "eta_observed = " << rep.eta_observed << "\n";
    if (rep.holds) {
        std::cout << "verdict: holds\n";
        return 0;
    }
    std::cout << "verdict: FAILS (worst divergence " << rep.eta_observed << " at t="
              << rep.worst_t << " from " << vec_to_string(rep.worst_start) << ")\n";
    return 1;
}

int cmd_trace_export(const std::string& in_path, const std::string& out_path,
                     const std::string& agent, const std::string& kind) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open trace: " + in_path);
    Trace trace = read_jsonl(in);
    std::optional<std::string> agent_filter;
    if (!agent.empty()) agent_filter = agent;
    std::optional<EventKind> kind_filter;
    if (!kind.empty()) kind_filter = event_kind_from(kind);
    if (out_path.empty() || out_path == "-") {
        write_csv(trace, std::cout, agent_filter, kind_filter);
        return 0;
    }
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open csv output: " + out_path);
    write_csv(trace, out, agent_filter, kind_filter);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"analogue-digital control scenarios: run, verify, check, export"};
    app.require_subcommand(1);

    std::string config_path, trace_path, report_path, mode, in_path, out_path;
    std::string agent, kind;
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon, grid_density, lambda, epsilon, eta;
    std::optional<std::size_t> samples;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario and report the outcome");
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--seed", seed, "run seed (default from config)");
    run->add_option("--horizon", horizon, "override the horizon, seconds");
    run->add_option("--trace", trace_path, "write the event trace (jsonl)");
    run->add_flag("--quiet", quiet, "only print the verdict");

    CLI::App* verify =
        app.add_subcommand("verify", "check strategy completeness and paths");
    verify->add_option("--config", config_path, "scenario config file")->required();
    verify->add_option("--grid-density", grid_density,
                       "sampling step for active axes");
    verify->add_option("--report", report_path, "write a JSON report");
    verify->add_flag("--quiet", quiet, "only print the verdict");

    CLI::App* lee =
        app.add_subcommand("lee", "empirical one-window property check");
    lee->add_option("--config", config_path, "scenario config file")->required();
    lee->add_option("--mode", mode, "which declared check to run (default: first)");
    lee->add_option("--lambda", lambda, "override the window length");
    lee->add_option("--epsilon", epsilon, "override the measurement error bound");
    lee->add_option("--eta", eta, "override the tube radius");
    lee->add_option("--samples", samples, "override the sample count");
    lee->add_option("--seed", seed, "override the sampling seed");

    CLI::App* exp = app.add_subcommand("trace-export", "convert a jsonl trace to CSV");
    exp->add_option("--in", in_path, "trace file (jsonl)")->required();
    exp->add_option("--out", out_path, "csv output (default: stdout)");
    exp->add_option("--agent", agent, "keep only this agent's events");
    exp->add_option("--kind", kind, "keep only this event kind");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, seed, horizon, trace_path, quiet);
        if (verify->parsed())
            return cmd_verify(config_path, grid_density, report_path, quiet);
        if (lee->parsed())
            return cmd_lee(config_path, mode, lambda, epsilon, eta, samples, seed);
        if (exp->parsed()) return cmd_trace_export(in_path, out_path, agent, kind);
    } catch (const adsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
