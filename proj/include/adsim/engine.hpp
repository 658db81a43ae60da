#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsim/common.hpp"
#include "adsim/modes.hpp"
#include "adsim/oracle.hpp"
#include "adsim/plant.hpp"
#include "adsim/trace.hpp"

namespace adsim {

// One supervised agent of a scenario: its sensor, its strategy tables, and
// where its control slice sits in the joint control vector.
struct AgentSetup {
    std::string name;
    OracleConfig oracle;  // seed is filled in per run
    ModeTable table;
    TripleId start;
    std::size_t control_offset = 0;
    std::optional<std::size_t> speed_axis;
    double halt_threshold = 0.5;
};

// Scenario-level safety monitor, polled once per measurement period with the
// truth span integrated since the previous poll and the agents' latest step
// reports. Returns a description while violated; reporting is edge-triggered,
// so a condition holding over consecutive steps counts as one violation.
struct ViolationCheck {
    std::string name;
    std::function<std::optional<std::string>(const TruthSession&, double t_prev,
                                             double t_now,
                                             const std::vector<StepReport>&)>
        fn;
};

struct ScenarioSpec {
    std::string name;
    TruthPlant plant;
    Vec x0;
    double t0 = 0.0;
    double fine_dt = 0.01;
    double horizon_s = 0.0;
    std::vector<AgentSetup> agents;
    std::vector<ViolationCheck> checks;
    std::optional<Zone> success_zone;  // judged on the true state at the horizon
    std::vector<std::string> notes;    // validation warnings from the builder
    std::vector<std::string> coord_names;  // state column names for trace exports
};

struct RunReport {
    std::size_t steps = 0;
    std::vector<std::string> agent_names;
    std::vector<bool> agent_finished;
    bool all_finished = false;
    Vec final_truth;
    bool success = false;
    std::vector<std::string> violations;
    std::map<std::string, std::size_t> violation_counts;
};

// Applies fn to every fine integration node with t_prev < t <= t_now.
template <class Fn>
void for_fine_nodes(const TruthSession& truth, double t_prev, double t_now, Fn&& fn) {
    const Trajectory& traj = truth.trajectory();
    double dt = traj.fine_dt;
    auto first = static_cast<std::size_t>(
        std::floor((t_prev - traj.t0) / dt + 1e-9)) + 1;
    auto last = static_cast<std::size_t>(std::llround((t_now - traj.t0) / dt));
    for (std::size_t k = first; k <= last && k < traj.states.size(); ++k)
        fn(traj.t0 + dt * static_cast<double>(k), traj.node(k));
}

// Lockstep multi-agent run: all agents share one ground truth and one
// measurement cadence. Per period every agent measures, interprets its
// orders, and actuates its own control slice; the slices are disjoint and the
// per-agent sensor noise is keyed independently, so agent order within a
// period does not affect the run. The run always spans the full horizon:
// finished agents keep holding their final command.
inline RunReport run_scenario(const ScenarioSpec& spec, std::uint64_t seed,
                              Trace* trace = nullptr) {
    if (spec.agents.empty()) throw ConfigError("scenario: no agents");
    double lambda = spec.agents.front().oracle.lambda;
    for (const auto& a : spec.agents)
        if (std::abs(a.oracle.lambda - lambda) > 1e-12)
            throw ConfigError("scenario: agents must share one measurement period");
    if (spec.horizon_s <= 0.0) throw ConfigError("scenario: horizon must be positive");

    if (trace != nullptr) {
        trace->scenario = spec.name;
        trace->seed = seed;
        trace->coords = spec.coord_names;
    }

    TruthSession truth(spec.plant, spec.x0, spec.t0, spec.fine_dt, seed);
    std::vector<std::unique_ptr<OracleSession>> oracles;
    std::vector<std::unique_ptr<ModeRuntime>> runtimes;
    for (const auto& a : spec.agents) {
        OracleConfig cfg = a.oracle;
        cfg.seed = seed;
        oracles.push_back(std::make_unique<OracleSession>(cfg, truth));
        AgentBinding binding;
        binding.name = a.name;
        binding.oracle = oracles.back().get();
        binding.control_offset = a.control_offset;
        binding.speed_axis = a.speed_axis;
        binding.halt_threshold = a.halt_threshold;
        runtimes.push_back(
            std::make_unique<ModeRuntime>(a.table, binding, a.start, trace));
    }

    RunReport rep;
    rep.steps = static_cast<std::size_t>(std::llround(spec.horizon_s / lambda));
    for (const auto& a : spec.agents) rep.agent_names.push_back(a.name);
    rep.agent_finished.assign(spec.agents.size(), false);

    std::vector<StepReport> reports(spec.agents.size());
    std::vector<bool> active(spec.checks.size(), false);
    auto poll_checks = [&](double t_prev, double t_now, std::size_t n) {
        for (std::size_t c = 0; c < spec.checks.size(); ++c) {
            auto msg = spec.checks[c].fn(truth, t_prev, t_now, reports);
            if (msg && !active[c]) {
                std::string line = spec.checks[c].name + " @ t=" +
                                   std::to_string(t_now) + ": " + *msg;
                rep.violations.push_back(line);
                rep.violation_counts[spec.checks[c].name] += 1;
                if (trace != nullptr) {
                    TraceEvent e;
                    e.step = n;
                    e.t = t_now;
                    e.agent = "monitor";
                    e.kind = EventKind::Violation;
                    e.data = Json{{"which", spec.checks[c].name}, {"detail", *msg}};
                    trace->append(std::move(e));
                }
            }
            active[c] = msg.has_value();
        }
    };

    for (std::size_t n = 0; n < rep.steps; ++n) {
        for (std::size_t i = 0; i < runtimes.size(); ++i) {
            reports[i] = runtimes[i]->step(n);
            rep.agent_finished[i] = reports[i].finished;
        }
        double t_now = spec.t0 + lambda * static_cast<double>(n);
        double t_prev = n == 0 ? spec.t0 : t_now - lambda;
        poll_checks(t_prev, t_now, n);
    }

    double t_end = spec.t0 + lambda * static_cast<double>(rep.steps);
    truth.advance_to(t_end);
    poll_checks(t_end - lambda, t_end, rep.steps);

    rep.all_finished = true;
    for (bool f : rep.agent_finished) rep.all_finished = rep.all_finished && f;
    rep.final_truth = truth.state_at(t_end);
    rep.success = rep.all_finished &&
                  (!spec.success_zone ||
                   zone_contains(*spec.success_zone, rep.final_truth, 0.0,
                                 spec.agents.front().table.metric));
    return rep;
}

}  // namespace adsim
