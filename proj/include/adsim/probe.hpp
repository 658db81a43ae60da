#pragma once

// Deep-space probe scenario. State is (position, velocity, fuel) in seven
// dimensions under an inverse-square central body. The probe coasts a fixed
// lead time on a circular orbit, burns prograde-ish for a fixed duration, and
// coasts out past an escape line. Fuel obeys dF/dt = -k |c|: it is constant
// to the bit during coast (the integrator sees an exactly zero derivative)
// and decreases at an exactly constant rate during a constant burn.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsim/engine.hpp"
#include "adsim/geometry.hpp"
#include "adsim/orders.hpp"

namespace adsim {

struct ProbeParams {
    double mu = 1000.0;       // gravitational parameter
    double planet_r = 10.0;
    double orbit_r = 100.0;
    double fuel0 = 100.0;
    double burn_k = 0.1;      // fuel burned per unit thrust-second
    double thrust = 2.0;      // burn acceleration along +y
    double coast_s = 20.0;
    double burn_s = 10.0;
    double thrust_max = 3.0;
    double epsilon = 0.05;
    double lambda = 0.2;
    double fine_dt = 0.02;
    double horizon_s = 40.0;
};

inline TruthPlant probe_plant(const ProbeParams& p) {
    TruthPlant plant;
    plant.state_dim = 7;
    plant.control_dim = 3;
    double mu = p.mu;
    plant.drift = [mu](double, const Vec& x, Vec& dx) {
        dx[0] = x[3];
        dx[1] = x[4];
        dx[2] = x[5];
        double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        double r = std::sqrt(r2);
        double pull = -mu / (r2 * r);
        dx[3] = pull * x[0];
        dx[4] = pull * x[1];
        dx[5] = pull * x[2];
    };
    double k = p.burn_k;
    plant.control_term = [k](double, const Vec&, const Vec& c, Vec& dx) {
        dx[3] += c[0];
        dx[4] += c[1];
        dx[5] += c[2];
        dx[6] -= k * std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    };
    double cmax = p.thrust_max;
    plant.admissible = [cmax](const Vec& x,
                              const Vec& c) -> std::optional<std::string> {
        double mag = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
        if (mag > cmax + 1e-9)
            return "thrust " + std::to_string(mag) + " beyond " +
                   std::to_string(cmax);
        if (mag > 1e-12 && x[6] <= 0.0) return "thrust without fuel";
        return std::nullopt;
    };
    return plant;
}

inline ScenarioSpec build_probe(const ProbeParams& p, std::uint64_t) {
    if (!(p.mu > 0) || !(p.orbit_r > p.planet_r))
        throw ConfigError("probe: need mu > 0 and an orbit above the surface");
    if (p.thrust > p.thrust_max)
        throw ConfigError("probe: planned burn exceeds the thrust bound");
    if (p.burn_k * p.thrust * p.burn_s >= p.fuel0)
        throw ConfigError("probe: planned burn exceeds the fuel load");

    ScenarioSpec spec;
    spec.name = "probe";
    spec.coord_names = {"px", "py", "pz", "vx", "vy", "vz", "fuel"};
    spec.plant = probe_plant(p);
    double v0 = std::sqrt(p.mu / p.orbit_r);
    spec.x0 = Vec{p.orbit_r, 0.0, 0.0, 0.0, v0, 0.0, p.fuel0};
    spec.fine_dt = p.fine_dt;
    spec.horizon_s = p.horizon_s;

    // Wide box on every axis except the one a zone actually constrains; the
    // tier grading keeps the verifier's containment margins clear of the
    // unconstrained edges.
    auto box7 = [](double grade, double y_lo, double y_hi) {
        Vec lo{-2000 - grade, y_lo, -50 - grade, -100 - grade, -100 - grade,
               -100 - grade, -60 - grade};
        Vec hi{2000 + grade, y_hi, 50 + grade, 100 + grade, 100 + grade,
               100 + grade, 220 + grade};
        return Zone::box(lo, hi);
    };

    double cmax = p.thrust_max;
    auto thruster = [cmax](const Vec&, const Command& cmd, double) {
        if (cmd.kind == Command::Kind::VectorSet) {
            Vec c = cmd.vector;
            c.resize(3, 0.0);
            for (double& v : c) v = std::clamp(v, -cmax, cmax);
            return c;
        }
        return Vec{0.0, 0.0, 0.0};
    };
    ModeTable table;
    for (const char* name : {"Orbit", "Escape"}) {
        ModeSpec mode;
        mode.name = name;
        mode.chart = box7(10.0, -2010.0, 2010.0);
        mode.state_dim = 7;
        mode.controller = thruster;
        table.modes.push_back(std::move(mode));
    }

    // The burn is timed: lead coast, ignition, a hold one period short of the
    // burn duration (ignition itself occupies the first period), cut-off.
    Triple orbit;
    orbit.id = {"Orbit", 1};
    orbit.is_start = true;
    orbit.pre = box7(1.5, -160.0, 180.0);
    orbit.orders = {"boost",
                    {Instruction::wait(p.coast_s),
                     Instruction::set_vector({0.0, p.thrust, 0.0}),
                     Instruction::wait(p.burn_s - p.lambda),
                     Instruction::set_vector({0.0, 0.0, 0.0})}};
    orbit.post = box7(0.5, 195.0, 240.0);

    Triple escape;
    escape.id = {"Escape", 1};
    escape.is_end = true;
    escape.pre = box7(1.5, 194.5, 240.5);
    escape.orders = {"coast out", {}};
    escape.post = box7(0.5, 300.0, 2000.0);

    table.triples.push_back(std::move(orbit));
    table.triples.push_back(std::move(escape));
    table.strategy.emplace(TripleId{"Orbit", 1},
                           std::vector<SelectionFunction>{
                               {{"Escape", 1}, box7(1.0, 194.75, 240.25)}});

    AgentSetup agent;
    agent.name = "probe";
    agent.oracle.lambda = p.lambda;
    agent.oracle.epsilon = p.epsilon;
    agent.oracle.agent_tag = 1;
    agent.table = std::move(table);
    agent.start = {"Orbit", 1};
    spec.agents.push_back(std::move(agent));

    double pr2 = p.planet_r * p.planet_r;
    spec.checks.push_back(
        {"planet-strike",
         [pr2](const TruthSession& truth, double t_prev, double t_now,
               const std::vector<StepReport>&) -> std::optional<std::string> {
             std::optional<std::string> hit;
             for_fine_nodes(truth, t_prev, t_now, [&](double t, const Vec& x) {
                 if (hit) return;
                 if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < pr2)
                     hit = "below the surface at t=" + std::to_string(t);
             });
             return hit;
         }});
    spec.checks.push_back(
        {"fuel-nonnegative",
         [](const TruthSession& truth, double t_prev, double t_now,
            const std::vector<StepReport>&) -> std::optional<std::string> {
             std::optional<std::string> hit;
             for_fine_nodes(truth, t_prev, t_now, [&](double t, const Vec& x) {
                 if (!hit && x[6] < -1e-9)
                     hit = "fuel " + std::to_string(x[6]) + " at t=" +
                           std::to_string(t);
             });
             return hit;
         }});
    spec.checks.push_back(
        {"fuel-monotone",
         [prev = std::make_shared<double>(p.fuel0)](
             const TruthSession& truth, double t_prev, double t_now,
             const std::vector<StepReport>&) -> std::optional<std::string> {
             std::optional<std::string> hit;
             for_fine_nodes(truth, t_prev, t_now, [&](double t, const Vec& x) {
                 if (!hit && x[6] > *prev + 1e-9)
                     hit = "fuel rose to " + std::to_string(x[6]) + " at t=" +
                           std::to_string(t);
                 *prev = x[6];
             });
             return hit;
         }});

    Vec s_lo{-2000.0, 295.0, -50.0, -100.0, -100.0, -100.0, 0.0};
    Vec s_hi{2000.0, 2000.0, 50.0, 100.0, 100.0, 100.0, 200.0};
    spec.success_zone = Zone::box(s_lo, s_hi);
    return spec;
}

}  // namespace adsim
