#pragma once

// Drifting-boat scenario. A boat is carried east at 1 m/s toward a circular
// island at the origin and can only thrust across the current (y axis). The
// west approach is covered by warning zones: two staircases of boxes that
// push the boat north or south along a 45-degree escape diagonal, a central
// corridor where a per-run coin commits the boat to one side, and a small
// lethal pocket just west of the island from which no admissible control can
// avoid a strike. The staircase east edges sit several metres east of every
// escape diagonal reachable from the start grid, so measurement error can
// only delay a climb step, never strand the boat.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsim/engine.hpp"
#include "adsim/geometry.hpp"
#include "adsim/rng.hpp"

namespace adsim {

struct BoatParams {
    double epsilon = 0.25;
    double lambda = 0.5;
    double fine_dt = 0.05;
    double horizon_s = 150.0;
    double island_r = 10.0;
    double flow = 1.0;        // eastward current, m/s
    double motor = 1.0;       // cross-thrust bound, m/s
    double disturbance = 0.01;
    double start_x = -60.0;
    double start_y = 2.0;
    double goal_x = 60.0;
};

struct BoatZones {
    std::vector<Zone> stair_north;  // in-zone action: thrust north
    std::vector<Zone> stair_south;  // thrust south
    Zone corridor;                  // coin-committed side
    Zone lethal;                    // no admissible escape exists
    double west = 0.0;
    double top = 0.0;  // staircase exit height, > island_r

    bool in_any(const std::vector<Zone>& zs, const Vec& x) const {
        for (const Zone& z : zs)
            if (zone_contains(z, x)) return true;
        return false;
    }
};

inline BoatZones boat_zones(const BoatParams& p) {
    BoatZones z;
    z.west = -130.0;
    z.top = p.island_r + 2.0;
    double east0 = -(2.0 * p.island_r + 4.0);  // east edge of the lowest step
    auto steps = static_cast<int>(std::ceil(z.top / 2.0));
    for (int k = 0; k < steps; ++k) {
        double y_lo = 2.0 * k;
        double e = east0 + 2.0 * k;
        z.stair_north.push_back(
            Zone::box(Vec{z.west, y_lo}, Vec{e, y_lo + 2.0}));
        z.stair_south.push_back(
            Zone::box(Vec{z.west, -(y_lo + 2.0)}, Vec{e, -y_lo}));
    }
    double corridor_east = -(2.0 * p.island_r + 16.0);
    z.corridor = Zone::box(Vec{z.west, -z.top}, Vec{corridor_east, z.top});
    z.lethal = Zone::box(Vec{-(p.island_r + 2.5), -1.0},
                         Vec{-(p.island_r + 0.8), 1.0});
    return z;
}

inline TruthPlant boat_plant(const BoatParams& p) {
    TruthPlant plant;
    plant.state_dim = 2;
    plant.control_dim = 1;
    double flow = p.flow;
    plant.drift = [flow](double, const Vec&, Vec& dx) { dx[0] = flow; };
    plant.control_term = [](double, const Vec&, const Vec& c, Vec& dx) {
        dx[1] += c[0];
    };
    double motor = p.motor;
    plant.admissible = [motor](const Vec&,
                               const Vec& c) -> std::optional<std::string> {
        if (std::abs(c[0]) > motor + 1e-9)
            return "cross-thrust " + std::to_string(c[0]) + " beyond " +
                   std::to_string(motor);
        return std::nullopt;
    };
    plant.disturbance_amplitude = Vec{p.disturbance, p.disturbance};
    return plant;
}

inline ScenarioSpec build_boat(const BoatParams& p, std::uint64_t seed) {
    if (!(p.epsilon > 0) || !(p.lambda > 0) || !(p.fine_dt > 0))
        throw ConfigError("boat: epsilon, lambda and fine_dt must be positive");
    if (p.flow <= 0 || p.motor <= 0)
        throw ConfigError("boat: flow and motor must be positive");
    BoatZones zones = boat_zones(p);

    // Lethal-pocket argument: by the time the current has carried the boat to
    // the x = -(r-2) plane, even full thrust cannot have lifted |y| to the
    // island's half-width there. Refuse geometries where that stops holding.
    {
        double travel = (p.island_r + 2.5) - (p.island_r - 2.0);
        double lift = 1.0 + (p.motor / p.flow) * travel +
                      p.disturbance * travel / p.flow;
        double need = std::sqrt(4.0 * p.island_r - 4.0);
        if (lift >= need)
            throw ConfigError("boat: lethal pocket is escapable (reach " +
                              std::to_string(lift) + " vs " +
                              std::to_string(need) + ")");
    }
    // Staircase exit must clear the island even under fully adverse drift.
    if (zones.top <= p.island_r + p.disturbance * p.horizon_s + 0.4)
        throw ConfigError("boat: staircase exit height cannot absorb drift");

    ScenarioSpec spec;
    spec.name = "boat";
    spec.coord_names = {"x", "y"};
    spec.plant = boat_plant(p);
    spec.x0 = Vec{p.start_x, p.start_y};
    spec.fine_dt = p.fine_dt;
    spec.horizon_s = p.horizon_s;

    bool coin_north = Rng::derive(seed, 0xB0A7u).uniform01() < 0.5;
    double motor = p.motor;

    ModeSpec mode;
    mode.name = "Voy";
    mode.chart = Zone::box(Vec{-150.0, -80.0}, Vec{250.0, 80.0});
    mode.state_dim = 2;
    mode.controller = [zones, coin_north, motor](const Vec& s, const Command&,
                                                 double) {
        if (zone_contains(zones.lethal, s)) return Vec{s[1] >= 0 ? motor : -motor};
        if (zone_contains(zones.corridor, s))
            return Vec{coin_north ? motor : -motor};
        if (zones.in_any(zones.stair_north, s)) return Vec{motor};
        if (zones.in_any(zones.stair_south, s)) return Vec{-motor};
        return Vec{0.0};
    };

    Triple voyage;
    voyage.id = {"Voy", 1};
    voyage.is_start = true;
    voyage.is_end = true;
    voyage.pre = Zone::box(Vec{zones.west - 1.0, -30.0},
                           Vec{-(p.island_r - 2.0), 30.0});
    voyage.orders = {"drift east", {}};
    voyage.post = Zone::box(Vec{p.goal_x, -70.0}, Vec{240.0, 70.0});

    ModeTable table;
    table.modes.push_back(std::move(mode));
    table.triples.push_back(std::move(voyage));

    AgentSetup agent;
    agent.name = "boat";
    agent.oracle.lambda = p.lambda;
    agent.oracle.epsilon = p.epsilon;
    agent.oracle.agent_tag = 1;
    agent.table = std::move(table);
    agent.start = {"Voy", 1};
    spec.agents.push_back(std::move(agent));

    double r2 = p.island_r * p.island_r;
    spec.checks.push_back(
        {"island-strike",
         [r2](const TruthSession& truth, double t_prev, double t_now,
              const std::vector<StepReport>&) -> std::optional<std::string> {
             std::optional<std::string> hit;
             for_fine_nodes(truth, t_prev, t_now, [&](double t, const Vec& x) {
                 if (hit) return;
                 if (x[0] * x[0] + x[1] * x[1] < r2)
                     hit = "aground at t=" + std::to_string(t) + " (x=" +
                           std::to_string(x[0]) + ", y=" + std::to_string(x[1]) +
                           ")";
             });
             return hit;
         }});

    spec.success_zone = Zone::box(Vec{p.goal_x, -75.0}, Vec{1000.0, 75.0});
    return spec;
}

}  // namespace adsim
