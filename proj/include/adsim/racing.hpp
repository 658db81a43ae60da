#pragma once

// Two-car track scenario. Both cars run the same lap protocol: launch, a
// speed-limited bend, a straight, a one-car chicane with a give-way protocol,
// a second bend, and a braking zone at the finish. The cars share the state
// (x1, v1, x2, v2) with positions in metres and speeds in km/h; each car
// controls one acceleration entry (km/h per second).
//
// The chicane decision is taken from measured joint state inside a decision
// band: race through when the other car is far ahead (it will have cleared the
// chicane) or far behind (it cannot reach it first), give way otherwise. A
// giving-way car halts short of the chicane and waits until it has measured
// the other car beyond the chicane exit. Only car 1's wait carries a time
// limit; the asymmetry breaks the mutual give-way deadlock, and because car 2
// keeps waiting while car 1 passes, the break never puts both cars in the
// chicane together.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsim/engine.hpp"
#include "adsim/geometry.hpp"
#include "adsim/orders.hpp"
#include "adsim/rng.hpp"

namespace adsim {

struct RacingParams {
    double epsilon = 1.0;          // sensor error bound (joint-state metric)
    double lambda = 0.1;           // measurement period, seconds
    double fine_dt = 0.01;         // truth integration step
    double horizon_s = 100.0;
    double cruise = 100.0;         // straight-line target, km/h
    double bend_speed = 75.0;      // bend target, km/h
    double ramp_s = 5.0;           // cruise ramp duration
    double bend_ramp_s = 2.0;      // slow-down ramp duration
    double brake_rate = 28.8;      // service braking, km/h per second (8 m/s^2)
    double accel_max = 30.0;       // admissible |acceleration|, km/h per second
    double overspeed_limit = 82.0; // measured bend speed that counts as a breach
    double timelimit_s = 30.0;     // car 1's give-way wait limit
    double chicane_begin = 450.0;
    double chicane_end = 500.0;
    double bend1_begin = 200.0;    // monitored speed-limit bands
    double bend1_end = 252.0;
    double bend2_begin = 700.0;
    double bend2_end = 752.0;
    double start_spread = 200.0;   // car 2 launches anywhere in [0, start_spread]
    double disturbance = 0.2;      // speed kick amplitude, km/h per second
    double track_length = 1000.0;
};

// Safety margins implied by the parameters. All three must be positive for
// the protocol argument to go through; the builder refuses configurations
// where they are not.
struct RacingDerived {
    // Giving way: from the worst decision point, at the worst overshoot speed,
    // plus one reaction period, braking still halts short of the chicane.
    double brake_margin = 0.0;
    // Racing through with the other car behind: by the time this car has
    // cleared the chicane exit, the other car is still short of the entry.
    double catch_margin = 0.0;
    // A waiting car sees normal traffic clear the chicane well inside the
    // time limit; the limit only ever fires on a genuine mutual stand-off.
    double wait_slack = 0.0;
};

namespace racing_detail {

struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

// Decision-band and zone anchors along the track, shared by both cars.
struct Lines {
    double dec_lo = 330.0, dec_hi = 375.0;      // chicane pre band
    double chi_lo = 335.0, chi_hi = 370.0;      // chicane decision band
    double far_ahead = 510.0;                    // other beyond: race through
    double behind = 190.0;                       // other below: race through
    double gw_lo = 180.0, gw_hi = 520.0;         // otherwise: give way
    double cleared = 502.0;                      // chicane counts as cleared
};

constexpr double kGrow = 2.5;  // band growth per zone tier (2 eps + slack)

}  // namespace racing_detail

inline RacingDerived racing_derived(const RacingParams& p) {
    racing_detail::Lines L;
    RacingDerived d;
    double v_worst = p.cruise + 3.0;  // hold band + sensor error, km/h
    double v_worst_mps = v_worst / 3.6;
    double brake_mps2 = p.brake_rate / 3.6;
    double react = p.lambda * v_worst_mps;  // one period before brakes bite
    double stop = v_worst_mps * v_worst_mps / (2.0 * brake_mps2);
    double halt_at = L.dec_hi + p.epsilon + react + stop;
    d.brake_margin = p.chicane_begin - 1.0 - halt_at;

    double clear_line = L.cleared + p.epsilon + 2.0;  // measured-crossing slack
    double v_self_min = 85.0 / 3.6;  // still ramping up at the decision
    double t_clear = (clear_line - L.chi_lo) / v_self_min;
    double other_reach = L.behind + p.epsilon + t_clear * v_worst_mps;
    d.catch_margin = p.chicane_begin - 1.0 - other_reach;

    double v_traffic = p.bend_speed / 3.6;  // slowest normal through-speed
    double t_traffic = (clear_line - L.gw_lo) / v_traffic;
    d.wait_slack = p.timelimit_s - t_traffic;
    return d;
}

namespace racing_detail {

// Per-car axis mapping into the joint state (x1, v1, x2, v2).
struct CarAxes {
    std::size_t own_x, own_v, oth_x, oth_v;
};

inline CarAxes axes_for(int car) {
    return car == 0 ? CarAxes{0, 1, 2, 3} : CarAxes{2, 3, 0, 1};
}

// Zone tiers: targets of a selection are the widest, supports sit strictly
// inside them, and detection bands sit strictly inside supports. Unconstrained
// axes fall back to the tier extent so the containment margins survive at the
// edges of the reachable range.
enum class Tier { Post, Chi, Pre };

inline Zone box4(const RacingParams& p, Tier tier, CarAxes a, Band own_x,
                 std::optional<Band> own_v, std::optional<Band> oth_x,
                 std::optional<Band> oth_v) {
    double g = tier == Tier::Post ? 5.0 : tier == Tier::Chi ? 10.0 : 15.0;
    Band x_full{-g, p.track_length + g};
    Band v_full{-g, 200.0 + g};
    Vec lo(4, 0.0), hi(4, 0.0);
    auto put = [&](std::size_t axis, Band b) {
        lo[axis] = b.lo;
        hi[axis] = b.hi;
    };
    put(a.own_x, own_x);
    put(a.own_v, own_v.value_or(v_full));
    put(a.oth_x, oth_x.value_or(x_full));
    put(a.oth_v, oth_v.value_or(v_full));
    return Zone::box(lo, hi);
}

inline Band grow(Band b) { return Band{b.lo - kGrow, b.hi + kGrow}; }

inline Condition at_least(std::size_t axis, double v) {
    return Condition::axis_at_least(axis, v);
}

}  // namespace racing_detail

// Both cars' strategy tables have the same shape; only the axis roles, the
// launch zones, and the give-way time limit differ.
inline ModeTable racing_table(const RacingParams& p, int car) {
    using namespace racing_detail;
    CarAxes ax = axes_for(car);
    Lines L;

    ModeTable table;
    Vec chart_lo{-50.0, -20.0, -50.0, -20.0};
    Vec chart_hi{p.track_length + 100.0, 220.0, p.track_length + 100.0, 220.0};
    Zone chart = Zone::box(chart_lo, chart_hi);
    for (const char* m : {"Sta", "Str", "Ben", "Ch.rt", "Ch.gw", "End"}) {
        ModeSpec spec;
        spec.name = m;
        spec.chart = chart;
        spec.state_dim = 4;
        double a_max = p.accel_max;
        double brake = p.brake_rate;
        std::size_t own_v = ax.own_v;
        spec.controller = [own_v, a_max, brake](const Vec& s, const Command& cmd,
                                                double lambda) {
            double v = s[own_v];
            auto cap = [a_max](double a) { return std::clamp(a, -a_max, a_max); };
            switch (cmd.kind) {
                case Command::Kind::Coast: return Vec{0.0};
                case Command::Kind::SpeedRamp: return Vec{cap(cmd.rate)};
                case Command::Kind::SpeedHold:
                    return Vec{cap((cmd.target - v) / lambda)};
                case Command::Kind::Halt:
                    return Vec{v > brake * lambda ? -brake : cap(-v / lambda)};
                case Command::Kind::VectorSet: return Vec{cap(cmd.vector.at(0))};
            }
            return Vec{0.0};
        };
        table.modes.push_back(std::move(spec));
    }

    auto ramp = [&](double target, double secs) {
        return Instruction::set_target_speed(target, secs);
    };
    auto until_own = [&](double x) {
        return Instruction::repeat_until(at_least(ax.own_x, x), {});
    };

    auto add = [&](Triple tri) { table.triples.push_back(std::move(tri)); };
    auto sel = [&](const TripleId& from, std::vector<SelectionFunction> s) {
        table.strategy.emplace(from, std::move(s));
    };

    const Band kDecision{L.chi_lo, L.chi_hi};
    const Band kDecisionPre{L.dec_lo, L.dec_hi};
    const Band kExitBand{502.0, 516.0};
    const Band kOtherAhead{500.0, p.track_length + 5.0};
    const Band kOtherShort{-5.0, p.chicane_begin};

    // Launch. Car 1 starts at the line; car 2 starts anywhere along the pit
    // stretch, which overlaps the first bend, so its launch ramp already obeys
    // the bend limit and its first waypoint band sits beyond every start.
    if (car == 0) {
        Triple sta;
        sta.id = {"Sta", 1};
        sta.is_start = true;
        sta.pre = box4(p, Tier::Pre, ax, Band{-2, 12}, Band{-5, 10}, {}, {});
        sta.orders = {"launch", {ramp(p.cruise, p.ramp_s)}};
        sta.post = box4(p, Tier::Post, ax, Band{15, 40}, {}, {}, {});
        add(sta);
        sel({"Sta", 1}, {{{"Str", 1},
                          box4(p, Tier::Chi, ax, grow(Band{15, 40}), {}, {}, {})}});

        Triple str1;
        str1.id = {"Str", 1};
        str1.pre = box4(p, Tier::Pre, ax, Band{10, 45}, {}, {}, {});
        str1.orders = {"first straight",
                       {ramp(p.cruise, p.ramp_s), until_own(130.0),
                        ramp(p.bend_speed, p.bend_ramp_s)}};
        str1.post = box4(p, Tier::Post, ax, Band{185, 198}, Band{-5, 79}, {}, {});
        add(str1);
        sel({"Str", 1}, {{{"Ben", 1},
                          box4(p, Tier::Chi, ax, grow(Band{185, 198}),
                               grow(Band{-5, 79}), {}, {})}});

        Triple ben1;
        ben1.id = {"Ben", 1};
        ben1.pre = box4(p, Tier::Pre, ax, Band{180, 203}, Band{-15, 84}, {}, {});
        ben1.orders = {"first bend",
                       {ramp(p.bend_speed, 0.2), until_own(p.bend1_end)}};
        ben1.post = box4(p, Tier::Post, ax, Band{252, 262}, Band{-5, 84}, {}, {});
        add(ben1);
        sel({"Ben", 1}, {{{"Str", 2},
                          box4(p, Tier::Chi, ax, grow(Band{252, 262}),
                               grow(Band{-5, 84}), {}, {})}});

        Triple str2;
        str2.id = {"Str", 2};
        str2.pre = box4(p, Tier::Pre, ax, Band{247, 267}, {}, {}, {});
        str2.orders = {"approach", {ramp(p.cruise, p.ramp_s), until_own(340.0)}};
        str2.post = box4(p, Tier::Post, ax, Band{340, 360}, {}, {}, {});
        add(str2);
    } else {
        Triple sta;
        sta.id = {"Sta", 1};
        sta.is_start = true;
        sta.pre = box4(p, Tier::Pre, ax, Band{-3, p.start_spread + 4}, Band{-5, 10},
                       {}, {});
        sta.orders = {"rolling launch", {ramp(p.bend_speed, p.ramp_s)}};
        sta.post = box4(p, Tier::Post, ax,
                        Band{p.start_spread + 8, p.start_spread + 28}, {}, {}, {});
        add(sta);
        sel({"Sta", 1},
            {{{"Str", 1},
              box4(p, Tier::Chi, ax,
                   grow(Band{p.start_spread + 8, p.start_spread + 28}), {}, {}, {})}});

        Triple str1;
        str1.id = {"Str", 1};
        str1.pre = box4(p, Tier::Pre, ax,
                        Band{p.start_spread + 3, p.start_spread + 33}, {}, {}, {});
        str1.orders = {"approach",
                       {ramp(p.bend_speed, 0.2), until_own(p.bend1_end),
                        ramp(p.cruise, p.ramp_s), until_own(340.0)}};
        str1.post = box4(p, Tier::Post, ax, Band{340, 360}, {}, {}, {});
        add(str1);
    }
    TripleId approach{"Str", car == 0 ? 2 : 1};

    // Chicane fork. Declaration order resolves the band overlaps: far-ahead
    // wins over give-way, give-way wins over far-behind.
    sel(approach,
        {{{"Ch.rt", 1},
          box4(p, Tier::Chi, ax, kDecision, {},
               Band{L.far_ahead, p.track_length + 10.0}, {})},
         {{"Ch.gw", 1},
          box4(p, Tier::Chi, ax, kDecision, {}, Band{L.gw_lo, L.gw_hi}, {})},
         {{"Ch.rt", 2},
          box4(p, Tier::Chi, ax, kDecision, {}, Band{-10.0, L.behind}, {})}});

    Triple rt1;
    rt1.id = {"Ch.rt", 1};
    rt1.pre = box4(p, Tier::Pre, ax, kDecisionPre, {},
                   Band{L.far_ahead - 5.0, p.track_length + 15.0}, {});
    rt1.orders = {"race through behind leader",
                  {ramp(p.cruise, p.ramp_s), until_own(L.cleared)}};
    rt1.post = box4(p, Tier::Post, ax, kExitBand, {}, kOtherAhead, {});
    add(rt1);

    Triple gw;
    gw.id = {"Ch.gw", 1};
    gw.pre = box4(p, Tier::Pre, ax, kDecisionPre, {},
                  Band{L.gw_lo - 5.0, L.gw_hi + 5.0}, {});
    std::optional<double> tl;
    if (car == 0) tl = p.timelimit_s;
    gw.orders = {"give way",
                 {Instruction::brake_to_halt(),
                  Instruction::repeat_until(at_least(ax.oth_x, L.cleared),
                                            {Instruction::wait(1.0)}, tl),
                  ramp(p.cruise, p.ramp_s), until_own(L.cleared)}};
    gw.post = Zone::any_of({box4(p, Tier::Post, ax, kExitBand, {}, kOtherShort, {}),
                            box4(p, Tier::Post, ax, kExitBand, {}, kOtherAhead, {})});
    add(gw);

    Triple rt2;
    rt2.id = {"Ch.rt", 2};
    rt2.pre = box4(p, Tier::Pre, ax, kDecisionPre, {}, Band{-15.0, L.behind + 5.0},
                   {});
    rt2.orders = {"race through ahead of follower",
                  {ramp(p.cruise, p.ramp_s), until_own(L.cleared)}};
    rt2.post = box4(p, Tier::Post, ax, kExitBand, {}, kOtherShort, {});
    add(rt2);

    std::vector<SelectionFunction> to_str3 = {
        {{"Str", 3}, box4(p, Tier::Chi, ax, grow(kExitBand), {}, {}, {})}};
    sel({"Ch.rt", 1}, to_str3);
    sel({"Ch.gw", 1}, to_str3);
    sel({"Ch.rt", 2}, to_str3);

    Triple str3;
    str3.id = {"Str", 3};
    str3.pre = box4(p, Tier::Pre, ax, Band{497, 521}, {}, {}, {});
    str3.orders = {"back straight",
                   {ramp(p.cruise, p.ramp_s), until_own(610.0),
                    ramp(p.bend_speed, p.bend_ramp_s)}};
    str3.post = box4(p, Tier::Post, ax, Band{685, 698}, Band{-5, 79}, {}, {});
    add(str3);
    sel({"Str", 3}, {{{"Ben", 2},
                      box4(p, Tier::Chi, ax, grow(Band{685, 698}),
                           grow(Band{-5, 79}), {}, {})}});

    Triple ben2;
    ben2.id = {"Ben", 2};
    ben2.pre = box4(p, Tier::Pre, ax, Band{680, 703}, Band{-15, 84}, {}, {});
    ben2.orders = {"second bend",
                   {ramp(p.bend_speed, 0.2), until_own(p.bend2_end)}};
    ben2.post = box4(p, Tier::Post, ax, Band{752, 762}, Band{-5, 84}, {}, {});
    add(ben2);
    sel({"Ben", 2}, {{{"Str", 4},
                      box4(p, Tier::Chi, ax, grow(Band{752, 762}),
                           grow(Band{-5, 84}), {}, {})}});

    Triple str4;
    str4.id = {"Str", 4};
    str4.pre = box4(p, Tier::Pre, ax, Band{747, 767}, {}, {}, {});
    str4.orders = {"final straight", {ramp(p.cruise, p.ramp_s), until_own(890.0)}};
    str4.post = box4(p, Tier::Post, ax, Band{890, 905}, {}, {}, {});
    add(str4);
    sel({"Str", 4}, {{{"End", 1},
                      box4(p, Tier::Chi, ax, grow(Band{890, 905}), {}, {}, {})}});

    Triple fin;
    fin.id = {"End", 1};
    fin.is_end = true;
    fin.pre = box4(p, Tier::Pre, ax, Band{885, 910}, {}, {}, {});
    fin.orders = {"run out and stop",
                  {until_own(920.0), Instruction::brake_to_halt()}};
    fin.post = box4(p, Tier::Post, ax, Band{940, p.track_length + 5.0},
                    Band{-5, 4.5}, {}, {});
    add(fin);

    return table;
}

inline TruthPlant racing_plant(const RacingParams& p) {
    TruthPlant plant;
    plant.state_dim = 4;
    plant.control_dim = 2;
    plant.drift = [](double, const Vec& x, Vec& dx) {
        dx[0] = x[1] / 3.6;
        dx[2] = x[3] / 3.6;
    };
    plant.control_term = [](double, const Vec&, const Vec& c, Vec& dx) {
        dx[1] += c[0];
        dx[3] += c[1];
    };
    double a_max = p.accel_max;
    plant.admissible = [a_max](const Vec&,
                               const Vec& c) -> std::optional<std::string> {
        for (double a : c)
            if (std::abs(a) > a_max + 1e-9)
                return "acceleration " + std::to_string(a) + " beyond " +
                       std::to_string(a_max) + " km/h/s";
        return std::nullopt;
    };
    plant.clamp = [](Vec& x) {
        x[1] = std::clamp(x[1], 0.0, 200.0);
        x[3] = std::clamp(x[3], 0.0, 200.0);
    };
    plant.disturbance_amplitude = Vec{0.0, p.disturbance, 0.0, p.disturbance};
    return plant;
}

inline ScenarioSpec build_racing(const RacingParams& p, std::uint64_t seed) {
    if (!(p.epsilon > 0) || !(p.lambda > 0) || !(p.fine_dt > 0))
        throw ConfigError("racing: epsilon, lambda and fine_dt must be positive");
    if (!(p.bend1_begin < p.bend1_end && p.bend1_end < p.chicane_begin &&
          p.chicane_begin < p.chicane_end && p.chicane_end < p.bend2_begin &&
          p.bend2_begin < p.bend2_end && p.bend2_end < p.track_length))
        throw ConfigError("racing: track features must be ordered along the lap");
    if (p.brake_rate > p.accel_max)
        throw ConfigError("racing: braking exceeds the admissible acceleration");
    RacingDerived d = racing_derived(p);
    if (d.brake_margin <= 0.0)
        throw ConfigError("racing: giving way cannot halt short of the chicane "
                          "(margin " + std::to_string(d.brake_margin) + " m)");
    if (d.catch_margin <= 0.0)
        throw ConfigError("racing: a follower could reach the chicane before it "
                          "is cleared (margin " + std::to_string(d.catch_margin) +
                          " m)");

    ScenarioSpec spec;
    spec.name = "racing";
    spec.coord_names = {"x1", "v1", "x2", "v2"};
    if (d.wait_slack <= 0.0)
        spec.notes.push_back(
            "give-way time limit is inside the normal clearing time (slack " +
            std::to_string(d.wait_slack) + " s); expect spurious limit exits");

    spec.plant = racing_plant(p);
    double x2_start = p.start_spread * Rng::derive(seed, 0x57A7u).uniform01();
    spec.x0 = Vec{0.0, 0.0, x2_start, 0.0};
    spec.fine_dt = p.fine_dt;
    spec.horizon_s = p.horizon_s;

    for (int car = 0; car < 2; ++car) {
        AgentSetup agent;
        agent.name = car == 0 ? "car1" : "car2";
        agent.oracle.lambda = p.lambda;
        agent.oracle.epsilon = p.epsilon;
        agent.oracle.agent_tag = static_cast<std::uint64_t>(car + 1);
        agent.table = racing_table(p, car);
        agent.start = {"Sta", 1};
        agent.control_offset = static_cast<std::size_t>(car);
        agent.speed_axis = car == 0 ? 1u : 3u;
        agent.halt_threshold = 0.5;
        spec.agents.push_back(std::move(agent));
    }

    // Chicane exclusivity is judged on ground truth at every fine node.
    double ch_lo = p.chicane_begin, ch_hi = p.chicane_end;
    spec.checks.push_back(
        {"chicane-exclusive",
         [ch_lo, ch_hi](const TruthSession& truth, double t_prev, double t_now,
                        const std::vector<StepReport>&) -> std::optional<std::string> {
             std::optional<std::string> hit;
             for_fine_nodes(truth, t_prev, t_now, [&](double t, const Vec& x) {
                 if (hit) return;
                 if (x[0] > ch_lo && x[0] < ch_hi && x[2] > ch_lo && x[2] < ch_hi)
                     hit = "both cars inside the chicane at t=" + std::to_string(t) +
                           " (x1=" + std::to_string(x[0]) +
                           ", x2=" + std::to_string(x[2]) + ")";
             });
             return hit;
         }});

    // Bend speed limits are judged on what the car itself can see: its own
    // measured position and speed.
    for (int car = 0; car < 2; ++car) {
        auto idx = static_cast<std::size_t>(car);
        double lim = p.overspeed_limit;
        double b1l = p.bend1_begin, b1h = p.bend1_end + 1.0;
        double b2l = p.bend2_begin, b2h = p.bend2_end + 1.0;
        std::size_t xi = car == 0 ? 0 : 2, vi = car == 0 ? 1 : 3;
        spec.checks.push_back(
            {std::string("overspeed-") + (car == 0 ? "car1" : "car2"),
             [idx, lim, b1l, b1h, b2l, b2h, xi, vi](
                 const TruthSession&, double, double,
                 const std::vector<StepReport>& reps) -> std::optional<std::string> {
                 if (reps.size() <= idx) return std::nullopt;
                 const Vec& m = reps[idx].measurement.value;
                 if (m.empty()) return std::nullopt;
                 bool in_bend = (m[xi] >= b1l && m[xi] <= b1h) ||
                                (m[xi] >= b2l && m[xi] <= b2h);
                 if (in_bend && m[vi] > lim)
                     return "measured " + std::to_string(m[vi]) + " km/h at x=" +
                            std::to_string(m[xi]);
                 return std::nullopt;
             }});
    }

    Vec e_lo{950.0, 0.0, 950.0, 0.0};
    Vec e_hi{995.0, 5.0, 995.0, 5.0};
    spec.success_zone = Zone::box(e_lo, e_hi);
    return spec;
}

}  // namespace adsim
