#include <catch2/catch_amalgamated.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adsim/boat.hpp"
#include "adsim/probe.hpp"
#include "adsim/racing.hpp"
#include "adsim/verifier.hpp"

using namespace adsim;

namespace {

std::vector<std::string> transfers_of(const Trace& tr, const std::string& agent) {
    std::vector<std::string> out;
    for (const auto& e : tr.events)
        if (e.kind == EventKind::Transfer && e.agent == agent)
            out.push_back(e.data.at("to").get<std::string>());
    return out;
}

bool saw_timelimit_exit(const Trace& tr, const std::string& agent) {
    for (const auto& e : tr.events) {
        if (e.kind != EventKind::Actuate || e.agent != agent) continue;
        if (!e.data.contains("orders")) continue;
        for (const auto& oe : e.data["orders"])
            if (oe.value("reason", "") == "timelimit") return true;
    }
    return false;
}

std::string chicane_branch(const std::vector<std::string>& transfers) {
    for (const auto& t : transfers)
        if (t.rfind("(Ch", 0) == 0) return t;
    return "";
}

}  // namespace

TEST_CASE("racing: derived margins hold and bad setups are refused") {
    RacingParams p;
    RacingDerived d = racing_derived(p);
    CHECK(d.brake_margin > 10.0);
    CHECK(d.catch_margin > 30.0);
    CHECK(d.wait_slack > 5.0);

    SECTION("braking must stay admissible") {
        RacingParams bad = p;
        bad.brake_rate = 40.0;
        CHECK_THROWS_AS(build_racing(bad, 1), ConfigError);
    }
    SECTION("track features must be ordered") {
        RacingParams bad = p;
        bad.chicane_end = bad.chicane_begin - 10.0;
        CHECK_THROWS_AS(build_racing(bad, 1), ConfigError);
    }
    SECTION("too much speed breaks the give-way braking rule") {
        RacingParams bad = p;
        bad.cruise = 200.0;
        CHECK_THROWS_AS(build_racing(bad, 1), ConfigError);
    }
    SECTION("a short time limit is flagged, not fatal") {
        RacingParams odd = p;
        odd.timelimit_s = 10.0;
        ScenarioSpec spec = build_racing(odd, 1);
        REQUIRE(spec.notes.size() == 1);
        CHECK(spec.notes.front().find("time limit") != std::string::npos);
    }
}

TEST_CASE("racing: a seeded two-car run is clean end to end") {
    RacingParams p;
    ScenarioSpec spec = build_racing(p, 7);
    Trace trace;
    RunReport rep = run_scenario(spec, 7, &trace);

    INFO((rep.violations.empty() ? std::string("no violations")
                                 : rep.violations.front()));
    CHECK(rep.violations.empty());
    CHECK(rep.all_finished);
    CHECK(rep.success);
    REQUIRE(rep.final_truth.size() == 4);
    CHECK(rep.final_truth[0] > 940.0);
    CHECK(rep.final_truth[2] > 940.0);
    CHECK(rep.final_truth[1] < 5.0);
    CHECK(rep.final_truth[3] < 5.0);

    auto t1 = transfers_of(trace, "car1");
    auto t2 = transfers_of(trace, "car2");
    REQUIRE(t1.size() == 8);
    REQUIRE(t2.size() == 6);
    CHECK(t1.front() == "(Str,1)");
    CHECK(t1.back() == "(End,1)");
    CHECK(t2.front() == "(Str,1)");
    CHECK(t2.back() == "(End,1)");
    CHECK(chicane_branch(t1) != "");
    CHECK(chicane_branch(t2) != "");

    CHECK(audit_encapsulation(trace).empty());
}

TEST_CASE("racing: the same seed replays the same trace") {
    RacingParams p;
    auto render = [&](std::uint64_t seed) {
        ScenarioSpec spec = build_racing(p, seed);
        Trace trace;
        run_scenario(spec, seed, &trace);
        std::ostringstream os;
        write_jsonl(trace, os);
        return os.str();
    };
    std::string a = render(3), b = render(3), c = render(4);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("racing: seeds exercise every chicane branch without violations") {
    RacingParams p;
    std::set<std::string> car1_branches, car2_branches;
    bool timelimit_seen = false;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        ScenarioSpec spec = build_racing(p, seed);
        Trace trace;
        RunReport rep = run_scenario(spec, seed, &trace);
        INFO("seed " << seed << ": "
                     << (rep.violations.empty() ? "clean" : rep.violations.front()));
        REQUIRE(rep.violations.empty());
        REQUIRE(rep.all_finished);
        REQUIRE(rep.success);
        car1_branches.insert(chicane_branch(transfers_of(trace, "car1")));
        car2_branches.insert(chicane_branch(transfers_of(trace, "car2")));
        timelimit_seen = timelimit_seen || saw_timelimit_exit(trace, "car1");
    }
    // Car 2 launches ahead, so car 1 meets traffic ahead of it (race through
    // or give way) and car 2 meets traffic behind it (mirrored).
    CHECK(car1_branches.count("(Ch.rt,1)") == 1);
    CHECK(car1_branches.count("(Ch.gw,1)") == 1);
    CHECK(car2_branches.count("(Ch.gw,1)") == 1);
    CHECK(car2_branches.count("(Ch.rt,2)") == 1);
    CHECK(timelimit_seen);
}

TEST_CASE("racing: both cars' strategy tables verify") {
    RacingParams p;
    for (int car = 0; car < 2; ++car) {
        ModeTable table = racing_table(p, car);
        double margin = 2.0 * p.epsilon;
        std::map<TripleId, bool> complete;
        for (const auto& tri : table.triples) {
            GridSpec grid = verification_grid(table, tri.id, 0.5);
            auto rep = completeness_at(table, tri.id, grid, margin, margin);
            INFO("car " << car + 1 << " vertex " << tri.id.str() << " ("
                        << grid.total() << " points)");
            if (!rep.complete && rep.compat.unsound_witness)
                INFO("unsound: " << rep.compat.unsound_witness->what);
            if (!rep.complete && rep.compat.uncovered_witness)
                INFO("uncovered: " << rep.compat.uncovered_witness->what);
            REQUIRE(rep.complete);
            complete[tri.id] = rep.complete;
        }
        StrategyGraph g = build_strategy_graph(
            table, [&](const TripleId& id) { return complete.at(id); });
        VerifyReport vr = verify_strategy(g);
        CHECK(vr.verified);
    }
}

TEST_CASE("boat: the staircase protects the west approach") {
    BoatParams p;
    std::uint64_t seed = 100;
    for (double x0 : {-80.0, -60.0, -40.0}) {
        for (double y0 : {-20.0, -12.0, -4.0, 0.0, 4.0, 12.0, 20.0}) {
            BoatParams q = p;
            q.start_x = x0;
            q.start_y = y0;
            seed += 1;
            ScenarioSpec spec = build_boat(q, seed);
            RunReport rep = run_scenario(spec, seed);
            INFO("start (" << x0 << ", " << y0 << "): "
                           << (rep.violations.empty() ? "clean"
                                                      : rep.violations.front()));
            REQUIRE(rep.violations.empty());
            REQUIRE(rep.success);
        }
    }
}

TEST_CASE("boat: the lethal pocket strikes under any admissible control") {
    BoatParams p;
    int idx = 0;
    for (auto [x0, y0] : {std::pair{-12.4, -0.9}, {-11.6, 0.0}, {-10.9, 0.9}}) {
        BoatParams q = p;
        q.start_x = x0;
        q.start_y = y0;
        ScenarioSpec spec = build_boat(q, 500 + static_cast<std::uint64_t>(idx++));
        RunReport rep = run_scenario(spec, 500 + static_cast<std::uint64_t>(idx));
        INFO("start (" << x0 << ", " << y0 << ")");
        CHECK(rep.violation_counts["island-strike"] >= 1);
    }
}

TEST_CASE("boat: the corridor coin commits to one side per run") {
    BoatParams p;
    p.start_x = -60.0;
    p.start_y = 0.0;
    std::set<int> sides;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        ScenarioSpec spec = build_boat(p, seed);
        RunReport rep = run_scenario(spec, seed);
        REQUIRE(rep.violations.empty());
        REQUIRE(rep.success);
        sides.insert(rep.final_truth[1] > 0.0 ? 1 : -1);
    }
    CHECK(sides.size() == 2);
}

TEST_CASE("boat: impossible geometries are refused") {
    SECTION("a strong motor makes the lethal pocket escapable") {
        BoatParams p;
        p.motor = 3.0;
        CHECK_THROWS_AS(build_boat(p, 1), ConfigError);
    }
    SECTION("heavy drift erodes the staircase clearance") {
        BoatParams p;
        p.disturbance = 0.1;
        CHECK_THROWS_AS(build_boat(p, 1), ConfigError);
    }
}

TEST_CASE("probe: the boost mission runs clean and transfers once") {
    ProbeParams p;
    ScenarioSpec spec = build_probe(p, 5);
    Trace trace;
    RunReport rep = run_scenario(spec, 5, &trace);
    INFO((rep.violations.empty() ? std::string("no violations")
                                 : rep.violations.front()));
    CHECK(rep.violations.empty());
    CHECK(rep.all_finished);
    CHECK(rep.success);
    auto t = transfers_of(trace, "probe");
    REQUIRE(t.size() == 1);
    CHECK(t.front() == "(Escape,1)");
    // Exactly the planned burn was spent.
    CHECK(rep.final_truth[6] ==
          Catch::Approx(p.fuel0 - p.burn_k * p.thrust * p.burn_s).margin(1e-9));
    CHECK(audit_encapsulation(trace).empty());
}

TEST_CASE("probe: fuel integration is exact") {
    ProbeParams p;
    TruthPlant plant = probe_plant(p);
    double v0 = std::sqrt(p.mu / p.orbit_r);
    Vec x0{p.orbit_r, 0.0, 0.0, 0.0, v0, 0.0, p.fuel0};

    SECTION("coasting leaves fuel untouched to the bit") {
        TruthSession truth(plant, x0, 0.0, p.fine_dt, 9);
        truth.advance_to(10.0);
        for (const Vec& s : truth.trajectory().states) CHECK(s[6] == p.fuel0);
    }
    SECTION("a constant burn drains at exactly the commanded rate") {
        TruthSession truth(plant, x0, 0.0, p.fine_dt, 9);
        truth.set_control(Vec{0.0, p.thrust, 0.0});
        truth.advance_to(10.0);
        double rate = p.burn_k * p.thrust;
        CHECK(truth.state_at(10.0)[6] == Catch::Approx(p.fuel0 - rate * 10.0).margin(1e-12));
        const auto& traj = truth.trajectory();
        for (std::size_t k = 1; k < traj.states.size(); ++k) {
            double df = (traj.node(k)[6] - traj.node(k - 1)[6]) / p.fine_dt;
            CHECK(df == Catch::Approx(-rate).margin(1e-9));
        }
    }
    SECTION("thrust with an empty tank is inadmissible") {
        Vec empty = x0;
        empty[6] = 0.0;
        CHECK(plant.admissible(empty, Vec{0.0, 1.0, 0.0}).has_value());
        CHECK_FALSE(plant.admissible(empty, Vec{0.0, 0.0, 0.0}).has_value());
    }
    SECTION("over-strong burns are refused up front") {
        ProbeParams bad = p;
        bad.thrust = 5.0;
        CHECK_THROWS_AS(build_probe(bad, 1), ConfigError);
    }
}

TEST_CASE("scenario engine guard rails") {
    ScenarioSpec empty;
    empty.name = "empty";
    CHECK_THROWS_AS(run_scenario(empty, 1), ConfigError);

    RacingParams p;
    ScenarioSpec spec = build_racing(p, 1);
    spec.horizon_s = 0.0;
    CHECK_THROWS_AS(run_scenario(spec, 1), ConfigError);

    ScenarioSpec mixed = build_racing(p, 1);
    mixed.agents[1].oracle.lambda = 0.2;
    CHECK_THROWS_AS(run_scenario(mixed, 1), ConfigError);
}
