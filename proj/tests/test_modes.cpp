#include <algorithm>
#include <optional>

#include <catch2/catch_amalgamated.hpp>

#include "adsim/modes.hpp"

using namespace adsim;

namespace {

// 1-D cart: state (x, v), control (a), |a| <= 50
TruthPlant cart_plant() {
    TruthPlant p;
    p.state_dim = 2;
    p.control_dim = 1;
    p.drift = [](double, const Vec& x, Vec& dx) { dx[0] = x[1]; };
    p.control_term = [](double, const Vec&, const Vec& u, Vec& dx) { dx[1] += u[0]; };
    p.admissible = [](const Vec&, const Vec& u) -> std::optional<std::string> {
        if (std::abs(u[0]) > 50.0) return "acceleration out of range";
        return std::nullopt;
    };
    return p;
}

Vec cart_controller(const Vec& s, const Command& cmd, double lambda) {
    double v = s[1];
    auto cap = [](double a) { return std::clamp(a, -50.0, 50.0); };
    switch (cmd.kind) {
        case Command::Kind::Coast: return {0.0};
        case Command::Kind::SpeedRamp: return {cap(cmd.rate)};
        case Command::Kind::SpeedHold: return {cap((cmd.target - v) / lambda)};
        case Command::Kind::Halt:
            return {v > 0.2 ? -2.0 : cap((0.0 - v) / lambda)};
        case Command::Kind::VectorSet: return {cmd.vector.at(0)};
    }
    return {0.0};
}

OracleConfig cart_oracle_cfg(std::uint64_t seed, std::uint64_t tag = 1) {
    OracleConfig cfg;
    cfg.epsilon = 0.05;
    cfg.lambda = 0.1;
    cfg.seed = seed;
    cfg.agent_tag = tag;
    return cfg;
}

ModeSpec make_mode(const std::string& name) {
    ModeSpec m;
    m.name = name;
    m.chart = Zone::box({-10.0, -10.0}, {10.0, 10.0});
    m.state_dim = 2;
    m.controller = cart_controller;
    return m;
}

// (Go,1): ramp to v=1, hand off around x=1; (Go,2): brake to a stop
ModeTable two_triple_table() {
    ModeTable t;
    t.modes = {make_mode("Go"), make_mode("Turbo")};
    Triple a;
    a.id = {"Go", 1};
    a.pre = Zone::box({-0.5, -0.5}, {0.5, 0.5});
    a.orders = {"speed-up", {Instruction::set_target_speed(1.0, 0.5)}};
    a.post = Zone::box({0.8, -2.0}, {1.2, 2.0});
    a.is_start = true;
    Triple b;
    b.id = {"Go", 2};
    b.pre = Zone::box({0.7, -2.0}, {3.5, 2.0});
    b.orders = {"stop", {Instruction::brake_to_halt()}};
    b.post = Zone::box({0.7, -0.2}, {3.5, 0.2});
    b.is_end = true;
    t.triples = {a, b};
    t.strategy[{"Go", 1}] = {
        {TripleId{"Go", 2}, Zone::box({0.9, -2.0}, {1.4, 2.0})}};
    return t;
}

AgentBinding cart_binding(OracleSession& oracle) {
    AgentBinding b;
    b.name = "cart";
    b.oracle = &oracle;
    b.control_offset = 0;
    b.speed_axis = 1;
    b.halt_threshold = 0.1;
    return b;
}

std::size_t count_kind(const Trace& tr, EventKind k) {
    std::size_t c = 0;
    for (const auto& e : tr.events)
        if (e.kind == k) ++c;
    return c;
}

}  // namespace

TEST_CASE("runtime walks a two-triple chain, transfers once, and finishes") {
    TruthSession truth(cart_plant(), {0.0, 0.0}, 0.0, 0.01, 42);
    OracleSession oracle(cart_oracle_cfg(42), truth);
    ModeTable table = two_triple_table();
    Trace trace;
    trace.scenario = "cart-chain";
    trace.seed = 42;
    ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, &trace);

    std::optional<std::size_t> transfer_step;
    std::optional<std::size_t> finish_step;
    for (std::size_t n = 0; n < 100; ++n) {
        StepReport rep = rt.step(n);
        if (rep.fired) {
            REQUIRE(*rep.fired == TripleId{"Go", 2});
            REQUIRE_FALSE(transfer_step.has_value());
            transfer_step = n;
        }
        if (rep.finished) {
            finish_step = n;
            break;
        }
    }
    REQUIRE(transfer_step.has_value());
    REQUIRE(*transfer_step >= 8);
    REQUIRE(*transfer_step <= 20);
    REQUIRE(finish_step.has_value());
    REQUIRE(*finish_step > *transfer_step);
    REQUIRE(rt.current() == TripleId{"Go", 2});

    REQUIRE(count_kind(trace, EventKind::Transfer) == 1);
    REQUIRE(count_kind(trace, EventKind::PostReached) == 2);
    REQUIRE(count_kind(trace, EventKind::Measure) == *finish_step + 1);
    REQUIRE(count_kind(trace, EventKind::Select) >= 1);

    // orders progress shows up in actuate payloads
    bool saw_orders_event = false;
    for (const auto& e : trace.events)
        if (e.kind == EventKind::Actuate && e.data.contains("orders"))
            saw_orders_event = true;
    REQUIRE(saw_orders_event);

    REQUIRE(audit_encapsulation(trace).empty());
}

TEST_CASE("the first firing selection in declaration order wins") {
    TruthSession truth(cart_plant(), {0.6, 0.0}, 0.0, 0.01, 7);
    OracleSession oracle(cart_oracle_cfg(7), truth);

    ModeTable table;
    table.modes = {make_mode("Go")};
    Triple a;
    a.id = {"Go", 1};
    a.pre = Zone::box({0.0, -1.0}, {1.0, 1.0});
    a.orders = {"idle", {}};
    a.post = Zone::box({5.0, -1.0}, {6.0, 1.0});
    Triple b = a;
    b.id = {"Go", 2};
    Triple c = a;
    c.id = {"Go", 3};
    table.triples = {a, b, c};
    table.strategy[{"Go", 1}] = {
        {TripleId{"Go", 2}, Zone::box({0.5, -1.0}, {5.0, 1.0})},
        {TripleId{"Go", 3}, Zone::box({0.3, -1.0}, {5.0, 1.0})}};

    Trace trace;
    ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, &trace);
    StepReport rep = rt.step(0);
    REQUIRE(rep.fired.has_value());
    REQUIRE(*rep.fired == TripleId{"Go", 2});
    REQUIRE(rt.current() == TripleId{"Go", 2});

    const TraceEvent* select = nullptr;
    for (const auto& e : trace.events)
        if (e.kind == EventKind::Select) select = &e;
    REQUIRE(select != nullptr);
    REQUIRE(select->data["values"] == Json({1, 1}));
    REQUIRE(select->data["fired"] == "(Go,2)");
}

TEST_CASE("mode transitions translate state and respect their domain") {
    SECTION("unit semantics and round trip") {
        TransitionMap ab{"A", "B", Zone::box({0.0}, {1.0}),
                         [](const Vec& x) { return Vec{2.0 * x[0]}; }};
        TransitionMap ba{"B", "A", Zone::box({0.0}, {2.0}),
                         [](const Vec& x) { return Vec{x[0] / 2.0}; }};
        REQUIRE(mode_transition(ab, {0.5})[0] == Catch::Approx(1.0));
        REQUIRE_THROWS_AS(mode_transition(ab, {1.5}), DomainError);
        Vec back = mode_transition(ba, mode_transition(ab, {0.7}));
        REQUIRE(back[0] == Catch::Approx(0.7));

        // a null apply is the identity
        TransitionMap id{"A", "B", Zone::box({0.0}, {1.0}), nullptr};
        REQUIRE(mode_transition(id, {0.3}) == Vec{0.3});
    }

    SECTION("the runtime applies the map on a mode change") {
        TruthSession truth(cart_plant(), {0.6, 0.25}, 0.0, 0.01, 9);
        OracleSession oracle(cart_oracle_cfg(9), truth);

        ModeTable table;
        table.modes = {make_mode("Go"), make_mode("Turbo")};
        Triple a;
        a.id = {"Go", 1};
        a.pre = Zone::box({0.0, -1.0}, {1.0, 1.0});
        a.orders = {"idle", {}};
        a.post = Zone::box({5.0, -1.0}, {6.0, 1.0});
        Triple b = a;
        b.id = {"Turbo", 1};
        table.triples = {a, b};
        table.strategy[{"Go", 1}] = {
            {TripleId{"Turbo", 1}, Zone::box({0.5, -5.0}, {5.0, 5.0})}};
        table.transitions = {{"Go", "Turbo", Zone::box({0.0, -5.0}, {10.0, 5.0}),
                              [](const Vec& x) { return Vec{x[0], 2.0 * x[1]}; }}};

        Trace trace;
        ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, &trace);
        StepReport rep = rt.step(0);
        REQUIRE(rep.fired.has_value());

        const TraceEvent *measure = nullptr, *transfer = nullptr;
        for (const auto& e : trace.events) {
            if (e.kind == EventKind::Measure && !measure) measure = &e;
            if (e.kind == EventKind::Transfer) transfer = &e;
        }
        REQUIRE(measure != nullptr);
        REQUIRE(transfer != nullptr);
        double measured_v = (*measure).data["state"][1].get<double>();
        REQUIRE(transfer->data["state"][1].get<double>() ==
                Catch::Approx(2.0 * measured_v));
        REQUIRE(rt.state()[1] == Catch::Approx(2.0 * measured_v));
        REQUIRE(audit_encapsulation(trace).empty());
    }

    SECTION("a transfer outside the map's domain throws") {
        TruthSession truth(cart_plant(), {0.6, 0.25}, 0.0, 0.01, 9);
        OracleSession oracle(cart_oracle_cfg(9), truth);

        ModeTable table;
        table.modes = {make_mode("Go"), make_mode("Turbo")};
        Triple a;
        a.id = {"Go", 1};
        a.pre = Zone::box({0.0, -1.0}, {1.0, 1.0});
        a.orders = {"idle", {}};
        a.post = Zone::box({5.0, -1.0}, {6.0, 1.0});
        Triple b = a;
        b.id = {"Turbo", 1};
        table.triples = {a, b};
        table.strategy[{"Go", 1}] = {
            {TripleId{"Turbo", 1}, Zone::box({0.5, -5.0}, {5.0, 5.0})}};
        table.transitions = {{"Go", "Turbo", Zone::box({5.0, -5.0}, {10.0, 5.0}),
                              [](const Vec& x) { return x; }}};

        ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, nullptr);
        REQUIRE_THROWS_AS(rt.step(0), DomainError);
    }
}

TEST_CASE("run_orders dwells to the post without selections firing") {
    TruthSession truth(cart_plant(), {0.0, 0.0}, 0.0, 0.01, 42);
    OracleSession oracle(cart_oracle_cfg(42), truth);
    ModeTable table = two_triple_table();
    Trace trace;
    ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, &trace);

    OrdersOutcome out = run_orders(rt, 0, 200);
    REQUIRE(out.post_reached);
    REQUIRE(out.steps_used >= 5);
    REQUIRE(out.steps_used <= 50);
    REQUIRE(out.orders_done);
    REQUIRE(rt.current() == TripleId{"Go", 1});
    REQUIRE(count_kind(trace, EventKind::Transfer) == 0);
    REQUIRE(count_kind(trace, EventKind::Select) == 0);
    REQUIRE(count_kind(trace, EventKind::PostReached) == 1);
}

TEST_CASE("transfer_control outcomes") {
    SECTION("exhausting the budget is the failure outcome") {
        TruthSession truth(cart_plant(), {0.6, 0.0}, 0.0, 0.01, 5);
        OracleSession oracle(cart_oracle_cfg(5), truth);
        ModeTable table;
        table.modes = {make_mode("Go")};
        Triple a;
        a.id = {"Go", 1};
        a.pre = Zone::box({0.0, -1.0}, {1.0, 1.0});
        a.orders = {"idle", {}};
        a.post = Zone::box({5.0, -1.0}, {6.0, 1.0});
        Triple b = a;
        b.id = {"Go", 2};
        table.triples = {a, b};
        table.strategy[{"Go", 1}] = {
            {TripleId{"Go", 2}, Zone::box({100.0, -1.0}, {101.0, 1.0})}};
        ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, nullptr);

        TransferOutcome out = transfer_control(rt, 0, 50);
        REQUIRE(out.status == TransferOutcome::Status::Exhausted);
        REQUIRE(out.steps_used == 50);
        REQUIRE_FALSE(out.target.has_value());
        REQUIRE(rt.current() == TripleId{"Go", 1});
    }

    SECTION("a transfer reports its target") {
        TruthSession truth(cart_plant(), {0.0, 0.0}, 0.0, 0.01, 42);
        OracleSession oracle(cart_oracle_cfg(42), truth);
        ModeTable table = two_triple_table();
        ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, nullptr);

        TransferOutcome out = transfer_control(rt, 0, 200);
        REQUIRE(out.status == TransferOutcome::Status::Transferred);
        REQUIRE(out.target.has_value());
        REQUIRE(*out.target == TripleId{"Go", 2});
        REQUIRE(rt.current() == TripleId{"Go", 2});
    }

    SECTION("an end triple finishing is its own outcome") {
        TruthSession truth(cart_plant(), {0.6, 0.0}, 0.0, 0.01, 5);
        OracleSession oracle(cart_oracle_cfg(5), truth);
        ModeTable table;
        table.modes = {make_mode("Go")};
        Triple a;
        a.id = {"Go", 1};
        a.pre = Zone::box({0.0, -1.0}, {1.0, 1.0});
        a.orders = {"idle", {}};
        a.post = Zone::box({0.0, -1.0}, {1.0, 1.0});
        a.is_end = true;
        table.triples = {a};
        ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, nullptr);

        TransferOutcome out = transfer_control(rt, 0, 50);
        REQUIRE(out.status == TransferOutcome::Status::Finished);
        REQUIRE(out.steps_used == 1);
        REQUIRE(rt.finished());
    }
}

TEST_CASE("slice actuation touches only the agent's span of the joint control") {
    TruthPlant joint;
    joint.state_dim = 4;
    joint.control_dim = 2;
    joint.drift = [](double, const Vec& x, Vec& dx) {
        dx[0] = x[1];
        dx[2] = x[3];
    };
    joint.control_term = [](double, const Vec&, const Vec& u, Vec& dx) {
        dx[1] += u[0];
        dx[3] += u[1];
    };
    TruthSession truth(joint, {0.0, 0.0, 0.0, 0.0}, 0.0, 0.01, 3);

    OracleConfig ca = cart_oracle_cfg(3, 1);
    OracleConfig cb = cart_oracle_cfg(3, 2);
    OracleSession oa(ca, truth);
    OracleSession ob(cb, truth);

    Measurement ma = oa.measure(0);
    Measurement mb = ob.measure(0);
    REQUIRE(ma.value != mb.value);  // per-agent sensors see different noise

    oa.actuate_slice(ma, 0, {5.0});
    REQUIRE(truth.control() == Vec{5.0, 0.0});
    ob.actuate_slice(mb, 1, {7.0});
    REQUIRE(truth.control() == Vec{5.0, 7.0});
    oa.actuate_slice(ma, 0, {-2.0});
    REQUIRE(truth.control() == Vec{-2.0, 7.0});

    REQUIRE_THROWS_AS(ob.actuate_slice(mb, 1, Vec{1.0, 2.0}), DimensionError);
}

TEST_CASE("the encapsulation audit flags state changes outside measure and transfer") {
    SECTION("hand-built trace") {
        Trace tr;
        TraceEvent e;
        e.agent = "a";
        e.kind = EventKind::Measure;
        e.data = Json{{"state", {1.0}}};
        tr.append(e);
        e.kind = EventKind::Actuate;
        tr.append(e);  // same state: fine
        REQUIRE(audit_encapsulation(tr).empty());

        e.kind = EventKind::Actuate;
        e.data = Json{{"state", {2.0}}};
        tr.append(e);  // actuate changed the state: violation
        e.kind = EventKind::Transfer;
        e.data = Json{{"state", {3.0}}};
        tr.append(e);  // transfer may change it
        e.kind = EventKind::Select;
        e.data = Json{{"state", {4.0}}};
        tr.append(e);  // select may not
        auto findings = audit_encapsulation(tr);
        REQUIRE(findings.size() == 2);
        REQUIRE(findings[0].seq == 2);
        REQUIRE(findings[1].seq == 4);
    }

    SECTION("tampered runtime trace") {
        TruthSession truth(cart_plant(), {0.0, 0.0}, 0.0, 0.01, 42);
        OracleSession oracle(cart_oracle_cfg(42), truth);
        ModeTable table = two_triple_table();
        Trace trace;
        ModeRuntime rt(table, cart_binding(oracle), {"Go", 1}, &trace);
        for (std::size_t n = 0; n < 20; ++n) rt.step(n);
        REQUIRE(audit_encapsulation(trace).empty());

        for (auto& e : trace.events) {
            if (e.kind == EventKind::Actuate) {
                e.data["state"][0] = e.data["state"][0].get<double>() + 1.0;
                break;
            }
        }
        REQUIRE(audit_encapsulation(trace).size() == 1);
    }
}
