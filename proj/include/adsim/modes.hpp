#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "adsim/common.hpp"
#include "adsim/geometry.hpp"
#include "adsim/oracle.hpp"
#include "adsim/orders.hpp"
#include "adsim/trace.hpp"

namespace adsim {

// ---- triples and strategy ----------------------------------------------------

struct TripleId {
    std::string mode;
    int index = 1;

    std::string str() const { return "(" + mode + "," + std::to_string(index) + ")"; }

    bool operator==(const TripleId& o) const {
        return mode == o.mode && index == o.index;
    }
    bool operator!=(const TripleId& o) const { return !(*this == o); }
    bool operator<(const TripleId& o) const {
        return std::tie(mode, index) < std::tie(o.mode, o.index);
    }
};

// A selection function fires exactly on its support zone and names the triple
// control passes to.
struct SelectionFunction {
    TripleId target;
    Zone support;
};

struct Triple {
    TripleId id;
    Zone pre;
    OrdersProgram orders;
    Zone post;
    bool is_start = false;
    bool is_end = false;
};

// Per-triple selection functions, kept in declaration order; the first one
// whose support contains the measurement wins.
using Strategy = std::map<TripleId, std::vector<SelectionFunction>>;

// ---- modes and transitions ---------------------------------------------------

// State translation applied when control changes mode. Only defined on its
// domain; a null apply is the identity.
struct TransitionMap {
    std::string from_mode;
    std::string to_mode;
    Zone domain;
    std::function<Vec(const Vec&)> apply;
};

inline Vec mode_transition(const TransitionMap& tau, const Vec& x,
                           const MetricSpec& metric = {}) {
    if (!zone_contains(tau.domain, x, 0.0, metric))
        throw DomainError("transition " + tau.from_mode + " -> " + tau.to_mode +
                          " applied outside its domain at " + vec_to_string(x));
    return tau.apply ? tau.apply(x) : x;
}

struct ModeSpec {
    std::string name;
    Zone chart;  // region the mode's model is trusted on
    std::size_t state_dim = 0;
    // controller(state, command, lambda) -> this agent's control slice
    std::function<Vec(const Vec&, const Command&, double)> controller;
};

struct ModeTable {
    std::vector<ModeSpec> modes;
    std::vector<Triple> triples;
    Strategy strategy;
    std::vector<TransitionMap> transitions;
    MetricSpec metric;

    const ModeSpec& mode(const std::string& name) const {
        for (const auto& m : modes)
            if (m.name == name) return m;
        throw ConfigError("unknown mode: " + name);
    }

    const Triple& triple(const TripleId& id) const {
        for (const auto& tr : triples)
            if (tr.id == id) return tr;
        throw ConfigError("unknown triple: " + id.str());
    }

    const std::vector<SelectionFunction>* selections(const TripleId& id) const {
        auto it = strategy.find(id);
        return it == strategy.end() ? nullptr : &it->second;
    }

    // Transition between named modes; null means identity on the full space.
    const TransitionMap* transition(const std::string& from,
                                    const std::string& to) const {
        for (const auto& tau : transitions)
            if (tau.from_mode == from && tau.to_mode == to) return &tau;
        return nullptr;
    }
};

// ---- runtime -------------------------------------------------------------------

struct AgentBinding {
    std::string name;
    OracleSession* oracle = nullptr;
    std::size_t control_offset = 0;            // span inside the joint control
    std::optional<std::size_t> speed_axis;     // for speed orders
    double halt_threshold = 0.5;
};

struct StepReport {
    Measurement measurement;
    Command command;
    Vec control;
    std::optional<TripleId> fired;
    bool post_reached = false;  // dwelling triple's post seen this step
    bool finished = false;      // an end triple delivered its post
};

// Drives one agent through its strategy, one measurement period per step.
//
// The agent's state knowledge lives in state_alpha_ and is mutated only by
// apply_measurement and apply_transfer; the trace audit checks that property
// on the emitted events. Step order within one window: measure, interpret the
// current orders, run the mode controller, actuate, evaluate selections,
// transfer on the first firing selection, check the dwelling triple's post.
// A transfer takes effect for the following window: the crossing window still
// runs under the orders that were live when it was measured.
class ModeRuntime {
  public:
    ModeRuntime(const ModeTable& table, AgentBinding binding, TripleId start,
                Trace* trace = nullptr)
        : table_(table), binding_(std::move(binding)), current_(std::move(start)),
          trace_(trace) {
        if (binding_.oracle == nullptr)
            throw ConfigError("mode runtime: agent has no oracle");
        lambda_ = binding_.oracle->config().lambda;
        enter_triple(current_);
    }

    const TripleId& current() const { return current_; }
    bool finished() const { return finished_; }
    bool orders_done() const { return interp_->done(); }
    const Vec& state() const { return state_alpha_; }

    StepReport step(std::size_t n, bool select_enabled = true) {
        StepReport rep;
        Measurement mm = binding_.oracle->measure(n);
        apply_measurement(mm);
        rep.measurement = mm;
        const Triple& tri = table_.triple(current_);
        emit(n, mm.t, EventKind::Measure,
             Json{{"state", state_alpha_}, {"triple", current_.str()}});

        rep.command = interp_->step(state_alpha_, n);
        auto orders_events = interp_->drain_events();
        const ModeSpec& mode = table_.mode(current_.mode);
        rep.control = mode.controller(state_alpha_, rep.command, lambda_);
        binding_.oracle->actuate_slice(mm, binding_.control_offset, rep.control);
        {
            Json data{{"state", state_alpha_}, {"control", rep.control},
                      {"command", rep.command.describe()}, {"triple", current_.str()}};
            if (!orders_events.empty()) {
                Json evs = Json::array();
                for (const auto& ev : orders_events) {
                    Json je{{"what", ev.what}, {"detail", ev.detail}};
                    if (ev.what == "repeat-exit") {
                        je["reason"] = ev.reason;
                        je["iterations"] = ev.iterations;
                    }
                    evs.push_back(std::move(je));
                }
                data["orders"] = std::move(evs);
            }
            emit(n, mm.t, EventKind::Actuate, std::move(data));
        }

        std::optional<TripleId> fire_target;
        if (select_enabled && !finished_) {
            if (const auto* sels = table_.selections(current_); sels && !sels->empty()) {
                std::vector<int> values;
                std::optional<std::size_t> fired;
                for (std::size_t i = 0; i < sels->size(); ++i) {
                    bool hit = zone_contains((*sels)[i].support, state_alpha_, 0.0,
                                             table_.metric);
                    values.push_back(hit ? 1 : 0);
                    if (hit && !fired) fired = i;
                }
                Json data{{"triple", current_.str()}, {"values", values}};
                data["fired"] = fired ? Json((*sels)[*fired].target.str()) : Json();
                emit(n, mm.t, EventKind::Select, std::move(data));
                if (fired) fire_target = (*sels)[*fired].target;
            }
        }

        if (!post_seen_ && zone_contains(tri.post, state_alpha_, 0.0, table_.metric)) {
            post_seen_ = true;
            rep.post_reached = true;
            emit(n, mm.t, EventKind::PostReached,
                 Json{{"triple", tri.id.str()}, {"state", state_alpha_}});
            if (tri.is_end && !finished_) finished_ = true;
        }

        if (fire_target && !finished_) {
            rep.fired = fire_target;
            do_transfer(*fire_target, n, mm.t);
        }
        rep.finished = finished_;
        return rep;
    }

  private:
    void apply_measurement(const Measurement& mm) { state_alpha_ = mm.value; }

    void apply_transfer(Vec x) { state_alpha_ = std::move(x); }

    void enter_triple(const TripleId& id) {
        const Triple& tri = table_.triple(id);
        interp_.emplace(&tri.orders,
                        OrdersConfig{lambda_, binding_.speed_axis,
                                     binding_.halt_threshold});
        post_seen_ = false;
    }

    void do_transfer(const TripleId& target, std::size_t n, double t) {
        TripleId from = current_;
        if (target.mode != from.mode) {
            if (const TransitionMap* tau = table_.transition(from.mode, target.mode))
                apply_transfer(mode_transition(*tau, state_alpha_, table_.metric));
        }
        current_ = target;
        enter_triple(current_);
        emit(n, t, EventKind::Transfer,
             Json{{"from", from.str()}, {"to", target.str()}, {"state", state_alpha_}});
    }

    void emit(std::size_t n, double t, EventKind kind, Json data) {
        if (trace_ == nullptr) return;
        TraceEvent e;
        e.step = n;
        e.t = t;
        e.agent = binding_.name;
        e.kind = kind;
        e.data = std::move(data);
        trace_->append(std::move(e));
    }

    const ModeTable& table_;
    AgentBinding binding_;
    TripleId current_;
    Trace* trace_;
    double lambda_ = 0.0;
    Vec state_alpha_;  // agent's knowledge of the state; see class comment
    std::optional<OrdersInterpreter> interp_;
    bool post_seen_ = false;
    bool finished_ = false;
};

// ---- single-agent procedure wrappers -------------------------------------------

// Dwell in the current triple without evaluating selections: run the orders
// until the post is reached or the step budget runs out.
struct OrdersOutcome {
    bool post_reached = false;
    std::size_t steps_used = 0;
    bool orders_done = false;
};

inline OrdersOutcome run_orders(ModeRuntime& rt, std::size_t n_start,
                                std::size_t n_max) {
    OrdersOutcome out;
    for (std::size_t n = n_start; n < n_start + n_max; ++n) {
        StepReport rep = rt.step(n, /*select_enabled=*/false);
        out.steps_used += 1;
        if (rep.post_reached) {
            out.post_reached = true;
            break;
        }
    }
    out.orders_done = rt.orders_done();
    return out;
}

// Full supervised dwell: run until a selection fires (control transfers), the
// agent finishes on an end triple, or the budget runs out. Exhaustion is the
// failure outcome.
struct TransferOutcome {
    enum class Status { Transferred, Finished, Exhausted };
    Status status = Status::Exhausted;
    std::optional<TripleId> target;
    std::size_t steps_used = 0;
};

inline TransferOutcome transfer_control(ModeRuntime& rt, std::size_t n_start,
                                        std::size_t n_max) {
    TransferOutcome out;
    for (std::size_t n = n_start; n < n_start + n_max; ++n) {
        StepReport rep = rt.step(n);
        out.steps_used += 1;
        if (rep.fired) {
            out.status = TransferOutcome::Status::Transferred;
            out.target = rep.fired;
            return out;
        }
        if (rep.finished) {
            out.status = TransferOutcome::Status::Finished;
            return out;
        }
    }
    return out;
}

}  // namespace adsim
