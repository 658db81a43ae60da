#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsim/common.hpp"

namespace adsim {

// ---- conditions ------------------------------------------------------------

// Conjunction of per-axis threshold tests on the agent's measured state.
// An empty conjunction is never satisfied: a repeat without a condition
// runs until its time limit.
struct AtomicCond {
    std::size_t axis = 0;
    bool at_least = true;  // axis >= value, else axis <= value
    double value = 0.0;
};

struct Condition {
    std::vector<AtomicCond> all;

    bool empty() const { return all.empty(); }

    bool eval(const Vec& state) const {
        if (all.empty()) return false;
        for (const auto& c : all) {
            double v = state.at(c.axis);
            if (c.at_least ? (v < c.value) : (v > c.value)) return false;
        }
        return true;
    }

    static Condition axis_at_least(std::size_t axis, double value) {
        return Condition{{AtomicCond{axis, true, value}}};
    }
    static Condition axis_at_most(std::size_t axis, double value) {
        return Condition{{AtomicCond{axis, false, value}}};
    }
};

// ---- instructions -----------------------------------------------------------

struct Instruction {
    enum class Kind { SetTargetSpeed, BrakeToHalt, SetVector, Wait, RepeatUntil };

    Kind kind = Kind::Wait;
    double target = 0.0;  // SetTargetSpeed
    double ramp_s = 0.0;  // SetTargetSpeed: seconds to reach the target
    Vec vector;           // SetVector
    double wait_s = 0.0;  // Wait
    Condition until;                    // RepeatUntil exit condition
    std::vector<Instruction> body;      // RepeatUntil body
    std::optional<double> timelimit_s;  // RepeatUntil fallback exit

    static Instruction set_target_speed(double target, double ramp_s) {
        Instruction i;
        i.kind = Kind::SetTargetSpeed;
        i.target = target;
        i.ramp_s = ramp_s;
        return i;
    }
    static Instruction brake_to_halt() {
        Instruction i;
        i.kind = Kind::BrakeToHalt;
        return i;
    }
    static Instruction set_vector(Vec v) {
        Instruction i;
        i.kind = Kind::SetVector;
        i.vector = std::move(v);
        return i;
    }
    static Instruction wait(double seconds) {
        Instruction i;
        i.kind = Kind::Wait;
        i.wait_s = seconds;
        return i;
    }
    static Instruction repeat_until(Condition cond, std::vector<Instruction> body,
                                    std::optional<double> timelimit = std::nullopt) {
        Instruction i;
        i.kind = Kind::RepeatUntil;
        i.until = std::move(cond);
        i.body = std::move(body);
        i.timelimit_s = timelimit;
        return i;
    }

    const char* name() const {
        switch (kind) {
            case Kind::SetTargetSpeed: return "set-target-speed";
            case Kind::BrakeToHalt: return "brake-to-halt";
            case Kind::SetVector: return "set-vector";
            case Kind::Wait: return "wait";
            case Kind::RepeatUntil: return "repeat-until";
        }
        return "?";
    }
};

struct OrdersProgram {
    std::string name;
    std::vector<Instruction> instructions;
};

// ---- commands ---------------------------------------------------------------

// What the interpreter asks of the plant for the coming step. The mode
// controller turns a command into an actual control point.
struct Command {
    enum class Kind { Coast, SpeedRamp, SpeedHold, Halt, VectorSet };
    Kind kind = Kind::Coast;
    double target = 0.0;  // SpeedRamp / SpeedHold
    double rate = 0.0;    // SpeedRamp, signed speed units per second
    Vec vector;           // VectorSet

    std::string describe() const {
        switch (kind) {
            case Kind::Coast: return "coast";
            case Kind::SpeedRamp:
                return "ramp(target " + std::to_string(target) + ", rate " +
                       std::to_string(rate) + ")";
            case Kind::SpeedHold: return "hold(" + std::to_string(target) + ")";
            case Kind::Halt: return "halt";
            case Kind::VectorSet: return "set" + vec_to_string(vector);
        }
        return "?";
    }
};

// ---- interpreter ------------------------------------------------------------

struct OrdersEvent {
    std::size_t step = 0;
    std::string what;    // "advance" | "repeat-exit" | "done"
    std::string detail;  // instruction name, or exit reason + iteration count
    std::string reason;  // repeat-exit only: "condition" | "timelimit"
    std::size_t iterations = 0;  // repeat-exit only
};

struct OrdersConfig {
    double lambda = 0.0;
    std::optional<std::size_t> speed_axis;  // required by speed instructions
    double halt_threshold = 0.5;            // measured speed counting as halted
};

// Steps an orders program one measurement period at a time.
//
// Timing model: every step() call stands for one lambda-long window. Speed
// ramps are anchored at the speed measured when the instruction starts and
// take ceil(ramp_s / lambda) steps; waits take ceil(wait_s / lambda) steps.
// Repeats are do-while: the body runs before the first condition check, the
// condition is checked at body boundaries against the current measurement,
// and an optional time limit counts seconds spent inside the loop. A repeat
// with an empty body polls its condition once per step. A finished program
// keeps issuing the last persistent command.
class OrdersInterpreter {
  public:
    OrdersInterpreter(const OrdersProgram* program, OrdersConfig cfg) : cfg_(cfg) {
        if (program == nullptr) throw ConfigError("orders: null program");
        if (cfg_.lambda <= 0.0) throw ConfigError("orders: lambda must be positive");
        frames_.push_back(Frame{&program->instructions, 0, nullptr, 0, 0.0});
    }

    bool done() const { return frames_.empty(); }

    // Events produced since the last drain.
    std::vector<OrdersEvent> drain_events() { return std::move(events_); }

    Command step(const Vec& state, std::size_t n) {
        const Instruction* ins = resolve(state, n);
        Command out = ambient_;
        if (ins != nullptr) {
            switch (ins->kind) {
                case Instruction::Kind::SetTargetSpeed: {
                    std::size_t axis = require_speed_axis(*ins);
                    if (!ramp_active_) {
                        ramp_active_ = true;
                        ramp_elapsed_ = 0.0;
                        ramp_rate_ = (ins->target - state.at(axis)) / ins->ramp_s;
                    }
                    out.kind = Command::Kind::SpeedRamp;
                    out.target = ins->target;
                    out.rate = ramp_rate_;
                    out.vector.clear();
                    ramp_elapsed_ += cfg_.lambda;
                    if (ramp_elapsed_ >= ins->ramp_s - kSliver) {
                        ambient_ = Command{Command::Kind::SpeedHold, ins->target, 0.0, {}};
                        finish_instruction(*ins, n);
                    }
                    break;
                }
                case Instruction::Kind::BrakeToHalt:
                    require_speed_axis(*ins);
                    out = Command{Command::Kind::Halt, 0.0, 0.0, {}};
                    break;  // completion is detected from the next measurement
                case Instruction::Kind::SetVector:
                    out = Command{Command::Kind::VectorSet, 0.0, 0.0, ins->vector};
                    ambient_ = out;
                    finish_instruction(*ins, n);
                    break;
                case Instruction::Kind::Wait:
                    wait_elapsed_ += cfg_.lambda;
                    if (wait_elapsed_ >= ins->wait_s - kSliver)
                        finish_instruction(*ins, n);
                    break;  // out stays ambient
                case Instruction::Kind::RepeatUntil:
                    throw Error("orders: unresolved repeat");  // resolve() handles these
            }
        }
        for (auto& f : frames_)
            if (f.repeat != nullptr) f.time_in_loop += cfg_.lambda;
        return out;
    }

  private:
    static constexpr double kSliver = 1e-9;

    struct Frame {
        const std::vector<Instruction>* seq;
        std::size_t pc;
        const Instruction* repeat;  // loop owning this body, null for the root
        std::size_t iterations;
        double time_in_loop;
    };

    // Walks instantaneous transitions (finished frames, loop entries and
    // exits, zero-duration instructions) until reaching the instruction that
    // occupies this step, or null when the program is over or a bodiless
    // repeat spins this step away.
    const Instruction* resolve(const Vec& state, std::size_t n) {
        for (int guard = 0; guard < 100000; ++guard) {
            if (frames_.empty()) return nullptr;
            Frame& f = frames_.back();
            if (f.pc >= f.seq->size()) {
                if (f.repeat == nullptr) {
                    frames_.clear();
                    events_.push_back({n, "done", "", "", 0});
                    return nullptr;
                }
                f.iterations += 1;
                bool exit_cond = f.repeat->until.eval(state);
                bool exit_time = f.repeat->timelimit_s &&
                                 f.time_in_loop >= *f.repeat->timelimit_s - kSliver;
                if (exit_cond || exit_time) {
                    OrdersEvent ev;
                    ev.step = n;
                    ev.what = "repeat-exit";
                    ev.reason = exit_cond ? "condition" : "timelimit";
                    ev.iterations = f.iterations;
                    ev.detail = ev.reason + " after " +
                                std::to_string(f.iterations) + " iterations";
                    events_.push_back(ev);
                    frames_.pop_back();
                    if (!frames_.empty()) frames_.back().pc += 1;
                    continue;
                }
                f.pc = 0;
                if (f.seq->empty()) return nullptr;  // poll again next step
                continue;
            }
            const Instruction& ins = (*f.seq)[f.pc];
            switch (ins.kind) {
                case Instruction::Kind::RepeatUntil:
                    frames_.push_back(Frame{&ins.body, 0, &ins, 0, 0.0});
                    continue;
                case Instruction::Kind::BrakeToHalt: {
                    std::size_t axis = require_speed_axis(ins);
                    if (std::abs(state.at(axis)) <= cfg_.halt_threshold) {
                        ambient_ = Command{Command::Kind::SpeedHold, 0.0, 0.0, {}};
                        finish_instruction(ins, n);
                        continue;
                    }
                    return &ins;
                }
                case Instruction::Kind::SetTargetSpeed:
                    if (ins.ramp_s <= kSliver) {
                        ambient_ =
                            Command{Command::Kind::SpeedHold, ins.target, 0.0, {}};
                        finish_instruction(ins, n);
                        continue;
                    }
                    return &ins;
                case Instruction::Kind::Wait:
                    if (ins.wait_s <= kSliver) {
                        finish_instruction(ins, n);
                        continue;
                    }
                    return &ins;
                case Instruction::Kind::SetVector:
                    return &ins;
            }
        }
        throw ConfigError("orders: loop body consumes no time");
    }

    std::size_t require_speed_axis(const Instruction& ins) {
        if (!cfg_.speed_axis)
            throw ConfigError(std::string("orders: '") + ins.name() +
                              "' needs a speed axis, none configured");
        return *cfg_.speed_axis;
    }

    void finish_instruction(const Instruction& ins, std::size_t n) {
        events_.push_back({n, "advance", ins.name(), "", 0});
        ramp_active_ = false;
        ramp_elapsed_ = 0.0;
        wait_elapsed_ = 0.0;
        frames_.back().pc += 1;
    }

    OrdersConfig cfg_;
    std::vector<Frame> frames_;
    Command ambient_{};
    std::vector<OrdersEvent> events_;
    bool ramp_active_ = false;
    double ramp_rate_ = 0.0;
    double ramp_elapsed_ = 0.0;
    double wait_elapsed_ = 0.0;
};

}  // namespace adsim
