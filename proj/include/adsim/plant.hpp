#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsim/common.hpp"
#include "adsim/integrate.hpp"
#include "adsim/rng.hpp"

namespace adsim {

// Ground-truth dynamics: drift field plus an additive control term, a
// per-step admissibility test on (state, control), an optional state
// projection (hard physical bounds like v in [0, v_max]), and bounded seeded
// disturbance. The plant is the only component that ever sees true state.
struct TruthPlant {
    std::size_t state_dim = 0;
    std::size_t control_dim = 0;

    // drift(t, x, dx): base vector field, dx pre-sized and zeroed.
    std::function<void(double, const Vec&, Vec&)> drift;
    // control_term(t, x, p, dx): adds the actuated contribution into dx.
    std::function<void(double, const Vec&, const Vec&, Vec&)> control_term;
    // Reason string when (x, p) is not an admissible pair, nullopt when fine.
    std::function<std::optional<std::string>(const Vec&, const Vec&)> admissible;
    // In-place projection after each integration step (may be null).
    std::function<void(Vec&)> clamp;
    // Per-axis disturbance amplitude; the realised kick is piecewise constant
    // over fine steps, uniform in [-amp, amp], derived from the run seed.
    Vec disturbance_amplitude;

    Vec zero_control() const { return Vec(control_dim, 0.0); }
};

// Sampled true path at fine_dt resolution. Exact at nodes, linear between.
struct Trajectory {
    double t0 = 0.0;
    double fine_dt = 0.0;
    std::vector<Vec> states;  // states[k] is the state at t0 + k * fine_dt

    double end_time() const {
        return t0 + fine_dt * static_cast<double>(states.empty() ? 0 : states.size() - 1);
    }

    const Vec& node(std::size_t k) const { return states.at(k); }

    Vec state_at(double t) const {
        if (states.empty()) throw Error("Trajectory::state_at: empty trajectory");
        double pos = (t - t0) / fine_dt;
        if (pos < -1e-9 || pos > static_cast<double>(states.size() - 1) + 1e-9)
            throw Error("Trajectory::state_at: t=" + std::to_string(t) + " outside [" +
                        std::to_string(t0) + ", " + std::to_string(end_time()) + "]");
        auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
        if (k >= states.size() - 1) return states.back();
        double frac = pos - static_cast<double>(k);
        if (frac < 1e-9) return states[k];
        Vec out(states[k].size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = states[k][i] + frac * (states[k + 1][i] - states[k][i]);
        return out;
    }
};

// Owns the evolving true state. Integration advances lazily as measurements
// force it; control changes take effect from the current frontier onward
// (zero-order hold between actuations).
class TruthSession {
  public:
    TruthSession(TruthPlant plant, Vec x0, double t0, double fine_dt, std::uint64_t seed)
        : plant_(std::move(plant)), fine_dt_(fine_dt), seed_(seed) {
        require_dim("TruthSession initial state", plant_.state_dim, x0.size());
        if (fine_dt <= 0.0) throw ConfigError("TruthSession: fine_dt must be positive");
        traj_.t0 = t0;
        traj_.fine_dt = fine_dt;
        traj_.states.push_back(std::move(x0));
        control_ = plant_.zero_control();
    }

    const TruthPlant& plant() const { return plant_; }
    const Trajectory& trajectory() const { return traj_; }
    double frontier() const { return traj_.end_time(); }
    const Vec& control() const { return control_; }

    void set_control(const Vec& p) {
        require_dim("TruthSession::set_control", plant_.control_dim, p.size());
        control_ = p;
    }

    // Overwrites one agent's span of the joint control vector; the other
    // entries keep their held values.
    void set_control_slice(std::size_t offset, const Vec& values) {
        if (offset + values.size() > control_.size())
            throw DimensionError("TruthSession::set_control_slice", control_.size(),
                                 offset + values.size());
        for (std::size_t i = 0; i < values.size(); ++i) control_[offset + i] = values[i];
    }

    // Integrate forward until the frontier reaches t (node-aligned; t is
    // rounded to the nearest fine node).
    void advance_to(double t) {
        auto target = static_cast<std::size_t>(
            std::llround((t - traj_.t0) / fine_dt_));
        while (traj_.states.size() <= target) step_once();
    }

    Vec state_at(double t) const { return traj_.state_at(t); }

  private:
    void step_once() {
        std::size_t k = traj_.states.size() - 1;  // index of the step being taken
        double ta = traj_.t0 + fine_dt_ * static_cast<double>(k);
        Vec kick = disturbance_kick(k);
        Vec p = control_;
        Field f = [this, &p, &kick](double t, const Vec& x, Vec& dx) {
            std::fill(dx.begin(), dx.end(), 0.0);
            plant_.drift(t, x, dx);
            if (plant_.control_term) plant_.control_term(t, x, p, dx);
            for (std::size_t i = 0; i < kick.size(); ++i) dx[i] += kick[i];
        };
        Vec x = traj_.states.back();
        rk4_step(f, ta, x, fine_dt_);
        if (plant_.clamp) plant_.clamp(x);
        traj_.states.push_back(std::move(x));
    }

    Vec disturbance_kick(std::size_t step_index) {
        Vec kick(plant_.state_dim, 0.0);
        const Vec& amp = plant_.disturbance_amplitude;
        if (amp.empty()) return kick;
        require_dim("disturbance amplitude", plant_.state_dim, amp.size());
        for (std::size_t i = 0; i < kick.size(); ++i) {
            if (amp[i] == 0.0) continue;
            Rng r = Rng::derive(seed_, 0xD157u, step_index, i);
            kick[i] = amp[i] * r.symmetric();
        }
        return kick;
    }

    TruthPlant plant_;
    double fine_dt_;
    std::uint64_t seed_;
    Trajectory traj_;
    Vec control_;
};

}  // namespace adsim
