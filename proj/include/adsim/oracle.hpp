#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "adsim/common.hpp"
#include "adsim/geometry.hpp"
#include "adsim/plant.hpp"
#include "adsim/rng.hpp"

namespace adsim {

// Error-bounded physical oracle. Measurements arrive with zero latency at
// multiples of the period lambda, land on a rational grid of the given pitch,
// and sit strictly inside the epsilon-ball around the true state. Noise is a
// pure function of (seed, step, agent), so a run replays bit-identically.
struct OracleConfig {
    double epsilon = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    double grid_pitch = 0.0;  // 0 selects the default epsilon / 100
    MetricSpec metric;
    std::uint64_t agent_tag = 0;  // distinguishes sensors in multi-agent runs

    double pitch() const { return grid_pitch > 0.0 ? grid_pitch : epsilon / 100.0; }

    void validate(std::size_t dim) const {
        if (epsilon <= 0.0) throw ConfigError("oracle: epsilon must be positive");
        if (lambda <= 0.0) throw ConfigError("oracle: lambda must be positive");
        if (snap_slack(dim) >= epsilon)
            throw ConfigError("oracle: grid pitch too coarse for epsilon (snap could "
                              "push a measurement outside the error ball)");
    }

    // Worst-case metric displacement of the grid snap.
    double snap_slack(std::size_t dim) const {
        double p = pitch();
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += metric.weight(i);
        return 0.5 * p * std::sqrt(s);
    }
};

struct Measurement {
    std::size_t n = 0;   // step index; sample time is n * lambda
    double t = 0.0;
    Vec value;
};

namespace detail {

inline Vec snap_to_grid(const Vec& v, double pitch) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::round(v[i] / pitch) * pitch;
    return out;
}

// Perturb-then-snap. The perturbation ball is shrunk by the snap slack so the
// final value stays strictly within epsilon of the truth.
inline Vec measured_value(const OracleConfig& cfg, const Vec& truth, std::size_t n) {
    double radius = cfg.epsilon - cfg.snap_slack(truth.size());
    radius *= (1.0 - 1e-12);
    Rng rng = Rng::derive(cfg.seed, 0x0E5Bu, n, cfg.agent_tag);
    Vec offset = sample_ball(rng, truth.size(), radius, cfg.metric.weights);
    Vec noisy(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) noisy[i] = truth[i] + offset[i];
    return snap_to_grid(noisy, cfg.pitch());
}

}  // namespace detail

// Measurement of a precomputed trajectory at step n (time n * lambda).
inline Measurement measure(const OracleConfig& cfg, const Trajectory& truth, std::size_t n) {
    cfg.validate(truth.states.at(0).size());
    double t = truth.t0 + cfg.lambda * static_cast<double>(n);
    Measurement mm;
    mm.n = n;
    mm.t = t;
    mm.value = detail::measured_value(cfg, truth.state_at(t), n);
    return mm;
}

// Oracle bound to a live truth session: measuring forces integration up to
// the sample time, actuation sets the control for the coming step after the
// admissibility check against the measured point.
class OracleSession {
  public:
    OracleSession(OracleConfig cfg, TruthSession& truth) : cfg_(cfg), truth_(truth) {
        cfg_.validate(truth.plant().state_dim);
        double ratio = cfg_.lambda / truth.trajectory().fine_dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-6)
            throw ConfigError("oracle: lambda must be a whole number of fine steps");
    }

    const OracleConfig& config() const { return cfg_; }
    TruthSession& truth() { return truth_; }

    Measurement measure(std::size_t n) {
        double t = truth_.trajectory().t0 + cfg_.lambda * static_cast<double>(n);
        truth_.advance_to(t);
        Measurement mm;
        mm.n = n;
        mm.t = t;
        mm.value = detail::measured_value(cfg_, truth_.state_at(t), n);
        last_measured_ = mm;
        return mm;
    }

    // pi(b) = a: the control point is anchored at the measurement it was
    // chosen from, which must be the latest one.
    void actuate(const Measurement& a, const Vec& p) {
        check_actuation(a, p);
        truth_.set_control(p);
    }

    // Actuates one agent's span of the joint control; the admissibility check
    // runs on the full spliced vector.
    void actuate_slice(const Measurement& a, std::size_t offset, const Vec& slice) {
        Vec full = truth_.control();
        if (offset + slice.size() > full.size())
            throw DimensionError("actuate_slice", full.size(), offset + slice.size());
        for (std::size_t i = 0; i < slice.size(); ++i) full[offset + i] = slice[i];
        check_actuation(a, full);
        truth_.set_control(full);
    }

  private:
    void check_actuation(const Measurement& a, const Vec& p) const {
        if (!last_measured_ || last_measured_->n != a.n)
            throw Error("actuate: control anchored at step " + std::to_string(a.n) +
                        " but the latest measurement is step " +
                        (last_measured_ ? std::to_string(last_measured_->n) : "none"));
        if (truth_.plant().admissible) {
            if (auto why = truth_.plant().admissible(a.value, p))
                throw AdmissibilityError(*why, a.value, p);
        }
    }

    OracleConfig cfg_;
    TruthSession& truth_;
    std::optional<Measurement> last_measured_;
};

}  // namespace adsim
