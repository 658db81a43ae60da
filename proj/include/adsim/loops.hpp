#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "adsim/common.hpp"
#include "adsim/geometry.hpp"
#include "adsim/oracle.hpp"
#include "adsim/path.hpp"
#include "adsim/plant.hpp"
#include "adsim/rng.hpp"

namespace adsim {

// ---- measure / predict ------------------------------------------------

struct MeasurePredictResult {
    std::vector<Measurement> measurements;  // n_max entries
    DisjointPath path;                      // n_max segments
};

// Observation loop: at each step, measure, then compute the model path for
// the coming window anchored at the measurement. No actuation.
inline MeasurePredictResult measure_predict(OracleSession& oracle, const ModelSpec& model,
                                            const Vec& model_control, std::size_t n_max) {
    MeasurePredictResult out;
    double lambda = oracle.config().lambda;
    double t0 = oracle.truth().trajectory().t0;
    for (std::size_t n = 0; n < n_max; ++n) {
        Measurement a = oracle.measure(n);
        out.measurements.push_back(a);
        out.path.segments.push_back(calculate_path(
            model, a.value, model_control, t0 + lambda * static_cast<double>(n), lambda));
    }
    return out;
}

// ---- measure / control / predict --------------------------------------

using Chooser = std::function<Vec(const Measurement&, std::size_t)>;

struct ControlPredictResult {
    std::vector<Measurement> measurements;
    std::vector<Vec> controls;  // control stream, one per step
    DisjointPath path;
};

// Control loop: measure, choose a control anchored at the measurement,
// actuate it for the coming step, and predict the window under that control.
inline ControlPredictResult measure_control_predict(OracleSession& oracle,
                                                    const ModelSpec& model,
                                                    const Chooser& choose,
                                                    std::size_t n_max) {
    ControlPredictResult out;
    double lambda = oracle.config().lambda;
    double t0 = oracle.truth().trajectory().t0;
    for (std::size_t n = 0; n < n_max; ++n) {
        Measurement a = oracle.measure(n);
        Vec b = choose(a, n);
        oracle.actuate(a, b);
        out.measurements.push_back(a);
        out.controls.push_back(b);
        out.path.segments.push_back(calculate_path(
            model, a.value, b, t0 + lambda * static_cast<double>(n), lambda));
    }
    return out;
}

// ---- measure / control-algorithm / predict -----------------------------

struct TimedControl {
    Vec control;
    double cost_s = 0.0;  // declared running time of the choice, in seconds
};

using TimedChooser = std::function<TimedControl(const Measurement&, std::size_t)>;

enum class BudgetMode {
    Simulated,  // trust the chooser's declared cost (deterministic)
    WallClock,  // measure the actual call duration
};

struct AlgorithmPredictResult {
    std::vector<Measurement> measurements;
    std::vector<Vec> controls;
    std::vector<double> costs;
    std::vector<std::size_t> over_budget;  // steps whose choice exceeded lambda
    DisjointPath path;
};

// As measure_control_predict, but the chooser is a digital algorithm that
// must finish within the measurement period. Steps that exceed the budget are
// flagged, not aborted: the control still actuates, and the caller decides
// what a late choice means.
inline AlgorithmPredictResult measure_control_algorithm_predict(
    OracleSession& oracle, const ModelSpec& model, const TimedChooser& choose,
    std::size_t n_max, BudgetMode mode = BudgetMode::Simulated) {
    AlgorithmPredictResult out;
    double lambda = oracle.config().lambda;
    double t0 = oracle.truth().trajectory().t0;
    for (std::size_t n = 0; n < n_max; ++n) {
        Measurement a = oracle.measure(n);
        auto wall_start = std::chrono::steady_clock::now();
        TimedControl tc = choose(a, n);
        if (mode == BudgetMode::WallClock) {
            tc.cost_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                      wall_start)
                            .count();
        }
        oracle.actuate(a, tc.control);
        if (tc.cost_s > lambda) out.over_budget.push_back(n);
        out.measurements.push_back(a);
        out.controls.push_back(tc.control);
        out.costs.push_back(tc.cost_s);
        out.path.segments.push_back(calculate_path(
            model, a.value, tc.control, t0 + lambda * static_cast<double>(n), lambda));
    }
    return out;
}

// ---- single-window property check --------------------------------------

// Empirical check of the one-window property: starts a ∈ region, true starts
// anywhere strictly inside the epsilon-ball of a, model path from a, truth
// from the perturbed start, both under the held control. Reports the largest
// observed divergence over the window and whether it stayed below eta.
struct LeeCheck {
    ModelSpec model;
    TruthPlant plant;
    Vec control;
    double lambda = 0.0;
    double epsilon = 0.0;
    double eta = 0.0;
    Zone region;
    std::size_t n_samples = 100;
    std::uint64_t seed = 0;
    MetricSpec metric;
    double fine_dt = 0.0;  // 0 selects the model's integrator step
};

struct LeeReport {
    bool holds = false;
    double eta_observed = 0.0;
    std::size_t n_samples = 0;
    // worst sample
    Vec worst_anchor;
    Vec worst_start;
    double worst_t = 0.0;
};

inline Vec sample_zone_point(const Zone& region, Rng& rng, const MetricSpec& m) {
    auto bounds = zone_bounds(region, m);
    if (!bounds) throw ConfigError("check_lee_property: region has no finite bounds");
    for (int tries = 0; tries < 10000; ++tries) {
        Vec x(bounds->lo.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = rng.uniform(bounds->lo[i], bounds->hi[i]);
        if (zone_contains(region, x)) return x;
    }
    throw ConfigError("check_lee_property: could not sample a point in the region");
}

inline LeeReport check_lee_property(const LeeCheck& chk) {
    chk.model.validate();
    if (chk.epsilon <= 0.0 || chk.eta <= 0.0 || chk.lambda <= 0.0)
        throw ConfigError("check_lee_property: epsilon, eta, lambda must be positive");
    double fine_dt = chk.fine_dt > 0.0 ? chk.fine_dt : chk.model.integrator_step;

    LeeReport rep;
    rep.n_samples = chk.n_samples;
    Rng rng = Rng::derive(chk.seed, 0x1EEu);
    for (std::size_t s = 0; s < chk.n_samples; ++s) {
        Vec a = sample_zone_point(chk.region, rng, chk.metric);
        Vec offset = sample_ball(rng, a.size(), chk.epsilon * (1.0 - 1e-12),
                                 chk.metric.weights);
        Vec start(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) start[i] = a[i] + offset[i];

        PathSegment y = calculate_path(chk.model, a, chk.control, 0.0, chk.lambda);
        TruthSession truth(chk.plant, start, 0.0, fine_dt,
                           hash_combine(chk.seed, 0xF00Du + s));
        truth.set_control(chk.control);
        truth.advance_to(chk.lambda);

        for (std::size_t k = 0; k < y.sample_count(); ++k) {
            double t = y.sample_time(k);
            double d = distance(truth.state_at(t), y.samples[k], chk.metric);
            if (d > rep.eta_observed) {
                rep.eta_observed = d;
                rep.worst_anchor = a;
                rep.worst_start = start;
                rep.worst_t = t;
            }
        }
    }
    rep.holds = rep.eta_observed < chk.eta;
    return rep;
}

}  // namespace adsim
