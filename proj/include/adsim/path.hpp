#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "adsim/common.hpp"
#include "adsim/geometry.hpp"
#include "adsim/integrate.hpp"

namespace adsim {

// Digital model of the dynamics: a control-parameterised field integrated
// with fixed-step RK4. This is the agent's model, distinct from the plant.
struct ModelSpec {
    std::size_t state_dim = 0;
    std::size_t control_dim = 0;
    // field(t, x, p, dx): dx pre-sized and zeroed.
    std::function<void(double, const Vec&, const Vec&, Vec&)> field;
    double integrator_step = 0.0;

    void validate() const {
        if (integrator_step <= 0.0)
            throw ConfigError("model: integrator_step must be positive");
        if (!field) throw ConfigError("model: field is not set");
    }
};

// One computed path over a window [t_start, t_end], sampled at the model's
// integrator step. samples[0] is the anchor (the measured start).
struct PathSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double sample_dt = 0.0;
    Vec control;
    std::vector<Vec> samples;

    std::size_t sample_count() const { return samples.size(); }

    double sample_time(std::size_t k) const {
        double t = t_start + sample_dt * static_cast<double>(k);
        return t > t_end ? t_end : t;
    }

    bool covers(double t) const { return t >= t_start - 1e-9 && t <= t_end + 1e-9; }

    Vec value_at(double t) const {
        if (samples.empty()) throw Error("PathSegment::value_at: empty segment");
        if (!covers(t))
            throw Error("PathSegment::value_at: t outside [" + std::to_string(t_start) +
                        ", " + std::to_string(t_end) + "]");
        double pos = (t - t_start) / sample_dt;
        auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
        if (k >= samples.size() - 1) return samples.back();
        double frac = pos - static_cast<double>(k);
        if (frac < 1e-9) return samples[k];
        Vec out(samples[k].size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = samples[k][i] + frac * (samples[k + 1][i] - samples[k][i]);
        return out;
    }
};

// Computed path from anchor a under held control b over [t0, t0 + lambda].
inline PathSegment calculate_path(const ModelSpec& model, const Vec& a, const Vec& b,
                                  double t0, double lambda) {
    model.validate();
    require_dim("calculate_path state", model.state_dim, a.size());
    require_dim("calculate_path control", model.control_dim, b.size());
    if (lambda <= 0.0) throw ConfigError("calculate_path: lambda must be positive");

    PathSegment seg;
    seg.t_start = t0;
    seg.t_end = t0 + lambda;
    seg.sample_dt = model.integrator_step;
    seg.control = b;
    seg.samples.push_back(a);

    Field f = [&model, &b](double t, const Vec& x, Vec& dx) {
        std::fill(dx.begin(), dx.end(), 0.0);
        model.field(t, x, b, dx);
    };
    integrate(f, t0, a, seg.t_end, model.integrator_step,
              [&seg](double, const Vec& x) { seg.samples.push_back(x); });
    return seg;
}

// Disjoint union of per-step computed paths. Consecutive segments may
// disagree at the shared boundary time (each step re-anchors on a fresh
// measurement); both endpoint samples are kept and queryable.
struct DisjointPath {
    std::vector<PathSegment> segments;

    double t_start() const { return segments.empty() ? 0.0 : segments.front().t_start; }
    double t_end() const { return segments.empty() ? 0.0 : segments.back().t_end; }

    // All segment values at time t (two at interior boundaries).
    std::vector<Vec> values_at(double t) const {
        std::vector<Vec> out;
        for (const auto& s : segments)
            if (s.covers(t)) out.push_back(s.value_at(t));
        if (out.empty()) throw Error("DisjointPath::values_at: t not covered");
        return out;
    }

    // Jump sizes at interior boundaries, for continuity diagnostics.
    std::vector<double> boundary_gaps(const MetricSpec& m = {}) const {
        std::vector<double> gaps;
        for (std::size_t i = 0; i + 1 < segments.size(); ++i)
            gaps.push_back(distance(segments[i].samples.back(),
                                    segments[i + 1].samples.front(), m));
        return gaps;
    }
};

}  // namespace adsim
