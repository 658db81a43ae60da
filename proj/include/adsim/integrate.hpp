#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "adsim/common.hpp"

namespace adsim {

// Vector field callback: f(t, x, dx_out). dx_out is pre-sized to x.size().
using Field = std::function<void(double, const Vec&, Vec&)>;

// One classical Runge-Kutta step of size dt, in place.
inline void rk4_step(const Field& f, double t, Vec& x, double dt) {
    const std::size_t n = x.size();
    Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
    f(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    f(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    f(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    f(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Number of fixed steps covering [t0, t1] with nominal step dt. The last step
// shrinks to land exactly on t1; a short trailing sliver (< dt * 1e-9) folds
// into the previous step to keep step counts stable under roundoff.
inline std::size_t step_count(double t0, double t1, double dt) {
    if (dt <= 0.0) throw ConfigError("integrate: step must be positive");
    double span = t1 - t0;
    if (span <= 0.0) return 0;
    double raw = span / dt;
    auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return n == 0 ? 1 : n;
}

// Integrate x' = f over [t0, t1]. `sink(t, x)` is called after every step
// (not for the initial state). Returns the final state.
template <class Sink>
Vec integrate(const Field& f, double t0, Vec x, double t1, double dt, Sink&& sink) {
    std::size_t n = step_count(t0, t1, dt);
    for (std::size_t k = 0; k < n; ++k) {
        double ta = t0 + static_cast<double>(k) * dt;
        double tb = (k + 1 == n) ? t1 : ta + dt;
        rk4_step(f, ta, x, tb - ta);
        sink(tb, x);
    }
    return x;
}

inline Vec integrate(const Field& f, double t0, Vec x, double t1, double dt) {
    return integrate(f, t0, std::move(x), t1, dt, [](double, const Vec&) {});
}

}  // namespace adsim
