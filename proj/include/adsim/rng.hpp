#pragma once

#include <cmath>
#include <cstdint>

#include "adsim/common.hpp"

namespace adsim {

// splitmix64. Every random draw in a run is derived from the run seed by
// hashing, never by a shared mutable stream, so results do not depend on the
// order in which components happen to ask for randomness.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Small counter-based generator seeded by hashing tags together.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

    static Rng derive(std::uint64_t seed, std::uint64_t tag) {
        return Rng(hash_combine(seed, tag));
    }
    static Rng derive(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2) {
        return Rng(hash_combine(hash_combine(seed, tag1), tag2));
    }
    static Rng derive(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2,
                      std::uint64_t tag3) {
        return Rng(hash_combine(hash_combine(hash_combine(seed, tag1), tag2), tag3));
    }

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform in [-1, 1].
    double symmetric() { return 2.0 * uniform01() - 1.0; }

    double gaussian() {
        // Box-Muller; u1 bounded away from 0.
        double u1 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::uint64_t state_;
};

// Uniform draw from the open ball of the given radius, in the metric whose
// axis weights are `weights` (distance^2 = sum w_i * d_i^2). Returned as an
// offset vector. weights empty means unit weights.
inline Vec sample_ball(Rng& rng, std::size_t dim, double radius, const Vec& weights = {}) {
    if (!weights.empty()) require_dim("sample_ball weights", dim, weights.size());
    Vec dir(dim, 0.0);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        dir[i] = rng.gaussian();
        norm2 += dir[i] * dir[i];
    }
    double norm = std::sqrt(norm2);
    if (norm < 1e-300) norm = 1.0;
    // radius scaled by u^(1/dim) gives the uniform radial law; the extra
    // (1 - 2^-40) keeps the draw strictly inside the open ball.
    double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(dim)) *
               (1.0 - 0x1.0p-40);
    Vec out(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        double w = weights.empty() ? 1.0 : weights[i];
        out[i] = r * dir[i] / norm / std::sqrt(w);
    }
    return out;
}

}  // namespace adsim
