#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "adsim/common.hpp"

namespace adsim {

// Weighted Euclidean metric: d(a,b)^2 = sum_i w_i (a_i - b_i)^2.
// Weights let one state vector mix units (metres, km/h, fuel) while keeping a
// single scalar measurement error bound.
struct MetricSpec {
    Vec weights;  // empty = unit weights for any dimension

    double weight(std::size_t axis) const {
        return weights.empty() ? 1.0 : weights.at(axis);
    }
};

inline double distance(const Vec& a, const Vec& b, const MetricSpec& m = {}) {
    require_dim("distance", a.size(), b.size());
    if (!m.weights.empty()) require_dim("distance weights", a.size(), m.weights.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += m.weight(i) * d * d;
    }
    return std::sqrt(s);
}

// Region of state space. Boxes and balls are the primitives; union,
// intersection and complement build the rest. Balls live in a weighted
// metric supplied at query time.
struct Zone {
    enum class Kind { Box, Ball, Union, Intersection, Complement };

    Kind kind = Kind::Box;
    Vec lo, hi;           // Box
    Vec center;           // Ball
    double radius = 0.0;  // Ball
    std::vector<Zone> children;  // Union / Intersection / Complement(1)

    static Zone box(Vec lo, Vec hi) {
        require_dim("Zone::box", lo.size(), hi.size());
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (lo[i] > hi[i])
                throw ConfigError("Zone::box: lo > hi on axis " + std::to_string(i));
        Zone z;
        z.kind = Kind::Box;
        z.lo = std::move(lo);
        z.hi = std::move(hi);
        return z;
    }

    static Zone ball(Vec center, double radius) {
        if (radius < 0.0) throw ConfigError("Zone::ball: negative radius");
        Zone z;
        z.kind = Kind::Ball;
        z.center = std::move(center);
        z.radius = radius;
        return z;
    }

    static Zone any_of(std::vector<Zone> zs) {
        Zone z;
        z.kind = Kind::Union;
        z.children = std::move(zs);
        return z;
    }

    static Zone all_of(std::vector<Zone> zs) {
        Zone z;
        z.kind = Kind::Intersection;
        z.children = std::move(zs);
        return z;
    }

    static Zone outside(Zone inner) {
        Zone z;
        z.kind = Kind::Complement;
        z.children.push_back(std::move(inner));
        return z;
    }
};

namespace detail {

// Depth of x inside a box under the metric: positive inside (distance to the
// nearest face), negative outside (distance to the box).
inline double box_depth(const Zone& z, const Vec& x, const MetricSpec& m) {
    require_dim("zone box", z.lo.size(), x.size());
    bool inside = true;
    double min_face = std::numeric_limits<double>::infinity();
    double out2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double w = std::sqrt(m.weight(i));
        if (x[i] < z.lo[i]) {
            inside = false;
            double d = (z.lo[i] - x[i]) * w;
            out2 += d * d;
        } else if (x[i] > z.hi[i]) {
            inside = false;
            double d = (x[i] - z.hi[i]) * w;
            out2 += d * d;
        } else {
            min_face = std::min(min_face, std::min(x[i] - z.lo[i], z.hi[i] - x[i]) * w);
        }
    }
    return inside ? min_face : -std::sqrt(out2);
}

inline double ball_depth(const Zone& z, const Vec& x, const MetricSpec& m) {
    return z.radius - distance(x, z.center, m);
}

}  // namespace detail

// Signed depth of x in the zone: positive inside (distance to the boundary),
// negative outside (distance to the zone). Exact for boxes, balls, and their
// complements. For unions (max of children) and intersections (min of
// children) the positive side may under-report true depth when children
// overlap, never over-report it; the negative side is exact for unions and
// may over-report proximity for intersections. Both slants are the safe
// direction for clearance checks.
inline double zone_depth(const Zone& z, const Vec& x, const MetricSpec& m = {}) {
    switch (z.kind) {
        case Zone::Kind::Box:
            return detail::box_depth(z, x, m);
        case Zone::Kind::Ball:
            return detail::ball_depth(z, x, m);
        case Zone::Kind::Union: {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& c : z.children) best = std::max(best, zone_depth(c, x, m));
            return best;
        }
        case Zone::Kind::Intersection: {
            if (z.children.empty()) return -std::numeric_limits<double>::infinity();
            double worst = std::numeric_limits<double>::infinity();
            for (const auto& c : z.children) worst = std::min(worst, zone_depth(c, x, m));
            return worst;
        }
        case Zone::Kind::Complement:
            return -zone_depth(z.children.at(0), x, m);
    }
    return -std::numeric_limits<double>::infinity();
}

// Signed-margin membership. margin > 0 asks "is the point at least margin
// deep inside the zone"; margin < 0 grows the zone by |margin|.
inline bool zone_contains(const Zone& z, const Vec& x, double margin = 0.0,
                          const MetricSpec& m = {}) {
    return zone_depth(z, x, m) >= margin;
}

// Axis-aligned bounding box, when one exists (complements are unbounded).
struct BoundsBox {
    Vec lo, hi;
};

inline std::optional<BoundsBox> zone_bounds(const Zone& z, const MetricSpec& m = {}) {
    switch (z.kind) {
        case Zone::Kind::Box:
            return BoundsBox{z.lo, z.hi};
        case Zone::Kind::Ball: {
            Vec lo = z.center, hi = z.center;
            for (std::size_t i = 0; i < z.center.size(); ++i) {
                double r = z.radius / std::sqrt(m.weight(i));
                lo[i] -= r;
                hi[i] += r;
            }
            return BoundsBox{lo, hi};
        }
        case Zone::Kind::Union: {
            std::optional<BoundsBox> acc;
            for (const auto& c : z.children) {
                auto b = zone_bounds(c, m);
                if (!b) return std::nullopt;
                if (!acc) {
                    acc = b;
                } else {
                    for (std::size_t i = 0; i < acc->lo.size(); ++i) {
                        acc->lo[i] = std::min(acc->lo[i], b->lo[i]);
                        acc->hi[i] = std::max(acc->hi[i], b->hi[i]);
                    }
                }
            }
            return acc;
        }
        case Zone::Kind::Intersection: {
            // The tightest child box bounds the intersection.
            std::optional<BoundsBox> acc;
            for (const auto& c : z.children) {
                auto b = zone_bounds(c, m);
                if (!b) continue;
                if (!acc) {
                    acc = b;
                } else {
                    for (std::size_t i = 0; i < acc->lo.size(); ++i) {
                        acc->lo[i] = std::max(acc->lo[i], b->lo[i]);
                        acc->hi[i] = std::min(acc->hi[i], b->hi[i]);
                    }
                }
            }
            return acc;
        }
        case Zone::Kind::Complement:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace adsim
