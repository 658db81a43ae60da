#pragma once

#include <optional>
#include <utility>

#include "adsim/common.hpp"
#include "adsim/geometry.hpp"
#include "adsim/path.hpp"

namespace adsim {

// Eta-tube around a computed path: all (x, t) with d(x, y(t)) strictly below
// eta for some path segment covering t. Boundary points are outside.
struct Tube {
    DisjointPath path;
    double eta = 0.0;
};

inline Tube build_tube(DisjointPath path, double eta) {
    if (eta <= 0.0) throw ConfigError("build_tube: eta must be positive");
    if (path.segments.empty()) throw ConfigError("build_tube: empty path");
    return Tube{std::move(path), eta};
}

inline bool tube_contains(const Tube& tube, double t, const Vec& x,
                          const MetricSpec& m = {}) {
    for (const auto& seg : tube.path.segments) {
        if (!seg.covers(t)) continue;
        if (distance(x, seg.value_at(t), m) < tube.eta) return true;
    }
    return false;
}

struct TubeClearance {
    bool clear = true;
    double t = 0.0;  // first offending sample when not clear
    Vec point;
};

// Checks that the tube stays clear of a zone: no sampled centerline point may
// come within eta + extra_margin of the zone. Conservative for unions and
// intersections in the way zone_contains is; sampling is at the path's own
// resolution unless a coarser stride is requested.
inline TubeClearance tube_clear_of_zone(const Tube& tube, const Zone& zone,
                                        const MetricSpec& m = {},
                                        double extra_margin = 0.0,
                                        std::size_t sample_stride = 1) {
    if (sample_stride == 0) sample_stride = 1;
    for (const auto& seg : tube.path.segments) {
        for (std::size_t k = 0; k < seg.sample_count(); k += sample_stride) {
            const Vec& c = seg.samples[k];
            if (zone_contains(zone, c, -(tube.eta + extra_margin), m))
                return TubeClearance{false, seg.sample_time(k), c};
        }
        // the final sample always participates regardless of stride
        const Vec& last = seg.samples.back();
        if (zone_contains(zone, last, -(tube.eta + extra_margin), m))
            return TubeClearance{false, seg.t_end, last};
    }
    return TubeClearance{};
}

}  // namespace adsim
