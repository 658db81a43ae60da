#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsim/common.hpp"
#include "adsim/geometry.hpp"
#include "adsim/modes.hpp"
#include "adsim/path.hpp"
#include "adsim/rng.hpp"

namespace adsim {

// ---- sampling grids ----------------------------------------------------------

// Axis-aligned sampling lattice. An axis with one sample sits at the interval
// midpoint; otherwise samples include both endpoints.
struct GridSpec {
    Vec lo, hi;
    std::vector<std::size_t> counts;

    static GridSpec over(Vec lo, Vec hi, std::vector<std::size_t> counts) {
        GridSpec g{std::move(lo), std::move(hi), std::move(counts)};
        if (g.lo.size() != g.hi.size() || g.lo.size() != g.counts.size())
            throw DimensionError("GridSpec", g.lo.size(), g.counts.size());
        for (std::size_t i = 0; i < g.lo.size(); ++i) {
            if (g.counts[i] == 0) throw ConfigError("GridSpec: zero samples on an axis");
            if (g.hi[i] < g.lo[i]) throw ConfigError("GridSpec: hi below lo");
        }
        return g;
    }

    std::size_t dim() const { return lo.size(); }

    std::size_t total() const {
        std::size_t t = 1;
        for (auto c : counts) t *= c;
        return t;
    }

    double coord(std::size_t axis, std::size_t idx) const {
        if (counts[axis] == 1) return 0.5 * (lo[axis] + hi[axis]);
        return lo[axis] + (hi[axis] - lo[axis]) * static_cast<double>(idx) /
                              static_cast<double>(counts[axis] - 1);
    }

    // Visits every lattice point; the Vec passed to fn is reused.
    template <class Fn>
    void for_each(Fn&& fn) const {
        std::vector<std::size_t> idx(dim(), 0);
        Vec x(dim());
        for (std::size_t i = 0; i < dim(); ++i) x[i] = coord(i, 0);
        for (;;) {
            fn(const_cast<const Vec&>(x));
            std::size_t axis = 0;
            while (axis < dim()) {
                idx[axis] += 1;
                if (idx[axis] < counts[axis]) {
                    x[axis] = coord(axis, idx[axis]);
                    break;
                }
                idx[axis] = 0;
                x[axis] = coord(axis, 0);
                axis += 1;
            }
            if (axis == dim()) return;
        }
    }
};

// ---- selection compatibility ---------------------------------------------------

// Grid evidence against a claimed selection arrangement:
//  - soundness: wherever a selection fires, the point lies in its target's
//    precondition (with the given clearance margin);
//  - coverage: every point of the source set fires at least one selection,
//    with the support still holding at the coverage margin.
struct CompatWitness {
    Vec point;
    std::size_t selection = 0;  // offending selection (soundness only)
    std::string what;
};

struct CompatReport {
    bool sound = true;
    bool covered = true;
    std::optional<CompatWitness> unsound_witness;
    std::optional<CompatWitness> uncovered_witness;
    std::size_t points_checked = 0;

    bool ok() const { return sound && covered; }
};

inline CompatReport check_compat(
    const std::vector<SelectionFunction>& selections, const Zone& source,
    const std::function<const Zone*(const TripleId&)>& pre_of, const GridSpec& grid,
    const MetricSpec& metric = {}, double sound_margin = 0.0,
    double cover_margin = 0.0) {
    std::vector<const Zone*> pres(selections.size(), nullptr);
    for (std::size_t i = 0; i < selections.size(); ++i) {
        pres[i] = pre_of(selections[i].target);
        if (pres[i] == nullptr)
            throw ConfigError("check_compat: no precondition for target " +
                              selections[i].target.str());
    }
    CompatReport rep;
    grid.for_each([&](const Vec& x) {
        rep.points_checked += 1;
        if (!rep.sound && !rep.covered) return;
        bool in_source = zone_contains(source, x, 0.0, metric);
        bool covered_here = false;
        for (std::size_t i = 0; i < selections.size(); ++i) {
            bool fires = zone_contains(selections[i].support, x, 0.0, metric);
            if (fires && rep.sound &&
                !zone_contains(*pres[i], x, sound_margin, metric)) {
                rep.sound = false;
                rep.unsound_witness = CompatWitness{
                    x, i,
                    "selection " + std::to_string(i) + " toward " +
                        selections[i].target.str() + " fires at " + vec_to_string(x) +
                        " outside that precondition (margin " +
                        std::to_string(sound_margin) + ")"};
            }
            if (in_source && !covered_here &&
                zone_contains(selections[i].support, x, cover_margin, metric))
                covered_here = true;
        }
        if (in_source && !covered_here && rep.covered) {
            rep.covered = false;
            rep.uncovered_witness = CompatWitness{
                x, 0,
                "no selection covers " + vec_to_string(x) + " (margin " +
                    std::to_string(cover_margin) + ")"};
        }
    });
    return rep;
}

// Completeness of one vertex: its postcondition is compactly covered by the
// preconditions of its successors, through sound selections. End triples are
// vacuously complete.
struct CompletenessReport {
    TripleId id;
    bool complete = false;
    bool vacuous = false;  // end triple
    CompatReport compat;
};

inline CompletenessReport completeness_at(const ModeTable& table, const TripleId& id,
                                          const GridSpec& grid,
                                          double sound_margin = 0.0,
                                          double cover_margin = 0.0) {
    CompletenessReport rep;
    rep.id = id;
    const Triple& tri = table.triple(id);
    if (tri.is_end) {
        rep.complete = true;
        rep.vacuous = true;
        return rep;
    }
    static const std::vector<SelectionFunction> kNone;
    const auto* sels = table.selections(id);
    auto pre_of = [&table](const TripleId& t) -> const Zone* {
        for (const auto& tr : table.triples)
            if (tr.id == t) return &tr.pre;
        return nullptr;
    };
    rep.compat = check_compat(sels ? *sels : kNone, tri.post, pre_of, grid,
                              table.metric, sound_margin, cover_margin);
    rep.complete = rep.compat.ok();
    return rep;
}

namespace grid_detail {

inline void collect_axis_edges(const Zone& z, const MetricSpec& m,
                               std::vector<std::vector<double>>& edges) {
    switch (z.kind) {
        case Zone::Kind::Box:
            for (std::size_t i = 0; i < z.lo.size() && i < edges.size(); ++i) {
                edges[i].push_back(z.lo[i]);
                edges[i].push_back(z.hi[i]);
            }
            break;
        case Zone::Kind::Ball:
            for (std::size_t i = 0; i < z.center.size() && i < edges.size(); ++i) {
                double r = z.radius / std::sqrt(m.weight(i));
                edges[i].push_back(z.center[i] - r);
                edges[i].push_back(z.center[i] + r);
            }
            break;
        default:
            for (const Zone& c : z.children) collect_axis_edges(c, m, edges);
    }
}

}  // namespace grid_detail

// Synthesises a sampling grid for the completeness check at one vertex. The
// grid spans the post set and every selection support (soundness is judged
// wherever a selection fires, not only on the post). Axes where a support or
// a target precondition has a boundary strictly inside that span carry the
// partition structure, so they are sampled at fine_step up to the cap; the
// remaining axes are slack throughout and contribute five spread samples,
// whose extremes already realise the worst containment depth.
inline GridSpec verification_grid(const ModeTable& table, const TripleId& id,
                                  double fine_step,
                                  std::size_t cap_per_axis = 4096) {
    if (fine_step <= 0.0)
        throw ConfigError("verification_grid: fine_step must be positive");
    const Triple& tri = table.triple(id);
    auto hull = zone_bounds(tri.post, table.metric);
    if (!hull)
        throw ConfigError("verification_grid: unbounded post at " + id.str());
    std::size_t dim = hull->lo.size();

    std::vector<std::vector<double>> edges(dim);
    if (const auto* sels = table.selections(id)) {
        for (const auto& s : *sels) {
            if (auto b = zone_bounds(s.support, table.metric)) {
                for (std::size_t i = 0; i < dim; ++i) {
                    hull->lo[i] = std::min(hull->lo[i], b->lo[i]);
                    hull->hi[i] = std::max(hull->hi[i], b->hi[i]);
                }
            }
            grid_detail::collect_axis_edges(s.support, table.metric, edges);
            for (const auto& tr : table.triples)
                if (tr.id == s.target)
                    grid_detail::collect_axis_edges(tr.pre, table.metric, edges);
        }
    }

    std::vector<std::size_t> counts(dim, 1);
    for (std::size_t i = 0; i < dim; ++i) {
        double width = hull->hi[i] - hull->lo[i];
        if (width <= fine_step * 1e-6) {
            counts[i] = 1;
            continue;
        }
        double tol = 1e-9 * std::max(1.0, std::abs(width));
        bool active = false;
        for (double e : edges[i])
            active = active ||
                     (e > hull->lo[i] + tol && e < hull->hi[i] - tol);
        if (!active) {
            counts[i] = 5;
            continue;
        }
        auto n = static_cast<std::size_t>(std::ceil(width / fine_step)) + 1;
        counts[i] = std::clamp<std::size_t>(n, 2, cap_per_axis);
    }
    return GridSpec::over(std::move(hull->lo), std::move(hull->hi),
                          std::move(counts));
}

// ---- strategy graph --------------------------------------------------------------

struct StrategyGraph {
    std::vector<TripleId> vertices;
    std::map<TripleId, std::vector<TripleId>> edges;
    std::map<TripleId, bool> complete;
    std::vector<TripleId> starts;
    std::vector<TripleId> ends;

    bool is_end(const TripleId& v) const {
        for (const auto& e : ends)
            if (e == v) return true;
        return false;
    }
};

// Edges follow the strategy's selection targets, but only out of vertices the
// completeness predicate accepts: an incomplete vertex cannot promise any
// handoff.
inline StrategyGraph build_strategy_graph(
    const ModeTable& table, const std::function<bool(const TripleId&)>& is_complete) {
    StrategyGraph g;
    for (const auto& tri : table.triples) {
        g.vertices.push_back(tri.id);
        g.complete[tri.id] = tri.is_end ? true : is_complete(tri.id);
        if (tri.is_start) g.starts.push_back(tri.id);
        if (tri.is_end) g.ends.push_back(tri.id);
        auto& out = g.edges[tri.id];
        if (!g.complete[tri.id] || tri.is_end) continue;
        if (const auto* sels = table.selections(tri.id)) {
            for (const auto& sf : *sels) {
                bool dup = false;
                for (const auto& t : out) dup = dup || t == sf.target;
                if (!dup) out.push_back(sf.target);
            }
        }
    }
    return g;
}

// ---- path verification -------------------------------------------------------------

struct VerifyCounterexample {
    enum class Kind { DeadEnd, EndFreeCycle };
    Kind kind = Kind::DeadEnd;
    std::vector<TripleId> path;  // from a start to the dead end / around the cycle

    std::string describe() const {
        std::string s = kind == Kind::DeadEnd ? "dead end: " : "end-free cycle: ";
        for (std::size_t i = 0; i < path.size(); ++i)
            s += (i ? " -> " : "") + path[i].str();
        return s;
    }
};

struct VerifyReport {
    bool verified = false;
    std::optional<VerifyCounterexample> counterexample;
    std::size_t vertices_visited = 0;
};

// A strategy is verified when every maximal path from every start reaches an
// end triple: no reachable dead ends, no reachable cycles that avoid every
// end. Depth-first search with stack colouring; end vertices absorb.
inline VerifyReport verify_strategy(const StrategyGraph& g) {
    if (g.starts.empty()) throw ConfigError("verify: strategy has no start triple");
    enum class Color { White, Gray, Black };
    std::map<TripleId, Color> color;
    for (const auto& v : g.vertices) color[v] = Color::White;
    VerifyReport rep;
    std::vector<TripleId> path;

    std::function<std::optional<VerifyCounterexample>(const TripleId&)> visit =
        [&](const TripleId& v) -> std::optional<VerifyCounterexample> {
        rep.vertices_visited += 1;
        path.push_back(v);
        if (g.is_end(v)) {
            color[v] = Color::Black;
            path.pop_back();
            return std::nullopt;
        }
        auto it = g.edges.find(v);
        if (it == g.edges.end() || it->second.empty()) {
            VerifyCounterexample cx;
            cx.kind = VerifyCounterexample::Kind::DeadEnd;
            cx.path = path;
            path.pop_back();
            return cx;
        }
        color[v] = Color::Gray;
        for (const auto& succ : it->second) {
            auto cit = color.find(succ);
            if (cit == color.end())
                throw ConfigError("verify: edge to unknown triple " + succ.str());
            if (cit->second == Color::Gray) {
                VerifyCounterexample cx;
                cx.kind = VerifyCounterexample::Kind::EndFreeCycle;
                auto at = std::find(path.begin(), path.end(), succ);
                cx.path.assign(at, path.end());
                cx.path.push_back(succ);
                path.pop_back();
                return cx;
            }
            if (cit->second == Color::Black) continue;
            if (auto cx = visit(succ)) {
                color[v] = Color::Black;
                path.pop_back();
                return cx;
            }
        }
        color[v] = Color::Black;
        path.pop_back();
        return std::nullopt;
    };

    for (const auto& s : g.starts) {
        if (color.find(s) == color.end())
            throw ConfigError("verify: unknown start triple " + s.str());
        if (auto cx = visit(s)) {
            rep.counterexample = std::move(cx);
            return rep;
        }
    }
    rep.verified = true;
    return rep;
}

// ---- prediction trust near the chart edge --------------------------------------------

// Anchors whose one-step prediction, started anywhere in the measurement ball,
// comes within eta of the chart boundary (or leaves it). Starts tested per
// anchor: the anchor itself, the per-axis ball extremes, and random samples.
struct BadSetConfig {
    ModelSpec model;
    Vec control;  // held for the predicted step
    double lambda = 0.0;
    double epsilon = 0.0;
    double eta = 0.0;
    Zone chart;
    GridSpec grid;
    std::size_t random_per_anchor = 8;
    std::uint64_t seed = 1;
    MetricSpec metric;
};

struct BadSet {
    std::vector<Vec> anchors;
    std::size_t checked = 0;
};

inline BadSet compute_bad_set(const BadSetConfig& cfg) {
    cfg.model.validate();
    if (cfg.lambda <= 0.0) throw ConfigError("bad set: lambda must be positive");
    if (cfg.epsilon <= 0.0 || cfg.eta <= 0.0)
        throw ConfigError("bad set: epsilon and eta must be positive");
    BadSet out;
    const double r = cfg.epsilon * (1.0 - 1e-9);
    std::size_t anchor_index = 0;
    cfg.grid.for_each([&](const Vec& a) {
        out.checked += 1;
        anchor_index += 1;
        if (!zone_contains(cfg.chart, a, 0.0, cfg.metric)) return;

        auto risky = [&](const Vec& start) {
            PathSegment seg =
                calculate_path(cfg.model, start, cfg.control, 0.0, cfg.lambda);
            for (const auto& x : seg.samples)
                if (!zone_contains(cfg.chart, x, cfg.eta, cfg.metric)) return true;
            return false;
        };

        bool bad = risky(a);
        for (std::size_t i = 0; i < a.size() && !bad; ++i) {
            double scale = r / std::sqrt(cfg.metric.weight(i));
            Vec s = a;
            s[i] = a[i] + scale;
            bad = risky(s);
            if (!bad) {
                s[i] = a[i] - scale;
                bad = risky(s);
            }
        }
        if (!bad && cfg.random_per_anchor > 0) {
            Rng rng = Rng::derive(cfg.seed, 0xBAD5u, anchor_index);
            for (std::size_t k = 0; k < cfg.random_per_anchor && !bad; ++k) {
                Vec off = sample_ball(rng, a.size(), r, cfg.metric.weights);
                Vec s = a;
                for (std::size_t i = 0; i < s.size(); ++i) s[i] += off[i];
                bad = risky(s);
            }
        }
        if (bad) out.anchors.push_back(a);
    });
    return out;
}

// The avoidance region actually enforced: the declared set inside the chart,
// plus every untrusted anchor cell that is not explicitly exempted.
inline Zone effective_avoidance(const Zone& declared, const Zone& chart,
                                const BadSet& bad, const GridSpec& grid,
                                const std::optional<Zone>& exempt = std::nullopt,
                                const MetricSpec& metric = {}) {
    std::vector<Zone> parts;
    parts.push_back(Zone::all_of({declared, chart}));
    Vec half(grid.dim());
    for (std::size_t i = 0; i < grid.dim(); ++i) {
        half[i] = grid.counts[i] <= 1
                      ? (grid.hi[i] - grid.lo[i]) * 0.5
                      : 0.5 * (grid.hi[i] - grid.lo[i]) /
                            static_cast<double>(grid.counts[i] - 1);
    }
    for (const auto& a : bad.anchors) {
        if (exempt && zone_contains(*exempt, a, 0.0, metric)) continue;
        Vec lo(a.size()), hi(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            lo[i] = a[i] - half[i];
            hi[i] = a[i] + half[i];
        }
        parts.push_back(Zone::box(lo, hi));
    }
    return Zone::any_of(std::move(parts));
}

}  // namespace adsim
