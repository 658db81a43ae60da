#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "adsim/boat.hpp"
#include "adsim/engine.hpp"
#include "adsim/loops.hpp"
#include "adsim/probe.hpp"
#include "adsim/racing.hpp"
#include "adsim/trace.hpp"
#include "adsim/verifier.hpp"

// Scenario configuration files. A config is a JSON object whose "scenario"
// key picks the family:
//
//   racing | boat | probe   built-in case studies; "params" overrides the
//                           compiled-in defaults field by field
//   table                   an explicit mode table (zones, triples, strategy
//                           edges with selection boxes), for the verifier
//   toy                     a bare plant plus property checks, no mode table
//
// Any config may carry "seed" (default run seed), "verify" (grid step and
// clearance margins) and "lee" (named one-window property checks). Unknown
// keys are rejected so typos fail loudly instead of silently keeping a
// default. docs/config_format.md walks the full schema.

namespace adsim {

namespace config_detail {

inline void expect_object(const Json& j, const std::string& where) {
    if (!j.is_object())
        throw ConfigError(where + ": expected a JSON object, got " + j.dump());
}

inline void reject_unknown_keys(const Json& j, const std::string& where,
                                std::initializer_list<const char*> allowed) {
    expect_object(j, where);
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known)
            throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
    }
}

inline Vec vec_from_json(const Json& j, const std::string& where) {
    if (!j.is_array())
        throw ConfigError(where + ": expected an array of numbers");
    Vec v;
    for (const auto& x : j) {
        if (!x.is_number())
            throw ConfigError(where + ": expected an array of numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

}  // namespace config_detail

inline Zone zone_from_json(const Json& j) {
    using config_detail::vec_from_json;
    config_detail::expect_object(j, "zone");
    if (j.size() != 1)
        throw ConfigError("zone: expected exactly one of box/ball/any_of/all_of/outside");
    if (j.contains("box")) {
        const Json& b = j["box"];
        config_detail::reject_unknown_keys(b, "zone.box", {"lo", "hi"});
        return Zone::box(vec_from_json(b.at("lo"), "zone.box.lo"),
                         vec_from_json(b.at("hi"), "zone.box.hi"));
    }
    if (j.contains("ball")) {
        const Json& b = j["ball"];
        config_detail::reject_unknown_keys(b, "zone.ball", {"center", "radius"});
        return Zone::ball(vec_from_json(b.at("center"), "zone.ball.center"),
                          b.at("radius").get<double>());
    }
    auto list = [&](const char* key) {
        std::vector<Zone> zs;
        for (const auto& c : j[key]) zs.push_back(zone_from_json(c));
        return zs;
    };
    if (j.contains("any_of")) return Zone::any_of(list("any_of"));
    if (j.contains("all_of")) return Zone::all_of(list("all_of"));
    if (j.contains("outside")) return Zone::outside(zone_from_json(j["outside"]));
    throw ConfigError("zone: unknown kind in " + j.dump());
}

// ---- toy plants -------------------------------------------------------

// Minimal fields for property checks: "static" holds still, "growth" is the
// canonical expanding field dx_i = rate * x_i. Control adds directly into the
// derivative on every axis.
struct ToyPlantSpec {
    std::string kind = "static";  // static | growth
    double rate = 1.0;            // growth only
    std::size_t dim = 1;
    double disturbance = 0.0;
};

inline TruthPlant toy_plant(const ToyPlantSpec& s) {
    if (s.kind != "static" && s.kind != "growth")
        throw ConfigError("toy plant: unknown kind \"" + s.kind + "\"");
    if (s.dim == 0) throw ConfigError("toy plant: dim must be positive");
    TruthPlant p;
    p.state_dim = s.dim;
    p.control_dim = s.dim;
    if (s.kind == "growth") {
        double rate = s.rate;
        p.drift = [rate](double, const Vec& x, Vec& dx) {
            for (std::size_t i = 0; i < x.size(); ++i) dx[i] = rate * x[i];
        };
    } else {
        p.drift = [](double, const Vec&, Vec&) {};
    }
    p.control_term = [](double, const Vec&, const Vec& c, Vec& dx) {
        for (std::size_t i = 0; i < c.size() && i < dx.size(); ++i) dx[i] += c[i];
    };
    p.admissible = [](const Vec&, const Vec&) { return std::optional<std::string>{}; };
    p.disturbance_amplitude = Vec(s.dim, s.disturbance);
    return p;
}

inline ModelSpec toy_model(const ToyPlantSpec& s, double integrator_step) {
    TruthPlant p = toy_plant(s);
    ModelSpec m;
    m.state_dim = s.dim;
    m.control_dim = s.dim;
    m.integrator_step = integrator_step;
    auto drift = p.drift;
    auto control = p.control_term;
    m.field = [drift, control](double t, const Vec& x, const Vec& c, Vec& dx) {
        drift(t, x, dx);
        control(t, x, c, dx);
    };
    return m;
}

// ---- loaded configuration ----------------------------------------------

struct LeeSetup {
    std::string name;
    LeeCheck check;
};

struct NamedTable {
    std::string name;
    ModeTable table;
};

struct VerifySettings {
    double grid_step = 0.1;
    double sound_margin = 0.0;
    double cover_margin = 0.0;
    std::size_t cap_per_axis = 4096;
};

struct LoadedConfig {
    std::string kind;
    std::string name;
    std::uint64_t default_seed = 1;
    // Runnable scenarios rebuild per seed (start positions and per-run coins
    // derive from it); empty for table/toy configs.
    std::function<ScenarioSpec(std::uint64_t)> make_spec;
    std::vector<NamedTable> tables;
    VerifySettings verify;
    std::vector<LeeSetup> lee;
    std::vector<std::string> notes;
};

namespace config_detail {

template <typename Params>
inline Params params_from_json(const Json& j, const std::string& where,
                               const std::map<std::string, double Params::*>& fields) {
    Params p;
    if (j.is_null()) return p;
    expect_object(j, where);
    for (const auto& item : j.items()) {
        auto it = fields.find(item.key());
        if (it == fields.end())
            throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
        if (!item.value().is_number())
            throw ConfigError(where + "." + item.key() + ": expected a number");
        p.*(it->second) = item.value().get<double>();
    }
    return p;
}

inline RacingParams racing_params_from_json(const Json& j) {
    static const std::map<std::string, double RacingParams::*> kFields{
        {"epsilon", &RacingParams::epsilon},
        {"lambda", &RacingParams::lambda},
        {"fine_dt", &RacingParams::fine_dt},
        {"horizon_s", &RacingParams::horizon_s},
        {"cruise", &RacingParams::cruise},
        {"bend_speed", &RacingParams::bend_speed},
        {"ramp_s", &RacingParams::ramp_s},
        {"bend_ramp_s", &RacingParams::bend_ramp_s},
        {"brake_rate", &RacingParams::brake_rate},
        {"accel_max", &RacingParams::accel_max},
        {"overspeed_limit", &RacingParams::overspeed_limit},
        {"timelimit_s", &RacingParams::timelimit_s},
        {"chicane_begin", &RacingParams::chicane_begin},
        {"chicane_end", &RacingParams::chicane_end},
        {"bend1_begin", &RacingParams::bend1_begin},
        {"bend1_end", &RacingParams::bend1_end},
        {"bend2_begin", &RacingParams::bend2_begin},
        {"bend2_end", &RacingParams::bend2_end},
        {"start_spread", &RacingParams::start_spread},
        {"disturbance", &RacingParams::disturbance},
        {"track_length", &RacingParams::track_length}};
    return params_from_json<RacingParams>(j, "params", kFields);
}

inline BoatParams boat_params_from_json(const Json& j) {
    static const std::map<std::string, double BoatParams::*> kFields{
        {"epsilon", &BoatParams::epsilon},
        {"lambda", &BoatParams::lambda},
        {"fine_dt", &BoatParams::fine_dt},
        {"horizon_s", &BoatParams::horizon_s},
        {"island_r", &BoatParams::island_r},
        {"flow", &BoatParams::flow},
        {"motor", &BoatParams::motor},
        {"disturbance", &BoatParams::disturbance},
        {"start_x", &BoatParams::start_x},
        {"start_y", &BoatParams::start_y},
        {"goal_x", &BoatParams::goal_x}};
    return params_from_json<BoatParams>(j, "params", kFields);
}

inline ProbeParams probe_params_from_json(const Json& j) {
    static const std::map<std::string, double ProbeParams::*> kFields{
        {"mu", &ProbeParams::mu},
        {"planet_r", &ProbeParams::planet_r},
        {"orbit_r", &ProbeParams::orbit_r},
        {"fuel0", &ProbeParams::fuel0},
        {"burn_k", &ProbeParams::burn_k},
        {"thrust", &ProbeParams::thrust},
        {"coast_s", &ProbeParams::coast_s},
        {"burn_s", &ProbeParams::burn_s},
        {"thrust_max", &ProbeParams::thrust_max},
        {"epsilon", &ProbeParams::epsilon},
        {"lambda", &ProbeParams::lambda},
        {"fine_dt", &ProbeParams::fine_dt},
        {"horizon_s", &ProbeParams::horizon_s}};
    return params_from_json<ProbeParams>(j, "params", kFields);
}

inline TripleId triple_id_from_json(const Json& j, const std::string& where) {
    reject_unknown_keys(j, where, {"mode", "index"});
    return TripleId{j.at("mode").get<std::string>(), j.at("index").get<int>()};
}

inline Instruction instruction_from_json(const Json& j) {
    expect_object(j, "instruction");
    if (j.size() != 1)
        throw ConfigError("instruction: expected exactly one of wait/speed/halt/vector");
    if (j.contains("wait")) return Instruction::wait(j["wait"].get<double>());
    if (j.contains("speed")) {
        const Json& s = j["speed"];
        reject_unknown_keys(s, "instruction.speed", {"target", "ramp_s"});
        return Instruction::set_target_speed(s.at("target").get<double>(),
                                             s.value("ramp_s", 0.0));
    }
    if (j.contains("halt")) return Instruction::brake_to_halt();
    if (j.contains("vector"))
        return Instruction::set_vector(vec_from_json(j["vector"], "instruction.vector"));
    throw ConfigError("instruction: unknown kind in " + j.dump() +
                      " (loops are not declarable in table configs)");
}

// Explicit table: every zone, triple and strategy edge written out. The modes
// get a zero-control stub controller; these tables feed the verifier, not the
// runtime.
inline ModeTable table_from_json(const Json& cfg) {
    ModeTable table;
    if (cfg.contains("metric")) {
        reject_unknown_keys(cfg["metric"], "metric", {"weights"});
        table.metric.weights = vec_from_json(cfg["metric"].at("weights"),
                                             "metric.weights");
    }
    if (!cfg.contains("modes") || !cfg["modes"].is_array() || cfg["modes"].empty())
        throw ConfigError("table config: \"modes\" must be a non-empty array");
    for (const Json& jm : cfg["modes"]) {
        reject_unknown_keys(jm, "mode", {"name", "chart", "state_dim"});
        ModeSpec m;
        m.name = jm.at("name").get<std::string>();
        m.chart = zone_from_json(jm.at("chart"));
        m.state_dim = jm.at("state_dim").get<std::size_t>();
        m.controller = [dim = m.state_dim](const Vec&, const Command&, double) {
            return Vec(dim, 0.0);
        };
        table.modes.push_back(std::move(m));
    }
    if (!cfg.contains("triples") || !cfg["triples"].is_array() || cfg["triples"].empty())
        throw ConfigError("table config: \"triples\" must be a non-empty array");
    for (const Json& jt : cfg["triples"]) {
        reject_unknown_keys(jt, "triple",
                            {"mode", "index", "start", "end", "pre", "post", "orders"});
        Triple tr;
        tr.id = TripleId{jt.at("mode").get<std::string>(), jt.at("index").get<int>()};
        tr.is_start = jt.value("start", false);
        tr.is_end = jt.value("end", false);
        tr.pre = zone_from_json(jt.at("pre"));
        tr.post = zone_from_json(jt.at("post"));
        if (jt.contains("orders")) {
            const Json& jo = jt["orders"];
            reject_unknown_keys(jo, "orders", {"label", "instructions"});
            tr.orders.name = jo.value("label", "");
            if (jo.contains("instructions"))
                for (const Json& ji : jo["instructions"])
                    tr.orders.instructions.push_back(instruction_from_json(ji));
        }
        table.triples.push_back(std::move(tr));
    }
    if (cfg.contains("strategy")) {
        if (!cfg["strategy"].is_array())
            throw ConfigError("table config: \"strategy\" must be an array");
        for (const Json& js : cfg["strategy"]) {
            reject_unknown_keys(js, "strategy entry", {"from", "edges"});
            TripleId from = triple_id_from_json(js.at("from"), "strategy.from");
            std::vector<SelectionFunction> sels;
            for (const Json& je : js.at("edges")) {
                reject_unknown_keys(je, "strategy edge", {"to", "support"});
                sels.push_back(SelectionFunction{
                    triple_id_from_json(je.at("to"), "strategy.edge.to"),
                    zone_from_json(je.at("support"))});
            }
            table.strategy[from] = std::move(sels);
        }
    }
    return table;
}

inline ToyPlantSpec toy_plant_from_json(const Json& j) {
    ToyPlantSpec s;
    if (j.is_null()) return s;
    reject_unknown_keys(j, "plant", {"kind", "rate", "dim", "disturbance"});
    s.kind = j.value("kind", s.kind);
    s.rate = j.value("rate", s.rate);
    s.dim = j.value("dim", s.dim);
    s.disturbance = j.value("disturbance", s.disturbance);
    return s;
}

inline LeeSetup lee_from_json(const Json& j, const TruthPlant& plant,
                              const ModelSpec& model, std::size_t idx) {
    reject_unknown_keys(j, "lee entry",
                        {"name", "lambda", "epsilon", "eta", "control", "region",
                         "samples", "seed", "integrator_step"});
    LeeSetup out;
    out.name = j.value("name", "check" + std::to_string(idx));
    out.check.plant = plant;
    out.check.model = model;
    if (j.contains("integrator_step"))
        out.check.model.integrator_step = j["integrator_step"].get<double>();
    out.check.lambda = j.at("lambda").get<double>();
    out.check.epsilon = j.at("epsilon").get<double>();
    out.check.eta = j.at("eta").get<double>();
    out.check.control = j.contains("control")
                            ? vec_from_json(j["control"], "lee.control")
                            : plant.zero_control();
    out.check.region = zone_from_json(j.at("region"));
    out.check.n_samples = j.value("samples", std::size_t{100});
    out.check.seed = j.value("seed", std::uint64_t{0});
    return out;
}

}  // namespace config_detail

inline LoadedConfig load_scenario(const Json& cfg) {
    using namespace config_detail;
    expect_object(cfg, "config");
    reject_unknown_keys(cfg, "config",
                        {"scenario", "name", "seed", "params", "verify", "lee",
                         "plant", "metric", "modes", "triples", "strategy"});
    if (!cfg.contains("scenario"))
        throw ConfigError("config: missing \"scenario\"");
    LoadedConfig out;
    out.kind = cfg["scenario"].get<std::string>();
    out.name = cfg.value("name", out.kind);
    out.default_seed = cfg.value("seed", std::uint64_t{1});

    TruthPlant lee_plant;
    ModelSpec lee_model;
    double lee_step = 1e-3;

    if (out.kind == "racing") {
        RacingParams p = racing_params_from_json(cfg.value("params", Json()));
        // Build once to validate the constants and surface warnings.
        ScenarioSpec probe_build = build_racing(p, 0);
        out.notes = probe_build.notes;
        out.make_spec = [p](std::uint64_t seed) { return build_racing(p, seed); };
        out.tables.push_back({"car1", racing_table(p, 0)});
        out.tables.push_back({"car2", racing_table(p, 1)});
        out.verify.sound_margin = 2.0 * p.epsilon;
        out.verify.cover_margin = 2.0 * p.epsilon;
        lee_plant = racing_plant(p);
        lee_step = p.fine_dt;
    } else if (out.kind == "boat") {
        BoatParams p = boat_params_from_json(cfg.value("params", Json()));
        ScenarioSpec probe_build = build_boat(p, 0);
        out.notes = probe_build.notes;
        out.make_spec = [p](std::uint64_t seed) { return build_boat(p, seed); };
        out.tables.push_back({"boat", probe_build.agents.at(0).table});
        out.verify.sound_margin = 2.0 * p.epsilon;
        out.verify.cover_margin = 2.0 * p.epsilon;
        lee_plant = boat_plant(p);
        lee_step = p.fine_dt;
    } else if (out.kind == "probe") {
        ProbeParams p = probe_params_from_json(cfg.value("params", Json()));
        ScenarioSpec probe_build = build_probe(p, 0);
        out.notes = probe_build.notes;
        out.make_spec = [p](std::uint64_t seed) { return build_probe(p, seed); };
        out.tables.push_back({"probe", probe_build.agents.at(0).table});
        out.verify.sound_margin = 2.0 * p.epsilon;
        out.verify.cover_margin = 2.0 * p.epsilon;
        lee_plant = probe_plant(p);
        lee_step = p.fine_dt;
    } else if (out.kind == "table") {
        out.tables.push_back({out.name, table_from_json(cfg)});
    } else if (out.kind == "toy") {
        ToyPlantSpec s = toy_plant_from_json(cfg.value("plant", Json()));
        lee_plant = toy_plant(s);
        lee_model = toy_model(s, lee_step);
    } else {
        throw ConfigError("config: unknown scenario \"" + out.kind + "\"");
    }

    if (cfg.contains("verify")) {
        const Json& jv = cfg["verify"];
        reject_unknown_keys(jv, "verify",
                            {"grid_step", "sound_margin", "cover_margin",
                             "cap_per_axis"});
        out.verify.grid_step = jv.value("grid_step", out.verify.grid_step);
        out.verify.sound_margin = jv.value("sound_margin", out.verify.sound_margin);
        out.verify.cover_margin = jv.value("cover_margin", out.verify.cover_margin);
        out.verify.cap_per_axis = jv.value("cap_per_axis", out.verify.cap_per_axis);
    }

    if (cfg.contains("lee")) {
        if (out.kind == "table")
            throw ConfigError("config: table configs have no plant for lee checks");
        if (lee_model.state_dim == 0) {
            // Case-study plants: the exact field at the scenario's fine step.
            lee_model.state_dim = lee_plant.state_dim;
            lee_model.control_dim = lee_plant.control_dim;
            lee_model.integrator_step = lee_step;
            auto drift = lee_plant.drift;
            auto control = lee_plant.control_term;
            lee_model.field = [drift, control](double t, const Vec& x, const Vec& c,
                                               Vec& dx) {
                drift(t, x, dx);
                control(t, x, c, dx);
            };
        }
        const Json& jl = cfg["lee"];
        if (!jl.is_array())
            throw ConfigError("config: \"lee\" must be an array of checks");
        for (std::size_t i = 0; i < jl.size(); ++i)
            out.lee.push_back(lee_from_json(jl[i], lee_plant, lee_model, i));
    }
    return out;
}

// Path resolution: as given first; when that misses and the path is relative,
// under ADSIM_CONFIG_DIR.
inline std::string resolve_config_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    if (!fs::path(path).is_absolute()) {
        if (const char* dir = std::getenv("ADSIM_CONFIG_DIR")) {
            fs::path joined = fs::path(dir) / path;
            if (fs::exists(joined)) return joined.string();
        }
    }
    throw ConfigError("config file not found: " + path);
}

inline LoadedConfig load_scenario_file(const std::string& path) {
    std::ifstream in(resolve_config_path(path));
    if (!in) throw ConfigError("cannot open config file: " + path);
    Json cfg;
    try {
        cfg = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return load_scenario(cfg);
}

}  // namespace adsim
