#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adsim/common.hpp"

namespace adsim {

using Json = nlohmann::json;

enum class EventKind { Measure, Actuate, Select, Transfer, Violation, PostReached };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Measure: return "measure";
        case EventKind::Actuate: return "actuate";
        case EventKind::Select: return "select";
        case EventKind::Transfer: return "transfer";
        case EventKind::Violation: return "violation";
        case EventKind::PostReached: return "post-reached";
    }
    return "?";
}

inline EventKind event_kind_from(const std::string& s) {
    if (s == "measure") return EventKind::Measure;
    if (s == "actuate") return EventKind::Actuate;
    if (s == "select") return EventKind::Select;
    if (s == "transfer") return EventKind::Transfer;
    if (s == "violation") return EventKind::Violation;
    if (s == "post-reached") return EventKind::PostReached;
    throw ConfigError("unknown trace event kind: " + s);
}

struct TraceEvent {
    std::size_t seq = 0;
    std::size_t step = 0;  // oracle step n; event time is step * lambda
    double t = 0.0;
    std::string agent;
    EventKind kind = EventKind::Measure;
    Json data;  // kind-specific payload
};

struct Trace {
    static constexpr int kVersion = 1;
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<std::string> coords;  // state column names for exports
    std::vector<TraceEvent> events;

    TraceEvent& append(TraceEvent e) {
        e.seq = events.size();
        events.push_back(std::move(e));
        return events.back();
    }
};

inline void write_jsonl(const Trace& trace, std::ostream& os) {
    Json header{{"trace_version", Trace::kVersion},
                {"scenario", trace.scenario},
                {"seed", trace.seed}};
    if (!trace.coords.empty()) header["coords"] = trace.coords;
    os << header.dump() << "\n";
    for (const auto& e : trace.events) {
        Json j{{"seq", e.seq}, {"step", e.step}, {"t", e.t},
               {"agent", e.agent}, {"kind", to_string(e.kind)}};
        if (!e.data.is_null()) j["data"] = e.data;
        os << j.dump() << "\n";
    }
}

inline Trace read_jsonl(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("trace: empty input");
    Json header = Json::parse(line);
    if (!header.contains("trace_version"))
        throw ConfigError("trace: missing version header");
    if (header["trace_version"].get<int>() != Trace::kVersion)
        throw ConfigError("trace: unsupported version " +
                          header["trace_version"].dump());
    Trace t;
    t.scenario = header.value("scenario", "");
    t.seed = header.value("seed", std::uint64_t{0});
    if (header.contains("coords"))
        t.coords = header["coords"].get<std::vector<std::string>>();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line);
        TraceEvent e;
        e.seq = j.at("seq").get<std::size_t>();
        e.step = j.at("step").get<std::size_t>();
        e.t = j.at("t").get<double>();
        e.agent = j.at("agent").get<std::string>();
        e.kind = event_kind_from(j.at("kind").get<std::string>());
        if (j.contains("data")) e.data = j["data"];
        t.events.push_back(std::move(e));
    }
    return t;
}

// Flat CSV for plotting: one row per event, state components spread over
// columns named from the trace header (x0, x1, ... when unnamed). Optional
// agent / kind filters.
inline void write_csv(const Trace& trace, std::ostream& os,
                      const std::optional<std::string>& agent_filter = std::nullopt,
                      const std::optional<EventKind>& kind_filter = std::nullopt) {
    std::size_t dim = 0;
    for (const auto& e : trace.events)
        if (e.data.contains("state")) dim = std::max(dim, e.data["state"].size());
    os << "sim_time,agent";
    for (std::size_t i = 0; i < dim; ++i) {
        if (i < trace.coords.size())
            os << "," << trace.coords[i];
        else
            os << ",x" << i;
    }
    os << ",mode,triple,kind,detail,step,seq\n";
    for (const auto& e : trace.events) {
        if (agent_filter && e.agent != *agent_filter) continue;
        if (kind_filter && e.kind != *kind_filter) continue;
        std::string triple;
        if (e.data.contains("triple"))
            triple = e.data["triple"].get<std::string>();
        else if (e.data.contains("to"))
            triple = e.data["to"].get<std::string>();
        // "(Mode,i)" -> "Mode"
        std::string mode;
        auto comma = triple.find(',');
        if (triple.size() > 1 && triple.front() == '(' && comma != std::string::npos)
            mode = triple.substr(1, comma - 1);
        std::string detail;
        if (e.data.contains("fired") && !e.data["fired"].is_null())
            detail = e.data["fired"].get<std::string>();
        else if (e.data.contains("to"))
            detail = e.data["to"].get<std::string>();
        else if (e.data.contains("which"))
            detail = e.data["which"].get<std::string>();
        os << e.t << "," << e.agent;
        for (std::size_t i = 0; i < dim; ++i) {
            os << ",";
            if (e.data.contains("state") && i < e.data["state"].size())
                os << e.data["state"][i].get<double>();
        }
        os << "," << mode << "," << triple << "," << to_string(e.kind) << ","
           << detail << "," << e.step << "," << e.seq << "\n";
    }
}

// Encapsulation audit: agent state snapshots may only change at measure or
// transfer events. Any state-bearing event showing a state that no mutation
// event in the same step established is a violation.
struct AuditFinding {
    std::size_t seq = 0;
    std::string agent;
    std::string detail;
};

inline std::vector<AuditFinding> audit_encapsulation(const Trace& trace) {
    std::vector<AuditFinding> findings;
    std::map<std::string, Json> last_state;
    for (const auto& e : trace.events) {
        if (!e.data.contains("state")) continue;
        const Json& s = e.data["state"];
        auto it = last_state.find(e.agent);
        bool changed = (it == last_state.end()) || (it->second != s);
        if (changed && e.kind != EventKind::Measure && e.kind != EventKind::Transfer) {
            findings.push_back({e.seq, e.agent,
                                "state changed at a '" + std::string(to_string(e.kind)) +
                                    "' event (only measure/transfer may mutate)"});
        }
        last_state[e.agent] = s;
    }
    return findings;
}

}  // namespace adsim
