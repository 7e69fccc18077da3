// JSON serialization of SystemSpec.
//
// Document layout:
//   {
//     "bus": "avalon" | "wishbone",
//     "description": "optional free text",
//     "arbiter": "round_robin" | "none",
//     "masters": [{"name": "...", "start_address": 0 | "0x...", "program": ["...", ...]}],
//     "slaves":  [{"name": "...", "base": ..., "size": ...,
//                  "read_latency": ..., "write_latency": ...}],
//     "candidates": [ <spec objects without further candidates> ]
//   }
// Integer fields accept either JSON numbers or 0x-prefixed hex strings.
#pragma once

#include <string>

#include <json.hpp>

#include "spec.hpp"

namespace buslab {

namespace detail {

using json = nlohmann::json;

inline u32 json_u32(const json& j, const std::string& field) {
    const json* v = j.contains(field) ? &j.at(field) : nullptr;
    if (!v) throw SpecError(SpecErrorKind::BadValue, "missing field '" + field + "'");
    if (v->is_number_unsigned()) {
        u64 n = v->get<u64>();
        if (n > 0xFFFFFFFFull)
            throw SpecError(SpecErrorKind::BadValue, "field '" + field + "' exceeds 32 bits");
        return static_cast<u32>(n);
    }
    if (v->is_string()) {
        try {
            return parse_number(v->get<std::string>(), 0);
        } catch (const SpecError&) {
            throw SpecError(SpecErrorKind::BadValue,
                            "field '" + field + "': bad number '" + v->get<std::string>() + "'");
        }
    }
    throw SpecError(SpecErrorKind::BadValue, "field '" + field + "' must be a number or hex string");
}

inline u32 json_u32_or(const json& j, const std::string& field, u32 fallback) {
    return j.contains(field) ? json_u32(j, field) : fallback;
}

inline std::string json_string(const json& j, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_string())
        throw SpecError(SpecErrorKind::BadValue, "missing string field '" + field + "'");
    return j.at(field).get<std::string>();
}

inline SystemSpec spec_from_json(const json& j, bool allowCandidates);

inline MasterSpec master_from_json(const json& j) {
    if (!j.is_object()) throw SpecError(SpecErrorKind::BadValue, "master entry must be an object");
    MasterSpec m;
    m.name = json_string(j, "name");
    m.startAddress = json_u32_or(j, "start_address", 0);
    if (j.contains("program")) {
        const json& p = j.at("program");
        if (!p.is_array())
            throw SpecError(SpecErrorKind::BadValue, "program must be an array of strings");
        std::vector<std::string> lines;
        for (const auto& line : p) {
            if (!line.is_string())
                throw SpecError(SpecErrorKind::BadValue, "program lines must be strings");
            lines.push_back(line.get<std::string>());
        }
        m.program = parse_program(lines);
    }
    return m;
}

inline SlaveSpec slave_from_json(const json& j) {
    if (!j.is_object()) throw SpecError(SpecErrorKind::BadValue, "slave entry must be an object");
    SlaveSpec s;
    s.name = json_string(j, "name");
    s.base = json_u32(j, "base");
    s.size = json_u32(j, "size");
    s.readLatency = json_u32_or(j, "read_latency", 1);
    s.writeLatency = json_u32_or(j, "write_latency", 1);
    return s;
}

inline SystemSpec spec_from_json(const json& j, bool allowCandidates) {
    if (!j.is_object()) throw SpecError(SpecErrorKind::Syntax, "spec document must be an object");
    SystemSpec spec;
    std::string bus = json_string(j, "bus");
    if (bus == "avalon")
        spec.bus = BusKind::Avalon;
    else if (bus == "wishbone")
        spec.bus = BusKind::Wishbone;
    else
        throw SpecError(SpecErrorKind::BadValue, "unknown bus kind '" + bus + "'");

    if (j.contains("description")) spec.description = json_string(j, "description");

    std::string arb = j.contains("arbiter") ? json_string(j, "arbiter") : "round_robin";
    if (arb == "round_robin")
        spec.arbiter = ArbiterKind::RoundRobin;
    else if (arb == "none")
        spec.arbiter = ArbiterKind::None;
    else
        throw SpecError(SpecErrorKind::BadValue, "unknown arbiter policy '" + arb + "'");

    if (!j.contains("masters") || !j.at("masters").is_array())
        throw SpecError(SpecErrorKind::NoMasters, "spec declares no masters");
    for (const auto& m : j.at("masters")) spec.masters.push_back(master_from_json(m));

    if (!j.contains("slaves") || !j.at("slaves").is_array())
        throw SpecError(SpecErrorKind::NoSlaves, "spec declares no slaves");
    for (const auto& s : j.at("slaves")) spec.slaves.push_back(slave_from_json(s));

    if (j.contains("candidates")) {
        if (!allowCandidates)
            throw SpecError(SpecErrorKind::BadValue, "refinement candidates cannot nest");
        if (!j.at("candidates").is_array())
            throw SpecError(SpecErrorKind::BadValue, "candidates must be an array");
        for (const auto& c : j.at("candidates"))
            spec.candidates.push_back(spec_from_json(c, false));
    }
    return spec;
}

inline json spec_to_json(const SystemSpec& spec) {
    json j;
    j["bus"] = to_string(spec.bus);
    if (!spec.description.empty()) j["description"] = spec.description;
    j["arbiter"] = to_string(spec.arbiter);
    j["masters"] = json::array();
    for (const auto& m : spec.masters) {
        json jm;
        jm["name"] = m.name;
        jm["start_address"] = hex_short(m.startAddress);
        jm["program"] = serialize_program(m.program);
        j["masters"].push_back(jm);
    }
    j["slaves"] = json::array();
    for (const auto& s : spec.slaves) {
        json js;
        js["name"] = s.name;
        js["base"] = hex_short(s.base);
        js["size"] = s.size;
        js["read_latency"] = s.readLatency;
        js["write_latency"] = s.writeLatency;
        j["slaves"].push_back(js);
    }
    if (!spec.candidates.empty()) {
        j["candidates"] = json::array();
        for (const auto& c : spec.candidates) j["candidates"].push_back(spec_to_json(c));
    }
    return j;
}

}  // namespace detail

// Parses and validates a spec document. Syntax errors carry the line and
// column of the offending byte.
inline SystemSpec parse_spec(const std::string& text) {
    detail::json doc;
    try {
        doc = detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
        // nlohmann reports a byte offset; convert it to line/column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw SpecError(SpecErrorKind::Syntax, "syntax error at line " + std::to_string(line) +
                                                   ", column " + std::to_string(col) + ": " +
                                                   e.what());
    }
    SystemSpec spec = detail::spec_from_json(doc, true);
    validate_spec(spec);
    return spec;
}

inline std::string serialize_spec(const SystemSpec& spec) {
    return detail::spec_to_json(spec).dump(2) + "\n";
}

}  // namespace buslab
