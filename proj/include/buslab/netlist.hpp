// Structural netlists: modules with ports and declared processes, plus a
// connection list. The same data model describes both abstraction levels;
// the `level` field and port/process tags record which constructs belong to
// which level (transaction-level constructs are deleted during refinement,
// register-transfer constructs are added by it).
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "address_map.hpp"
#include "types.hpp"

namespace buslab {

enum class NetlistLevel { Tlm, Rtl };

inline const char* to_string(NetlistLevel l) {
    return l == NetlistLevel::Tlm ? "tlm" : "rtl";
}

enum class ModuleKind {
    Master,
    Slave,
    Arbiter,          // transaction-level bus/arbiter module
    LogicRequest,     // per-master request decode (Avalon)
    LogicArbitrator,  // per-slave grant logic (Avalon)
    Decoder,          // shared-bus address decoder (Wishbone)
    RrArbiter,        // shared-bus round-robin arbiter (Wishbone)
    Mux,
    Clock
};

inline const char* to_string(ModuleKind k) {
    switch (k) {
        case ModuleKind::Master: return "master";
        case ModuleKind::Slave: return "slave";
        case ModuleKind::Arbiter: return "arbiter";
        case ModuleKind::LogicRequest: return "logic_request";
        case ModuleKind::LogicArbitrator: return "logic_arbitrator";
        case ModuleKind::Decoder: return "decoder";
        case ModuleKind::RrArbiter: return "rr_arbiter";
        case ModuleKind::Mux: return "mux";
        case ModuleKind::Clock: return "clock";
    }
    return "?";
}

enum class PortDir { In, Out };

inline const char* to_string(PortDir d) { return d == PortDir::In ? "in" : "out"; }

enum class PortTag { Common, TlmOnly, RtlOnly };

inline const char* to_string(PortTag t) {
    switch (t) {
        case PortTag::Common: return "common";
        case PortTag::TlmOnly: return "tlm";
        case PortTag::RtlOnly: return "rtl";
    }
    return "?";
}

struct Port {
    std::string name;
    PortDir dir = PortDir::In;
    u32 width = 1;
    PortTag tag = PortTag::Common;

    bool operator==(const Port&) const = default;
};

struct ProcessDecl {
    std::string name;
    PortTag tag = PortTag::Common;

    bool operator==(const ProcessDecl&) const = default;
};

struct NlModule {
    std::string name;
    ModuleKind kind = ModuleKind::Master;
    std::vector<Port> ports;
    std::vector<ProcessDecl> processes;

    NlModule& port(std::string n, PortDir d, u32 w, PortTag t) {
        ports.push_back({std::move(n), d, w, t});
        return *this;
    }
    NlModule& process(std::string n, PortTag t) {
        processes.push_back({std::move(n), t});
        return *this;
    }
    const Port* find_port(const std::string& n) const {
        for (const auto& p : ports)
            if (p.name == n) return &p;
        return nullptr;
    }
    bool has_process(const std::string& n) const {
        for (const auto& p : processes)
            if (p.name == n) return true;
        return false;
    }
};

struct Endpoint {
    std::string module;
    std::string port;

    std::string str() const { return module + "." + port; }
    bool operator==(const Endpoint&) const = default;
};

struct Connection {
    Endpoint from;  // driving output
    Endpoint to;    // driven input

    std::string str() const { return from.str() + " -> " + to.str(); }
    bool operator==(const Connection&) const = default;
};

struct Netlist {
    NetlistLevel level = NetlistLevel::Tlm;
    std::vector<NlModule> modules;
    std::vector<Connection> connections;
    AddressMap map;

    NlModule& add_module(std::string name, ModuleKind kind) {
        modules.push_back(NlModule{std::move(name), kind, {}, {}});
        return modules.back();
    }
    NlModule* find_module(const std::string& name) {
        for (auto& m : modules)
            if (m.name == name) return &m;
        return nullptr;
    }
    const NlModule* find_module(const std::string& name) const {
        for (const auto& m : modules)
            if (m.name == name) return &m;
        return nullptr;
    }
    void connect(std::string fromModule, std::string fromPort, std::string toModule,
                 std::string toPort) {
        connections.push_back(
            {{std::move(fromModule), std::move(fromPort)}, {std::move(toModule), std::move(toPort)}});
    }
    std::size_t count_kind(ModuleKind k) const {
        std::size_t n = 0;
        for (const auto& m : modules)
            if (m.kind == k) ++n;
        return n;
    }
};

// ---------------------------------------------------------------------------
// Port-map validation

struct PortmapViolation {
    ElabErrorKind kind = ElabErrorKind::BadNetlist;
    std::string where;   // "module.port" or connection text
    std::string detail;  // human-readable explanation (names drivers, etc.)

    std::string str() const {
        const char* k = "bad_netlist";
        switch (kind) {
            case ElabErrorKind::UnconnectedPort: k = "unconnected_port"; break;
            case ElabErrorKind::MultipleDrivers: k = "multiple_drivers"; break;
            case ElabErrorKind::CombinationalLoop: k = "combinational_loop"; break;
            case ElabErrorKind::BadNetlist: k = "bad_netlist"; break;
        }
        return std::string(k) + " at " + where + ": " + detail;
    }
};

// Structural completeness check: connection endpoints must exist with
// compatible directions, and every input port must have exactly one driver.
// Outputs may fan out or dangle. Violations are returned as data.
inline std::vector<PortmapViolation> check_portmap(const Netlist& nl) {
    std::vector<PortmapViolation> out;
    std::map<std::string, const NlModule*> byName;
    for (const auto& m : nl.modules) {
        if (!byName.emplace(m.name, &m).second)
            out.push_back({ElabErrorKind::BadNetlist, m.name, "duplicate module name"});
    }

    std::map<std::string, std::vector<std::string>> driversOf;  // "mod.port" -> driver list
    for (const auto& c : nl.connections) {
        auto fromIt = byName.find(c.from.module);
        auto toIt = byName.find(c.to.module);
        if (fromIt == byName.end()) {
            out.push_back({ElabErrorKind::BadNetlist, c.str(), "unknown module '" + c.from.module + "'"});
            continue;
        }
        if (toIt == byName.end()) {
            out.push_back({ElabErrorKind::BadNetlist, c.str(), "unknown module '" + c.to.module + "'"});
            continue;
        }
        const Port* fp = fromIt->second->find_port(c.from.port);
        const Port* tp = toIt->second->find_port(c.to.port);
        if (!fp) {
            out.push_back({ElabErrorKind::BadNetlist, c.str(), "unknown port '" + c.from.str() + "'"});
            continue;
        }
        if (!tp) {
            out.push_back({ElabErrorKind::BadNetlist, c.str(), "unknown port '" + c.to.str() + "'"});
            continue;
        }
        if (fp->dir != PortDir::Out) {
            out.push_back({ElabErrorKind::BadNetlist, c.str(), "driver is not an output"});
            continue;
        }
        if (tp->dir != PortDir::In) {
            out.push_back({ElabErrorKind::BadNetlist, c.str(), "sink is not an input"});
            continue;
        }
        driversOf[c.to.str()].push_back(c.from.str());
    }

    for (const auto& m : nl.modules) {
        for (const auto& p : m.ports) {
            if (p.dir != PortDir::In) continue;
            const std::string key = m.name + "." + p.name;
            auto it = driversOf.find(key);
            if (it == driversOf.end()) {
                out.push_back({ElabErrorKind::UnconnectedPort, key, "input has no driver"});
            } else if (it->second.size() > 1) {
                std::string names;
                for (const auto& d : it->second) {
                    if (!names.empty()) names += ", ";
                    names += d;
                }
                out.push_back({ElabErrorKind::MultipleDrivers, key,
                               "input driven by " + std::to_string(it->second.size()) +
                                   " outputs: " + names});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Textual dumps

// Construction-order dump with stable formatting; used for diff-based tests
// and report files.
inline std::string dump(const Netlist& nl) {
    std::ostringstream os;
    os << "netlist level=" << to_string(nl.level) << " modules=" << nl.modules.size()
       << " connections=" << nl.connections.size() << "\n";
    for (const auto& e : nl.map.entries)
        os << "map " << hex32(e.base) << "+" << hex_short(e.size) << " -> target "
           << e.targetId << "\n";
    for (const auto& m : nl.modules) {
        os << "module " << m.name << " kind=" << to_string(m.kind) << "\n";
        for (const auto& p : m.ports)
            os << "  port " << p.name << " " << to_string(p.dir) << " width=" << p.width
               << " tag=" << to_string(p.tag) << "\n";
        for (const auto& pr : m.processes)
            os << "  process " << pr.name << " tag=" << to_string(pr.tag) << "\n";
    }
    for (const auto& c : nl.connections) os << "connect " << c.str() << "\n";
    return os.str();
}

namespace detail {

// Canonical module names: each module is renamed to <kind><ordinal> where the
// ordinal counts same-kind modules in construction order. Construction order
// is deterministic for both netlist-building paths, which makes the renaming
// a sound basis for structural comparison independent of user-visible names.
inline std::map<std::string, std::string> canonical_renaming(const Netlist& nl) {
    std::map<ModuleKind, std::size_t> next;
    std::map<std::string, std::string> ren;
    for (const auto& m : nl.modules)
        ren[m.name] = std::string(to_string(m.kind)) + "#" + std::to_string(next[m.kind]++);
    return ren;
}

}  // namespace detail

// Canonical structural form: modules renamed kind-ordinally, ports and
// processes sorted, modules sorted by canonical name, connections sorted.
// Two netlists are structurally isomorphic iff their canonical forms match.
inline std::string canonical_dump(const Netlist& nl) {
    auto ren = detail::canonical_renaming(nl);
    std::vector<std::string> moduleLines;
    for (const auto& m : nl.modules) {
        std::ostringstream os;
        os << "module " << ren.at(m.name) << " kind=" << to_string(m.kind) << "\n";
        auto ports = m.ports;
        std::sort(ports.begin(), ports.end(), [](const Port& a, const Port& b) {
            return a.name < b.name;
        });
        for (const auto& p : ports)
            os << "  port " << p.name << " " << to_string(p.dir) << " width=" << p.width
               << " tag=" << to_string(p.tag) << "\n";
        auto procs = m.processes;
        std::sort(procs.begin(), procs.end(), [](const ProcessDecl& a, const ProcessDecl& b) {
            return a.name < b.name;
        });
        for (const auto& pr : procs)
            os << "  process " << pr.name << " tag=" << to_string(pr.tag) << "\n";
        moduleLines.push_back(os.str());
    }
    std::sort(moduleLines.begin(), moduleLines.end());

    std::vector<std::string> connLines;
    for (const auto& c : nl.connections) {
        auto fi = ren.find(c.from.module);
        auto ti = ren.find(c.to.module);
        std::string f = (fi == ren.end() ? c.from.module : fi->second) + "." + c.from.port;
        std::string t = (ti == ren.end() ? c.to.module : ti->second) + "." + c.to.port;
        connLines.push_back("connect " + f + " -> " + t + "\n");
    }
    std::sort(connLines.begin(), connLines.end());

    std::ostringstream os;
    os << "netlist level=" << to_string(nl.level) << "\n";
    for (const auto& e : nl.map.entries)
        os << "map " << hex32(e.base) << "+" << hex_short(e.size) << " -> target "
           << e.targetId << "\n";
    for (const auto& s : moduleLines) os << s;
    for (const auto& s : connLines) os << s;
    return os.str();
}

inline bool isomorphic(const Netlist& a, const Netlist& b) {
    return canonical_dump(a) == canonical_dump(b);
}

// First differing canonical line, for diagnostics when isomorphism fails.
inline std::optional<std::string> first_structural_difference(const Netlist& a,
                                                              const Netlist& b) {
    if (isomorphic(a, b)) return std::nullopt;
    std::istringstream sa(canonical_dump(a)), sb(canonical_dump(b));
    std::string la, lb;
    while (true) {
        bool ga = static_cast<bool>(std::getline(sa, la));
        bool gb = static_cast<bool>(std::getline(sb, lb));
        if (!ga && !gb) return "netlists differ but line scan found no difference";
        if (!ga) return "second netlist has extra line: " + lb;
        if (!gb) return "first netlist has extra line: " + la;
        if (la != lb) return "'" + la + "' vs '" + lb + "'";
    }
}

}  // namespace buslab
