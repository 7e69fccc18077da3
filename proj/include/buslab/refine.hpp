// Abstraction refinement: builds the transaction-level netlist for a system,
// transforms it into a register-transfer-level netlist in five recorded
// stages, and provides a requirements-driven selection loop over candidate
// specs.
//
// The transformation stages are:
//   1. port addition/deletion   — clock and bus-signal ports appear on every
//                                 surviving module; transaction-level ports
//                                 (initiator/request/grant/target/busy) and
//                                 the bus module itself disappear
//   2. process addition/deletion — drive/step and respond/latch processes
//                                 appear; the request/arbitration processes
//                                 disappear
//   3. mux instantiation         — per mux_plan
//   4. arbiter instantiation     — per-slave grant logic (Avalon) or shared
//                                 decoder + round-robin arbiter (Wishbone),
//                                 plus the clock source
//   5. port mapping              — every input is wired to exactly one driver
//
// transform() assembles its result independently of the direct fabric
// builders; both paths share only the per-kind module factories, so
// structural equality between them is a meaningful cross-check.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fabric.hpp"
#include "netlist.hpp"
#include "program.hpp"
#include "spec.hpp"
#include "tlm.hpp"
#include "types.hpp"

namespace buslab {

// ---------------------------------------------------------------------------
// Transaction-level netlist

inline Netlist elaborate_tlm_netlist(const SystemSpec& spec) {
    validate_spec(spec);
    const bool arb = spec.arbiter != ArbiterKind::None;

    Netlist nl;
    nl.level = NetlistLevel::Tlm;
    nl.map = AddressMap::from_spec(spec);

    for (const auto& ms : spec.masters) {
        NlModule m{ms.name, ModuleKind::Master, {}, {}};
        m.port("init", PortDir::Out, 1, PortTag::TlmOnly);
        if (arb) {
            m.port("req", PortDir::Out, 1, PortTag::TlmOnly);
            m.port("grant", PortDir::In, 1, PortTag::TlmOnly);
        }
        for (const auto& pm : program_method_names(ms.program)) m.process(pm, PortTag::Common);
        if (arb) m.process("send_request", PortTag::TlmOnly);
        nl.modules.push_back(std::move(m));
    }
    for (const auto& ss : spec.slaves) {
        NlModule s{ss.name, ModuleKind::Slave, {}, {}};
        s.port("target", PortDir::In, 1, PortTag::TlmOnly);
        if (arb) s.port("busy", PortDir::Out, 1, PortTag::TlmOnly);
        s.process("mem_read", PortTag::Common);
        s.process("mem_write", PortTag::Common);
        nl.modules.push_back(std::move(s));
    }
    if (arb) {
        NlModule b{"bus_arbiter", ModuleKind::Arbiter, {}, {}};
        b.port("t_sock", PortDir::In, 1, PortTag::TlmOnly);
        b.port("i_sock", PortDir::Out, 1, PortTag::TlmOnly);
        b.port("busy_in", PortDir::In, 1, PortTag::TlmOnly);
        for (const auto& ms : spec.masters) b.port("m_req_" + ms.name, PortDir::In, 1, PortTag::TlmOnly);
        for (const auto& ms : spec.masters)
            b.port("m_grant_" + ms.name, PortDir::Out, 1, PortTag::TlmOnly);
        b.process("arbitrate", PortTag::TlmOnly);
        b.process("route", PortTag::TlmOnly);
        b.process("report_status", PortTag::TlmOnly);
        nl.modules.push_back(std::move(b));

        // Transaction sockets allow many-to-one binding at this level: every
        // master's initiator binds into the bus's single target socket and
        // every slave's busy line feeds the single busy input. The
        // one-driver-per-input rule applies to register-transfer netlists.
        for (const auto& ms : spec.masters) {
            nl.connect(ms.name, "init", "bus_arbiter", "t_sock");
            nl.connect(ms.name, "req", "bus_arbiter", "m_req_" + ms.name);
            nl.connect("bus_arbiter", "m_grant_" + ms.name, ms.name, "grant");
        }
        for (const auto& ss : spec.slaves) {
            nl.connect("bus_arbiter", "i_sock", ss.name, "target");
            nl.connect(ss.name, "busy", "bus_arbiter", "busy_in");
        }
    } else {
        nl.connect(spec.masters[0].name, "init", spec.slaves[0].name, "target");
    }
    return nl;
}

// ---------------------------------------------------------------------------
// Transformation

struct TransformReport {
    std::vector<std::string> portsAdded;        // "module.port"
    std::vector<std::string> portsDeleted;      // "module.port"
    std::vector<std::string> processesAdded;    // "module.process"
    std::vector<std::string> processesDeleted;  // "module.process"
    MuxPlan muxPlan;
    std::string arbiterChoice;
    std::size_t mappingCount = 0;  // connections created by the port-mapping stage

    bool contains(const std::vector<std::string>& list, const std::string& entry) const {
        for (const auto& e : list)
            if (e == entry) return true;
        return false;
    }
};

struct TransformResult {
    Netlist rtl;
    TransformReport report;
};

namespace detail {

inline void record_module_as_added(const NlModule& m, TransformReport& rep) {
    for (const auto& p : m.ports) rep.portsAdded.push_back(m.name + "." + p.name);
    for (const auto& pr : m.processes) rep.processesAdded.push_back(m.name + "." + pr.name);
}

inline void record_module_as_deleted(const NlModule& m, TransformReport& rep) {
    for (const auto& p : m.ports) rep.portsDeleted.push_back(m.name + "." + p.name);
    for (const auto& pr : m.processes) rep.processesDeleted.push_back(m.name + "." + pr.name);
}

}  // namespace detail

inline TransformResult transform(const Netlist& tlm, BusKind bus) {
    if (tlm.level != NetlistLevel::Tlm)
        throw ElabError(ElabErrorKind::BadNetlist, "transform input must be a tlm-level netlist");

    std::vector<const NlModule*> masterMods, slaveMods;
    const NlModule* busMod = nullptr;
    for (const auto& m : tlm.modules) {
        switch (m.kind) {
            case ModuleKind::Master: masterMods.push_back(&m); break;
            case ModuleKind::Slave: slaveMods.push_back(&m); break;
            case ModuleKind::Arbiter: busMod = &m; break;
            default:
                throw ElabError(ElabErrorKind::BadNetlist,
                                "unexpected module kind in tlm netlist: " + m.name);
        }
    }
    if (masterMods.empty() || slaveMods.empty())
        throw ElabError(ElabErrorKind::BadNetlist, "tlm netlist needs masters and slaves");

    const bool arb = busMod != nullptr;
    std::vector<std::string> masters, slaves;
    for (const auto* m : masterMods) masters.push_back(m->name);
    for (const auto* s : slaveMods) slaves.push_back(s->name);

    TransformResult res;
    Netlist& rtl = res.rtl;
    TransformReport& rep = res.report;
    rtl.level = NetlistLevel::Rtl;
    rtl.map = tlm.map;

    // Stages 1 and 2: rebuild each surviving module, deleting
    // transaction-only ports/processes, keeping Common ones, and adding the
    // register-transfer port/process sets from the shared per-kind tables.
    auto carry_over = [&rep](const NlModule& oldMod, NlModule& newMod) {
        for (const auto& p : oldMod.ports) {
            if (p.tag == PortTag::TlmOnly)
                rep.portsDeleted.push_back(oldMod.name + "." + p.name);
            else
                newMod.ports.push_back(p);
        }
        for (const auto& pr : oldMod.processes) {
            if (pr.tag == PortTag::TlmOnly)
                rep.processesDeleted.push_back(oldMod.name + "." + pr.name);
            else
                newMod.processes.push_back(pr);
        }
    };
    for (const auto* old : masterMods) {
        NlModule m{old->name, ModuleKind::Master, {}, {}};
        std::size_t portMark = 0, procMark = 0;
        carry_over(*old, m);
        portMark = m.ports.size();
        procMark = m.processes.size();
        fabric::add_master_rtl_ports(m, bus, arb);
        fabric::add_master_rtl_processes(m);
        for (std::size_t i = portMark; i < m.ports.size(); ++i)
            rep.portsAdded.push_back(m.name + "." + m.ports[i].name);
        for (std::size_t i = procMark; i < m.processes.size(); ++i)
            rep.processesAdded.push_back(m.name + "." + m.processes[i].name);
        rtl.modules.push_back(std::move(m));
    }
    for (const auto* old : slaveMods) {
        NlModule s{old->name, ModuleKind::Slave, {}, {}};
        carry_over(*old, s);
        std::size_t portMark = s.ports.size(), procMark = s.processes.size();
        fabric::add_slave_rtl_ports(s, bus, arb);
        fabric::add_slave_rtl_processes(s);
        for (std::size_t i = portMark; i < s.ports.size(); ++i)
            rep.portsAdded.push_back(s.name + "." + s.ports[i].name);
        for (std::size_t i = procMark; i < s.processes.size(); ++i)
            rep.processesAdded.push_back(s.name + "." + s.processes[i].name);
        rtl.modules.push_back(std::move(s));
    }
    if (busMod) detail::record_module_as_deleted(*busMod, rep);

    // Stage 3: mux instantiation per plan.
    rep.muxPlan = mux_plan(masters.size(), slaves.size(), bus, arb);
    std::vector<NlModule> muxes;
    if (arb && bus == BusKind::Avalon) {
        for (const auto& s : slaves)
            for (std::size_t i = 0; i < 5; ++i)
                muxes.push_back(fabric::make_mux(
                    "mux_" + fabric::avalon_slave_mux_kinds()[i] + "_" + s,
                    fabric::avalon_slave_mux_fields(i), masters));
        for (const auto& m : masters)
            muxes.push_back(fabric::make_mux("mux_master_" + m, {{"rdata", 32}, {"wait", 1}}, slaves));
    } else if (arb && bus == BusKind::Wishbone) {
        if (masters.size() >= 2) {
            muxes.push_back(fabric::make_mux("mux_cycstb", {{"cyc", 1}, {"stb", 1}}, masters));
            muxes.push_back(fabric::make_mux("mux_we", {{"we", 1}}, masters));
            muxes.push_back(fabric::make_mux("mux_adr", {{"adr", 32}}, masters));
            muxes.push_back(fabric::make_mux("mux_dat_w", {{"dat_w", 32}}, masters));
            muxes.push_back(fabric::make_mux("mux_bsel", {{"bsel", 4}}, masters));
        }
        for (const auto& m : masters)
            muxes.push_back(fabric::make_mux("mux_master_" + m, {{"dat_r", 32}}, slaves));
    }
    for (auto& m : muxes) {
        detail::record_module_as_added(m, rep);
        rtl.modules.push_back(std::move(m));
    }

    // Stage 4: arbitration logic for the chosen protocol, plus the clock
    // source every register-transfer netlist carries.
    if (arb && bus == BusKind::Avalon) {
        rep.arbiterChoice = "per-slave round-robin logic arbitrators";
        // Insert request/grant logic before the muxes so same-kind ordinals
        // match the direct builder's construction order.
        std::vector<NlModule> logic;
        for (const auto& m : masters) logic.push_back(fabric::make_logic_request(m, slaves));
        for (const auto& s : slaves) logic.push_back(fabric::make_logic_arbitrator(s, masters));
        for (auto& mod : logic) detail::record_module_as_added(mod, rep);
        rtl.modules.insert(rtl.modules.begin() + static_cast<std::ptrdiff_t>(masters.size() + slaves.size()),
                           std::make_move_iterator(logic.begin()), std::make_move_iterator(logic.end()));
    } else if (arb && bus == BusKind::Wishbone) {
        rep.arbiterChoice = "shared round-robin arbiter with address decoder";
        std::vector<NlModule> logic;
        logic.push_back(fabric::make_decoder(slaves));
        logic.push_back(fabric::make_rr_arbiter(masters));
        for (auto& mod : logic) detail::record_module_as_added(mod, rep);
        rtl.modules.insert(rtl.modules.begin() + static_cast<std::ptrdiff_t>(masters.size() + slaves.size()),
                           std::make_move_iterator(logic.begin()), std::make_move_iterator(logic.end()));
    } else {
        rep.arbiterChoice = "none (point-to-point)";
    }
    {
        NlModule clk = fabric::make_clock();
        detail::record_module_as_added(clk, rep);
        rtl.modules.push_back(std::move(clk));
    }

    // Stage 5: port mapping. Wiring is re-derived here rather than borrowed
    // from the direct builders.
    fabric::wire_clock(rtl);
    if (!arb) {
        const auto& m = masters[0];
        const auto& s = slaves[0];
        if (bus == BusKind::Avalon) {
            rtl.connect(m, "address", s, "address");
            rtl.connect(m, "be_n", s, "be_n");
            rtl.connect(m, "write", s, "write");
            rtl.connect(m, "writedata", s, "writedata");
            rtl.connect(m, "read", s, "read");
            rtl.connect(s, "readdata", m, "readdata");
            rtl.connect(s, "wait", m, "wait");
        } else {
            rtl.connect(m, "cyc", s, "cyc");
            rtl.connect(m, "stb", s, "stb");
            rtl.connect(m, "we", s, "we");
            rtl.connect(m, "adr", s, "adr");
            rtl.connect(m, "dat_w", s, "dat_w");
            rtl.connect(m, "sel", s, "sel");
            rtl.connect(s, "dat_r", m, "dat_r");
            rtl.connect(s, "ack", m, "ack");
        }
    } else if (bus == BusKind::Avalon) {
        for (const auto& m : masters) {
            rtl.connect(m, "address", "logreq_" + m, "addr");
            rtl.connect(m, "read", "logreq_" + m, "read");
            rtl.connect(m, "write", "logreq_" + m, "write");
            for (const auto& s : slaves) {
                rtl.connect(m, "address", "mux_address_" + s, "address_" + m);
                rtl.connect(m, "be_n", "mux_be_" + s, "be_n_" + m);
                rtl.connect(m, "write", "mux_write_" + s, "write_" + m);
                rtl.connect(m, "writedata", "mux_writedata_" + s, "writedata_" + m);
                rtl.connect(m, "read", "mux_read_" + s, "read_" + m);
                rtl.connect("logreq_" + m, "req_" + s, "logarb_" + s, "req_" + m);
                rtl.connect("logreq_" + m, "req_" + s, "mux_master_" + m, "sel_" + s);
            }
            rtl.connect("logreq_" + m, "nomap", m, "nomap");
        }
        for (const auto& s : slaves) {
            for (const auto& m : masters) {
                for (const auto& kind : fabric::avalon_slave_mux_kinds())
                    rtl.connect("logarb_" + s, "gnt_" + m, "mux_" + kind + "_" + s, "sel_" + m);
                rtl.connect("logarb_" + s, "wait_" + m, "mux_master_" + m, "wait_" + s);
                rtl.connect(s, "readdata", "mux_master_" + m, "rdata_" + s);
            }
            rtl.connect("mux_address_" + s, "address", s, "address");
            rtl.connect("mux_be_" + s, "be_n", s, "be_n");
            rtl.connect("mux_write_" + s, "write", s, "write");
            rtl.connect("mux_writedata_" + s, "writedata", s, "writedata");
            rtl.connect("mux_read_" + s, "read", s, "read");
            rtl.connect(s, "wait", "logarb_" + s, "s_wait");
        }
        for (const auto& m : masters) {
            rtl.connect("mux_master_" + m, "rdata", m, "readdata");
            rtl.connect("mux_master_" + m, "wait", m, "wait");
        }
    } else {
        const bool busMuxes = masters.size() >= 2;
        for (const auto& m : masters) rtl.connect(m, "cyc", "arbiter", "req_" + m);
        if (busMuxes) {
            for (const auto& m : masters) {
                rtl.connect(m, "cyc", "mux_cycstb", "cyc_" + m);
                rtl.connect(m, "stb", "mux_cycstb", "stb_" + m);
                rtl.connect(m, "we", "mux_we", "we_" + m);
                rtl.connect(m, "adr", "mux_adr", "adr_" + m);
                rtl.connect(m, "dat_w", "mux_dat_w", "dat_w_" + m);
                rtl.connect(m, "sel", "mux_bsel", "bsel_" + m);
                rtl.connect("arbiter", "gnt_" + m, "mux_cycstb", "sel_" + m);
                rtl.connect("arbiter", "gnt_" + m, "mux_we", "sel_" + m);
                rtl.connect("arbiter", "gnt_" + m, "mux_adr", "sel_" + m);
                rtl.connect("arbiter", "gnt_" + m, "mux_dat_w", "sel_" + m);
                rtl.connect("arbiter", "gnt_" + m, "mux_bsel", "sel_" + m);
                rtl.connect("arbiter", "ack_" + m, m, "ack");
                rtl.connect("arbiter", "err_" + m, m, "err");
            }
            for (const auto& s : slaves) {
                rtl.connect("mux_cycstb", "cyc", s, "cyc");
                rtl.connect("mux_cycstb", "stb", s, "stb");
                rtl.connect("mux_we", "we", s, "we");
                rtl.connect("mux_adr", "adr", s, "adr");
                rtl.connect("mux_dat_w", "dat_w", s, "dat_w");
                rtl.connect("mux_bsel", "bsel", s, "sel");
            }
            rtl.connect("mux_adr", "adr", "decoder", "adr");
        } else {
            const auto& m = masters[0];
            for (const auto& s : slaves) {
                rtl.connect(m, "cyc", s, "cyc");
                rtl.connect(m, "stb", s, "stb");
                rtl.connect(m, "we", s, "we");
                rtl.connect(m, "adr", s, "adr");
                rtl.connect(m, "dat_w", s, "dat_w");
                rtl.connect(m, "sel", s, "sel");
            }
            rtl.connect(m, "adr", "decoder", "adr");
            rtl.connect("arbiter", "ack_" + m, m, "ack");
            rtl.connect("arbiter", "err_" + m, m, "err");
        }
        for (const auto& s : slaves) {
            rtl.connect("decoder", "ss_" + s, s, "ssel");
            for (const auto& m : masters) {
                rtl.connect("decoder", "ss_" + s, "mux_master_" + m, "sel_" + s);
                rtl.connect(s, "dat_r", "mux_master_" + m, "dat_r_" + s);
            }
            rtl.connect(s, "ack", "decoder", "ack_" + s);
        }
        rtl.connect("decoder", "bus_ack", "arbiter", "bus_ack");
        rtl.connect("decoder", "err", "arbiter", "bus_err");
        for (const auto& m : masters) rtl.connect("mux_master_" + m, "dat_r", m, "dat_r");
    }
    rep.mappingCount = rtl.connections.size();

    auto violations = check_portmap(rtl);
    if (!violations.empty()) {
        std::string msg = "transform produced an incomplete port map:";
        for (const auto& v : violations) msg += "\n  " + v.str();
        throw ElabError(ElabErrorKind::BadNetlist, msg);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Requirements and the candidate-selection loop

// Machine-checkable predicates over a transaction-level run.
struct FinalWordIs {
    u32 address = 0;  // absolute address; routed through the system's map
    u32 value = 0;
};
struct NoRecordsWithStatus {
    TxnStatus status = TxnStatus::Error;
};
struct CompletesWithin {
    std::string master;  // empty = every master
    u64 maxRounds = 0;
};
using Requirement = std::variant<FinalWordIs, NoRecordsWithStatus, CompletesWithin>;

// Empty result = satisfied; otherwise a failure description.
inline std::optional<std::string> check_requirement(const Requirement& req, const SystemSpec& spec,
                                                    const TlmResult& run) {
    if (const auto* fw = std::get_if<FinalWordIs>(&req)) {
        auto target = route(run.map, fw->address);
        if (!target) return "requirement address " + hex32(fw->address) + " is unmapped";
        u32 got = run.finalState[target->targetId].words[target->offset / 4];
        if (got != fw->value)
            return "final word at " + hex32(fw->address) + " is " + hex32(got) + ", expected " +
                   hex32(fw->value);
        return std::nullopt;
    }
    if (const auto* ns = std::get_if<NoRecordsWithStatus>(&req)) {
        for (const auto& r : run.trace)
            if (r.status == ns->status)
                return std::string("trace contains a ") + to_string(ns->status) + " record (master " +
                       r.master + ", seq " + std::to_string(r.seq) + ")";
        return std::nullopt;
    }
    const auto& cw = std::get<CompletesWithin>(req);
    for (std::size_t i = 0; i < spec.masters.size(); ++i) {
        if (!cw.master.empty() && spec.masters[i].name != cw.master) continue;
        if (run.finishRounds[i] > cw.maxRounds)
            return "master " + spec.masters[i].name + " finished in round " +
                   std::to_string(run.finishRounds[i]) + ", bound " + std::to_string(cw.maxRounds);
    }
    return std::nullopt;
}

struct RefineOutcome {
    SystemSpec accepted;
    std::size_t iterations = 0;                // candidates evaluated, including the accepted one
    std::vector<std::string> rejectionReasons;  // one entry per rejected candidate
};

// Evaluates the spec and then its declared candidates in order against the
// requirements, each via a transaction-level run; returns the first
// satisfying candidate. Throws RequirementsUnsatisfiable when none passes.
inline RefineOutcome refine_loop(const SystemSpec& spec, const std::vector<Requirement>& requirements,
                                 u64 maxTransactions = 1'000'000) {
    std::vector<SystemSpec> candidates;
    candidates.push_back(spec);
    candidates.back().candidates.clear();
    for (const auto& c : spec.candidates) candidates.push_back(c);

    RefineOutcome out;
    for (const auto& cand : candidates) {
        ++out.iterations;
        std::optional<std::string> failure;
        try {
            TlmResult run = run_tlm(cand, maxTransactions);
            for (const auto& req : requirements) {
                failure = check_requirement(req, cand, run);
                if (failure) break;
            }
        } catch (const SimLimitError& e) {
            failure = std::string("simulation limit: ") + e.what();
        }
        if (!failure) {
            out.accepted = cand;
            return out;
        }
        out.rejectionReasons.push_back(*failure);
    }
    std::string msg = "no candidate satisfies the requirements after " +
                      std::to_string(out.iterations) + " attempts:";
    for (std::size_t i = 0; i < out.rejectionReasons.size(); ++i)
        msg += "\n  candidate " + std::to_string(i) + ": " + out.rejectionReasons[i];
    throw RequirementsUnsatisfiable(msg);
}

}  // namespace buslab
