// Register-transfer-level fabric construction for the two supported bus
// protocols.
//
// Avalon: per-slave arbitration. Each master gets a request-decode block
// (logic request) and a read-return mux; each slave gets a grant block
// (logic arbitrator) and five slave-side muxes {address, be_n, write,
// writedata, read}, each master-count wide.
//
// Wishbone: one shared bus. A single address decoder and a single
// round-robin arbiter; five bus-signal muxes {cyc/stb composite, we, adr,
// dat_w, byte-select} merge the masters onto the bus when there are two or
// more of them (a single master is wired straight onto the bus lines), and
// each master gets a return mux over the slaves' dat_r outputs selected by
// the decoder's slave-select lines.
//
// The factory functions in `fabric` are the single source of truth for each
// module kind's port table; they are shared with the netlist-transformation
// path so that both construction routes agree on module shapes while keeping
// their assembly (instantiation + wiring) code independent.
#pragma once

#include <string>
#include <vector>

#include "netlist.hpp"
#include "program.hpp"
#include "spec.hpp"
#include "types.hpp"

namespace buslab {

struct MuxPlan {
    BusKind bus = BusKind::Avalon;
    std::size_t perSlaveMuxes = 0;           // Avalon: 5 per slave
    std::vector<std::string> perSlaveKinds;  // Avalon: the five slave-side mux kinds
    std::size_t busSignalMuxes = 0;          // Wishbone: 5 shared-bus muxes when masters > 1
    std::size_t masterReadMuxes = 0;         // one read-return mux per master
    std::size_t slaveSideMuxWidth = 0;       // selectable inputs on slave-side/bus muxes
    std::size_t masterReadMuxWidth = 0;      // selectable inputs on read-return muxes

    std::size_t total() const { return perSlaveMuxes + busSignalMuxes + masterReadMuxes; }
};

// Multiplexer inventory for an arbitrated fabric. `arbitrated = false`
// describes the two-component point-to-point topology, which needs no muxes.
inline MuxPlan mux_plan(std::size_t masterCount, std::size_t slaveCount, BusKind bus,
                        bool arbitrated = true) {
    MuxPlan p;
    p.bus = bus;
    if (!arbitrated) return p;
    p.masterReadMuxes = masterCount;
    p.masterReadMuxWidth = slaveCount;
    p.slaveSideMuxWidth = masterCount;
    if (bus == BusKind::Avalon) {
        p.perSlaveMuxes = 5 * slaveCount;
        p.perSlaveKinds = {"address", "be_n", "write", "writedata", "read"};
    } else {
        // A lone master drives the shared bus lines directly; the five
        // bus-signal muxes exist only to merge two or more masters.
        p.busSignalMuxes = masterCount >= 2 ? 5 : 0;
    }
    return p;
}

namespace fabric {

struct FieldSpec {
    std::string name;
    u32 width = 1;
};

inline NlModule make_clock() {
    NlModule m{"sysclk", ModuleKind::Clock, {}, {}};
    m.port("clk", PortDir::Out, 1, PortTag::RtlOnly);
    m.process("tick", PortTag::RtlOnly);
    return m;
}

// Generic mux shape: for each selectable key K the module has one input per
// field named <field>_K plus a select input sel_K; outputs are named after
// the fields. The single select process is named after the module.
inline NlModule make_mux(const std::string& name, const std::vector<FieldSpec>& fields,
                         const std::vector<std::string>& keys) {
    NlModule m{name, ModuleKind::Mux, {}, {}};
    m.port("clock", PortDir::In, 1, PortTag::RtlOnly);
    for (const auto& k : keys) {
        for (const auto& f : fields) m.port(f.name + "_" + k, PortDir::In, f.width, PortTag::RtlOnly);
        m.port("sel_" + k, PortDir::In, 1, PortTag::RtlOnly);
    }
    for (const auto& f : fields) m.port(f.name, PortDir::Out, f.width, PortTag::RtlOnly);
    m.process("sel_" + name, PortTag::RtlOnly);
    return m;
}

// Port set every master module carries at the register-transfer level.
// Appended to whatever Common ports the module already has.
inline void add_master_rtl_ports(NlModule& m, BusKind bus, bool arbitrated) {
    m.port("clock", PortDir::In, 1, PortTag::RtlOnly);
    if (bus == BusKind::Wishbone) {
        m.port("cyc", PortDir::Out, 1, PortTag::RtlOnly);
        m.port("stb", PortDir::Out, 1, PortTag::RtlOnly);
        m.port("we", PortDir::Out, 1, PortTag::RtlOnly);
        m.port("adr", PortDir::Out, 32, PortTag::RtlOnly);
        m.port("dat_w", PortDir::Out, 32, PortTag::RtlOnly);
        m.port("sel", PortDir::Out, 4, PortTag::RtlOnly);
        m.port("dat_r", PortDir::In, 32, PortTag::RtlOnly);
        m.port("ack", PortDir::In, 1, PortTag::RtlOnly);
        if (arbitrated)
            m.port("err", PortDir::In, 1, PortTag::RtlOnly);
        else
            m.port("nomap", PortDir::Out, 1, PortTag::RtlOnly);  // self-detected unmapped access
    } else {
        m.port("address", PortDir::Out, 32, PortTag::RtlOnly);
        m.port("be_n", PortDir::Out, 4, PortTag::RtlOnly);
        m.port("write", PortDir::Out, 1, PortTag::RtlOnly);
        m.port("writedata", PortDir::Out, 32, PortTag::RtlOnly);
        m.port("read", PortDir::Out, 1, PortTag::RtlOnly);
        m.port("readdata", PortDir::In, 32, PortTag::RtlOnly);
        m.port("wait", PortDir::In, 1, PortTag::RtlOnly);
        m.port("nomap", arbitrated ? PortDir::In : PortDir::Out, 1, PortTag::RtlOnly);
    }
}

inline void add_master_rtl_processes(NlModule& m) {
    m.process("drive", PortTag::RtlOnly);
    m.process("step", PortTag::RtlOnly);
}

inline void add_slave_rtl_ports(NlModule& s, BusKind bus, bool arbitrated) {
    s.port("clock", PortDir::In, 1, PortTag::RtlOnly);
    if (bus == BusKind::Wishbone) {
        s.port("cyc", PortDir::In, 1, PortTag::RtlOnly);
        s.port("stb", PortDir::In, 1, PortTag::RtlOnly);
        if (arbitrated) s.port("ssel", PortDir::In, 1, PortTag::RtlOnly);
        s.port("we", PortDir::In, 1, PortTag::RtlOnly);
        s.port("adr", PortDir::In, 32, PortTag::RtlOnly);
        s.port("dat_w", PortDir::In, 32, PortTag::RtlOnly);
        s.port("sel", PortDir::In, 4, PortTag::RtlOnly);
        s.port("dat_r", PortDir::Out, 32, PortTag::RtlOnly);
        s.port("ack", PortDir::Out, 1, PortTag::RtlOnly);
    } else {
        s.port("address", PortDir::In, 32, PortTag::RtlOnly);
        s.port("be_n", PortDir::In, 4, PortTag::RtlOnly);
        s.port("write", PortDir::In, 1, PortTag::RtlOnly);
        s.port("writedata", PortDir::In, 32, PortTag::RtlOnly);
        s.port("read", PortDir::In, 1, PortTag::RtlOnly);
        s.port("readdata", PortDir::Out, 32, PortTag::RtlOnly);
        s.port("wait", PortDir::Out, 1, PortTag::RtlOnly);
    }
}

inline void add_slave_rtl_processes(NlModule& s) {
    s.process("respond", PortTag::RtlOnly);
    s.process("latch", PortTag::RtlOnly);
}

inline NlModule make_decoder(const std::vector<std::string>& slaves) {
    NlModule d{"decoder", ModuleKind::Decoder, {}, {}};
    d.port("clock", PortDir::In, 1, PortTag::RtlOnly);
    d.port("adr", PortDir::In, 32, PortTag::RtlOnly);
    for (const auto& s : slaves) d.port("ss_" + s, PortDir::Out, 1, PortTag::RtlOnly);
    for (const auto& s : slaves) d.port("ack_" + s, PortDir::In, 1, PortTag::RtlOnly);
    d.port("bus_ack", PortDir::Out, 1, PortTag::RtlOnly);
    d.port("err", PortDir::Out, 1, PortTag::RtlOnly);
    d.process("decode", PortTag::RtlOnly);
    d.process("route_ack", PortTag::RtlOnly);
    return d;
}

inline NlModule make_rr_arbiter(const std::vector<std::string>& masters) {
    NlModule a{"arbiter", ModuleKind::RrArbiter, {}, {}};
    a.port("clock", PortDir::In, 1, PortTag::RtlOnly);
    for (const auto& m : masters) a.port("req_" + m, PortDir::In, 1, PortTag::RtlOnly);
    for (const auto& m : masters) a.port("gnt_" + m, PortDir::Out, 1, PortTag::RtlOnly);
    for (const auto& m : masters) a.port("ack_" + m, PortDir::Out, 1, PortTag::RtlOnly);
    for (const auto& m : masters) a.port("err_" + m, PortDir::Out, 1, PortTag::RtlOnly);
    a.port("bus_ack", PortDir::In, 1, PortTag::RtlOnly);
    a.port("bus_err", PortDir::In, 1, PortTag::RtlOnly);
    a.process("grant", PortTag::RtlOnly);
    a.process("advance", PortTag::RtlOnly);
    return a;
}

inline NlModule make_logic_request(const std::string& master,
                                   const std::vector<std::string>& slaves) {
    NlModule r{"logreq_" + master, ModuleKind::LogicRequest, {}, {}};
    r.port("clock", PortDir::In, 1, PortTag::RtlOnly);
    r.port("addr", PortDir::In, 32, PortTag::RtlOnly);
    r.port("read", PortDir::In, 1, PortTag::RtlOnly);
    r.port("write", PortDir::In, 1, PortTag::RtlOnly);
    for (const auto& s : slaves) r.port("req_" + s, PortDir::Out, 1, PortTag::RtlOnly);
    r.port("nomap", PortDir::Out, 1, PortTag::RtlOnly);
    r.process("decode_req", PortTag::RtlOnly);
    return r;
}

inline NlModule make_logic_arbitrator(const std::string& slave,
                                      const std::vector<std::string>& masters) {
    NlModule a{"logarb_" + slave, ModuleKind::LogicArbitrator, {}, {}};
    a.port("clock", PortDir::In, 1, PortTag::RtlOnly);
    a.port("s_wait", PortDir::In, 1, PortTag::RtlOnly);
    for (const auto& m : masters) a.port("req_" + m, PortDir::In, 1, PortTag::RtlOnly);
    for (const auto& m : masters) a.port("gnt_" + m, PortDir::Out, 1, PortTag::RtlOnly);
    for (const auto& m : masters) a.port("wait_" + m, PortDir::Out, 1, PortTag::RtlOnly);
    a.process("grant", PortTag::RtlOnly);
    a.process("advance", PortTag::RtlOnly);
    return a;
}

inline const std::vector<FieldSpec>& avalon_slave_mux_fields(std::size_t i) {
    static const std::vector<std::vector<FieldSpec>> fields = {
        {{"address", 32}}, {{"be_n", 4}}, {{"write", 1}}, {{"writedata", 32}}, {{"read", 1}}};
    return fields[i];
}

inline const std::vector<std::string>& avalon_slave_mux_kinds() {
    static const std::vector<std::string> kinds = {"address", "be", "write", "writedata", "read"};
    return kinds;
}

// Distributes the clock output to every other module's clock input, in
// module order. Call after all modules exist.
inline void wire_clock(Netlist& nl) {
    for (const auto& m : nl.modules)
        if (m.kind != ModuleKind::Clock) nl.connect("sysclk", "clk", m.name, "clock");
}

}  // namespace fabric

// ---------------------------------------------------------------------------
// Direct fabric builders

inline Netlist build_avalon(const SystemSpec& spec) {
    validate_spec(spec);
    const bool arb = spec.arbiter != ArbiterKind::None;
    std::vector<std::string> masters, slaves;
    for (const auto& m : spec.masters) masters.push_back(m.name);
    for (const auto& s : spec.slaves) slaves.push_back(s.name);

    Netlist nl;
    nl.level = NetlistLevel::Rtl;
    nl.map = AddressMap::from_spec(spec);

    for (const auto& ms : spec.masters) {
        NlModule m{ms.name, ModuleKind::Master, {}, {}};
        fabric::add_master_rtl_ports(m, BusKind::Avalon, arb);
        for (const auto& pm : program_method_names(ms.program)) m.process(pm, PortTag::Common);
        fabric::add_master_rtl_processes(m);
        nl.modules.push_back(std::move(m));
    }
    for (const auto& ss : spec.slaves) {
        NlModule s{ss.name, ModuleKind::Slave, {}, {}};
        fabric::add_slave_rtl_ports(s, BusKind::Avalon, arb);
        s.process("mem_read", PortTag::Common);
        s.process("mem_write", PortTag::Common);
        fabric::add_slave_rtl_processes(s);
        nl.modules.push_back(std::move(s));
    }
    if (arb) {
        for (const auto& m : masters) nl.modules.push_back(fabric::make_logic_request(m, slaves));
        for (const auto& s : slaves) nl.modules.push_back(fabric::make_logic_arbitrator(s, masters));
        for (const auto& s : slaves)
            for (std::size_t i = 0; i < 5; ++i)
                nl.modules.push_back(fabric::make_mux("mux_" + fabric::avalon_slave_mux_kinds()[i] +
                                                          "_" + s,
                                                      fabric::avalon_slave_mux_fields(i), masters));
        for (const auto& m : masters)
            nl.modules.push_back(
                fabric::make_mux("mux_master_" + m, {{"rdata", 32}, {"wait", 1}}, slaves));
    }
    nl.modules.push_back(fabric::make_clock());
    fabric::wire_clock(nl);

    if (!arb) {
        const auto& m = masters[0];
        const auto& s = slaves[0];
        nl.connect(m, "address", s, "address");
        nl.connect(m, "be_n", s, "be_n");
        nl.connect(m, "write", s, "write");
        nl.connect(m, "writedata", s, "writedata");
        nl.connect(m, "read", s, "read");
        nl.connect(s, "readdata", m, "readdata");
        nl.connect(s, "wait", m, "wait");
        return nl;
    }

    for (const auto& m : masters) {
        nl.connect(m, "address", "logreq_" + m, "addr");
        nl.connect(m, "read", "logreq_" + m, "read");
        nl.connect(m, "write", "logreq_" + m, "write");
    }
    for (const auto& m : masters)
        for (const auto& s : slaves) {
            nl.connect(m, "address", "mux_address_" + s, "address_" + m);
            nl.connect(m, "be_n", "mux_be_" + s, "be_n_" + m);
            nl.connect(m, "write", "mux_write_" + s, "write_" + m);
            nl.connect(m, "writedata", "mux_writedata_" + s, "writedata_" + m);
            nl.connect(m, "read", "mux_read_" + s, "read_" + m);
        }
    for (const auto& m : masters)
        for (const auto& s : slaves) nl.connect("logreq_" + m, "req_" + s, "logarb_" + s, "req_" + m);
    for (const auto& m : masters)
        for (const auto& s : slaves)
            nl.connect("logreq_" + m, "req_" + s, "mux_master_" + m, "sel_" + s);
    for (const auto& m : masters) nl.connect("logreq_" + m, "nomap", m, "nomap");
    for (const auto& s : slaves)
        for (const auto& m : masters)
            for (const auto& kind : fabric::avalon_slave_mux_kinds())
                nl.connect("logarb_" + s, "gnt_" + m, "mux_" + kind + "_" + s, "sel_" + m);
    for (const auto& s : slaves)
        for (const auto& m : masters)
            nl.connect("logarb_" + s, "wait_" + m, "mux_master_" + m, "wait_" + s);
    for (const auto& s : slaves) {
        nl.connect("mux_address_" + s, "address", s, "address");
        nl.connect("mux_be_" + s, "be_n", s, "be_n");
        nl.connect("mux_write_" + s, "write", s, "write");
        nl.connect("mux_writedata_" + s, "writedata", s, "writedata");
        nl.connect("mux_read_" + s, "read", s, "read");
    }
    for (const auto& s : slaves)
        for (const auto& m : masters) nl.connect(s, "readdata", "mux_master_" + m, "rdata_" + s);
    for (const auto& s : slaves) nl.connect(s, "wait", "logarb_" + s, "s_wait");
    for (const auto& m : masters) {
        nl.connect("mux_master_" + m, "rdata", m, "readdata");
        nl.connect("mux_master_" + m, "wait", m, "wait");
    }
    return nl;
}

inline Netlist build_wishbone(const SystemSpec& spec) {
    validate_spec(spec);
    const bool arb = spec.arbiter != ArbiterKind::None;
    std::vector<std::string> masters, slaves;
    for (const auto& m : spec.masters) masters.push_back(m.name);
    for (const auto& s : spec.slaves) slaves.push_back(s.name);
    const bool busMuxes = arb && masters.size() >= 2;

    Netlist nl;
    nl.level = NetlistLevel::Rtl;
    nl.map = AddressMap::from_spec(spec);

    for (const auto& ms : spec.masters) {
        NlModule m{ms.name, ModuleKind::Master, {}, {}};
        fabric::add_master_rtl_ports(m, BusKind::Wishbone, arb);
        for (const auto& pm : program_method_names(ms.program)) m.process(pm, PortTag::Common);
        fabric::add_master_rtl_processes(m);
        nl.modules.push_back(std::move(m));
    }
    for (const auto& ss : spec.slaves) {
        NlModule s{ss.name, ModuleKind::Slave, {}, {}};
        fabric::add_slave_rtl_ports(s, BusKind::Wishbone, arb);
        s.process("mem_read", PortTag::Common);
        s.process("mem_write", PortTag::Common);
        fabric::add_slave_rtl_processes(s);
        nl.modules.push_back(std::move(s));
    }
    if (arb) {
        nl.modules.push_back(fabric::make_decoder(slaves));
        nl.modules.push_back(fabric::make_rr_arbiter(masters));
        if (busMuxes) {
            nl.modules.push_back(fabric::make_mux("mux_cycstb", {{"cyc", 1}, {"stb", 1}}, masters));
            nl.modules.push_back(fabric::make_mux("mux_we", {{"we", 1}}, masters));
            nl.modules.push_back(fabric::make_mux("mux_adr", {{"adr", 32}}, masters));
            nl.modules.push_back(fabric::make_mux("mux_dat_w", {{"dat_w", 32}}, masters));
            nl.modules.push_back(fabric::make_mux("mux_bsel", {{"bsel", 4}}, masters));
        }
        for (const auto& m : masters)
            nl.modules.push_back(fabric::make_mux("mux_master_" + m, {{"dat_r", 32}}, slaves));
    }
    nl.modules.push_back(fabric::make_clock());
    fabric::wire_clock(nl);

    if (!arb) {
        const auto& m = masters[0];
        const auto& s = slaves[0];
        nl.connect(m, "cyc", s, "cyc");
        nl.connect(m, "stb", s, "stb");
        nl.connect(m, "we", s, "we");
        nl.connect(m, "adr", s, "adr");
        nl.connect(m, "dat_w", s, "dat_w");
        nl.connect(m, "sel", s, "sel");
        nl.connect(s, "dat_r", m, "dat_r");
        nl.connect(s, "ack", m, "ack");
        return nl;
    }

    for (const auto& m : masters) nl.connect(m, "cyc", "arbiter", "req_" + m);
    if (busMuxes) {
        for (const auto& m : masters) {
            nl.connect(m, "cyc", "mux_cycstb", "cyc_" + m);
            nl.connect(m, "stb", "mux_cycstb", "stb_" + m);
            nl.connect(m, "we", "mux_we", "we_" + m);
            nl.connect(m, "adr", "mux_adr", "adr_" + m);
            nl.connect(m, "dat_w", "mux_dat_w", "dat_w_" + m);
            nl.connect(m, "sel", "mux_bsel", "bsel_" + m);
        }
        for (const auto& m : masters) {
            nl.connect("arbiter", "gnt_" + m, "mux_cycstb", "sel_" + m);
            nl.connect("arbiter", "gnt_" + m, "mux_we", "sel_" + m);
            nl.connect("arbiter", "gnt_" + m, "mux_adr", "sel_" + m);
            nl.connect("arbiter", "gnt_" + m, "mux_dat_w", "sel_" + m);
            nl.connect("arbiter", "gnt_" + m, "mux_bsel", "sel_" + m);
        }
        for (const auto& m : masters) {
            nl.connect("arbiter", "ack_" + m, m, "ack");
            nl.connect("arbiter", "err_" + m, m, "err");
        }
        for (const auto& s : slaves) {
            nl.connect("mux_cycstb", "cyc", s, "cyc");
            nl.connect("mux_cycstb", "stb", s, "stb");
            nl.connect("mux_we", "we", s, "we");
            nl.connect("mux_adr", "adr", s, "adr");
            nl.connect("mux_dat_w", "dat_w", s, "dat_w");
            nl.connect("mux_bsel", "bsel", s, "sel");
        }
        nl.connect("mux_adr", "adr", "decoder", "adr");
    } else {
        const auto& m = masters[0];
        for (const auto& s : slaves) {
            nl.connect(m, "cyc", s, "cyc");
            nl.connect(m, "stb", s, "stb");
            nl.connect(m, "we", s, "we");
            nl.connect(m, "adr", s, "adr");
            nl.connect(m, "dat_w", s, "dat_w");
            nl.connect(m, "sel", s, "sel");
        }
        nl.connect(m, "adr", "decoder", "adr");
        nl.connect("arbiter", "ack_" + m, m, "ack");
        nl.connect("arbiter", "err_" + m, m, "err");
    }
    for (const auto& s : slaves) nl.connect("decoder", "ss_" + s, s, "ssel");
    for (const auto& s : slaves)
        for (const auto& m : masters)
            nl.connect("decoder", "ss_" + s, "mux_master_" + m, "sel_" + s);
    nl.connect("decoder", "bus_ack", "arbiter", "bus_ack");
    nl.connect("decoder", "err", "arbiter", "bus_err");
    for (const auto& s : slaves)
        for (const auto& m : masters) nl.connect(s, "dat_r", "mux_master_" + m, "dat_r_" + s);
    for (const auto& s : slaves) nl.connect(s, "ack", "decoder", "ack_" + s);
    for (const auto& m : masters) nl.connect("mux_master_" + m, "dat_r", m, "dat_r");
    return nl;
}

inline Netlist build_fabric(const SystemSpec& spec, BusKind bus) {
    return bus == BusKind::Avalon ? build_avalon(spec) : build_wishbone(spec);
}

}  // namespace buslab
