// Cycle-accurate simulator over register-transfer netlists.
//
// Elaboration turns a structural netlist into an executable instance: one
// value signal per output port, input ports bound to their unique driver's
// signal, and per-module executors. Each cycle has two phases: combinational
// processes run once in topologically sorted order (their read/write signal
// sets form a DAG; a cycle in that graph is an elaboration error), then every
// module takes the clock edge in netlist order. The schedule is fully
// deterministic.
//
// Protocol semantics:
//   * Slaves count presented cycles and acknowledge exactly L cycles after a
//     request first appears (L = read or write latency); memory commits at
//     the acknowledge edge.
//   * Wishbone masters hold cyc/stb until ack or err; the shared arbiter
//     locks its grant to the owner until the transfer completes and only
//     then advances its round-robin pointer.
//   * Avalon masters hold read/write until the selected slave's wait line
//     drops; per-slave arbitrators force wait high for non-granted masters.
//   * Unmapped accesses terminate with an ERROR observation record: via the
//     decoder's err line (Wishbone), the request logic's nomap line (Avalon),
//     or the master's own address check in point-to-point systems.
//
// An optional in-simulator assertion harness checks protocol invariants every
// cycle (ack implies an active cycle, one grant per shared resource, exact
// acknowledge latency); violations are collected, never thrown.
#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "address_map.hpp"
#include "arbiter.hpp"
#include "fabric.hpp"
#include "netlist.hpp"
#include "program.hpp"
#include "spec.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace buslab {

struct GrantEvent {
    u64 cycle = 0;
    std::string resource;  // "bus" for the shared arbiter, slave name otherwise
    std::string master;
};

struct RtlResult {
    Trace trace;
    FinalState finalState;
    RtlStats stats;
    std::vector<GrantEvent> grantLog;
    std::vector<std::string> assertionViolations;
    std::string signalDump;
};

struct RtlRunOptions {
    u64 maxCycles = 1'000'000;
    bool enableMonitors = true;
    bool dumpSignals = false;
    bool injectReadFault = false;  // corrupts the first completed read's observed data
};

class RtlSystem {
public:
    RtlSystem(const Netlist& nl, const SystemSpec& spec)
        : spec_(spec), map_(AddressMap::from_spec(spec_)) {
        if (nl.level != NetlistLevel::Rtl)
            throw ElabError(ElabErrorKind::BadNetlist, "cannot elaborate a tlm-level netlist");
        auto violations = check_portmap(nl);
        if (!violations.empty()) {
            std::string msg = "netlist fails port-map validation:";
            for (const auto& v : violations) msg += "\n  " + v.str();
            throw ElabError(violations.front().kind, msg);
        }
        build(nl);
        schedule();
    }

    RtlSystem(const RtlSystem&) = delete;
    RtlSystem& operator=(const RtlSystem&) = delete;

    RtlResult run(const RtlRunOptions& opt = {}) {
        injectReadFault_ = opt.injectReadFault;
        faultDone_ = false;
        auto t0 = std::chrono::steady_clock::now();
        std::vector<u32> prev;
        std::ostringstream dumpOs;
        u64 cycle = 0;
        while (!all_masters_done()) {
            if (cycle >= opt.maxCycles)
                throw SimLimitError("cycle limit " + std::to_string(opt.maxCycles) +
                                    " reached with unfinished programs");
            for (std::size_t i : combOrder_) combProcs_[i].fn();
            if (opt.enableMonitors) run_monitors(cycle);
            if (opt.dumpSignals) dump_changes(cycle, prev, dumpOs);
            for (auto& e : executors_) e->on_edge(cycle);
            ++cycle;
        }
        auto t1 = std::chrono::steady_clock::now();

        RtlResult res;
        res.trace = trace_;
        for (std::size_t i = 0; i < spec_.slaves.size(); ++i)
            res.finalState.push_back({spec_.slaves[i].name, memories_[i]});
        res.stats.cyclesSimulated = cycle;
        res.stats.transfersCompleted = trace_.size();
        res.stats.wallSeconds = std::chrono::duration<double>(t1 - t0).count();
        res.grantLog = grantLog_;
        res.assertionViolations = violations_;
        res.signalDump = dumpOs.str();
        return res;
    }

    // Current value of the signal owned by an output port ("module.port").
    u32 signal(const std::string& outputPort) const {
        auto it = signalIds_.find(outputPort);
        if (it == signalIds_.end())
            throw BuslabError("no such output signal: " + outputPort);
        return values_[it->second];
    }

private:
    // ----- signals ---------------------------------------------------------

    int new_signal(const std::string& name) {
        values_.push_back(0);
        signalNames_.push_back(name);
        signalIds_[name] = static_cast<int>(values_.size()) - 1;
        return static_cast<int>(values_.size()) - 1;
    }
    u32 sig(int id) const { return id < 0 ? 0u : values_[static_cast<std::size_t>(id)]; }
    void set(int id, u32 v) { values_[static_cast<std::size_t>(id)] = v; }

    struct CombProc {
        std::string name;
        std::vector<int> reads, writes;
        std::function<void()> fn;
    };

    struct Exec {
        virtual ~Exec() = default;
        virtual void on_edge(u64) {}
    };

    // ----- master ----------------------------------------------------------

    struct MasterExec : Exec {
        RtlSystem* sys;
        std::string name;
        BusKind bus;
        bool arbitrated;
        ProgramCursor cursor;
        const Instr* lookahead = nullptr;
        RegisterFile regs{};

        enum class Phase { Fetch, Request, RequestNomap, Done } phase = Phase::Fetch;
        struct {
            TxnKind kind = TxnKind::Read;
            u32 addr = 0, data = 0;
            int readReg = -1;
        } pending;
        // Latched values the drive process copies onto the output signals.
        u32 dStrobe = 0, dIsWrite = 0, dIsRead = 0, dAddr = 0, dData = 0, dNomap = 0;
        u64 seq = 0;

        // outputs
        int oCyc = -1, oStb = -1, oWe = -1, oAdr = -1, oDatW = -1, oSel = -1;          // wishbone
        int oAddress = -1, oBeN = -1, oWrite = -1, oWriteData = -1, oRead = -1;        // avalon
        int oNomap = -1;                                                               // point-to-point
        // inputs
        int iDatR = -1, iAck = -1, iErr = -1;          // wishbone
        int iReadData = -1, iWait = -1, iNomap = -1;   // avalon

        MasterExec(RtlSystem* s, const MasterSpec& ms, BusKind b, bool arb)
            : sys(s), name(ms.name), bus(b), arbitrated(arb), cursor(ms.program) {
            lookahead = cursor.next();
            if (!lookahead) phase = Phase::Done;
        }

        void drive() const {
            if (bus == BusKind::Wishbone) {
                sys->set(oCyc, dStrobe);
                sys->set(oStb, dStrobe);
                sys->set(oWe, dIsWrite);
                sys->set(oAdr, dAddr);
                sys->set(oDatW, dData);
                sys->set(oSel, dStrobe ? 0xFu : 0u);
            } else {
                sys->set(oAddress, dAddr);
                sys->set(oBeN, 0x0u);  // byte enables are active-low; full word
                sys->set(oWrite, dIsWrite);
                sys->set(oRead, dIsRead);
                sys->set(oWriteData, dData);
            }
            if (oNomap >= 0) sys->set(oNomap, dNomap);
        }

        std::vector<int> out_ids() const {
            std::vector<int> ids;
            for (int id : {oCyc, oStb, oWe, oAdr, oDatW, oSel, oAddress, oBeN, oWrite, oWriteData,
                           oRead, oNomap})
                if (id >= 0) ids.push_back(id);
            return ids;
        }

        void clear_drives() { dStrobe = dIsWrite = dIsRead = dAddr = dData = dNomap = 0; }

        void advance_program() {
            lookahead = cursor.next();
            if (!lookahead) phase = Phase::Done;
        }

        void complete(TxnStatus status, u32 data) {
            if (pending.kind == TxnKind::Read && pending.readReg >= 0)
                regs[static_cast<std::size_t>(pending.readReg)] =
                    status == TxnStatus::Ok ? data : 0u;
            sys->append_record(
                {seq++, name, pending.kind, pending.addr,
                 status == TxnStatus::Ok || pending.kind == TxnKind::Write ? data : 0u, status});
            clear_drives();
            // The instruction pointer already moved past this operation when
            // the transfer was launched; only the phase needs resetting.
            phase = lookahead ? Phase::Fetch : Phase::Done;
        }

        void on_edge(u64) override {
            switch (phase) {
                case Phase::Done:
                    return;
                case Phase::Fetch: {
                    const Instr* in = lookahead;
                    if (!in) {
                        phase = Phase::Done;
                        return;
                    }
                    if (in->op == Instr::Op::Set) {
                        regs[in->rd] = in->imm;
                        advance_program();
                        return;
                    }
                    if (in->op == Instr::Op::Add) {
                        regs[in->rd] = regs[in->ra] + regs[in->rb];
                        advance_program();
                        return;
                    }
                    pending.kind = in->op == Instr::Op::Write ? TxnKind::Write : TxnKind::Read;
                    pending.addr = in->addr;
                    pending.data = in->op == Instr::Op::Write
                                       ? (in->srcIsReg ? regs[in->src] : in->imm)
                                       : 0;
                    pending.readReg = in->op == Instr::Op::Read ? static_cast<int>(in->rd) : -1;
                    lookahead = cursor.next();  // consume the operation now; completion resets phase
                    if (!arbitrated && !route(sys->map_, pending.addr)) {
                        dNomap = 1;  // flash the self-detected unmapped line for one cycle
                        phase = Phase::RequestNomap;
                        return;
                    }
                    dStrobe = 1;
                    dIsWrite = pending.kind == TxnKind::Write ? 1 : 0;
                    dIsRead = pending.kind == TxnKind::Read ? 1 : 0;
                    dAddr = pending.addr;
                    dData = pending.data;
                    phase = Phase::Request;
                    return;
                }
                case Phase::RequestNomap:
                    complete(TxnStatus::Error, pending.data);
                    return;
                case Phase::Request: {
                    if (bus == BusKind::Wishbone) {
                        if (sys->sig(iErr)) {
                            complete(TxnStatus::Error, pending.data);
                        } else if (sys->sig(iAck)) {
                            u32 data = pending.kind == TxnKind::Read ? sys->sig(iDatR) : pending.data;
                            complete(TxnStatus::Ok, data);
                        }
                    } else {
                        // The unmapped line must be checked before the wait
                        // line: with no slave selected the return mux outputs
                        // wait = 0, which must not look like a completion.
                        if (sys->sig(iNomap)) {
                            complete(TxnStatus::Error, pending.data);
                        } else if (sys->sig(iWait) == 0) {
                            u32 data =
                                pending.kind == TxnKind::Read ? sys->sig(iReadData) : pending.data;
                            complete(TxnStatus::Ok, data);
                        }
                    }
                    return;
                }
            }
        }

    };

    // ----- slave -----------------------------------------------------------

    struct SlaveExec : Exec {
        RtlSystem* sys;
        std::string name;
        BusKind bus;
        bool hasSsel = false;
        u32 base = 0, size = 0;
        u32 readLatency = 1, writeLatency = 1;
        std::size_t memIndex = 0;
        u64 cnt = 0;

        // wishbone inputs / outputs
        int iCyc = -1, iStb = -1, iSsel = -1, iWe = -1, iAdr = -1, iDatW = -1, iSel = -1;
        int oDatR = -1, oAck = -1;
        // avalon inputs / outputs
        int iAddress = -1, iBeN = -1, iWrite = -1, iWriteData = -1, iRead = -1;
        int oReadData = -1, oWait = -1;

        bool presented() const {
            if (bus == BusKind::Wishbone)
                return sys->sig(iCyc) && sys->sig(iStb) && (!hasSsel || sys->sig(iSsel));
            return sys->sig(iWrite) || sys->sig(iRead);
        }
        bool is_write() const {
            return bus == BusKind::Wishbone ? sys->sig(iWe) != 0 : sys->sig(iWrite) != 0;
        }
        u32 latency() const { return is_write() ? writeLatency : readLatency; }
        u32 address() const { return bus == BusKind::Wishbone ? sys->sig(iAdr) : sys->sig(iAddress); }
        bool in_range(u32 addr) const { return addr >= base && addr - base < size; }

        void respond() {
            const bool pres = presented();
            const bool done = pres && cnt == latency();
            u32 data = 0;
            if (done && !is_write()) {
                u32 addr = address();
                if (in_range(addr)) data = sys->memories_[memIndex][(addr - base) / 4];
            }
            if (bus == BusKind::Wishbone) {
                sys->set(oAck, done ? 1 : 0);
                sys->set(oDatR, data);
            } else {
                sys->set(oWait, pres ? (done ? 0 : 1) : 0);
                sys->set(oReadData, data);
            }
        }

        std::vector<int> respond_reads() const {
            std::vector<int> ids;
            for (int id : {iCyc, iStb, iSsel, iWe, iAdr, iAddress, iWrite, iRead})
                if (id >= 0) ids.push_back(id);
            return ids;
        }
        std::vector<int> respond_writes() const {
            std::vector<int> ids;
            for (int id : {oAck, oDatR, oWait, oReadData})
                if (id >= 0) ids.push_back(id);
            return ids;
        }

        void on_edge(u64) override {
            if (!presented()) {
                cnt = 0;
                return;
            }
            if (cnt == latency()) {
                if (is_write()) {
                    u32 addr = address();
                    if (in_range(addr)) {
                        u32 lanes = bus == BusKind::Wishbone
                                        ? sys->sig(iSel)
                                        : (~sys->sig(iBeN)) & 0xFu;  // be_n is active-low
                        u32 wdata =
                            bus == BusKind::Wishbone ? sys->sig(iDatW) : sys->sig(iWriteData);
                        u32& word = sys->memories_[memIndex][(addr - base) / 4];
                        for (int lane = 0; lane < 4; ++lane) {
                            if (lanes & (1u << lane)) {
                                u32 mask = 0xFFu << (8 * lane);
                                word = (word & ~mask) | (wdata & mask);
                            }
                        }
                    }
                }
                cnt = 0;
            } else {
                ++cnt;
            }
        }
    };

    // ----- wishbone decoder --------------------------------------------------

    struct DecoderExec : Exec {
        RtlSystem* sys;
        int iAdr = -1;
        std::vector<int> oSs, iAck;
        int oBusAck = -1, oErr = -1;

        void decode() {
            auto target = route(sys->map_, sys->sig(iAdr));
            for (std::size_t i = 0; i < oSs.size(); ++i)
                sys->set(oSs[i], target && target->targetId == i ? 1 : 0);
            sys->set(oErr, target ? 0 : 1);
        }
        void route_ack() {
            u32 any = 0;
            for (int id : iAck) any |= sys->sig(id);
            sys->set(oBusAck, any ? 1 : 0);
        }
    };

    // ----- round-robin grant logic (shared bus and per-slave variants) ------

    struct GrantCore {
        std::optional<std::size_t> lastGrant;
        int owner = -1;
        int picked = -1;  // decision of this cycle's grant process

        // Grant is locked to the owner for the duration of a transfer;
        // otherwise round-robin over the current requesters.
        void pick(const std::vector<bool>& req) {
            if (owner >= 0) {
                picked = owner;
                return;
            }
            auto g = arbitrate_rr(req, lastGrant);
            picked = g ? static_cast<int>(*g) : -1;
        }
        void lock_or_release(bool completed) {
            if (completed && picked >= 0) {
                lastGrant = static_cast<std::size_t>(picked);
                owner = -1;
            } else if (owner < 0 && picked >= 0) {
                owner = picked;
            }
        }
    };

    struct RrArbiterExec : Exec {
        RtlSystem* sys;
        std::vector<std::string> masters;
        std::vector<int> iReq, oGnt, oAck, oErr;
        int iBusAck = -1, iBusErr = -1;
        GrantCore core;

        void grant() {
            std::vector<bool> req(iReq.size());
            for (std::size_t i = 0; i < iReq.size(); ++i) req[i] = sys->sig(iReq[i]) != 0;
            core.pick(req);
            for (std::size_t i = 0; i < oGnt.size(); ++i)
                sys->set(oGnt[i], core.picked == static_cast<int>(i) && req[i] ? 1 : 0);
        }
        void advance() {
            u32 busAck = sys->sig(iBusAck), busErr = sys->sig(iBusErr);
            for (std::size_t i = 0; i < oAck.size(); ++i) {
                u32 g = sys->sig(oGnt[i]);
                sys->set(oAck[i], g && busAck ? 1 : 0);
                sys->set(oErr[i], g && busErr ? 1 : 0);
            }
        }
        void on_edge(u64 cycle) override {
            bool granted = core.picked >= 0 && sys->sig(oGnt[static_cast<std::size_t>(core.picked)]);
            bool completed = granted && (sys->sig(iBusAck) || sys->sig(iBusErr));
            if (completed)
                sys->grantLog_.push_back({cycle, "bus", masters[static_cast<std::size_t>(core.picked)]});
            core.lock_or_release(completed);
        }
    };

    struct LogicArbitratorExec : Exec {
        RtlSystem* sys;
        std::string slave;
        std::vector<std::string> masters;
        std::vector<int> iReq, oGnt, oWait;
        int iSlaveWait = -1;
        GrantCore core;

        void grant() {
            std::vector<bool> req(iReq.size());
            for (std::size_t i = 0; i < iReq.size(); ++i) req[i] = sys->sig(iReq[i]) != 0;
            core.pick(req);
            for (std::size_t i = 0; i < oGnt.size(); ++i)
                sys->set(oGnt[i], core.picked == static_cast<int>(i) && req[i] ? 1 : 0);
        }
        void advance() {
            u32 sWait = sys->sig(iSlaveWait);
            for (std::size_t i = 0; i < oWait.size(); ++i)
                sys->set(oWait[i], sys->sig(oGnt[i]) ? sWait : 1u);
        }
        void on_edge(u64 cycle) override {
            bool granted = core.picked >= 0 && sys->sig(oGnt[static_cast<std::size_t>(core.picked)]);
            bool completed = granted && sys->sig(iSlaveWait) == 0;
            if (completed)
                sys->grantLog_.push_back(
                    {cycle, slave, masters[static_cast<std::size_t>(core.picked)]});
            core.lock_or_release(completed);
        }
    };

    struct LogicRequestExec : Exec {
        RtlSystem* sys;
        int iAddr = -1, iRead = -1, iWrite = -1;
        std::vector<int> oReq;
        int oNomap = -1;

        void decode_req() {
            const bool active = sys->sig(iRead) || sys->sig(iWrite);
            auto target = active ? route(sys->map_, sys->sig(iAddr)) : std::nullopt;
            for (std::size_t i = 0; i < oReq.size(); ++i)
                sys->set(oReq[i], target && target->targetId == i ? 1 : 0);
            sys->set(oNomap, active && !target ? 1 : 0);
        }
    };

    struct MuxExec : Exec {
        RtlSystem* sys;
        // keys in port order; per key one select plus one input per field
        std::vector<int> selIds;                    // [key]
        std::vector<std::vector<int>> fieldInIds;   // [key][field]
        std::vector<int> fieldOutIds;               // [field]

        void select() {
            int winner = -1;
            for (std::size_t k = 0; k < selIds.size(); ++k)
                if (sys->sig(selIds[k])) {
                    winner = static_cast<int>(k);
                    break;
                }
            for (std::size_t f = 0; f < fieldOutIds.size(); ++f)
                sys->set(fieldOutIds[f],
                         winner < 0 ? 0u : sys->sig(fieldInIds[static_cast<std::size_t>(winner)][f]));
        }
    };

    // ----- elaboration -------------------------------------------------------

    const MasterSpec* master_spec(const std::string& name) const {
        for (const auto& m : spec_.masters)
            if (m.name == name) return &m;
        return nullptr;
    }
    const SlaveSpec* slave_spec(const std::string& name, std::size_t* index) const {
        for (std::size_t i = 0; i < spec_.slaves.size(); ++i)
            if (spec_.slaves[i].name == name) {
                *index = i;
                return &spec_.slaves[i];
            }
        return nullptr;
    }

    void build(const Netlist& nl) {
        const bool arbitrated =
            nl.count_kind(ModuleKind::RrArbiter) > 0 || nl.count_kind(ModuleKind::LogicArbitrator) > 0;

        // Signals for every output port.
        for (const auto& m : nl.modules)
            for (const auto& p : m.ports)
                if (p.dir == PortDir::Out) new_signal(m.name + "." + p.name);

        // Input binding: the port-map check already guarantees uniqueness.
        std::map<std::string, int> driverOf;  // "module.port" (input) -> signal id
        for (const auto& c : nl.connections)
            driverOf[c.to.str()] = signalIds_.at(c.from.str());
        auto in = [&](const NlModule& m, const std::string& port) {
            auto it = driverOf.find(m.name + "." + port);
            return it == driverOf.end() ? -1 : it->second;
        };
        auto outId = [&](const NlModule& m, const std::string& port) {
            auto it = signalIds_.find(m.name + "." + port);
            return it == signalIds_.end() ? -1 : it->second;
        };

        for (const auto& s : spec_.slaves) memories_.emplace_back(s.size / 4, 0u);

        BusKind bus = BusKind::Avalon;  // refined per module below from port shape
        for (const auto& m : nl.modules)
            if (m.kind == ModuleKind::Master) bus = m.find_port("cyc") ? BusKind::Wishbone : BusKind::Avalon;

        for (const auto& mod : nl.modules) {
            switch (mod.kind) {
                case ModuleKind::Master: {
                    const MasterSpec* ms = master_spec(mod.name);
                    if (!ms)
                        throw ElabError(ElabErrorKind::BadNetlist,
                                        "master '" + mod.name + "' has no counterpart in the spec");
                    auto e = std::make_unique<MasterExec>(this, *ms, bus, arbitrated);
                    if (bus == BusKind::Wishbone) {
                        e->oCyc = outId(mod, "cyc");
                        e->oStb = outId(mod, "stb");
                        e->oWe = outId(mod, "we");
                        e->oAdr = outId(mod, "adr");
                        e->oDatW = outId(mod, "dat_w");
                        e->oSel = outId(mod, "sel");
                        e->iDatR = in(mod, "dat_r");
                        e->iAck = in(mod, "ack");
                        e->iErr = in(mod, "err");
                    } else {
                        e->oAddress = outId(mod, "address");
                        e->oBeN = outId(mod, "be_n");
                        e->oWrite = outId(mod, "write");
                        e->oWriteData = outId(mod, "writedata");
                        e->oRead = outId(mod, "read");
                        e->iReadData = in(mod, "readdata");
                        e->iWait = in(mod, "wait");
                        e->iNomap = in(mod, "nomap");
                    }
                    e->oNomap = outId(mod, "nomap");
                    MasterExec* raw = e.get();
                    combProcs_.push_back({mod.name + ".drive", {}, raw->out_ids(),
                                          [raw] { raw->drive(); }});
                    masters_.push_back(raw);
                    executors_.push_back(std::move(e));
                    break;
                }
                case ModuleKind::Slave: {
                    std::size_t idx = 0;
                    const SlaveSpec* ss = slave_spec(mod.name, &idx);
                    if (!ss)
                        throw ElabError(ElabErrorKind::BadNetlist,
                                        "slave '" + mod.name + "' has no counterpart in the spec");
                    auto e = std::make_unique<SlaveExec>();
                    e->sys = this;
                    e->name = mod.name;
                    e->bus = bus;
                    e->base = ss->base;
                    e->size = ss->size;
                    e->readLatency = ss->readLatency;
                    e->writeLatency = ss->writeLatency;
                    e->memIndex = idx;
                    if (bus == BusKind::Wishbone) {
                        e->iCyc = in(mod, "cyc");
                        e->iStb = in(mod, "stb");
                        e->iSsel = in(mod, "ssel");
                        e->hasSsel = mod.find_port("ssel") != nullptr;
                        e->iWe = in(mod, "we");
                        e->iAdr = in(mod, "adr");
                        e->iDatW = in(mod, "dat_w");
                        e->iSel = in(mod, "sel");
                        e->oDatR = outId(mod, "dat_r");
                        e->oAck = outId(mod, "ack");
                    } else {
                        e->iAddress = in(mod, "address");
                        e->iBeN = in(mod, "be_n");
                        e->iWrite = in(mod, "write");
                        e->iWriteData = in(mod, "writedata");
                        e->iRead = in(mod, "read");
                        e->oReadData = outId(mod, "readdata");
                        e->oWait = outId(mod, "wait");
                    }
                    SlaveExec* raw = e.get();
                    combProcs_.push_back({mod.name + ".respond", raw->respond_reads(),
                                          raw->respond_writes(), [raw] { raw->respond(); }});
                    slaves_.push_back(raw);
                    executors_.push_back(std::move(e));
                    break;
                }
                case ModuleKind::Decoder: {
                    auto e = std::make_unique<DecoderExec>();
                    e->sys = this;
                    e->iAdr = in(mod, "adr");
                    for (const auto& s : spec_.slaves) {
                        e->oSs.push_back(outId(mod, "ss_" + s.name));
                        e->iAck.push_back(in(mod, "ack_" + s.name));
                    }
                    e->oBusAck = outId(mod, "bus_ack");
                    e->oErr = outId(mod, "err");
                    DecoderExec* raw = e.get();
                    std::vector<int> decWrites = raw->oSs;
                    decWrites.push_back(raw->oErr);
                    combProcs_.push_back(
                        {mod.name + ".decode", {raw->iAdr}, decWrites, [raw] { raw->decode(); }});
                    combProcs_.push_back({mod.name + ".route_ack", raw->iAck, {raw->oBusAck},
                                          [raw] { raw->route_ack(); }});
                    executors_.push_back(std::move(e));
                    break;
                }
                case ModuleKind::RrArbiter: {
                    auto e = std::make_unique<RrArbiterExec>();
                    e->sys = this;
                    for (const auto& m : spec_.masters) {
                        e->masters.push_back(m.name);
                        e->iReq.push_back(in(mod, "req_" + m.name));
                        e->oGnt.push_back(outId(mod, "gnt_" + m.name));
                        e->oAck.push_back(outId(mod, "ack_" + m.name));
                        e->oErr.push_back(outId(mod, "err_" + m.name));
                    }
                    e->iBusAck = in(mod, "bus_ack");
                    e->iBusErr = in(mod, "bus_err");
                    RrArbiterExec* raw = e.get();
                    combProcs_.push_back(
                        {mod.name + ".grant", raw->iReq, raw->oGnt, [raw] { raw->grant(); }});
                    std::vector<int> advReads = raw->oGnt;
                    advReads.push_back(raw->iBusAck);
                    advReads.push_back(raw->iBusErr);
                    std::vector<int> advWrites = raw->oAck;
                    advWrites.insert(advWrites.end(), raw->oErr.begin(), raw->oErr.end());
                    combProcs_.push_back(
                        {mod.name + ".advance", advReads, advWrites, [raw] { raw->advance(); }});
                    rrArbiter_ = raw;
                    executors_.push_back(std::move(e));
                    break;
                }
                case ModuleKind::LogicArbitrator: {
                    auto e = std::make_unique<LogicArbitratorExec>();
                    e->sys = this;
                    e->slave = mod.name.rfind("logarb_", 0) == 0 ? mod.name.substr(7) : mod.name;
                    for (const auto& m : spec_.masters) {
                        e->masters.push_back(m.name);
                        e->iReq.push_back(in(mod, "req_" + m.name));
                        e->oGnt.push_back(outId(mod, "gnt_" + m.name));
                        e->oWait.push_back(outId(mod, "wait_" + m.name));
                    }
                    e->iSlaveWait = in(mod, "s_wait");
                    LogicArbitratorExec* raw = e.get();
                    combProcs_.push_back(
                        {mod.name + ".grant", raw->iReq, raw->oGnt, [raw] { raw->grant(); }});
                    std::vector<int> advReads = raw->oGnt;
                    advReads.push_back(raw->iSlaveWait);
                    combProcs_.push_back(
                        {mod.name + ".advance", advReads, raw->oWait, [raw] { raw->advance(); }});
                    logicArbs_.push_back(raw);
                    executors_.push_back(std::move(e));
                    break;
                }
                case ModuleKind::LogicRequest: {
                    auto e = std::make_unique<LogicRequestExec>();
                    e->sys = this;
                    e->iAddr = in(mod, "addr");
                    e->iRead = in(mod, "read");
                    e->iWrite = in(mod, "write");
                    for (const auto& s : spec_.slaves) e->oReq.push_back(outId(mod, "req_" + s.name));
                    e->oNomap = outId(mod, "nomap");
                    LogicRequestExec* raw = e.get();
                    std::vector<int> writes = raw->oReq;
                    writes.push_back(raw->oNomap);
                    combProcs_.push_back({mod.name + ".decode_req",
                                          {raw->iAddr, raw->iRead, raw->iWrite},
                                          writes,
                                          [raw] { raw->decode_req(); }});
                    executors_.push_back(std::move(e));
                    break;
                }
                case ModuleKind::Mux: {
                    auto e = std::make_unique<MuxExec>();
                    e->sys = this;
                    std::vector<std::string> keys, fields;
                    for (const auto& p : mod.ports) {
                        if (p.dir == PortDir::In && p.name.rfind("sel_", 0) == 0)
                            keys.push_back(p.name.substr(4));
                        if (p.dir == PortDir::Out) fields.push_back(p.name);
                    }
                    for (const auto& k : keys) {
                        e->selIds.push_back(in(mod, "sel_" + k));
                        std::vector<int> row;
                        for (const auto& f : fields) row.push_back(in(mod, f + "_" + k));
                        e->fieldInIds.push_back(std::move(row));
                    }
                    for (const auto& f : fields) e->fieldOutIds.push_back(outId(mod, f));
                    MuxExec* raw = e.get();
                    std::vector<int> reads = raw->selIds;
                    for (const auto& row : raw->fieldInIds) reads.insert(reads.end(), row.begin(), row.end());
                    combProcs_.push_back({mod.name + ".select", reads, raw->fieldOutIds,
                                          [raw] { raw->select(); }});
                    executors_.push_back(std::move(e));
                    break;
                }
                case ModuleKind::Clock: {
                    int clk = outId(mod, "clk");
                    if (clk >= 0) set(clk, 1);  // constant tick source
                    executors_.push_back(std::make_unique<Exec>());
                    break;
                }
                case ModuleKind::Arbiter:
                    throw ElabError(ElabErrorKind::BadNetlist,
                                    "transaction-level bus module in an rtl netlist");
            }
        }
    }

    // Topological order over combinational processes (Kahn's algorithm with
    // index-order tie breaking for determinism).
    void schedule() {
        const std::size_t n = combProcs_.size();
        std::vector<int> writerOf(values_.size(), -1);
        for (std::size_t i = 0; i < n; ++i)
            for (int w : combProcs_[i].writes)
                if (w >= 0) writerOf[static_cast<std::size_t>(w)] = static_cast<int>(i);

        std::vector<std::vector<std::size_t>> succ(n);
        std::vector<std::size_t> indeg(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<bool> seen(n, false);
            for (int r : combProcs_[i].reads) {
                if (r < 0) continue;
                int w = writerOf[static_cast<std::size_t>(r)];
                if (w >= 0 && static_cast<std::size_t>(w) != i && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    succ[static_cast<std::size_t>(w)].push_back(i);
                    ++indeg[i];
                }
            }
        }
        std::vector<bool> placed(n, false);
        combOrder_.clear();
        while (combOrder_.size() < n) {
            std::size_t pick = n;
            for (std::size_t i = 0; i < n; ++i)
                if (!placed[i] && indeg[i] == 0) {
                    pick = i;
                    break;
                }
            if (pick == n) {
                std::string names;
                for (std::size_t i = 0; i < n; ++i)
                    if (!placed[i]) names += (names.empty() ? "" : ", ") + combProcs_[i].name;
                throw ElabError(ElabErrorKind::CombinationalLoop,
                                "combinational cycle among processes: " + names);
            }
            placed[pick] = true;
            combOrder_.push_back(pick);
            for (std::size_t next : succ[pick]) --indeg[next];
        }
    }

    // ----- run-time helpers --------------------------------------------------

    bool all_masters_done() const {
        for (const auto* m : masters_)
            if (m->phase != MasterExec::Phase::Done) return false;
        return true;
    }

    void append_record(ObservationRecord r) {
        if (injectReadFault_ && !faultDone_ && r.kind == TxnKind::Read && r.status == TxnStatus::Ok) {
            r.data ^= 0x1u;  // observed value only; architectural state is untouched
            faultDone_ = true;
        }
        trace_.push_back(r);
    }

    // Protocol assertions, checked after the combinational phase of every
    // cycle: an acknowledge implies an active cycle, shared resources grant
    // at most one master, and the acknowledge arrives exactly L cycles after
    // the request is first presented.
    void run_monitors(u64 cycle) {
        for (std::size_t i = 0; i < slaves_.size(); ++i) {
            SlaveExec* s = slaves_[i];
            const bool pres = s->presented();
            const bool done = s->bus == BusKind::Wishbone
                                  ? sig(s->oAck) != 0
                                  : (pres && sig(s->oWait) == 0);
            if (s->bus == BusKind::Wishbone && sig(s->oAck)) {
                if (!(sig(s->iCyc) && sig(s->iStb)))
                    violations_.push_back("cycle " + std::to_string(cycle) + ": " + s->name +
                                          " acknowledges without an active bus cycle");
            }
            if (monitor_.size() <= i) monitor_.resize(i + 1);
            MonitorState& ms = monitor_[i];
            if (pres && !ms.armed) {
                ms.armed = true;
                ms.start = cycle;
                ms.latency = s->latency();
            }
            if (done) {
                if (ms.armed && cycle - ms.start != ms.latency)
                    violations_.push_back(
                        "cycle " + std::to_string(cycle) + ": " + s->name + " acknowledged after " +
                        std::to_string(cycle - ms.start) + " cycles, expected " +
                        std::to_string(ms.latency));
                ms.armed = false;  // re-arm for a possible back-to-back transfer
            }
        }
        if (rrArbiter_) {
            u32 grants = 0;
            for (int g : rrArbiter_->oGnt) grants += sig(g);
            if (grants > 1)
                violations_.push_back("cycle " + std::to_string(cycle) +
                                      ": shared bus grants " + std::to_string(grants) + " masters");
        }
        for (const auto* la : logicArbs_) {
            u32 grants = 0;
            for (int g : la->oGnt) grants += sig(g);
            if (grants > 1)
                violations_.push_back("cycle " + std::to_string(cycle) + ": slave " + la->slave +
                                      " grants " + std::to_string(grants) + " masters");
        }
    }

    void dump_changes(u64 cycle, std::vector<u32>& prev, std::ostringstream& os) const {
        const bool first = prev.empty();
        if (first) prev.assign(values_.size(), 0);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (first ? values_[i] != 0 : values_[i] != prev[i])
                os << "#" << cycle << " " << signalNames_[i] << "=" << hex_short(values_[i]) << "\n";
            prev[i] = values_[i];
        }
    }

    struct MonitorState {
        bool armed = false;
        u64 start = 0;
        u32 latency = 0;
    };

    SystemSpec spec_;
    AddressMap map_;
    std::vector<u32> values_;
    std::vector<std::string> signalNames_;
    std::map<std::string, int> signalIds_;
    std::vector<std::vector<u32>> memories_;
    std::vector<std::unique_ptr<Exec>> executors_;
    std::vector<MasterExec*> masters_;
    std::vector<SlaveExec*> slaves_;
    std::vector<LogicArbitratorExec*> logicArbs_;
    RrArbiterExec* rrArbiter_ = nullptr;
    std::vector<CombProc> combProcs_;
    std::vector<std::size_t> combOrder_;
    std::vector<MonitorState> monitor_;
    Trace trace_;
    std::vector<GrantEvent> grantLog_;
    std::vector<std::string> violations_;
    bool injectReadFault_ = false;
    bool faultDone_ = false;
};

inline RtlResult run_rtl(const SystemSpec& spec, const RtlRunOptions& opt = {}) {
    Netlist nl = build_fabric(spec, spec.bus);
    RtlSystem sys(nl, spec);
    return sys.run(opt);
}

inline RtlResult run_rtl_netlist(const Netlist& nl, const SystemSpec& spec,
                                 const RtlRunOptions& opt = {}) {
    RtlSystem sys(nl, spec);
    return sys.run(opt);
}

}  // namespace buslab
