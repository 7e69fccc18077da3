// Command implementations behind the command-line driver. Each cmd_* takes a
// plain config struct and the output/error streams and returns the process
// exit code, so the whole surface is testable without spawning processes.
//
// Exit codes (stable contract):
//   0  success
//   1  the two abstraction levels diverge (alpha > 0)
//   2  spec file unreadable or invalid
//   3  simulation limit exceeded
//   4  elaboration error
//   5  race observed between masters (takes precedence over code 1)
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metrics.hpp"
#include "refine.hpp"
#include "spec_io.hpp"
#include "types.hpp"

namespace buslab {

inline SystemSpec load_spec_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SpecError(SpecErrorKind::Syntax, "cannot open spec file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_spec(ss.str());
}

inline BusKind parse_bus_name(const std::string& name) {
    if (name == "avalon") return BusKind::Avalon;
    if (name == "wishbone") return BusKind::Wishbone;
    throw SpecError(SpecErrorKind::BadValue, "unknown bus: " + name + " (avalon or wishbone)");
}

// Maps the library's exceptions onto the exit-code contract.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const SpecError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const SimLimitError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ElabError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const BuslabError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw BuslabError("cannot write file: " + path);
    f << content;
}

inline void maybe_write_trace(const std::string& path, const Trace& trace) {
    if (path.empty()) return;
    std::ostringstream os;
    write_trace_csv(os, trace);
    write_file(path, os.str());
}

inline void maybe_write_state(const std::string& path, const FinalState& state) {
    if (path.empty()) return;
    std::ostringstream os;
    write_state_dump(os, state);
    write_file(path, os.str());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run

struct RunConfig {
    std::string specPath;
    std::string model = "tlm";  // "tlm" or "rtl"
    std::string busOverride;    // empty keeps the spec's bus
    u64 maxTransactions = 1'000'000;
    u64 maxCycles = 1'000'000;
    std::string tracePath, statePath, statsPath;
    bool dumpSignals = false;
    std::string signalDumpPath;
    bool injectReadFault = false;
};

inline int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        SystemSpec spec = load_spec_file(cfg.specPath);
        if (!cfg.busOverride.empty()) spec.bus = parse_bus_name(cfg.busOverride);
        if (cfg.model != "tlm" && cfg.model != "rtl")
            throw SpecError(SpecErrorKind::BadValue, "unknown model: " + cfg.model);

        nlohmann::json stats;
        stats["model"] = cfg.model;
        stats["bus"] = to_string(spec.bus);
        out << "model: " << cfg.model << "\n";
        out << "bus: " << to_string(spec.bus) << "\n";
        if (cfg.model == "tlm") {
            TlmResult res = run_tlm(spec, cfg.maxTransactions);
            out << "transactions: " << res.stats.transactionsCompleted << "\n";
            out << "scheduler rounds: " << res.stats.schedulerRounds << "\n";
            out << "wait events: " << res.stats.waitEvents << "\n";
            out << "wall seconds: " << fixed6(res.stats.wallSeconds) << "\n";
            detail::maybe_write_trace(cfg.tracePath, res.trace);
            detail::maybe_write_state(cfg.statePath, res.finalState);
            stats["transactions"] = res.stats.transactionsCompleted;
            stats["schedulerRounds"] = res.stats.schedulerRounds;
            stats["waitEvents"] = res.stats.waitEvents;
            stats["wallSeconds"] = res.stats.wallSeconds;
        } else {
            RtlRunOptions opt;
            opt.maxCycles = cfg.maxCycles;
            opt.dumpSignals = cfg.dumpSignals || !cfg.signalDumpPath.empty();
            opt.injectReadFault = cfg.injectReadFault;
            RtlResult res = run_rtl(spec, opt);
            out << "cycles: " << res.stats.cyclesSimulated << "\n";
            out << "transfers: " << res.stats.transfersCompleted << "\n";
            out << "wall seconds: " << fixed6(res.stats.wallSeconds) << "\n";
            if (!res.assertionViolations.empty()) {
                out << "assertion violations: " << res.assertionViolations.size() << "\n";
                for (const auto& v : res.assertionViolations) out << "  " << v << "\n";
            }
            detail::maybe_write_trace(cfg.tracePath, res.trace);
            detail::maybe_write_state(cfg.statePath, res.finalState);
            if (!cfg.signalDumpPath.empty()) detail::write_file(cfg.signalDumpPath, res.signalDump);
            else if (cfg.dumpSignals) out << res.signalDump;
            stats["cycles"] = res.stats.cyclesSimulated;
            stats["transfers"] = res.stats.transfersCompleted;
            stats["wallSeconds"] = res.stats.wallSeconds;
            stats["assertionViolations"] = res.assertionViolations.size();
        }
        if (!cfg.statsPath.empty()) detail::write_file(cfg.statsPath, stats.dump(2) + "\n");
        return 0;
    });
}

// ---------------------------------------------------------------------------
// compare

struct CompareConfig {
    std::string specPath;
    std::string busOverride;
    u64 maxTransactions = 1'000'000;
    u64 maxCycles = 1'000'000;
    bool injectReadFault = false;
};

inline int cmd_compare(const CompareConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        SystemSpec spec = load_spec_file(cfg.specPath);
        if (!cfg.busOverride.empty()) spec.bus = parse_bus_name(cfg.busOverride);

        RtlRunOptions opt;
        opt.maxCycles = cfg.maxCycles;
        opt.injectReadFault = cfg.injectReadFault;
        LevelComparison cmp = compare_levels(spec, cfg.maxTransactions, opt);
        TeResult te = te_ratio(spec, spec.bus);

        out << "bus: " << to_string(spec.bus) << "\n";
        out << "tlm: " << cmp.tlm.stats.transactionsCompleted << " transactions, "
            << cmp.tlm.stats.schedulerRounds << " rounds, " << cmp.tlm.stats.waitEvents
            << " wait events\n";
        out << "rtl: " << cmp.rtl.stats.cyclesSimulated << " cycles, "
            << cmp.rtl.stats.transfersCompleted << " transfers\n";
        out << "complexity: tlm " << te.tlmCounts.total() << ", rtl " << te.rtlCounts.total()
            << ", te " << fixed6(te.te) << "\n";
        out << "alpha: " << fixed6(cmp.accuracy.alpha) << "\n";
        for (const auto& d : cmp.accuracy.recordDiffs)
            out << "  record diff: master " << d.master << " seq " << d.seq << ": tlm [" << d.tlmRecord
                << "] rtl [" << d.rtlRecord << "]\n";
        for (const auto& d : cmp.accuracy.finalStateDiffs)
            out << "  state diff: " << d.slave << "+" << hex_short(d.offset) << ": tlm "
                << hex32(d.tlmWord) << " rtl " << hex32(d.rtlWord) << "\n";
        out << "race: " << (cmp.accuracy.raceFlag ? "yes" : "no") << "\n";
        out << "speedup: wall ratio " << fixed6(cmp.speedup.wallRatio) << ", event ratio "
            << fixed6(cmp.speedup.eventRatio) << "\n";
        if (!cmp.rtl.assertionViolations.empty()) {
            out << "assertion violations: " << cmp.rtl.assertionViolations.size() << "\n";
            for (const auto& v : cmp.rtl.assertionViolations) out << "  " << v << "\n";
        }
        if (cmp.accuracy.raceFlag) return 5;
        return cmp.accuracy.alpha > 0 ? 1 : 0;
    });
}

// ---------------------------------------------------------------------------
// sweep

struct SweepConfig {
    std::string outDir = ".";
    int fromTier = 2;
    int toTier = 5;
    u64 maxTransactions = 1'000'000;
    u64 maxCycles = 1'000'000;
};

inline int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (cfg.fromTier < 2 || cfg.toTier > 5 || cfg.fromTier > cfg.toTier)
            throw SpecError(SpecErrorKind::BadValue, "tier range must lie within 2..5");
        std::filesystem::create_directories(cfg.outDir);

        std::vector<SweepRow> rows;
        for (int tier = cfg.fromTier; tier <= cfg.toTier; ++tier) {
            for (BusKind bus : {BusKind::Avalon, BusKind::Wishbone}) {
                SweepRow row;
                row.scenario = "tier" + std::to_string(tier);
                row.bus = to_string(bus);
                row.tiers = tier;
                try {
                    SystemSpec spec = tier_spec(tier, bus);
                    TeResult te = te_ratio(spec, bus);
                    RtlRunOptions opt;
                    opt.maxCycles = cfg.maxCycles;
                    LevelComparison cmp = compare_levels(spec, cfg.maxTransactions, opt);
                    row.tlmTotal = te.tlmCounts.total();
                    row.rtlTotal = te.rtlCounts.total();
                    row.te = te.te;
                    row.alpha = cmp.accuracy.alpha;
                    row.cycles = cmp.rtl.stats.cyclesSimulated;
                    row.transactions = cmp.tlm.stats.transactionsCompleted;
                    row.wallRatio = cmp.speedup.wallRatio;
                } catch (const BuslabError& e) {
                    row.failed = true;
                    err << "sweep " << row.scenario << "/" << row.bus << " failed: " << e.what()
                        << "\n";
                }
                rows.push_back(row);
            }
        }

        const std::string csv = sweep_csv(rows);
        detail::write_file(cfg.outDir + "/sweep.csv", csv);
        out << csv;

        // Two-column gnuplot exports (tier vs. value), one file per series per
        // bus; wall-time columns stay out of these so they are reproducible.
        for (BusKind bus : {BusKind::Avalon, BusKind::Wishbone}) {
            std::string ctlm, crtl, tef;
            for (const auto& r : rows) {
                if (r.bus != to_string(bus) || r.failed) continue;
                ctlm += std::to_string(r.tiers) + " " + std::to_string(r.tlmTotal) + "\n";
                crtl += std::to_string(r.tiers) + " " + std::to_string(r.rtlTotal) + "\n";
                tef += std::to_string(r.tiers) + " " + fixed6(r.te) + "\n";
            }
            detail::write_file(cfg.outDir + "/complexity_tlm_" + to_string(bus) + ".dat", ctlm);
            detail::write_file(cfg.outDir + "/complexity_rtl_" + to_string(bus) + ".dat", crtl);
            detail::write_file(cfg.outDir + "/te_" + to_string(bus) + ".dat", tef);
        }

        for (const auto& r : rows)
            if (r.failed) return 3;
        return 0;
    });
}

// ---------------------------------------------------------------------------
// transform-report

struct TransformReportConfig {
    std::string specPath;
    std::string busOverride;
    bool listDetails = true;
};

inline int cmd_transform_report(const TransformReportConfig& cfg, std::ostream& out,
                                std::ostream& err) {
    return guarded(err, [&]() -> int {
        SystemSpec spec = load_spec_file(cfg.specPath);
        if (!cfg.busOverride.empty()) spec.bus = parse_bus_name(cfg.busOverride);

        Netlist tlm = elaborate_tlm_netlist(spec);
        TransformResult tr = transform(tlm, spec.bus);
        const TransformReport& rep = tr.report;

        out << "transformation report (" << to_string(spec.bus) << ")\n";
        out << "stage 1 ports: +" << rep.portsAdded.size() << " -" << rep.portsDeleted.size()
            << "\n";
        out << "stage 2 processes: +" << rep.processesAdded.size() << " -"
            << rep.processesDeleted.size() << "\n";
        out << "stage 3 muxes: " << rep.muxPlan.total() << " (slave-side " << rep.muxPlan.perSlaveMuxes
            << ", bus-signal " << rep.muxPlan.busSignalMuxes << ", read-return "
            << rep.muxPlan.masterReadMuxes << ")\n";
        out << "stage 4 arbiter: " << rep.arbiterChoice << "\n";
        out << "stage 5 port mappings: " << rep.mappingCount << "\n";
        if (cfg.listDetails) {
            for (const auto& p : rep.portsAdded) out << "  port added:      " << p << "\n";
            for (const auto& p : rep.portsDeleted) out << "  port deleted:    " << p << "\n";
            for (const auto& p : rep.processesAdded) out << "  process added:   " << p << "\n";
            for (const auto& p : rep.processesDeleted) out << "  process deleted: " << p << "\n";
        }
        out << "result: " << tr.rtl.modules.size() << " modules, " << tr.rtl.connections.size()
            << " connections\n";
        return 0;
    });
}

}  // namespace buslab
