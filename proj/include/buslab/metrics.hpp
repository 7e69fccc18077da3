// Verification metrics across the two abstraction levels.
//
//   * Structural complexity: module/port/process/connection counts with a
//     flat cost model (total units, 8 units per man-day), and the effort
//     ratio te = rtl total / tlm total for the same system.
//   * Accuracy: the divergence fraction alpha between a transaction-level and
//     a cycle-accurate run of the same spec. Observation records are aligned
//     per master by sequence number; alpha is the mismatched-record fraction
//     over the larger trace, or, when every record matches, the mismatched
//     fraction of final memory words. alpha is zero exactly when both the
//     record diffs and the final-state diffs are empty.
//   * Speedup: wall-clock ratio and event ratio (cycles per transaction)
//     between the two runs.
//   * The sweep row/CSV format consumed by the command-line driver and by
//     gnuplot exports.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fabric.hpp"
#include "netlist.hpp"
#include "refine.hpp"
#include "rtl.hpp"
#include "spec.hpp"
#include "tlm.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace buslab {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Structural complexity and the effort ratio

struct ComplexityCounts {
    std::size_t modules = 0;
    std::size_t ports = 0;
    std::size_t processes = 0;
    std::size_t connections = 0;

    std::size_t total() const { return modules + ports + processes + connections; }
    double man_days() const { return static_cast<double>(total()) / 8.0; }
    friend bool operator==(const ComplexityCounts&, const ComplexityCounts&) = default;
};

inline ComplexityCounts complexity(const Netlist& nl) {
    ComplexityCounts c;
    c.modules = nl.modules.size();
    for (const auto& m : nl.modules) {
        c.ports += m.ports.size();
        c.processes += m.processes.size();
    }
    c.connections = nl.connections.size();
    return c;
}

struct TeResult {
    ComplexityCounts tlmCounts, rtlCounts;
    double tTlm = 0;  // man-days at the transaction level
    double tRtl = 0;  // man-days at the register-transfer level
    double te = 0;    // effort ratio rtl/tlm
};

inline TeResult te_ratio(const SystemSpec& spec, BusKind bus) {
    TeResult r;
    r.tlmCounts = complexity(elaborate_tlm_netlist(spec));
    r.rtlCounts = complexity(build_fabric(spec, bus));
    r.tTlm = r.tlmCounts.man_days();
    r.tRtl = r.rtlCounts.man_days();
    r.te = r.tlmCounts.total() > 0
               ? static_cast<double>(r.rtlCounts.total()) / static_cast<double>(r.tlmCounts.total())
               : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Accuracy

inline std::string format_record(const ObservationRecord& r) {
    return std::string(to_string(r.kind)) + " " + hex32(r.address) + " " + hex32(r.data) + " " +
           to_string(r.status);
}

struct RecordDiff {
    std::string master;
    u64 seq = 0;  // first diverging sequence number for this master
    std::string tlmRecord, rtlRecord;
};

struct FinalStateDiff {
    std::string slave;
    u32 offset = 0;  // byte offset within the slave
    u32 tlmWord = 0, rtlWord = 0;
};

struct AccuracyReport {
    double alpha = 0;
    std::vector<RecordDiff> recordDiffs;  // first divergence per master
    std::vector<FinalStateDiff> finalStateDiffs;
    bool raceFlag = false;  // >= 2 masters touched one address, at least one wrote
    std::size_t tlmRecords = 0, rtlRecords = 0, mismatchedRecords = 0;
};

inline AccuracyReport compare_results(const TlmResult& tlm, const RtlResult& rtl) {
    AccuracyReport rep;
    rep.tlmRecords = tlm.trace.size();
    rep.rtlRecords = rtl.trace.size();

    // Group records per master (first-appearance order keeps reports stable)
    // and align the two sequences by position; seq numbers are the per-master
    // positions, so this is alignment by seq.
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::vector<const ObservationRecord*>,
                                    std::vector<const ObservationRecord*>>>
        byMaster;
    auto collect = [&](const Trace& trace, bool isTlm) {
        for (const auto& r : trace) {
            auto it = byMaster.find(r.master);
            if (it == byMaster.end()) {
                order.push_back(r.master);
                it = byMaster.emplace(r.master, decltype(byMaster)::mapped_type{}).first;
            }
            (isTlm ? it->second.first : it->second.second).push_back(&r);
        }
    };
    collect(tlm.trace, true);
    collect(rtl.trace, false);

    for (const auto& name : order) {
        const auto& [a, b] = byMaster[name];
        const std::size_t n = std::max(a.size(), b.size());
        bool firstDiff = true;
        for (std::size_t i = 0; i < n; ++i) {
            const ObservationRecord* ra = i < a.size() ? a[i] : nullptr;
            const ObservationRecord* rb = i < b.size() ? b[i] : nullptr;
            if (ra && rb && *ra == *rb) continue;
            ++rep.mismatchedRecords;
            if (firstDiff) {
                rep.recordDiffs.push_back({name, i, ra ? format_record(*ra) : "absent",
                                           rb ? format_record(*rb) : "absent"});
                firstDiff = false;
            }
        }
    }

    std::size_t totalWords = 0, wordMismatches = 0;
    const std::size_t slaveCount = std::max(tlm.finalState.size(), rtl.finalState.size());
    for (std::size_t s = 0; s < slaveCount; ++s) {
        const std::vector<u32> empty;
        const auto& wa = s < tlm.finalState.size() ? tlm.finalState[s].words : empty;
        const auto& wb = s < rtl.finalState.size() ? rtl.finalState[s].words : empty;
        const std::string& name =
            s < tlm.finalState.size() ? tlm.finalState[s].slave : rtl.finalState[s].slave;
        const std::size_t words = std::max(wa.size(), wb.size());
        totalWords += words;
        for (std::size_t w = 0; w < words; ++w) {
            u32 va = w < wa.size() ? wa[w] : 0;
            u32 vb = w < wb.size() ? wb[w] : 0;
            if (va != vb) {
                ++wordMismatches;
                rep.finalStateDiffs.push_back({name, static_cast<u32>(w * 4), va, vb});
            }
        }
    }

    const std::size_t denom = std::max(rep.tlmRecords, rep.rtlRecords);
    if (rep.mismatchedRecords > 0)
        rep.alpha = denom ? static_cast<double>(rep.mismatchedRecords) / static_cast<double>(denom)
                          : 1.0;
    else if (wordMismatches > 0)
        rep.alpha = totalWords
                        ? static_cast<double>(wordMismatches) / static_cast<double>(totalWords)
                        : 1.0;
    else
        rep.alpha = 0.0;

    // Race detection over the union of both traces: completed accesses only,
    // since ERROR terminations never reach memory.
    std::map<u32, std::pair<std::set<std::string>, bool>> touches;
    auto touch = [&](const Trace& trace) {
        for (const auto& r : trace) {
            if (r.status != TxnStatus::Ok) continue;
            auto& entry = touches[r.address];
            entry.first.insert(r.master);
            entry.second = entry.second || r.kind == TxnKind::Write;
        }
    };
    touch(tlm.trace);
    touch(rtl.trace);
    for (const auto& [addr, entry] : touches) {
        (void)addr;
        if (entry.first.size() >= 2 && entry.second) {
            rep.raceFlag = true;
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Speedup

struct SpeedupReport {
    double wallRatio = 1.0;   // rtl wall seconds / tlm wall seconds
    double eventRatio = 1.0;  // rtl cycles / tlm transactions
};

inline SpeedupReport speedup(const TlmStats& tlm, const RtlStats& rtl) {
    SpeedupReport s;
    s.wallRatio = tlm.wallSeconds > 0 ? rtl.wallSeconds / tlm.wallSeconds : 1.0;
    s.eventRatio = tlm.transactionsCompleted > 0
                       ? static_cast<double>(rtl.cyclesSimulated) /
                             static_cast<double>(tlm.transactionsCompleted)
                       : 1.0;
    return s;
}

// ---------------------------------------------------------------------------
// Level comparison driver

struct LevelComparison {
    TlmResult tlm;
    RtlResult rtl;
    AccuracyReport accuracy;
    SpeedupReport speedup;
};

// Runs the same spec through both kernels (transaction level first) and
// reports accuracy and speedup.
inline LevelComparison compare_levels(const SystemSpec& spec, u64 maxTransactions = 1'000'000,
                                      const RtlRunOptions& rtlOpt = {}) {
    LevelComparison c;
    c.tlm = run_tlm(spec, maxTransactions);
    c.rtl = run_rtl(spec, rtlOpt);
    c.accuracy = compare_results(c.tlm, c.rtl);
    c.speedup = speedup(c.tlm.stats, c.rtl.stats);
    return c;
}

// ---------------------------------------------------------------------------
// Sweep rows and CSV

struct SweepRow {
    std::string scenario;
    std::string bus;
    int tiers = 0;
    bool failed = false;  // keeps its identity cells, FAILED elsewhere
    std::size_t tlmTotal = 0, rtlTotal = 0;
    double te = 0, alpha = 0;
    u64 cycles = 0, transactions = 0;
    double wallRatio = 0;
};

inline const char* sweep_csv_header() {
    return "scenario,bus,tiers,tlmTotal,rtlTotal,te,alpha,cycles,transactions,wallRatio";
}

inline std::string sweep_csv_row(const SweepRow& r) {
    std::string line = r.scenario + "," + r.bus + "," + std::to_string(r.tiers);
    if (r.failed) {
        for (int i = 0; i < 7; ++i) line += ",FAILED";
        return line;
    }
    line += "," + std::to_string(r.tlmTotal);
    line += "," + std::to_string(r.rtlTotal);
    line += "," + fixed6(r.te);
    line += "," + fixed6(r.alpha);
    line += "," + std::to_string(r.cycles);
    line += "," + std::to_string(r.transactions);
    line += "," + fixed6(r.wallRatio);
    return line;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = std::string(sweep_csv_header()) + "\n";
    for (const auto& r : rows) out += sweep_csv_row(r) + "\n";
    return out;
}

}  // namespace buslab
