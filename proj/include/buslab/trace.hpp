// Transactions, observation records and the on-disk artifact formats shared
// by both simulators (trace CSV, final-state dump).
#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "types.hpp"

namespace buslab {

struct TxnMeta {
    TxnStatus status = TxnStatus::Ok;
    u32 latencyHint = 0;  // carried for completeness; the TLM scheduler ignores it
    std::map<std::string, std::string> attributes;
};

struct Transaction {
    TxnKind kind = TxnKind::Read;
    u32 address = 0;       // 4-aligned
    u32 data = 0;          // write payload / read return
    u32 byteEnable = 0xF;  // active-high lane mask; nonzero for writes
    TxnMeta meta;
};

// One completed transfer as seen at a master's ports. WAIT states never
// appear here; they are aggregated into the statistics instead.
struct ObservationRecord {
    u64 seq = 0;  // per-master, strictly increasing from 0
    std::string master;
    TxnKind kind = TxnKind::Read;
    u32 address = 0;
    u32 data = 0;
    TxnStatus status = TxnStatus::Ok;  // Ok or Error only

    friend bool operator==(const ObservationRecord&, const ObservationRecord&) = default;
};

using Trace = std::vector<ObservationRecord>;

struct TlmStats {
    u64 transactionsCompleted = 0;
    u64 waitEvents = 0;
    u64 schedulerRounds = 0;
    double wallSeconds = 0.0;  // excluded from determinism guarantees
};

struct RtlStats {
    u64 cyclesSimulated = 0;
    u64 transfersCompleted = 0;
    double wallSeconds = 0.0;
};

// Final memory contents per slave, in slave declaration order.
struct SlaveImage {
    std::string slave;
    std::vector<u32> words;
    friend bool operator==(const SlaveImage&, const SlaveImage&) = default;
};

using FinalState = std::vector<SlaveImage>;

inline void write_trace_csv(std::ostream& os, const Trace& trace) {
    os << "seq,master,kind,address,data,status\n";
    for (const auto& r : trace)
        os << r.seq << ',' << r.master << ',' << to_string(r.kind) << ',' << hex32(r.address)
           << ',' << hex32(r.data) << ',' << to_string(r.status) << '\n';
}

// One 32-bit word (4 bytes) per line, preceded by a slave heading.
inline void write_state_dump(std::ostream& os, const FinalState& state) {
    for (const auto& img : state) {
        os << "# slave " << img.slave << " words " << img.words.size() << '\n';
        for (u32 w : img.words) os << hex32(w).substr(2) << '\n';
    }
}

}  // namespace buslab
