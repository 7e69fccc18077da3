// Shared scalar types, enums and the error hierarchy.
#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace buslab {

using u32 = std::uint32_t;
using u64 = std::uint64_t;

enum class BusKind { Avalon, Wishbone };

inline const char* to_string(BusKind b) {
    return b == BusKind::Avalon ? "avalon" : "wishbone";
}

enum class TxnKind { Read, Write };

inline const char* to_string(TxnKind k) { return k == TxnKind::Read ? "R" : "W"; }

// WAIT never reaches the observable trace; it only feeds the wait-event counter.
enum class TxnStatus { Ok, Wait, Error };

inline const char* to_string(TxnStatus s) {
    switch (s) {
        case TxnStatus::Ok: return "OK";
        case TxnStatus::Wait: return "WAIT";
        default: return "ERROR";
    }
}

struct BuslabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Spec text or program text rejected. `kind` lets tests assert the exact cause.
enum class SpecErrorKind {
    Syntax,
    NoMasters,
    NoSlaves,
    OverlappingMap,
    DuplicateName,
    BadAlignment,
    BadValue,
    BadMnemonic,
    BadRegister,
    BadOperands,
    BadRepeat,
    BadTopology,
};

struct SpecError : BuslabError {
    SpecErrorKind kind;
    SpecError(SpecErrorKind k, const std::string& msg) : BuslabError(msg), kind(k) {}
};

// Simulation ran into its transaction or cycle budget with programs unfinished.
struct SimLimitError : BuslabError {
    using BuslabError::BuslabError;
};

enum class ElabErrorKind { UnconnectedPort, MultipleDrivers, CombinationalLoop, BadNetlist };

struct ElabError : BuslabError {
    ElabErrorKind kind;
    ElabError(ElabErrorKind k, const std::string& msg) : BuslabError(msg), kind(k) {}
};

// Every refinement candidate failed at least one requirement.
struct RequirementsUnsatisfiable : BuslabError {
    using BuslabError::BuslabError;
};

inline std::string hex32(u32 v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

inline std::string hex_short(u32 v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%x", v);
    return buf;
}

}  // namespace buslab
