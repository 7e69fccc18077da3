// System description: bus choice, masters with programs, memory-mapped
// slaves, arbitration policy, and the canonical tier family used throughout
// the test suites.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "program.hpp"
#include "types.hpp"

namespace buslab {

// None models a point-to-point link and is only valid for exactly one master
// and one slave (the 2-tier topology).
enum class ArbiterKind { None, RoundRobin };

inline const char* to_string(ArbiterKind a) {
    return a == ArbiterKind::None ? "none" : "round_robin";
}

struct MasterSpec {
    std::string name;
    u32 startAddress = 0;  // base of the region this master's program targets
    Program program;
};

struct SlaveSpec {
    std::string name;
    u32 base = 0;      // 4-aligned
    u32 size = 0;      // multiple of 4, >= 4
    u32 readLatency = 1;
    u32 writeLatency = 1;
};

struct SystemSpec {
    BusKind bus = BusKind::Wishbone;
    std::string description;
    ArbiterKind arbiter = ArbiterKind::RoundRobin;
    std::vector<MasterSpec> masters;
    std::vector<SlaveSpec> slaves;
    // Ordered refinement candidates tried by refine_loop after this spec.
    std::vector<SystemSpec> candidates;
};

namespace detail {

inline void validate_program_tree(const Program& p, int depth) {
    if (depth > kMaxRepeatNesting)
        throw SpecError(SpecErrorKind::BadRepeat, "repeat nesting exceeds 4");
    for (const Instr& in : p) {
        switch (in.op) {
            case Instr::Op::Set:
            case Instr::Op::Add:
                if (in.rd >= kRegisterCount || in.ra >= kRegisterCount || in.rb >= kRegisterCount)
                    throw SpecError(SpecErrorKind::BadRegister, "register index out of range");
                break;
            case Instr::Op::Write:
                if (in.srcIsReg && in.src >= kRegisterCount)
                    throw SpecError(SpecErrorKind::BadRegister, "register index out of range");
                if (in.addr % 4 != 0)
                    throw SpecError(SpecErrorKind::BadAlignment,
                                    "address " + hex_short(in.addr) + " is not 4-aligned");
                break;
            case Instr::Op::Read:
                if (in.rd >= kRegisterCount)
                    throw SpecError(SpecErrorKind::BadRegister, "register index out of range");
                if (in.addr % 4 != 0)
                    throw SpecError(SpecErrorKind::BadAlignment,
                                    "address " + hex_short(in.addr) + " is not 4-aligned");
                break;
            case Instr::Op::Repeat:
                if (in.count < 1)
                    throw SpecError(SpecErrorKind::BadRepeat, "repeat count must be >= 1");
                validate_program_tree(in.body, depth + 1);
                break;
        }
    }
}

}  // namespace detail

// Throws SpecError on the first violated structural rule.
inline void validate_spec(const SystemSpec& spec) {
    if (spec.masters.empty()) throw SpecError(SpecErrorKind::NoMasters, "spec declares no masters");
    if (spec.slaves.empty()) throw SpecError(SpecErrorKind::NoSlaves, "spec declares no slaves");

    // Component names double as netlist module names, so they must be unique
    // across masters and slaves together.
    std::set<std::string> names;
    for (const auto& m : spec.masters) {
        if (m.name.empty())
            throw SpecError(SpecErrorKind::BadValue, "master with empty name");
        if (!names.insert(m.name).second)
            throw SpecError(SpecErrorKind::DuplicateName, "duplicate component name '" + m.name + "'");
        detail::validate_program_tree(m.program, 1);
    }
    for (const auto& s : spec.slaves) {
        if (s.name.empty())
            throw SpecError(SpecErrorKind::BadValue, "slave with empty name");
        if (!names.insert(s.name).second)
            throw SpecError(SpecErrorKind::DuplicateName, "duplicate component name '" + s.name + "'");
        if (s.base % 4 != 0)
            throw SpecError(SpecErrorKind::BadAlignment,
                            "slave '" + s.name + "' base " + hex_short(s.base) + " is not 4-aligned");
        if (s.size < 4 || s.size % 4 != 0)
            throw SpecError(SpecErrorKind::BadValue,
                            "slave '" + s.name + "' size must be a positive multiple of 4");
        if (static_cast<u64>(s.base) + s.size > 0x100000000ull)
            throw SpecError(SpecErrorKind::BadValue,
                            "slave '" + s.name + "' range overflows the 32-bit address space");
        if (s.readLatency < 1 || s.writeLatency < 1)
            throw SpecError(SpecErrorKind::BadValue,
                            "slave '" + s.name + "' latencies must be >= 1");
    }

    // Ranges must be pairwise disjoint; report both offenders.
    for (std::size_t i = 0; i < spec.slaves.size(); ++i) {
        for (std::size_t j = i + 1; j < spec.slaves.size(); ++j) {
            const auto& a = spec.slaves[i];
            const auto& b = spec.slaves[j];
            u64 aEnd = static_cast<u64>(a.base) + a.size;
            u64 bEnd = static_cast<u64>(b.base) + b.size;
            if (a.base < bEnd && b.base < aEnd)
                throw SpecError(SpecErrorKind::OverlappingMap,
                                "slave ranges overlap: '" + a.name + "' [" + hex_short(a.base) +
                                    ", " + hex_short(static_cast<u32>(aEnd - 1)) + "] and '" +
                                    b.name + "' [" + hex_short(b.base) + ", " +
                                    hex_short(static_cast<u32>(bEnd - 1)) + "]");
        }
    }

    if (spec.arbiter == ArbiterKind::None &&
        (spec.masters.size() != 1 || spec.slaves.size() != 1))
        throw SpecError(SpecErrorKind::BadTopology,
                        "point-to-point topology requires exactly one master and one slave");

    for (const auto& c : spec.candidates) {
        if (!c.candidates.empty())
            throw SpecError(SpecErrorKind::BadValue, "refinement candidates cannot nest");
        validate_spec(c);
    }
}

// Canonical race-free workload: write a computed pair of words into the
// master's own region, read them back, then loop a copy through a scratch
// word. Exercises all four instruction kinds plus repeat.
inline Program canonical_program(u32 base, u32 seedValue) {
    std::vector<std::string> lines = {
        "set r1 " + hex_short(seedValue),
        "set r2 0x55",
        "add r3 r1 r2",
        "write " + hex_short(base + 0x00) + " r1",
        "write " + hex_short(base + 0x04) + " r3",
        "read " + hex_short(base + 0x00) + " r4",
        "add r5 r4 r2",
        "write " + hex_short(base + 0x08) + " r5",
        "repeat 2",
        "read " + hex_short(base + 0x04) + " r6",
        "write " + hex_short(base + 0x0c) + " r6",
        "end",
        "read " + hex_short(base + 0x0c) + " r7",
    };
    return parse_program(lines);
}

// Tier composition: 2 -> 1M+1S point-to-point, 3 -> 1M+1S arbitrated,
// 4 -> 2M+1S, 5 -> 2M+2S. Masters are added before slaves as tiers grow.
inline SystemSpec tier_spec(int tiers, BusKind bus) {
    if (tiers < 2 || tiers > 5)
        throw SpecError(SpecErrorKind::BadValue, "tier count must be in 2..5");

    const int masters = tiers >= 4 ? 2 : 1;
    const int slaves = tiers >= 5 ? 2 : 1;

    SystemSpec spec;
    spec.bus = bus;
    spec.arbiter = tiers == 2 ? ArbiterKind::None : ArbiterKind::RoundRobin;
    spec.description = std::to_string(tiers) + "-tier canonical scenario";

    for (int s = 0; s < slaves; ++s) {
        SlaveSpec sl;
        sl.name = "s" + std::to_string(s + 1);
        sl.base = static_cast<u32>(s) * 0x1000;
        sl.size = 0x1000;
        sl.readLatency = 2;
        sl.writeLatency = 1;
        spec.slaves.push_back(sl);
    }

    for (int m = 0; m < masters; ++m) {
        // Each master owns a disjoint region: its own slave when there are
        // enough slaves, otherwise a disjoint half of the shared one.
        u32 base = slaves > 1 ? static_cast<u32>(m) * 0x1000
                              : static_cast<u32>(m) * 0x800;
        MasterSpec ms;
        ms.name = "m" + std::to_string(m + 1);
        ms.startAddress = base;
        ms.program = canonical_program(base, 0x11220000u + 0x1111u * static_cast<u32>(m + 1));
        spec.masters.push_back(ms);
    }

    validate_spec(spec);
    return spec;
}

}  // namespace buslab
