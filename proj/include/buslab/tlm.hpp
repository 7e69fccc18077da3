// Untimed transaction-level simulator.
//
// Time is modeled as scheduler rounds. Each round every unfinished master is
// visited in declaration order, executes its pending local computation
// (set/add are free at this level) and issues at most one bus transaction.
// Contending transactions are arbitrated round-robin per contention domain:
// the whole bus for Wishbone, each slave separately for Avalon. Losers record
// a wait event and retry next round. Unmapped addresses complete immediately
// with an ERROR record and never touch memory.
#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "address_map.hpp"
#include "arbiter.hpp"
#include "program.hpp"
#include "spec.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace buslab {

struct TlmResult {
    Trace trace;
    FinalState finalState;
    TlmStats stats;
    AddressMap map;
    // Scheduler round in which each master finished its program, parallel to
    // the spec's master list.
    std::vector<u64> finishRounds;
};

class TlmSimulator {
public:
    explicit TlmSimulator(const SystemSpec& spec)
        : spec_(spec), map_(AddressMap::from_spec(spec_)) {
        for (const auto& s : spec_.slaves) memories_.emplace_back(s.size / 4, 0u);
        for (const auto& m : spec_.masters) {
            MasterState st{ProgramCursor(m.program), {}, std::nullopt, nullptr, false, 0, 0};
            st.lookahead = st.cursor.next();
            st.done = st.lookahead == nullptr;
            masters_.push_back(std::move(st));
        }
        lastGrant_.resize(spec_.bus == BusKind::Avalon ? spec_.slaves.size() : 1);
    }

    // Completes one ad-hoc transaction for the given master. A lone requester
    // is granted unconditionally, so this never produces wait events.
    ObservationRecord issue(std::size_t masterIdx, const Transaction& txn) {
        auto target = route(map_, txn.address);
        if (!target) return emit(masterIdx, txn.kind, txn.address,
                                 txn.kind == TxnKind::Read ? 0 : txn.data, TxnStatus::Error);
        u32 data = perform(*target, txn.kind, txn.data, txn.byteEnable);
        return emit(masterIdx, txn.kind, txn.address, data, TxnStatus::Ok);
    }

    bool all_done() const {
        for (const auto& m : masters_)
            if (!m.done) return false;
        return true;
    }

    // One scheduler round: collect pending bus operations, then grant one
    // transfer per contention domain.
    void step_round() {
        ++stats_.schedulerRounds;

        for (std::size_t i = 0; i < masters_.size(); ++i) {
            MasterState& m = masters_[i];
            if (m.done || m.pending) continue;
            advance_to_bus_op(i);
        }

        const std::size_t domains = lastGrant_.size();
        for (std::size_t d = 0; d < domains; ++d) {
            std::vector<bool> requesting(masters_.size(), false);
            bool any = false;
            for (std::size_t i = 0; i < masters_.size(); ++i) {
                if (masters_[i].pending && domain_of(*masters_[i].pending) == d) {
                    requesting[i] = true;
                    any = true;
                }
            }
            if (!any) continue;
            std::size_t winner = *arbitrate_rr(requesting, lastGrant_[d]);
            lastGrant_[d] = winner;
            for (std::size_t i = 0; i < masters_.size(); ++i) {
                if (!requesting[i]) continue;
                if (i == winner) {
                    Pending& p = *masters_[i].pending;
                    u32 data = perform(p.target, p.txn.kind, p.txn.data, p.txn.byteEnable);
                    if (p.txn.kind == TxnKind::Read && p.readReg >= 0)
                        masters_[i].regs[static_cast<std::size_t>(p.readReg)] = data;
                    emit(i, p.txn.kind, p.txn.address, data, TxnStatus::Ok);
                    masters_[i].pending.reset();
                    masters_[i].lookahead = masters_[i].cursor.next();
                    note_if_finished(i);
                } else {
                    ++stats_.waitEvents;
                }
            }
        }
    }

    // Runs all programs to completion. Throws SimLimitError if the trace
    // reaches `maxTransactions` with any program unfinished.
    TlmResult run(u64 maxTransactions) {
        auto t0 = std::chrono::steady_clock::now();
        while (!all_done()) {
            if (trace_.size() >= maxTransactions)
                throw SimLimitError("transaction limit " + std::to_string(maxTransactions) +
                                    " reached with unfinished programs");
            step_round();
        }
        auto t1 = std::chrono::steady_clock::now();
        stats_.wallSeconds = std::chrono::duration<double>(t1 - t0).count();
        std::vector<u64> finishes;
        for (const auto& m : masters_) finishes.push_back(m.finishRound);
        return TlmResult{trace_, final_state(), stats_, map_, finishes};
    }

    FinalState final_state() const {
        FinalState fs;
        for (std::size_t i = 0; i < spec_.slaves.size(); ++i)
            fs.push_back({spec_.slaves[i].name, memories_[i]});
        return fs;
    }

    const Trace& trace() const { return trace_; }
    const TlmStats& stats() const { return stats_; }
    const AddressMap& map() const { return map_; }

private:
    struct Pending {
        Transaction txn;
        RouteTarget target;
        int readReg = -1;  // destination register for reads, -1 when none
    };
    struct MasterState {
        ProgramCursor cursor;
        RegisterFile regs{};
        std::optional<Pending> pending;
        const Instr* lookahead = nullptr;
        bool done = false;
        u64 finishRound = 0;
        u64 nextSeq = 0;
    };

    void note_if_finished(std::size_t idx) {
        MasterState& m = masters_[idx];
        if (!m.done && !m.pending && m.lookahead == nullptr) {
            m.done = true;
            m.finishRound = stats_.schedulerRounds;
        }
    }

    std::size_t domain_of(const Pending& p) const {
        return spec_.bus == BusKind::Avalon ? p.target.targetId : 0;
    }

    // Runs local instructions until the master parks a bus operation, errors
    // out on an unmapped address, or finishes its program.
    void advance_to_bus_op(std::size_t idx) {
        MasterState& m = masters_[idx];
        while (const Instr* in = m.lookahead) {
            switch (in->op) {
                case Instr::Op::Set:
                    m.regs[in->rd] = in->imm;
                    break;
                case Instr::Op::Add:
                    m.regs[in->rd] = m.regs[in->ra] + m.regs[in->rb];
                    break;
                case Instr::Op::Write:
                case Instr::Op::Read: {
                    Transaction t;
                    t.kind = in->op == Instr::Op::Write ? TxnKind::Write : TxnKind::Read;
                    t.address = in->addr;
                    t.data = in->op == Instr::Op::Write
                                 ? (in->srcIsReg ? m.regs[in->src] : in->imm)
                                 : 0;
                    auto target = route(map_, t.address);
                    if (!target) {
                        if (t.kind == TxnKind::Read) m.regs[in->rd] = 0;
                        emit(idx, t.kind, t.address, t.kind == TxnKind::Read ? 0 : t.data,
                             TxnStatus::Error);
                        m.lookahead = m.cursor.next();
                        note_if_finished(idx);
                        return;  // an ERROR completion is this round's transaction
                    }
                    m.pending = Pending{t, *target,
                                        t.kind == TxnKind::Read ? static_cast<int>(in->rd) : -1};
                    return;
                }
                case Instr::Op::Repeat:
                    break;  // cursor expands repeats; never surfaces here
            }
            m.lookahead = m.cursor.next();
        }
        note_if_finished(idx);
    }

    u32 perform(const RouteTarget& target, TxnKind kind, u32 data, u32 byteEnable) {
        std::vector<u32>& mem = memories_[target.targetId];
        const std::size_t word = target.offset / 4;
        if (kind == TxnKind::Read) return mem[word];
        u32 cur = mem[word];
        for (int lane = 0; lane < 4; ++lane) {
            if (byteEnable & (1u << lane)) {
                u32 mask = 0xFFu << (8 * lane);
                cur = (cur & ~mask) | (data & mask);
            }
        }
        mem[word] = cur;
        return data;
    }

    ObservationRecord emit(std::size_t idx, TxnKind kind, u32 addr, u32 data, TxnStatus status) {
        MasterState& m = masters_[idx];
        ObservationRecord r{m.nextSeq++, spec_.masters[idx].name, kind, addr, data, status};
        trace_.push_back(r);
        ++stats_.transactionsCompleted;
        return r;
    }

    SystemSpec spec_;
    AddressMap map_;
    std::vector<std::vector<u32>> memories_;
    std::vector<MasterState> masters_;
    std::vector<std::optional<std::size_t>> lastGrant_;
    Trace trace_;
    TlmStats stats_;
};

inline TlmResult run_tlm(const SystemSpec& spec, u64 maxTransactions = 1'000'000) {
    TlmSimulator sim(spec);
    return sim.run(maxTransactions);
}

}  // namespace buslab
