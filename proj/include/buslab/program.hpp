// Master program mini-language: parsing, serialization and a flattening cursor.
//
// Text form, one instruction per line:
//   set rD VALUE          load an immediate into a register
//   add rD rA rB          rD = rA + rB (wrapping)
//   write ADDR (rS|VALUE) store register or immediate at a 4-aligned address
//   read ADDR rD          load the word at ADDR into rD
//   repeat COUNT ... end  repeat the enclosed block COUNT times (nesting <= 4)
//
// Numbers are decimal or 0x-prefixed hex. Registers are r0..r7.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "types.hpp"

namespace buslab {

inline constexpr int kRegisterCount = 8;
inline constexpr int kMaxRepeatNesting = 4;

struct Instr {
    enum class Op { Set, Add, Write, Read, Repeat };
    Op op{};
    std::uint8_t rd = 0;   // Set/Add/Read destination
    std::uint8_t ra = 0;   // Add operand
    std::uint8_t rb = 0;   // Add operand
    u32 addr = 0;          // Write/Read target address
    u32 imm = 0;           // Set immediate / Write immediate
    bool srcIsReg = false; // Write: source is a register
    std::uint8_t src = 0;  // Write source register
    u32 count = 0;         // Repeat count
    std::vector<Instr> body;
};

using Program = std::vector<Instr>;

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline u32 parse_number(const std::string& tok, int lineNo) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        int base = (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) ? 16 : 10;
        v = std::stoull(tok, &pos, base);
    } catch (const std::exception&) {
        throw SpecError(SpecErrorKind::BadValue,
                        "line " + std::to_string(lineNo) + ": bad number '" + tok + "'");
    }
    if (pos != tok.size() || v > 0xFFFFFFFFull)
        throw SpecError(SpecErrorKind::BadValue,
                        "line " + std::to_string(lineNo) + ": bad number '" + tok + "'");
    return static_cast<u32>(v);
}

inline std::uint8_t parse_register(const std::string& tok, int lineNo) {
    if (tok.size() < 2 || tok[0] != 'r')
        throw SpecError(SpecErrorKind::BadRegister,
                        "line " + std::to_string(lineNo) + ": expected register, got '" + tok + "'");
    u32 idx = parse_number(tok.substr(1), lineNo);
    if (idx >= kRegisterCount)
        throw SpecError(SpecErrorKind::BadRegister,
                        "line " + std::to_string(lineNo) + ": register index out of range in '" +
                            tok + "'");
    return static_cast<std::uint8_t>(idx);
}

inline u32 parse_address(const std::string& tok, int lineNo) {
    u32 a = parse_number(tok, lineNo);
    if (a % 4 != 0)
        throw SpecError(SpecErrorKind::BadAlignment,
                        "line " + std::to_string(lineNo) + ": address " + hex_short(a) +
                            " is not 4-aligned");
    return a;
}

inline void expect_arity(const std::vector<std::string>& toks, std::size_t n, int lineNo) {
    if (toks.size() != n)
        throw SpecError(SpecErrorKind::BadOperands,
                        "line " + std::to_string(lineNo) + ": '" + toks[0] + "' takes " +
                            std::to_string(n - 1) + " operand(s), got " +
                            std::to_string(toks.size() - 1));
}

}  // namespace detail

inline Program parse_program(const std::vector<std::string>& lines) {
    using namespace detail;
    Program root;
    // Stack of open repeat bodies; back() is the block receiving instructions.
    std::vector<Program*> blocks{&root};
    std::vector<Instr> pendingRepeats;
    // `blocks` keeps pointers into these elements, so the vector must never
    // reallocate; the nesting check bounds its size.
    pendingRepeats.reserve(kMaxRepeatNesting);

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int lineNo = static_cast<int>(i) + 1;
        auto toks = split_ws(lines[i]);
        if (toks.empty()) continue;
        const std::string& op = toks[0];
        Program& block = *blocks.back();

        if (op == "set") {
            expect_arity(toks, 3, lineNo);
            Instr in;
            in.op = Instr::Op::Set;
            in.rd = parse_register(toks[1], lineNo);
            in.imm = parse_number(toks[2], lineNo);
            block.push_back(std::move(in));
        } else if (op == "add") {
            expect_arity(toks, 4, lineNo);
            Instr in;
            in.op = Instr::Op::Add;
            in.rd = parse_register(toks[1], lineNo);
            in.ra = parse_register(toks[2], lineNo);
            in.rb = parse_register(toks[3], lineNo);
            block.push_back(std::move(in));
        } else if (op == "write") {
            expect_arity(toks, 3, lineNo);
            Instr in;
            in.op = Instr::Op::Write;
            in.addr = parse_address(toks[1], lineNo);
            if (!toks[2].empty() && toks[2][0] == 'r' && toks[2].find_first_not_of("0123456789", 1) ==
                                                             std::string::npos) {
                in.srcIsReg = true;
                in.src = parse_register(toks[2], lineNo);
            } else {
                in.srcIsReg = false;
                in.imm = parse_number(toks[2], lineNo);
            }
            block.push_back(std::move(in));
        } else if (op == "read") {
            expect_arity(toks, 3, lineNo);
            Instr in;
            in.op = Instr::Op::Read;
            in.addr = parse_address(toks[1], lineNo);
            in.rd = parse_register(toks[2], lineNo);
            block.push_back(std::move(in));
        } else if (op == "repeat") {
            expect_arity(toks, 2, lineNo);
            if (pendingRepeats.size() >= kMaxRepeatNesting)
                throw SpecError(SpecErrorKind::BadRepeat,
                                "line " + std::to_string(lineNo) + ": repeat nesting exceeds " +
                                    std::to_string(kMaxRepeatNesting));
            Instr in;
            in.op = Instr::Op::Repeat;
            in.count = parse_number(toks[1], lineNo);
            if (in.count < 1)
                throw SpecError(SpecErrorKind::BadRepeat,
                                "line " + std::to_string(lineNo) + ": repeat count must be >= 1");
            pendingRepeats.push_back(std::move(in));
            blocks.push_back(&pendingRepeats.back().body);
        } else if (op == "end") {
            expect_arity(toks, 1, lineNo);
            if (pendingRepeats.empty())
                throw SpecError(SpecErrorKind::BadRepeat,
                                "line " + std::to_string(lineNo) + ": 'end' without open repeat");
            Instr done = std::move(pendingRepeats.back());
            pendingRepeats.pop_back();
            blocks.pop_back();
            blocks.back()->push_back(std::move(done));
        } else {
            throw SpecError(SpecErrorKind::BadMnemonic,
                            "line " + std::to_string(lineNo) + ": unknown mnemonic '" + op + "'");
        }
    }
    if (!pendingRepeats.empty())
        throw SpecError(SpecErrorKind::BadRepeat, "unterminated repeat block at end of program");
    return root;
}

namespace detail {

inline void serialize_into(const Program& p, std::vector<std::string>& out) {
    for (const Instr& in : p) {
        switch (in.op) {
            case Instr::Op::Set:
                out.push_back("set r" + std::to_string(in.rd) + " " + hex_short(in.imm));
                break;
            case Instr::Op::Add:
                out.push_back("add r" + std::to_string(in.rd) + " r" + std::to_string(in.ra) +
                              " r" + std::to_string(in.rb));
                break;
            case Instr::Op::Write:
                out.push_back("write " + hex_short(in.addr) + " " +
                              (in.srcIsReg ? "r" + std::to_string(in.src) : hex_short(in.imm)));
                break;
            case Instr::Op::Read:
                out.push_back("read " + hex_short(in.addr) + " r" + std::to_string(in.rd));
                break;
            case Instr::Op::Repeat:
                out.push_back("repeat " + std::to_string(in.count));
                serialize_into(in.body, out);
                out.push_back("end");
                break;
        }
    }
}

}  // namespace detail

inline std::vector<std::string> serialize_program(const Program& p) {
    std::vector<std::string> out;
    detail::serialize_into(p, out);
    return out;
}

using RegisterFile = std::array<u32, kRegisterCount>;

// Depth-first iterator over the primitive instructions of a program,
// expanding repeat blocks without materializing them.
class ProgramCursor {
public:
    explicit ProgramCursor(const Program& p) { frames_.push_back({&p, 0, 1}); }

    // Returns the next primitive (Set/Add/Write/Read) or nullptr at end.
    const Instr* next() {
        while (!frames_.empty()) {
            Frame& f = frames_.back();
            if (f.idx >= f.block->size()) {
                if (f.remaining > 1) {
                    --f.remaining;
                    f.idx = 0;
                    continue;
                }
                frames_.pop_back();
                continue;
            }
            const Instr& in = (*f.block)[f.idx];
            if (in.op == Instr::Op::Repeat) {
                ++f.idx;
                frames_.push_back({&in.body, 0, in.count});
                continue;
            }
            ++f.idx;
            return &in;
        }
        return nullptr;
    }

    bool done() const { return frames_.empty(); }

private:
    struct Frame {
        const Program* block;
        std::size_t idx;
        u32 remaining;
    };
    std::vector<Frame> frames_;
};

// Method names a program contributes to its master module, in a fixed
// canonical order so netlists built by different code paths agree.
inline std::vector<std::string> program_method_names(const Program& p) {
    bool used[4] = {false, false, false, false};
    std::vector<const Program*> stack{&p};
    while (!stack.empty()) {
        const Program* blk = stack.back();
        stack.pop_back();
        for (const Instr& in : *blk) {
            switch (in.op) {
                case Instr::Op::Set: used[0] = true; break;
                case Instr::Op::Add: used[1] = true; break;
                case Instr::Op::Read: used[2] = true; break;
                case Instr::Op::Write: used[3] = true; break;
                case Instr::Op::Repeat: stack.push_back(&in.body); break;
            }
        }
    }
    static const char* names[4] = {"do_set", "do_add", "mem_read", "mem_write"};
    std::vector<std::string> out;
    for (int i = 0; i < 4; ++i)
        if (used[i]) out.emplace_back(names[i]);
    return out;
}

}  // namespace buslab
