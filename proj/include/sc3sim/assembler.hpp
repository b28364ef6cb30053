#pragma once

#include <stdexcept>
#include <string>

#include "sc3sim/isa.hpp"

namespace sc3sim {

// Assembly syntax (line oriented):
//   [label:] mnemonic operand{, operand}   # comment
// Registers are rN (integer) and fN (FP), N in 0..31. Immediates are decimal
// or 0x-hex, optionally negated. Memory operands are imm(rN) or (rN).
// Directives: .text, .data <base>, .word64 <value>, .space <bytes>.
// Branch and jal targets are labels.

struct AsmError : std::runtime_error {
  int line;    // 1-based
  int column;  // 1-based
  AsmError(int l, int c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

Program parse_assembly(const std::string& text);

// Total on valid programs; parse_assembly(disassemble(p)) reproduces the
// instruction sequence and data segment exactly.
std::string disassemble(const Program& p);

}  // namespace sc3sim
