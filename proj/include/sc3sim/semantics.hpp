#pragma once

#include <cstdint>

#include "sc3sim/isa.hpp"

namespace sc3sim {

// Architectural value semantics, shared verbatim by the timing simulator and
// the functional reference emulator so the two can only differ in timing.

// Integer ops (Add..Slt use a and b; Addi uses a and imm; Lui uses imm).
// Shift amounts are taken mod 64.
uint64_t alu_eval(Op op, uint64_t a, uint64_t b, int32_t imm);

// Packed FP ops over 64-bit register values: 1x f64, 2x f32 or 4x f16 lanes.
// c is the addend register for fma. fdiv/fsqrt use the same lane rules.
uint64_t fp_eval(Op op, Precision prec, uint64_t a, uint64_t b, uint64_t c);

bool branch_taken(Op op, uint64_t a, uint64_t b);

}  // namespace sc3sim
