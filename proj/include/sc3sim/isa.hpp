#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Instruction set: fixed 32-bit words, 32 integer + 32 FP registers per
// thread, 16-bit sign-extended immediates.
//
// Word layout (bit ranges inclusive):
//   [31:26] opcode
//   R-form: [25:21] ra   [20:16] rb   [15:11] rc   [10:6] re   [5:0] funct
//   I-form: [25:21] ra   [20:16] rb   [15:0]  imm16
//
// Field roles depend on the opcode (ra is rd for ALU ops, rs1 for branches,
// the data register for stores). funct carries the FP precision (0=d 1=s 2=h)
// and the sync scope. The all-zero word is nop; any other pattern that does
// not match an assigned opcode with canonical zero unused fields decodes as
// an illegal instruction.

namespace sc3sim {

enum class Op : uint8_t {
  Nop = 0,
  // integer ALU
  Add, Sub, And, Or, Xor, Shl, Shr, Slt, Addi, Lui,
  // packed floating point (precision in `prec`)
  Fadd, Fsub, Fmul, Fma, Fmin, Fmax,
  // special function unit (city-shared)
  Fdiv, Fsqrt,
  // global memory, integer register file
  Ld, Sd, Lw, Sw,
  // local storage (per-PE scratchpad), integer register file
  Lls, Sls,
  // global memory / local storage, FP register file (same mnemonics,
  // selected by the fN operand)
  FLd, FSd, FLw, FSw, FLls, FSls,
  // control
  Beq, Bne, Blt, Bltu, Jal, Jalr, Halt,
  // special
  Chg, Flush, Flushr, L2flush, Sync, Tid,
  Count_
};

inline constexpr int kOpCount = static_cast<int>(Op::Count_);
inline constexpr int kNumRegs = 32;
inline constexpr int kImmMin = -32768;
inline constexpr int kImmMax = 32767;

enum class Precision : uint8_t { Dp = 0, Sp = 1, Hp = 2 };

constexpr int lanes(Precision p) {
  return p == Precision::Dp ? 1 : (p == Precision::Sp ? 2 : 4);
}

enum class SyncScope : uint8_t { City = 0, Chip = 1 };

// Stats buckets.
enum class InstrClass : uint8_t { IntAlu, Fp, Sfu, MemGlobal, MemLocal, Control, Special, Count_ };
inline constexpr int kClassCount = static_cast<int>(InstrClass::Count_);
const char* instr_class_name(InstrClass c);

struct Instruction {
  Op op = Op::Nop;
  uint8_t rd = 0;
  uint8_t rs1 = 0;
  uint8_t rs2 = 0;
  uint8_t rs3 = 0;
  int32_t imm = 0;  // sign-extended 16-bit; raw [0,65535] for lui
  Precision prec = Precision::Dp;
  SyncScope scope = SyncScope::City;

  bool operator==(const Instruction&) const = default;
};

// Per-opcode predicates.
bool is_fp(Op op);       // carries a precision suffix
bool is_fma(Op op);      // uses rs3
bool is_sfu(Op op);      // routed to the city SFU
bool is_global_mem(Op op);
bool is_local_mem(Op op);
bool is_load(Op op);     // any load (global or local)
bool is_store(Op op);
bool is_branch(Op op);   // pc-relative conditional branches
bool fp_dest(Op op);     // writes the FP register file
InstrClass instr_class(Op op);
int access_size(Op op);  // bytes moved by a memory op
// Flop credit per executed instruction (lanes * 1 or 2); 0 for non-FP.
int flops_for(Op op, Precision prec);
const char* mnemonic(Op op);

// Fixed-width encoding. encode() requires a well-formed instruction
// (register indices < 32, immediate in range); decode() returns nullopt for
// any word that is not a canonical encoding of a valid instruction.
uint32_t encode(const Instruction& ins);
std::optional<Instruction> decode(uint32_t word);

struct Program {
  std::vector<Instruction> code;
  std::vector<uint32_t> words;  // encoded form, same length as code
  uint64_t data_base = 0;
  std::vector<uint8_t> data;
  std::map<std::string, uint32_t> symbols;  // label -> instruction index

  bool operator==(const Program&) const = default;
};

// Binary program image (see README for the byte-exact layout): 16-byte
// header "SC3P" + u16 version + u16 reserved + u32 text words + u32 data
// bytes, then little-endian instruction words, then (if data is present) a
// u64 data base address followed by the data bytes.
std::vector<uint8_t> to_image(const Program& p);
Program from_image(const std::vector<uint8_t>& bytes);  // throws std::runtime_error

}  // namespace sc3sim
