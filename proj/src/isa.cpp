#include "sc3sim/isa.hpp"

#include <array>
#include <cstring>
#include <stdexcept>

namespace sc3sim {

namespace {

// Which fields an opcode encodes. Unused fields must be zero in a canonical
// word; decode rejects anything else.
enum class Form : uint8_t {
  None,     // nop, halt, chg
  R3,       // ra=rd rb=rs1 rc=rs2
  R4,       // ra=rd rb=rs1 rc=rs2 re=rs3 (fma)
  R2,       // ra=rd rb=rs1 (fsqrt)
  R2n,      // rb=rs1 rc=rs2, no dest (flushr)
  R1d,      // ra=rd only (tid)
  I,        // ra=rd rb=rs1 imm (addi, jalr, loads/stores, flush, l2flush)
  B,        // ra=rs1 rb=rs2 imm (branches)
  J,        // ra=rd imm (jal)
  U,        // ra=rd imm raw (lui)
  SyncF,    // funct = scope
};

struct OpInfo {
  const char* name;
  Form form;
  InstrClass cls;
};

constexpr std::array<OpInfo, kOpCount> kOps = {{
    {"nop", Form::None, InstrClass::Control},
    {"add", Form::R3, InstrClass::IntAlu},
    {"sub", Form::R3, InstrClass::IntAlu},
    {"and", Form::R3, InstrClass::IntAlu},
    {"or", Form::R3, InstrClass::IntAlu},
    {"xor", Form::R3, InstrClass::IntAlu},
    {"shl", Form::R3, InstrClass::IntAlu},
    {"shr", Form::R3, InstrClass::IntAlu},
    {"slt", Form::R3, InstrClass::IntAlu},
    {"addi", Form::I, InstrClass::IntAlu},
    {"lui", Form::U, InstrClass::IntAlu},
    {"fadd", Form::R3, InstrClass::Fp},
    {"fsub", Form::R3, InstrClass::Fp},
    {"fmul", Form::R3, InstrClass::Fp},
    {"fma", Form::R4, InstrClass::Fp},
    {"fmin", Form::R3, InstrClass::Fp},
    {"fmax", Form::R3, InstrClass::Fp},
    {"fdiv", Form::R3, InstrClass::Sfu},
    {"fsqrt", Form::R2, InstrClass::Sfu},
    {"ld", Form::I, InstrClass::MemGlobal},
    {"sd", Form::I, InstrClass::MemGlobal},
    {"lw", Form::I, InstrClass::MemGlobal},
    {"sw", Form::I, InstrClass::MemGlobal},
    {"lls", Form::I, InstrClass::MemLocal},
    {"sls", Form::I, InstrClass::MemLocal},
    {"ld", Form::I, InstrClass::MemGlobal},   // FLd
    {"sd", Form::I, InstrClass::MemGlobal},   // FSd
    {"lw", Form::I, InstrClass::MemGlobal},   // FLw
    {"sw", Form::I, InstrClass::MemGlobal},   // FSw
    {"lls", Form::I, InstrClass::MemLocal},   // FLls
    {"sls", Form::I, InstrClass::MemLocal},   // FSls
    {"beq", Form::B, InstrClass::Control},
    {"bne", Form::B, InstrClass::Control},
    {"blt", Form::B, InstrClass::Control},
    {"bltu", Form::B, InstrClass::Control},
    {"jal", Form::J, InstrClass::Control},
    {"jalr", Form::I, InstrClass::Control},
    {"halt", Form::None, InstrClass::Control},
    {"chg", Form::None, InstrClass::Special},
    {"flush", Form::I, InstrClass::Special},
    {"flushr", Form::R2n, InstrClass::Special},
    {"l2flush", Form::I, InstrClass::Special},
    {"sync", Form::SyncF, InstrClass::Special},
    {"tid", Form::R1d, InstrClass::Special},
}};

Form form_of(Op op) { return kOps[static_cast<int>(op)].form; }

}  // namespace

const char* instr_class_name(InstrClass c) {
  static const char* names[kClassCount] = {"int_alu",  "fp",      "sfu",    "mem_global",
                                           "mem_local", "control", "special"};
  return names[static_cast<int>(c)];
}

bool is_fp(Op op) {
  return op >= Op::Fadd && op <= Op::Fsqrt;
}

bool is_fma(Op op) { return op == Op::Fma; }

bool is_sfu(Op op) { return op == Op::Fdiv || op == Op::Fsqrt; }

bool is_global_mem(Op op) {
  switch (op) {
    case Op::Ld: case Op::Sd: case Op::Lw: case Op::Sw:
    case Op::FLd: case Op::FSd: case Op::FLw: case Op::FSw:
      return true;
    default:
      return false;
  }
}

bool is_local_mem(Op op) {
  return op == Op::Lls || op == Op::Sls || op == Op::FLls || op == Op::FSls;
}

bool is_load(Op op) {
  switch (op) {
    case Op::Ld: case Op::Lw: case Op::Lls:
    case Op::FLd: case Op::FLw: case Op::FLls:
      return true;
    default:
      return false;
  }
}

bool is_store(Op op) {
  switch (op) {
    case Op::Sd: case Op::Sw: case Op::Sls:
    case Op::FSd: case Op::FSw: case Op::FSls:
      return true;
    default:
      return false;
  }
}

bool is_branch(Op op) {
  return op == Op::Beq || op == Op::Bne || op == Op::Blt || op == Op::Bltu;
}

bool fp_dest(Op op) {
  if (is_fp(op)) return true;
  switch (op) {
    case Op::FLd: case Op::FLw: case Op::FLls:
      return true;
    default:
      return false;
  }
}

InstrClass instr_class(Op op) { return kOps[static_cast<int>(op)].cls; }

int access_size(Op op) {
  switch (op) {
    case Op::Ld: case Op::Sd: case Op::FLd: case Op::FSd:
    case Op::Lls: case Op::Sls: case Op::FLls: case Op::FSls:
      return 8;
    case Op::Lw: case Op::Sw: case Op::FLw: case Op::FSw:
      return 4;
    default:
      return 0;
  }
}

int flops_for(Op op, Precision prec) {
  if (!is_fp(op)) return 0;
  return lanes(prec) * (op == Op::Fma ? 2 : 1);
}

const char* mnemonic(Op op) { return kOps[static_cast<int>(op)].name; }

namespace {

constexpr uint32_t kRaShift = 21, kRbShift = 16, kRcShift = 11, kReShift = 6;

uint32_t funct_of(const Instruction& ins) {
  if (is_fp(ins.op)) return static_cast<uint32_t>(ins.prec);
  if (ins.op == Op::Sync) return static_cast<uint32_t>(ins.scope);
  return 0;
}

}  // namespace

uint32_t encode(const Instruction& ins) {
  if (ins.rd >= kNumRegs || ins.rs1 >= kNumRegs || ins.rs2 >= kNumRegs || ins.rs3 >= kNumRegs)
    throw std::invalid_argument("register index out of range");
  const uint32_t opc = static_cast<uint32_t>(ins.op) << 26;
  const uint32_t imm16 = static_cast<uint32_t>(ins.imm) & 0xffff;
  switch (form_of(ins.op)) {
    case Form::None:
      return opc;
    case Form::R3:
      return opc | (ins.rd << kRaShift) | (ins.rs1 << kRbShift) | (ins.rs2 << kRcShift) |
             funct_of(ins);
    case Form::R4:
      return opc | (ins.rd << kRaShift) | (ins.rs1 << kRbShift) | (ins.rs2 << kRcShift) |
             (ins.rs3 << kReShift) | funct_of(ins);
    case Form::R2:
      return opc | (ins.rd << kRaShift) | (ins.rs1 << kRbShift) | funct_of(ins);
    case Form::R2n:
      return opc | (ins.rs1 << kRbShift) | (ins.rs2 << kRcShift);
    case Form::R1d:
      return opc | (ins.rd << kRaShift);
    case Form::I:
      if (ins.imm < kImmMin || ins.imm > kImmMax)
        throw std::invalid_argument("immediate out of 16-bit range");
      return opc | (ins.rd << kRaShift) | (ins.rs1 << kRbShift) | imm16;
    case Form::B:
      if (ins.imm < kImmMin || ins.imm > kImmMax)
        throw std::invalid_argument("immediate out of 16-bit range");
      return opc | (ins.rs1 << kRaShift) | (ins.rs2 << kRbShift) | imm16;
    case Form::J:
      if (ins.imm < kImmMin || ins.imm > kImmMax)
        throw std::invalid_argument("immediate out of 16-bit range");
      return opc | (ins.rd << kRaShift) | imm16;
    case Form::U:
      if (ins.imm < 0 || ins.imm > 0xffff)
        throw std::invalid_argument("immediate out of 16-bit range");
      return opc | (ins.rd << kRaShift) | imm16;
    case Form::SyncF:
      return opc | funct_of(ins);
  }
  throw std::logic_error("unreachable");
}

std::optional<Instruction> decode(uint32_t word) {
  if (word == 0) return Instruction{};  // nop by definition
  const uint32_t opc = word >> 26;
  if (opc >= static_cast<uint32_t>(kOpCount)) return std::nullopt;
  const Op op = static_cast<Op>(opc);
  if (op == Op::Nop) return std::nullopt;  // nonzero nop pattern is illegal

  Instruction ins;
  ins.op = op;
  const uint8_t ra = (word >> kRaShift) & 0x1f;
  const uint8_t rb = (word >> kRbShift) & 0x1f;
  const uint8_t rc = (word >> kRcShift) & 0x1f;
  const uint8_t re = (word >> kReShift) & 0x1f;
  const uint32_t funct = word & 0x3f;
  const uint32_t imm16 = word & 0xffff;
  const int32_t simm = static_cast<int16_t>(imm16);

  auto fp_funct = [&](Instruction& i) -> bool {
    if (is_fp(op)) {
      if (funct > 2) return false;
      i.prec = static_cast<Precision>(funct);
      return true;
    }
    return funct == 0;
  };

  switch (form_of(op)) {
    case Form::None:
      if (word != static_cast<uint32_t>(opc << 26)) return std::nullopt;
      return ins;
    case Form::R3:
      if (re != 0 || !fp_funct(ins)) return std::nullopt;
      ins.rd = ra; ins.rs1 = rb; ins.rs2 = rc;
      return ins;
    case Form::R4:
      if (!fp_funct(ins)) return std::nullopt;
      ins.rd = ra; ins.rs1 = rb; ins.rs2 = rc; ins.rs3 = re;
      return ins;
    case Form::R2:
      if (rc != 0 || re != 0 || !fp_funct(ins)) return std::nullopt;
      ins.rd = ra; ins.rs1 = rb;
      return ins;
    case Form::R2n:
      if (ra != 0 || re != 0 || funct != 0) return std::nullopt;
      ins.rs1 = rb; ins.rs2 = rc;
      return ins;
    case Form::R1d:
      if (rb != 0 || rc != 0 || re != 0 || funct != 0) return std::nullopt;
      ins.rd = ra;
      return ins;
    case Form::I:
      if ((op == Op::Flush || op == Op::L2flush) && ra != 0) return std::nullopt;
      ins.rd = ra; ins.rs1 = rb; ins.imm = simm;
      return ins;
    case Form::B:
      ins.rs1 = ra; ins.rs2 = rb; ins.imm = simm;
      return ins;
    case Form::J:
      if (rb != 0) return std::nullopt;
      ins.rd = ra; ins.imm = simm;
      return ins;
    case Form::U:
      if (rb != 0) return std::nullopt;
      ins.rd = ra; ins.imm = static_cast<int32_t>(imm16);
      return ins;
    case Form::SyncF:
      if (ra != 0 || rb != 0 || rc != 0 || re != 0) return std::nullopt;
      if (funct > 1) return std::nullopt;
      ins.scope = static_cast<SyncScope>(funct);
      return ins;
  }
  return std::nullopt;
}

namespace {

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
  for (int i = 0; i < 4; i++) v.push_back(static_cast<uint8_t>(x >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& v, uint64_t x) {
  for (int i = 0; i < 8; i++) v.push_back(static_cast<uint8_t>(x >> (8 * i)));
}
uint32_t get_u32(const std::vector<uint8_t>& v, size_t at) {
  uint32_t x = 0;
  for (int i = 0; i < 4; i++) x |= static_cast<uint32_t>(v.at(at + i)) << (8 * i);
  return x;
}
uint64_t get_u64(const std::vector<uint8_t>& v, size_t at) {
  uint64_t x = 0;
  for (int i = 0; i < 8; i++) x |= static_cast<uint64_t>(v.at(at + i)) << (8 * i);
  return x;
}

constexpr uint32_t kMagic = 0x50334353;  // "SC3P" little-endian
constexpr uint16_t kVersion = 1;

}  // namespace

std::vector<uint8_t> to_image(const Program& p) {
  std::vector<uint8_t> out;
  put_u32(out, kMagic);
  out.push_back(kVersion & 0xff);
  out.push_back(kVersion >> 8);
  out.push_back(0);
  out.push_back(0);
  put_u32(out, static_cast<uint32_t>(p.words.size()));
  put_u32(out, static_cast<uint32_t>(p.data.size()));
  for (uint32_t w : p.words) put_u32(out, w);
  if (!p.data.empty()) {
    put_u64(out, p.data_base);
    out.insert(out.end(), p.data.begin(), p.data.end());
  }
  return out;
}

Program from_image(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 16) throw std::runtime_error("program image: truncated header");
  if (get_u32(bytes, 0) != kMagic) throw std::runtime_error("program image: bad magic");
  const uint16_t ver = bytes[4] | (bytes[5] << 8);
  if (ver != kVersion) throw std::runtime_error("program image: unsupported version");
  const uint32_t nwords = get_u32(bytes, 8);
  const uint32_t ndata = get_u32(bytes, 12);
  size_t need = 16 + 4ull * nwords + (ndata ? 8 + ndata : 0);
  if (bytes.size() != need) throw std::runtime_error("program image: size mismatch");

  Program p;
  p.words.reserve(nwords);
  p.code.reserve(nwords);
  for (uint32_t i = 0; i < nwords; i++) {
    const uint32_t w = get_u32(bytes, 16 + 4ull * i);
    auto ins = decode(w);
    if (!ins) throw std::runtime_error("program image: illegal instruction word");
    p.words.push_back(w);
    p.code.push_back(*ins);
  }
  if (ndata) {
    p.data_base = get_u64(bytes, 16 + 4ull * nwords);
    p.data.assign(bytes.begin() + 16 + 4ull * nwords + 8, bytes.end());
  }
  return p;
}

}  // namespace sc3sim
