#include "sc3sim/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>

namespace sc3sim {

namespace {

struct Operand {
  enum Kind { IntReg, FpReg, Imm, MemRef, Label } kind;
  int reg = 0;       // IntReg / FpReg, or base register for MemRef
  int64_t value = 0; // Imm, or offset for MemRef
  std::string label;
  int column = 1;
};

struct Cursor {
  const std::string& s;
  size_t pos = 0;
  int line;
  int col() const { return static_cast<int>(pos) + 1; }
  bool eof() const { return pos >= s.size(); }
  char peek() const { return eof() ? '\0' : s[pos]; }
  void skip_ws() {
    while (!eof() && (s[pos] == ' ' || s[pos] == '\t')) pos++;
  }
};

[[noreturn]] void fail(const Cursor& c, const std::string& msg) {
  throw AsmError(c.line, c.col(), msg);
}

bool ident_char(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.'; }

std::string read_ident(Cursor& c) {
  size_t start = c.pos;
  while (!c.eof() && ident_char(c.s[c.pos])) c.pos++;
  return c.s.substr(start, c.pos - start);
}

int64_t read_number(Cursor& c) {
  int col = c.col();
  bool neg = false;
  if (c.peek() == '-') {
    neg = true;
    c.pos++;
  }
  int base = 10;
  if (c.s.compare(c.pos, 2, "0x") == 0 || c.s.compare(c.pos, 2, "0X") == 0) {
    base = 16;
    c.pos += 2;
  }
  size_t start = c.pos;
  while (!c.eof() && std::isalnum(static_cast<unsigned char>(c.s[c.pos]))) c.pos++;
  if (start == c.pos) throw AsmError(c.line, col, "expected a number");
  uint64_t mag = 0;
  auto res = std::from_chars(c.s.data() + start, c.s.data() + c.pos, mag, base);
  if (res.ec != std::errc() || res.ptr != c.s.data() + c.pos)
    throw AsmError(c.line, col, "bad numeric literal");
  return neg ? -static_cast<int64_t>(mag) : static_cast<int64_t>(mag);
}

Operand read_operand(Cursor& c) {
  c.skip_ws();
  Operand op;
  op.column = c.col();
  char ch = c.peek();
  if (ch == '\0') fail(c, "missing operand");

  if (ch == '(' || ch == '-' || std::isdigit(static_cast<unsigned char>(ch))) {
    // immediate, possibly followed by (rN) making it a memory reference
    int64_t v = (ch == '(') ? 0 : read_number(c);
    if (c.peek() == '(') {
      c.pos++;
      c.skip_ws();
      if (c.peek() != 'r') fail(c, "memory base must be an integer register");
      c.pos++;
      int64_t r = read_number(c);
      if (r < 0 || r >= kNumRegs) fail(c, "register out of range");
      c.skip_ws();
      if (c.peek() != ')') fail(c, "expected ')'");
      c.pos++;
      op.kind = Operand::MemRef;
      op.reg = static_cast<int>(r);
      op.value = v;
      return op;
    }
    op.kind = Operand::Imm;
    op.value = v;
    return op;
  }

  std::string id = read_ident(c);
  if (id.empty()) fail(c, "bad operand");
  if ((id[0] == 'r' || id[0] == 'f') && id.size() > 1 &&
      std::all_of(id.begin() + 1, id.end(), [](char k) { return std::isdigit(static_cast<unsigned char>(k)); })) {
    int64_t n = std::stoll(id.substr(1));
    if (n >= kNumRegs) throw AsmError(c.line, op.column, "register out of range");
    op.kind = (id[0] == 'r') ? Operand::IntReg : Operand::FpReg;
    op.reg = static_cast<int>(n);
    return op;
  }
  op.kind = Operand::Label;
  op.label = id;
  return op;
}

struct PendingIns {
  Instruction ins;
  int line;
  int column;
  std::string target;  // unresolved label for branches/jal, empty otherwise
  int target_col = 1;
};

struct MnemonicInfo {
  Op int_op;   // variant when the data register is rN (or the only variant)
  Op fp_op;    // variant when the data register is fN (Op::Count_ if none)
  bool has_prec;
};

const std::unordered_map<std::string, MnemonicInfo>& mnemonic_table() {
  static const std::unordered_map<std::string, MnemonicInfo> t = {
      {"nop", {Op::Nop, Op::Count_, false}},
      {"add", {Op::Add, Op::Count_, false}},
      {"sub", {Op::Sub, Op::Count_, false}},
      {"and", {Op::And, Op::Count_, false}},
      {"or", {Op::Or, Op::Count_, false}},
      {"xor", {Op::Xor, Op::Count_, false}},
      {"shl", {Op::Shl, Op::Count_, false}},
      {"shr", {Op::Shr, Op::Count_, false}},
      {"slt", {Op::Slt, Op::Count_, false}},
      {"addi", {Op::Addi, Op::Count_, false}},
      {"lui", {Op::Lui, Op::Count_, false}},
      {"fadd", {Op::Fadd, Op::Count_, true}},
      {"fsub", {Op::Fsub, Op::Count_, true}},
      {"fmul", {Op::Fmul, Op::Count_, true}},
      {"fma", {Op::Fma, Op::Count_, true}},
      {"fmin", {Op::Fmin, Op::Count_, true}},
      {"fmax", {Op::Fmax, Op::Count_, true}},
      {"fdiv", {Op::Fdiv, Op::Count_, true}},
      {"fsqrt", {Op::Fsqrt, Op::Count_, true}},
      {"ld", {Op::Ld, Op::FLd, false}},
      {"sd", {Op::Sd, Op::FSd, false}},
      {"lw", {Op::Lw, Op::FLw, false}},
      {"sw", {Op::Sw, Op::FSw, false}},
      {"lls", {Op::Lls, Op::FLls, false}},
      {"sls", {Op::Sls, Op::FSls, false}},
      {"beq", {Op::Beq, Op::Count_, false}},
      {"bne", {Op::Bne, Op::Count_, false}},
      {"blt", {Op::Blt, Op::Count_, false}},
      {"bltu", {Op::Bltu, Op::Count_, false}},
      {"jal", {Op::Jal, Op::Count_, false}},
      {"jalr", {Op::Jalr, Op::Count_, false}},
      {"halt", {Op::Halt, Op::Count_, false}},
      {"chg", {Op::Chg, Op::Count_, false}},
      {"flush", {Op::Flush, Op::Count_, false}},
      {"flushr", {Op::Flushr, Op::Count_, false}},
      {"l2flush", {Op::L2flush, Op::Count_, false}},
      {"tid", {Op::Tid, Op::Count_, false}},
  };
  return t;
}

void check_imm(const Cursor& c, int col, int64_t v) {
  if (v < kImmMin || v > kImmMax) throw AsmError(c.line, col, "immediate out of 16-bit range");
}

int expect_int_reg(const Cursor& c, const Operand& op) {
  if (op.kind != Operand::IntReg)
    throw AsmError(c.line, op.column, "expected an integer register");
  return op.reg;
}

int expect_fp_reg(const Cursor& c, const Operand& op) {
  if (op.kind != Operand::FpReg) throw AsmError(c.line, op.column, "expected an FP register");
  return op.reg;
}

}  // namespace

Program parse_assembly(const std::string& text) {
  Program prog;
  std::vector<PendingIns> pending;
  std::vector<std::pair<std::string, int>> label_defs;  // name, line (for dup reporting)
  bool in_data = false;
  bool data_base_set = false;
  uint64_t data_cursor = 0;

  std::istringstream stream(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(stream, raw)) {
    lineno++;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    Cursor c{raw, 0, lineno};
    c.skip_ws();
    if (c.eof()) continue;

    // labels (possibly several on one line)
    while (true) {
      size_t save = c.pos;
      if (!std::isalpha(static_cast<unsigned char>(c.peek())) && c.peek() != '_' && c.peek() != '.')
        break;
      std::string id = read_ident(c);
      if (c.peek() == ':') {
        c.pos++;
        if (in_data) fail(c, "labels are only allowed in the text segment");
        for (auto& [name, l] : label_defs)
          if (name == id) throw AsmError(lineno, static_cast<int>(save) + 1, "duplicate label '" + id + "'");
        label_defs.emplace_back(id, lineno);
        prog.symbols[id] = static_cast<uint32_t>(pending.size());
        c.skip_ws();
        continue;
      }
      c.pos = save;
      break;
    }
    c.skip_ws();
    if (c.eof()) continue;

    int mcol = c.col();
    std::string word = read_ident(c);
    if (word.empty()) fail(c, "expected a mnemonic or directive");

    if (word == ".text") {
      in_data = false;
      continue;
    }
    if (word == ".data") {
      c.skip_ws();
      int64_t base = read_number(c);
      if (base < 0) fail(c, ".data base must be non-negative");
      if (!data_base_set) {
        prog.data_base = static_cast<uint64_t>(base);
        data_base_set = true;
        data_cursor = 0;
      } else {
        if (static_cast<uint64_t>(base) < prog.data_base + prog.data.size())
          fail(c, ".data base moves backwards");
        data_cursor = static_cast<uint64_t>(base) - prog.data_base;
        prog.data.resize(data_cursor, 0);
      }
      in_data = true;
      continue;
    }
    if (word == ".word64") {
      if (!in_data) fail(c, ".word64 outside the data segment");
      c.skip_ws();
      int64_t v = read_number(c);
      prog.data.resize(std::max<size_t>(prog.data.size(), data_cursor + 8), 0);
      for (int i = 0; i < 8; i++)
        prog.data[data_cursor + i] = static_cast<uint8_t>(static_cast<uint64_t>(v) >> (8 * i));
      data_cursor += 8;
      continue;
    }
    if (word == ".space") {
      if (!in_data) fail(c, ".space outside the data segment");
      c.skip_ws();
      int64_t n = read_number(c);
      if (n < 0) fail(c, ".space size must be non-negative");
      data_cursor += static_cast<uint64_t>(n);
      prog.data.resize(std::max<size_t>(prog.data.size(), data_cursor), 0);
      continue;
    }
    if (word[0] == '.') throw AsmError(lineno, mcol, "unknown directive '" + word + "'");
    if (in_data) throw AsmError(lineno, mcol, "instruction inside the data segment");

    // mnemonic, with optional precision suffix
    std::string base = word;
    Precision prec = Precision::Dp;
    bool suffixed = false;
    if (auto dot = word.find('.'); dot != std::string::npos) {
      base = word.substr(0, dot);
      std::string suf = word.substr(dot + 1);
      if (base == "sync") {
        // handled below
      } else if (suf == "d") {
        prec = Precision::Dp; suffixed = true;
      } else if (suf == "s") {
        prec = Precision::Sp; suffixed = true;
      } else if (suf == "h") {
        prec = Precision::Hp; suffixed = true;
      } else {
        throw AsmError(lineno, mcol, "unknown mnemonic '" + word + "'");
      }
    }

    PendingIns pi;
    pi.line = lineno;
    pi.column = mcol;

    if (base == "sync") {
      std::string suf = word.size() > 5 ? word.substr(5) : "";
      if (suf == "city") pi.ins.scope = SyncScope::City;
      else if (suf == "chip") pi.ins.scope = SyncScope::Chip;
      else throw AsmError(lineno, mcol, "unknown mnemonic '" + word + "'");
      pi.ins.op = Op::Sync;
      pending.push_back(pi);
      continue;
    }

    auto it = mnemonic_table().find(base);
    if (it == mnemonic_table().end() || (suffixed && !it->second.has_prec))
      throw AsmError(lineno, mcol, "unknown mnemonic '" + word + "'");
    const MnemonicInfo& mi = it->second;
    if (mi.has_prec && !suffixed)
      throw AsmError(lineno, mcol, "floating-point mnemonic requires a .d/.s/.h suffix");

    std::vector<Operand> ops;
    c.skip_ws();
    if (!c.eof()) {
      while (true) {
        ops.push_back(read_operand(c));
        c.skip_ws();
        if (c.peek() == ',') {
          c.pos++;
          continue;
        }
        break;
      }
      c.skip_ws();
      if (!c.eof()) fail(c, "trailing characters");
    }

    auto want = [&](size_t n) {
      if (ops.size() != n)
        throw AsmError(lineno, mcol, "expected " + std::to_string(n) + " operand(s)");
    };

    Instruction& ins = pi.ins;
    ins.op = mi.int_op;
    ins.prec = prec;
    switch (mi.int_op) {
      case Op::Nop:
      case Op::Halt:
      case Op::Chg:
        want(0);
        break;
      case Op::Add: case Op::Sub: case Op::And: case Op::Or: case Op::Xor:
      case Op::Shl: case Op::Shr: case Op::Slt:
        want(3);
        ins.rd = expect_int_reg(c, ops[0]);
        ins.rs1 = expect_int_reg(c, ops[1]);
        ins.rs2 = expect_int_reg(c, ops[2]);
        break;
      case Op::Addi:
        want(3);
        ins.rd = expect_int_reg(c, ops[0]);
        ins.rs1 = expect_int_reg(c, ops[1]);
        if (ops[2].kind != Operand::Imm) throw AsmError(lineno, ops[2].column, "expected an immediate");
        check_imm(c, ops[2].column, ops[2].value);
        ins.imm = static_cast<int32_t>(ops[2].value);
        break;
      case Op::Lui:
        want(2);
        ins.rd = expect_int_reg(c, ops[0]);
        if (ops[1].kind != Operand::Imm) throw AsmError(lineno, ops[1].column, "expected an immediate");
        if (ops[1].value < 0 || ops[1].value > 0xffff)
          throw AsmError(lineno, ops[1].column, "immediate out of 16-bit range");
        ins.imm = static_cast<int32_t>(ops[1].value);
        break;
      case Op::Fadd: case Op::Fsub: case Op::Fmul: case Op::Fmin: case Op::Fmax: case Op::Fdiv:
        want(3);
        ins.rd = expect_fp_reg(c, ops[0]);
        ins.rs1 = expect_fp_reg(c, ops[1]);
        ins.rs2 = expect_fp_reg(c, ops[2]);
        break;
      case Op::Fma:
        want(4);
        ins.rd = expect_fp_reg(c, ops[0]);
        ins.rs1 = expect_fp_reg(c, ops[1]);
        ins.rs2 = expect_fp_reg(c, ops[2]);
        ins.rs3 = expect_fp_reg(c, ops[3]);
        break;
      case Op::Fsqrt:
        want(2);
        ins.rd = expect_fp_reg(c, ops[0]);
        ins.rs1 = expect_fp_reg(c, ops[1]);
        break;
      case Op::Ld: case Op::Lw: case Op::Lls:
      case Op::Sd: case Op::Sw: case Op::Sls: {
        want(2);
        bool fp;
        if (ops[0].kind == Operand::IntReg) fp = false;
        else if (ops[0].kind == Operand::FpReg) fp = true;
        else throw AsmError(lineno, ops[0].column, "expected a data register");
        if (ops[1].kind != Operand::MemRef)
          throw AsmError(lineno, ops[1].column, "expected a memory operand imm(rN)");
        check_imm(c, ops[1].column, ops[1].value);
        ins.op = fp ? mi.fp_op : mi.int_op;
        ins.rd = ops[0].reg;
        ins.rs1 = ops[1].reg;
        ins.imm = static_cast<int32_t>(ops[1].value);
        break;
      }
      case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bltu:
        want(3);
        ins.rs1 = expect_int_reg(c, ops[0]);
        ins.rs2 = expect_int_reg(c, ops[1]);
        if (ops[2].kind != Operand::Label)
          throw AsmError(lineno, ops[2].column, "branch target must be a label");
        pi.target = ops[2].label;
        pi.target_col = ops[2].column;
        break;
      case Op::Jal:
        want(2);
        ins.rd = expect_int_reg(c, ops[0]);
        if (ops[1].kind != Operand::Label)
          throw AsmError(lineno, ops[1].column, "jump target must be a label");
        pi.target = ops[1].label;
        pi.target_col = ops[1].column;
        break;
      case Op::Jalr:
        want(2);
        ins.rd = expect_int_reg(c, ops[0]);
        if (ops[1].kind != Operand::MemRef)
          throw AsmError(lineno, ops[1].column, "expected a target operand imm(rN)");
        check_imm(c, ops[1].column, ops[1].value);
        ins.rs1 = ops[1].reg;
        ins.imm = static_cast<int32_t>(ops[1].value);
        break;
      case Op::Flush: case Op::L2flush:
        want(1);
        if (ops[0].kind != Operand::MemRef)
          throw AsmError(lineno, ops[0].column, "expected an address operand imm(rN)");
        check_imm(c, ops[0].column, ops[0].value);
        ins.rs1 = ops[0].reg;
        ins.imm = static_cast<int32_t>(ops[0].value);
        break;
      case Op::Flushr:
        want(2);
        ins.rs1 = expect_int_reg(c, ops[0]);
        ins.rs2 = expect_int_reg(c, ops[1]);
        break;
      case Op::Tid:
        want(1);
        ins.rd = expect_int_reg(c, ops[0]);
        break;
      default:
        throw AsmError(lineno, mcol, "unknown mnemonic '" + word + "'");
    }
    pending.push_back(pi);
  }

  // resolve labels
  for (size_t i = 0; i < pending.size(); i++) {
    PendingIns& pi = pending[i];
    if (!pi.target.empty()) {
      auto sym = prog.symbols.find(pi.target);
      if (sym == prog.symbols.end())
        throw AsmError(pi.line, pi.target_col, "undefined label '" + pi.target + "'");
      int64_t off = static_cast<int64_t>(sym->second) - static_cast<int64_t>(i);
      if (off < kImmMin || off > kImmMax)
        throw AsmError(pi.line, pi.target_col, "branch target out of range");
      pi.ins.imm = static_cast<int32_t>(off);
    }
    prog.code.push_back(pi.ins);
    prog.words.push_back(encode(pi.ins));
  }

  // labels may also point one past the last instruction (end labels)
  for (auto& [name, idx] : prog.symbols)
    if (idx > prog.code.size())
      throw AsmError(1, 1, "label '" + name + "' out of range");

  return prog;
}

namespace {

std::string reg_name(bool fp, int r) { return (fp ? "f" : "r") + std::to_string(r); }

const char* prec_suffix(Precision p) {
  switch (p) {
    case Precision::Dp: return ".d";
    case Precision::Sp: return ".s";
    default: return ".h";
  }
}

}  // namespace

std::string disassemble(const Program& p) {
  // synthesize labels at branch/jal targets
  std::set<uint32_t> targets;
  for (size_t i = 0; i < p.code.size(); i++) {
    const Instruction& ins = p.code[i];
    if (is_branch(ins.op) || ins.op == Op::Jal)
      targets.insert(static_cast<uint32_t>(static_cast<int64_t>(i) + ins.imm));
  }
  auto label_of = [&](uint32_t idx) { return "L" + std::to_string(idx); };

  std::ostringstream out;
  out << ".text\n";
  for (size_t i = 0; i < p.code.size(); i++) {
    if (targets.count(static_cast<uint32_t>(i))) out << label_of(static_cast<uint32_t>(i)) << ":\n";
    const Instruction& ins = p.code[i];
    out << "    ";
    const bool fp_data = fp_dest(ins.op) || ins.op == Op::FSd || ins.op == Op::FSw || ins.op == Op::FSls;
    switch (ins.op) {
      case Op::Nop: out << "nop"; break;
      case Op::Halt: out << "halt"; break;
      case Op::Chg: out << "chg"; break;
      case Op::Add: case Op::Sub: case Op::And: case Op::Or: case Op::Xor:
      case Op::Shl: case Op::Shr: case Op::Slt:
        out << mnemonic(ins.op) << " r" << int(ins.rd) << ", r" << int(ins.rs1) << ", r"
            << int(ins.rs2);
        break;
      case Op::Addi:
        out << "addi r" << int(ins.rd) << ", r" << int(ins.rs1) << ", " << ins.imm;
        break;
      case Op::Lui:
        out << "lui r" << int(ins.rd) << ", " << ins.imm;
        break;
      case Op::Fadd: case Op::Fsub: case Op::Fmul: case Op::Fmin: case Op::Fmax: case Op::Fdiv:
        out << mnemonic(ins.op) << prec_suffix(ins.prec) << " f" << int(ins.rd) << ", f"
            << int(ins.rs1) << ", f" << int(ins.rs2);
        break;
      case Op::Fma:
        out << "fma" << prec_suffix(ins.prec) << " f" << int(ins.rd) << ", f" << int(ins.rs1)
            << ", f" << int(ins.rs2) << ", f" << int(ins.rs3);
        break;
      case Op::Fsqrt:
        out << "fsqrt" << prec_suffix(ins.prec) << " f" << int(ins.rd) << ", f" << int(ins.rs1);
        break;
      case Op::Ld: case Op::Sd: case Op::Lw: case Op::Sw: case Op::Lls: case Op::Sls:
      case Op::FLd: case Op::FSd: case Op::FLw: case Op::FSw: case Op::FLls: case Op::FSls:
        out << mnemonic(ins.op) << " " << reg_name(fp_data, ins.rd) << ", " << ins.imm << "(r"
            << int(ins.rs1) << ")";
        break;
      case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bltu:
        out << mnemonic(ins.op) << " r" << int(ins.rs1) << ", r" << int(ins.rs2) << ", "
            << label_of(static_cast<uint32_t>(static_cast<int64_t>(i) + ins.imm));
        break;
      case Op::Jal:
        out << "jal r" << int(ins.rd) << ", "
            << label_of(static_cast<uint32_t>(static_cast<int64_t>(i) + ins.imm));
        break;
      case Op::Jalr:
        out << "jalr r" << int(ins.rd) << ", " << ins.imm << "(r" << int(ins.rs1) << ")";
        break;
      case Op::Flush:
        out << "flush " << ins.imm << "(r" << int(ins.rs1) << ")";
        break;
      case Op::L2flush:
        out << "l2flush " << ins.imm << "(r" << int(ins.rs1) << ")";
        break;
      case Op::Flushr:
        out << "flushr r" << int(ins.rs1) << ", r" << int(ins.rs2);
        break;
      case Op::Sync:
        out << (ins.scope == SyncScope::City ? "sync.city" : "sync.chip");
        break;
      case Op::Tid:
        out << "tid r" << int(ins.rd);
        break;
      case Op::Count_:
        break;
    }
    out << "\n";
  }
  if (targets.count(static_cast<uint32_t>(p.code.size())))
    out << label_of(static_cast<uint32_t>(p.code.size())) << ":\n";

  if (!p.data.empty()) {
    out << ".data 0x" << std::hex << p.data_base << std::dec << "\n";
    size_t pos = 0;
    while (pos + 8 <= p.data.size()) {
      uint64_t v = 0;
      for (int b = 0; b < 8; b++) v |= static_cast<uint64_t>(p.data[pos + b]) << (8 * b);
      out << "    .word64 0x" << std::hex << v << std::dec << "\n";
      pos += 8;
    }
    if (pos < p.data.size()) {
      // tails shorter than a word are always zero for assembler-built
      // programs; represent them as padding
      out << "    .space " << (p.data.size() - pos) << "\n";
    }
  }
  return out.str();
}

}  // namespace sc3sim
