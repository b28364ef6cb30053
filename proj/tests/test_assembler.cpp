#include "doctest.h"
#include "sc3sim/assembler.hpp"

using namespace sc3sim;

TEST_CASE("three-operand integer instruction") {
  const Program p = parse_assembly("add r1, r2, r3\n");
  REQUIRE(p.code.size() == 1);
  CHECK(p.code[0].op == Op::Add);
  CHECK(p.code[0].rd == 1);
  CHECK(p.code[0].rs1 == 2);
  CHECK(p.code[0].rs2 == 3);
}

TEST_CASE("self-referential label resolves to its own index") {
  const Program p = parse_assembly("loop: bne r1, r0, loop\n");
  REQUIRE(p.code.size() == 1);
  CHECK(p.code[0].op == Op::Bne);
  CHECK(p.code[0].imm == 0);  // target index 0 == own index
  CHECK(p.symbols.at("loop") == 0);
}

TEST_CASE("no quad precision exists") {
  CHECK_THROWS_WITH_AS(parse_assembly("fma.q f1,f2,f3,f4\n"),
                       doctest::Contains("unknown mnemonic"), AsmError);
}

TEST_CASE("error catalogue with line and column") {
  auto check_err = [](const std::string& src, const char* what, int line) {
    try {
      parse_assembly(src);
      FAIL("expected an error for: " << src);
    } catch (const AsmError& e) {
      CHECK(std::string(e.what()).find(what) != std::string::npos);
      CHECK(e.line == line);
      CHECK(e.column >= 1);
    }
  };
  check_err("frobnicate r1\n", "unknown mnemonic", 1);
  check_err("add r1, r2, r32\n", "register out of range", 1);
  check_err("nop\nbeq r1, r0, nowhere\n", "undefined label", 2);
  check_err("addi r1, r0, 40000\n", "immediate out of 16-bit range", 1);
  check_err("x: nop\nx: nop\n", "duplicate label", 2);
  check_err("add r1, r2\n", "expected 3 operand(s)", 1);
  check_err("ld r1, r2\n", "expected a memory operand", 1);
}

TEST_CASE("fp-file memory mnemonics pick the register file by operand") {
  const Program p = parse_assembly("ld r4, 8(r2)\nld f4, 8(r2)\nsd f1, -8(r3)\n");
  CHECK(p.code[0].op == Op::Ld);
  CHECK(p.code[1].op == Op::FLd);
  CHECK(p.code[2].op == Op::FSd);
  CHECK(p.code[2].imm == -8);
}

TEST_CASE("directives build the data segment") {
  const Program p = parse_assembly(
      ".data 0x8000\n"
      ".word64 0x1122334455667788\n"
      ".space 9\n"
      ".word64 1\n"
      ".text\n"
      "halt\n");
  CHECK(p.data_base == 0x8000);
  REQUIRE(p.data.size() == 8 + 9 + 8);
  CHECK(p.data[0] == 0x88);
  CHECK(p.data[7] == 0x11);
  CHECK(p.data[8] == 0);
  CHECK(p.data[17] == 1);
  REQUIRE(p.code.size() == 1);
}

TEST_CASE("comments, hex immediates, sync scopes") {
  const Program p = parse_assembly(
      "# leading comment\n"
      "lui r1, 0x1234   # trailing comment\n"
      "sync.city\n"
      "sync.chip\n"
      "flush 0x40(r1)\n"
      "flushr r1, r2\n"
      "l2flush 0(r1)\n"
      "tid r9\n"
      "chg\n");
  CHECK(p.code[0].imm == 0x1234);
  CHECK(p.code[1].scope == SyncScope::City);
  CHECK(p.code[2].scope == SyncScope::Chip);
  CHECK(p.code[3].op == Op::Flush);
  CHECK(p.code[3].imm == 0x40);
  CHECK(p.code[4].op == Op::Flushr);
  CHECK(p.code[7].op == Op::Chg);
}

TEST_CASE("assembler determinism: identical source, identical image") {
  const std::string src =
      "start: addi r1, r0, 5\nloop: addi r1, r1, -1\nbne r1, r0, loop\nhalt\n";
  const Program a = parse_assembly(src);
  const Program b = parse_assembly(src);
  CHECK(a == b);
  CHECK(to_image(a) == to_image(b));
}

TEST_CASE("disassemble round trip preserves code and data") {
  const std::string src =
      "entry: addi r5, r0, 3\n"
      "loop: fma.s f1, f2, f3, f1\n"
      "ld f9, 16(r5)\n"
      "sw r4, 4(r5)\n"
      "lls r7, 8(r0)\n"
      "beq r5, r0, out\n"
      "addi r5, r5, -1\n"
      "jal r2, loop\n"
      "out: sync.chip\n"
      "fsqrt.h f2, f3\n"
      "halt\n"
      ".data 0x9000\n"
      ".word64 0xdeadbeef\n"
      ".space 16\n"
      ".word64 42\n";
  const Program p = parse_assembly(src);
  const Program q = parse_assembly(disassemble(p));
  CHECK(q.code == p.code);
  CHECK(q.words == p.words);
  CHECK(q.data == p.data);
  CHECK(q.data_base == p.data_base);
}

TEST_CASE("empty program disassembles to directives only") {
  const Program p = parse_assembly("");
  CHECK(p.code.empty());
  const std::string out = disassemble(p);
  CHECK(out == ".text\n");
}

TEST_CASE("single halt") {
  const Program p = parse_assembly("halt");
  const std::string out = disassemble(p);
  CHECK(out.find("halt") != std::string::npos);
  CHECK(parse_assembly(out).code == p.code);
}
