#include "sc3sim/semantics.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sc3sim/fp16.hpp"

namespace sc3sim {

uint64_t alu_eval(Op op, uint64_t a, uint64_t b, int32_t imm) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::And: return a & b;
    case Op::Or: return a | b;
    case Op::Xor: return a ^ b;
    case Op::Shl: return a << (b & 63);
    case Op::Shr: return a >> (b & 63);
    case Op::Slt: return static_cast<int64_t>(a) < static_cast<int64_t>(b) ? 1 : 0;
    case Op::Addi: return a + static_cast<uint64_t>(static_cast<int64_t>(imm));
    case Op::Lui: return static_cast<uint64_t>(static_cast<uint32_t>(imm) & 0xffff) << 16;
    case Op::Tid: return a;  // caller passes the thread id in a
    default: throw std::logic_error("alu_eval: not an integer op");
  }
}

namespace {

double scalar_eval(Op op, double a, double b, double c) {
  switch (op) {
    case Op::Fadd: return a + b;
    case Op::Fsub: return a - b;
    case Op::Fmul: return a * b;
    case Op::Fma: return std::fma(a, b, c);
    case Op::Fmin: return std::fmin(a, b);
    case Op::Fmax: return std::fmax(a, b);
    case Op::Fdiv: return a / b;
    case Op::Fsqrt: return std::sqrt(a);
    default: throw std::logic_error("fp_eval: not an FP op");
  }
}

float scalar_eval_f32(Op op, float a, float b, float c) {
  switch (op) {
    case Op::Fadd: return a + b;
    case Op::Fsub: return a - b;
    case Op::Fmul: return a * b;
    case Op::Fma: return std::fma(a, b, c);
    case Op::Fmin: return std::fmin(a, b);
    case Op::Fmax: return std::fmax(a, b);
    case Op::Fdiv: return a / b;
    case Op::Fsqrt: return std::sqrt(a);
    default: throw std::logic_error("fp_eval: not an FP op");
  }
}

}  // namespace

uint64_t fp_eval(Op op, Precision prec, uint64_t a, uint64_t b, uint64_t c) {
  switch (prec) {
    case Precision::Dp: {
      const double r = scalar_eval(op, std::bit_cast<double>(a), std::bit_cast<double>(b),
                                   std::bit_cast<double>(c));
      return std::bit_cast<uint64_t>(r);
    }
    case Precision::Sp: {
      uint64_t out = 0;
      for (int lane = 0; lane < 2; lane++) {
        uint32_t ua = static_cast<uint32_t>(a >> (32 * lane));
        uint32_t ub = static_cast<uint32_t>(b >> (32 * lane));
        uint32_t uc = static_cast<uint32_t>(c >> (32 * lane));
        const float r = scalar_eval_f32(op, std::bit_cast<float>(ua), std::bit_cast<float>(ub),
                                        std::bit_cast<float>(uc));
        out |= static_cast<uint64_t>(std::bit_cast<uint32_t>(r)) << (32 * lane);
      }
      return out;
    }
    case Precision::Hp: {
      uint64_t out = 0;
      for (int lane = 0; lane < 4; lane++) {
        const uint16_t ha = static_cast<uint16_t>(a >> (16 * lane));
        const uint16_t hb = static_cast<uint16_t>(b >> (16 * lane));
        const uint16_t hc = static_cast<uint16_t>(c >> (16 * lane));
        const double r = scalar_eval(op, f16_to_f64(ha), f16_to_f64(hb), f16_to_f64(hc));
        out |= static_cast<uint64_t>(f64_to_f16(r)) << (16 * lane);
      }
      return out;
    }
  }
  throw std::logic_error("fp_eval: bad precision");
}

bool branch_taken(Op op, uint64_t a, uint64_t b) {
  switch (op) {
    case Op::Beq: return a == b;
    case Op::Bne: return a != b;
    case Op::Blt: return static_cast<int64_t>(a) < static_cast<int64_t>(b);
    case Op::Bltu: return a < b;
    default: throw std::logic_error("branch_taken: not a branch");
  }
}

}  // namespace sc3sim
