#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

// Software IEEE-754 binary16. Lane arithmetic is done by widening to double,
// computing there (exact for half-sized add/mul operands), and rounding back
// once, round-to-nearest-even.

namespace sc3sim {

inline double f16_to_f64(uint16_t h) {
  const uint32_t sign = (h >> 15) & 1;
  const uint32_t exp = (h >> 10) & 0x1f;
  const uint32_t frac = h & 0x3ff;
  double v;
  if (exp == 0) {
    v = std::ldexp(static_cast<double>(frac), -24);  // subnormal or zero
  } else if (exp == 0x1f) {
    if (frac == 0) {
      v = std::numeric_limits<double>::infinity();
    } else {
      v = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    v = std::ldexp(static_cast<double>(frac | 0x400), static_cast<int>(exp) - 25);
  }
  return sign ? -v : v;
}

inline uint16_t f64_to_f16(double x) {
  uint64_t bits;
  std::memcpy(&bits, &x, 8);
  const uint16_t sign = static_cast<uint16_t>((bits >> 48) & 0x8000);
  const int exp = static_cast<int>((bits >> 52) & 0x7ff);
  uint64_t frac = bits & 0xfffffffffffffULL;

  if (exp == 0x7ff) {
    if (frac != 0) return static_cast<uint16_t>(sign | 0x7e00);  // quiet NaN
    return static_cast<uint16_t>(sign | 0x7c00);                 // infinity
  }

  int e = exp - 1023;  // unbiased
  if (exp == 0) {
    // Double subnormals are far below half's smallest subnormal.
    return sign;
  }
  if (e > 15) {
    return static_cast<uint16_t>(sign | 0x7c00);  // magnitude >= 2^16 always overflows
  }

  uint64_t sig = frac | (1ULL << 52);  // 53-bit significand
  int shift;
  if (e >= -14) {
    shift = 42;  // keep 11 bits
  } else {
    shift = 42 + (-14 - e);  // subnormal target
    if (shift > 63) return sign;
    e = -15;  // encoded exponent field becomes 0 below
  }
  uint64_t kept = sig >> shift;
  const uint64_t rem = sig & ((1ULL << shift) - 1);
  const uint64_t half = 1ULL << (shift - 1);
  if (rem > half || (rem == half && (kept & 1))) kept++;

  uint16_t out;
  if (e >= -14) {
    uint64_t mant = kept - 1024;  // strip hidden bit (kept in [1024, 2048])
    int ee = e + 15;
    if (kept == 2048) {  // rounding carried into the exponent
      mant = 0;
      ee++;
    }
    if (ee >= 31) return static_cast<uint16_t>(sign | 0x7c00);
    out = static_cast<uint16_t>(sign | (ee << 10) | mant);
  } else {
    if (kept == 1024) {
      out = static_cast<uint16_t>(sign | (1 << 10));  // rounded up to normal
    } else {
      out = static_cast<uint16_t>(sign | kept);
    }
  }
  return out;
}

}  // namespace sc3sim
