#include "sc3sim/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sc3sim/assembler.hpp"
#include "sc3sim/functional.hpp"

namespace sc3sim {

namespace {

// deterministic value stream (independent of std::distribution internals)
struct ValueStream {
  std::mt19937_64 rng;
  explicit ValueStream(uint64_t seed) : rng(seed) {}
  double next() {  // uniform in [1, 2): benign magnitudes for accumulation
    return 1.0 + double(rng() >> 12) * 0x1p-52;
  }
};

void push_f64(std::vector<uint8_t>& v, double d) {
  const uint64_t b = std::bit_cast<uint64_t>(d);
  for (int i = 0; i < 8; i++) v.push_back(uint8_t(b >> (8 * i)));
}

std::string S(uint64_t v) { return std::to_string(v); }
std::string S(int64_t v) { return std::to_string(v); }
std::string S(int v) { return std::to_string(v); }
std::string S(uint32_t v) { return std::to_string(v); }

struct Emit {
  std::ostringstream out;
  void raw(const std::string& s) { out << s << "\n"; }
  void i(const std::string& s) { out << "    " << s << "\n"; }
  void label(const std::string& l) { out << l << ":\n"; }

  // rd = value; value must fit in 32 bits
  void const32(int rd, uint64_t v) {
    if (v > 0xffffffffull) throw std::invalid_argument("const32: value too wide");
    if (v <= 32767) {
      i("addi r" + S(rd) + ", r0, " + S(v));
      return;
    }
    uint32_t lo = v & 0xffff;
    uint32_t hi = (v >> 16) & 0xffff;
    if (lo & 0x8000) hi = (hi + 1) & 0xffff;
    i("lui r" + S(rd) + ", " + S(hi));
    if (lo) i("addi r" + S(rd) + ", r" + S(rd) + ", " + S(int64_t(int16_t(lo))));
  }

  // rd = rs * c using shifts and adds; rd, t1, t2 distinct from rs
  void mul_const(int rd, int rs, uint64_t c, int t1, int t2) {
    if (c == 0) {
      i("addi r" + S(rd) + ", r0, 0");
      return;
    }
    bool first = true;
    for (int bit = 63; bit >= 0; bit--) {
      if (!(c >> bit & 1)) continue;
      if (first) {
        if (bit == 0) {
          i("add r" + S(rd) + ", r" + S(rs) + ", r0");
        } else {
          i("addi r" + S(t1) + ", r0, " + S(bit));
          i("shl r" + S(rd) + ", r" + S(rs) + ", r" + S(t1));
        }
        first = false;
      } else {
        if (bit == 0) {
          i("add r" + S(rd) + ", r" + S(rd) + ", r" + S(rs));
        } else {
          i("addi r" + S(t1) + ", r0, " + S(bit));
          i("shl r" + S(t2) + ", r" + S(rs) + ", r" + S(t1));
          i("add r" + S(rd) + ", r" + S(rd) + ", r" + S(t2));
        }
      }
    }
  }
};

constexpr uint64_t kVecA = 0x100000;

uint64_t round_up(uint64_t v, uint64_t g) { return (v + g - 1) / g * g; }

}  // namespace

// ---------------------------------------------------------------------------
// vecadd
// ---------------------------------------------------------------------------

KernelCase gen_vecadd(uint64_t n, uint64_t seed, bool dual_group, uint32_t pe_count, bool ones) {
  if (n == 0) throw std::invalid_argument("vecadd: n must be positive");
  const uint32_t tpp = dual_group ? 8 : 4;
  const uint64_t threads = uint64_t(pe_count) * tpp;
  if (n % threads) throw std::invalid_argument("vecadd: n must divide across activated threads");
  const uint64_t npt = n / threads;
  if ((npt * 8 * tpp) % 64)
    throw std::invalid_argument("vecadd: per-PE block must be line aligned (use n % (2*threads) == 0)");

  const uint64_t span = round_up(n * 8, 0x10000);
  const uint64_t a = kVecA, b = a + span, c = b + span;

  Emit e;
  e.raw("# vecadd: c[i] = a[i] + b[i], one contiguous block per thread");
  e.raw(".text");
  e.i("tid r3");
  e.mul_const(4, 3, npt * 8, 10, 11);  // r4 = byte offset of this thread's block
  e.const32(5, a);
  e.i("add r5, r5, r4");
  e.const32(6, b);
  e.i("add r6, r6, r4");
  e.const32(7, c);
  e.i("add r7, r7, r4");
  e.i("add r12, r7, r0");    // c block start, for the final flush
  e.const32(13, npt * 8);    // c block length
  e.const32(9, npt);
  e.label("loop");
  e.i("ld f1, 0(r5)");
  e.i("ld f2, 0(r6)");
  e.i("fadd.d f3, f1, f2");
  e.i("sd f3, 0(r7)");
  if (dual_group) e.i("chg");  // hand the PE to the other group each iteration
  e.i("addi r5, r5, 8");
  e.i("addi r6, r6, 8");
  e.i("addi r7, r7, 8");
  e.i("addi r9, r9, -1");
  e.i("bne r9, r0, loop");
  e.i("flushr r12, r13");
  e.i("halt");

  KernelCase kc;
  kc.name = dual_group ? "vecadd-dual" : "vecadd-single";
  kc.source = e.out.str();
  kc.program = parse_assembly(kc.source);
  kc.threads_per_pe = tpp;

  ValueStream vs(seed);
  KernelCase::Region ra{a, {}}, rb{b, {}}, rc{c, {}};
  std::vector<double> va(n), vb(n);
  for (uint64_t idx = 0; idx < n; idx++) va[idx] = ones ? 1.0 : vs.next();
  for (uint64_t idx = 0; idx < n; idx++) vb[idx] = ones ? 1.0 : vs.next();
  for (uint64_t idx = 0; idx < n; idx++) {
    push_f64(ra.bytes, va[idx]);
    push_f64(rb.bytes, vb[idx]);
    push_f64(rc.bytes, va[idx] + vb[idx]);  // elementwise oracle
  }
  kc.inputs = {std::move(ra), std::move(rb)};
  kc.expected = {std::move(rc)};
  kc.flops_dp_expected = n;
  return kc;
}

// ---------------------------------------------------------------------------
// dgemm
// ---------------------------------------------------------------------------

namespace {

struct DgemmLayout {
  uint64_t a, b, c;
  uint64_t bytes(uint32_t rows, uint32_t cols) const { return uint64_t(rows) * cols * 8; }
};

DgemmLayout dgemm_layout(uint32_t m, uint32_t n, uint32_t k) {
  DgemmLayout l{};
  l.a = 0x100000;
  l.b = l.a + round_up(uint64_t(m) * k * 8, 0x10000);
  l.c = l.b + round_up(uint64_t(k) * n * 8, 0x10000);
  return l;
}

// Fast path: 5x5 register accumulators over 5-row sub-stripes, A panels in
// private local-storage slices, B panels double-buffered in a shared
// local-storage region staged cooperatively by the PE's four threads.
void emit_dgemm_fast(Emit& e, uint32_t m, uint32_t n, uint32_t k, uint32_t chunk, uint32_t rpt,
                     const DgemmLayout& L) {
  const uint32_t subs = rpt / 5;
  const uint32_t jbs = n / 5;
  const uint32_t chunks = k / chunk;
  const uint32_t kiters = chunk / 8;
  const uint64_t bbuf_bytes = 5ull * chunk * 8;     // one B panel
  const uint64_t apan_bytes = uint64_t(rpt) * chunk * 8;
  const uint64_t apan_base = 2 * bbuf_bytes;

  e.raw("# dgemm " + S(m) + "x" + S(n) + "x" + S(k) + ": row stripes of " + S(rpt) +
        " rows per thread, A panels in local storage,");
  e.raw("# B panels double-buffered in the shared local-storage region, C in 5x5");
  e.raw("# register blocks, k ascending");
  e.raw(".text");
  e.i("addi r30, r0, 3");
  e.i("and r3, r1, r30");  // PE-local thread index
  // stripe bases
  e.mul_const(28, 1, uint64_t(rpt) * k * 8, 29, 31);
  e.const32(4, L.a);
  e.i("add r4, r4, r28");  // A stripe base, advanced by chunk*8 per chunk
  e.mul_const(28, 1, uint64_t(rpt) * n * 8, 29, 31);
  e.const32(6, L.c);
  e.i("add r6, r6, r28");  // C stripe base (fixed)
  e.const32(5, L.b);       // B chunk base, advanced by chunk*n*8 per chunk
  // local-storage bases
  e.mul_const(7, 3, apan_bytes, 29, 31);
  e.i("addi r7, r7, " + S(apan_base));  // own A panel
  e.i("addi r8, r0, 0");                // active B buffer offset (0 / bbuf)
  e.mul_const(25, 3, 40, 29, 31);       // lt*40: local-storage offset of own B rows
  e.mul_const(26, 3, uint64_t(n) * 8, 29, 31);  // lt*n*8: global offset of own B rows
  e.const32(20, uint64_t(chunk) * n * 8);       // B advance per chunk
  e.const32(21, bbuf_bytes);               // buffer toggle mask operand
  e.const32(27, uint64_t(rpt) * n * 8);    // C stripe byte length (flush)
  e.const32(10, chunks);

  e.label("chunk_loop");
  // stage the A panel: rpt rows x chunk columns
  e.i("add r18, r4, r0");
  e.i("add r19, r7, r0");
  e.const32(13, rpt);
  e.label("a_row");
  e.const32(12, kiters);
  e.label("a_inner");
  for (int u = 0; u < 8; u++) {
    e.i("ld f31, " + S(8 * u) + "(r18)");
    e.i("sls f31, " + S(8 * u) + "(r19)");
  }
  e.i("addi r18, r18, 64");
  e.i("addi r19, r19, 64");
  e.i("addi r12, r12, -1");
  e.i("bne r12, r0, a_inner");
  e.i("addi r18, r18, " + S(int64_t(k) * 8 - int64_t(chunk) * 8));
  e.i("addi r13, r13, -1");
  e.i("bne r13, r0, a_row");
  e.i("sync.city");

  e.i("add r14, r5, r0");  // B global base for jb 0
  e.i("add r15, r6, r0");  // C column base for jb 0
  e.const32(9, jbs);
  e.label("jb_loop");
  // cooperative B staging: thread lt stages rows lt, lt+4, ...
  e.i("add r16, r14, r26");
  e.i("add r17, r8, r25");
  e.const32(13, chunk / 4);
  e.label("b_stage");
  for (int cc = 0; cc < 5; cc++) {
    e.i("ld f31, " + S(8 * cc) + "(r16)");
    e.i("sls f31, " + S(8 * cc) + "(r17)");
  }
  e.i("addi r16, r16, " + S(uint64_t(n) * 8 * 4));
  e.i("addi r17, r17, 160");
  e.i("addi r13, r13, -1");
  e.i("bne r13, r0, b_stage");
  e.i("sync.city");

  // two sub-stripes of 5 rows
  e.i("addi r11, r0, " + S(subs));
  e.i("add r22, r15, r0");  // C sub pointer
  e.i("add r23, r7, r0");   // A panel sub pointer
  e.label("sub_loop");
  e.i("add r24, r8, r0");  // B panel pointer
  for (int rr = 0; rr < 5; rr++)
    for (int cc = 0; cc < 5; cc++)
      e.i("ld f" + S(rr * 5 + cc) + ", " + S(uint64_t(rr) * n * 8 + cc * 8) + "(r22)");
  e.const32(12, kiters);
  e.label("kk_loop");
  for (int u = 0; u < 8; u++) {
    for (int rr = 0; rr < 5; rr++)
      e.i("lls f" + S(25 + rr) + ", " + S(uint64_t(rr) * chunk * 8 + u * 8) + "(r23)");
    for (int cc = 0; cc < 5; cc++) {
      e.i("lls f30, " + S(u * 40 + cc * 8) + "(r24)");
      for (int rr = 0; rr < 5; rr++) {
        const int acc = rr * 5 + cc;
        e.i("fma.d f" + S(acc) + ", f" + S(25 + rr) + ", f30, f" + S(acc));
      }
    }
  }
  e.i("addi r23, r23, 64");
  e.i("addi r24, r24, 320");
  e.i("addi r12, r12, -1");
  e.i("bne r12, r0, kk_loop");
  for (int rr = 0; rr < 5; rr++)
    for (int cc = 0; cc < 5; cc++)
      e.i("sd f" + S(rr * 5 + cc) + ", " + S(uint64_t(rr) * n * 8 + cc * 8) + "(r22)");
  // next sub-stripe: rewind the B pointer, advance C and the A panel
  e.i("addi r22, r22, " + S(uint64_t(n) * 8 * 5));
  e.i("addi r23, r23, " + S(uint64_t(chunk) * 8 * 5 - chunk * 8));
  e.i("addi r11, r11, -1");
  e.i("bne r11, r0, sub_loop");

  e.i("addi r14, r14, 40");
  e.i("addi r15, r15, 40");
  e.i("xor r8, r8, r21");  // toggle the B double buffer
  e.i("addi r9, r9, -1");
  e.i("bne r9, r0, jb_loop");

  e.i("addi r4, r4, " + S(uint64_t(chunk) * 8));
  e.i("add r5, r5, r20");
  e.i("addi r10, r10, -1");
  e.i("bne r10, r0, chunk_loop");

  e.i("flushr r6, r27");
  e.i("halt");
}

// Simple path for small or oddly shaped problems: one output row stripe per
// thread, A staged to local storage per k chunk, scalar accumulator.
void emit_dgemm_simple(Emit& e, uint32_t m, uint32_t n, uint32_t k, uint32_t tile, uint32_t rpt,
                       uint32_t tpp, const DgemmLayout& L) {
  const uint32_t chunks = k / tile;
  e.raw("# dgemm " + S(m) + "x" + S(n) + "x" + S(k) + ": scalar reference layout, " + S(rpt) +
        " rows per thread, A staged to local storage");
  e.raw(".text");
  e.i("tid r3");
  const uint64_t apan_bytes = uint64_t(rpt) * tile * 8;
  // local slot: per PE-local thread
  e.const32(30, tpp - 1);
  e.i("and r28, r3, r30");
  e.mul_const(7, 28, apan_bytes, 29, 31);  // A panel base in local storage
  e.mul_const(28, 3, uint64_t(rpt) * k * 8, 29, 31);
  e.const32(4, L.a);
  e.i("add r4, r4, r28");  // A stripe base (advances by tile*8 per chunk)
  e.mul_const(28, 3, uint64_t(rpt) * n * 8, 29, 31);
  e.const32(6, L.c);
  e.i("add r6, r6, r28");  // C stripe base
  e.i("add r26, r6, r0");  // copy for the final flush
  e.const32(5, L.b);       // B chunk base (advances by tile*n*8 per chunk)
  e.const32(20, uint64_t(tile) * n * 8);
  e.const32(27, uint64_t(rpt) * n * 8);
  e.const32(10, chunks);

  e.label("chunk_loop");
  e.i("add r18, r4, r0");
  e.i("add r19, r7, r0");
  e.const32(13, rpt);
  e.label("a_row");
  e.const32(12, tile);
  e.label("a_elem");
  e.i("ld f31, 0(r18)");
  e.i("sls f31, 0(r19)");
  e.i("addi r18, r18, 8");
  e.i("addi r19, r19, 8");
  e.i("addi r12, r12, -1");
  e.i("bne r12, r0, a_elem");
  e.i("addi r18, r18, " + S(int64_t(k) * 8 - int64_t(tile) * 8));
  e.i("addi r13, r13, -1");
  e.i("bne r13, r0, a_row");

  // for each own row, for each column: accumulate tile terms
  e.i("add r15, r6, r0");   // C row pointer
  e.i("add r23, r7, r0");   // A panel row pointer
  e.const32(13, rpt);
  e.label("row_loop");
  e.i("add r16, r5, r0");  // B column walker base for j=0
  e.i("add r22, r15, r0");
  e.const32(9, n);
  e.label("col_loop");
  e.i("ld f1, 0(r22)");
  e.i("add r17, r16, r0");
  e.i("add r24, r23, r0");
  e.const32(12, tile);
  e.label("kk_loop");
  e.i("lls f2, 0(r24)");
  e.i("ld f3, 0(r17)");
  e.i("fma.d f1, f2, f3, f1");
  e.i("addi r24, r24, 8");
  e.i("addi r17, r17, " + S(uint64_t(n) * 8));
  e.i("addi r12, r12, -1");
  e.i("bne r12, r0, kk_loop");
  e.i("sd f1, 0(r22)");
  e.i("addi r22, r22, 8");
  e.i("addi r16, r16, 8");
  e.i("addi r9, r9, -1");
  e.i("bne r9, r0, col_loop");
  e.i("addi r15, r15, " + S(uint64_t(n) * 8));
  e.i("addi r23, r23, " + S(uint64_t(tile) * 8));
  e.i("addi r13, r13, -1");
  e.i("bne r13, r0, row_loop");

  e.i("addi r4, r4, " + S(uint64_t(tile) * 8));
  e.i("add r5, r5, r20");
  e.i("addi r10, r10, -1");
  e.i("bne r10, r0, chunk_loop");
  e.i("flushr r26, r27");
  e.i("halt");
}

}  // namespace

KernelCase gen_dgemm(uint32_t m, uint32_t n, uint32_t k, uint32_t tile, uint64_t seed,
                     uint32_t pe_count) {
  if (tile == 0 || m % tile || n % tile || k % tile)
    throw std::invalid_argument("dgemm: dims must be divisible by tile");
  if (3ull * tile * tile * 8 > 24 * 1024)
    throw std::invalid_argument("dgemm: tile too large for local storage");
  if (n % 8) throw std::invalid_argument("dgemm: n must be a multiple of 8");

  const uint32_t tpp = 4;
  const uint32_t threads = pe_count * tpp;
  if (m % threads) throw std::invalid_argument("dgemm: m must divide across activated threads");
  const uint32_t rpt = m / threads;

  const DgemmLayout L = dgemm_layout(m, n, k);
  Emit e;
  bool fast = rpt % 5 == 0 && n % 5 == 0 && n <= 1023 && tpp == 4;
  uint32_t chunk = 0;
  if (fast) {
    // largest whole-tile chunk such that 2 B buffers + 4 A panels fit in the
    // 24 KiB local storage: chunk*8*(2*5 + 4*rpt) <= 24576
    const uint64_t budget = 24 * 1024;
    for (uint32_t c = tile; c <= k; c += tile) {
      if (k % c || c % 8) continue;
      if (uint64_t(c) * 8 * (10 + 4ull * rpt) > budget) break;
      chunk = c;
    }
    if (chunk == 0) fast = false;
  }
  if (fast) {
    emit_dgemm_fast(e, m, n, k, chunk, rpt, L);
  } else {
    const uint64_t apan = uint64_t(rpt) * tile * 8;
    if (apan * tpp > 24 * 1024)
      throw std::invalid_argument("dgemm: tile too large for local storage");
    if (uint64_t(n) * 8 > 32767) throw std::invalid_argument("dgemm: n too large for this path");
    emit_dgemm_simple(e, m, n, k, tile, rpt, tpp, L);
  }

  KernelCase kc;
  kc.name = "dgemm-" + S(m) + "x" + S(n) + "x" + S(k);
  kc.source = e.out.str();
  kc.program = parse_assembly(kc.source);
  kc.threads_per_pe = tpp;

  // inputs and the triple-loop fma oracle (i, j, k ascending)
  ValueStream vs(seed);
  std::vector<double> A(uint64_t(m) * k), B(uint64_t(k) * n), C(uint64_t(m) * n, 0.0);
  for (double& d : A) d = vs.next();
  for (double& d : B) d = vs.next();
  for (uint32_t i = 0; i < m; i++)
    for (uint32_t j = 0; j < n; j++) {
      double acc = 0.0;
      for (uint32_t kk = 0; kk < k; kk++)
        acc = std::fma(A[uint64_t(i) * k + kk], B[uint64_t(kk) * n + j], acc);
      C[uint64_t(i) * n + j] = acc;
    }

  KernelCase::Region ra{L.a, {}}, rb{L.b, {}}, rc{L.c, {}};
  for (double d : A) push_f64(ra.bytes, d);
  for (double d : B) push_f64(rb.bytes, d);
  for (double d : C) push_f64(rc.bytes, d);
  kc.inputs = {std::move(ra), std::move(rb)};
  kc.expected = {std::move(rc)};
  kc.flops_dp_expected = 2ull * m * n * k;
  return kc;
}

// ---------------------------------------------------------------------------
// litmus
// ---------------------------------------------------------------------------

std::pair<KernelCase, KernelCase> litmus_noncoherent(uint64_t data_value) {
  const uint64_t X = 0x200000, Y = 0x200100, R = 0x200400;

  auto common_head = [&](Emit& e) {
    e.raw(".text");
    e.i("tid r3");
    e.i("addi r9, r0, 1");
    e.i("beq r3, r0, producer");
    e.i("beq r3, r9, consumer");
    e.i("halt");  // uninvolved threads
  };

  KernelCase noflush;
  {
    Emit e;
    e.raw("# litmus MP-no-flush: the producer never flushes, the consumer spins on");
    e.raw("# its own cached copy of the flag and can never observe the store");
    common_head(e);
    e.label("producer");
    e.const32(4, X);
    e.const32(5, Y);
    e.const32(6, data_value);
    e.i("sd r6, 0(r4)");
    e.i("sd r9, 0(r5)");
    e.i("halt");
    e.label("consumer");
    e.const32(4, X);
    e.const32(5, Y);
    e.const32(7, R);
    e.label("spin");
    e.i("ld r8, 0(r5)");
    e.i("beq r8, r0, spin");
    e.i("ld r10, 0(r4)");
    e.i("sd r10, 0(r7)");
    e.i("halt");
    noflush.name = "litmus-noflush";
    noflush.source = e.out.str();
    noflush.program = parse_assembly(noflush.source);
    noflush.threads_per_pe = 1;
    noflush.expect_watchdog = true;
    noflush.watchdog_override = 300000;
    // pinned outcome: the result line is never written
    KernelCase::Region rr{R, std::vector<uint8_t>(8, 0)};
    noflush.expected = {std::move(rr)};
  }

  KernelCase flushed;
  {
    Emit e;
    e.raw("# litmus MP-flushed: producer flushes data then flag; consumer invalidates");
    e.raw("# its own copies before each read and always observes the new data");
    common_head(e);
    e.label("producer");
    e.const32(4, X);
    e.const32(5, Y);
    e.const32(6, data_value);
    e.i("sd r6, 0(r4)");
    e.i("flush 0(r4)");
    e.i("sd r9, 0(r5)");
    e.i("flush 0(r5)");
    e.i("halt");
    e.label("consumer");
    e.const32(4, X);
    e.const32(5, Y);
    e.const32(7, R);
    e.label("spin");
    e.i("flush 0(r5)");  // drop the (clean) local copy, then refetch
    e.i("ld r8, 0(r5)");
    e.i("beq r8, r0, spin");
    e.i("flush 0(r4)");
    e.i("ld r10, 0(r4)");
    e.i("sd r10, 0(r7)");
    e.i("flush 0(r7)");
    e.i("halt");
    flushed.name = "litmus-flushed";
    flushed.source = e.out.str();
    flushed.program = parse_assembly(flushed.source);
    flushed.threads_per_pe = 1;
    KernelCase::Region rr{R, {}};
    for (int i = 0; i < 8; i++) rr.bytes.push_back(uint8_t(data_value >> (8 * i)));
    flushed.expected = {std::move(rr)};
  }

  return {std::move(noflush), std::move(flushed)};
}

// ---------------------------------------------------------------------------
// harness
// ---------------------------------------------------------------------------

CaseResult run_case(const ChipConfig& cfg, const KernelCase& kc, std::ostream* trace) {
  CaseResult res;
  ChipConfig c = cfg;
  if (kc.watchdog_override) c.watchdog_cycles = kc.watchdog_override;

  Chip chip(c);
  if (trace) chip.set_trace(trace);
  LaunchDescriptor d;
  d.program = &kc.program;
  d.threads_per_pe = kc.threads_per_pe;
  chip.launch(d);
  for (const KernelCase::Region& r : kc.inputs) chip.write_memory(r.addr, r.bytes);

  try {
    res.stats = chip.run();
  } catch (const SimError& err) {
    if (err.kind == SimError::Kind::Watchdog && kc.expect_watchdog) {
      res.watchdog_hit = true;
    } else {
      res.message = err.what();
      return res;
    }
  }
  if (kc.expect_watchdog && !res.watchdog_hit) {
    res.message = "expected a watchdog outcome but the run completed";
    return res;
  }

  chip.drain_caches();
  for (const KernelCase::Region& r : kc.expected) {
    const std::vector<uint8_t> got = chip.read_memory(r.addr, r.bytes.size());
    for (size_t i = 0; i < r.bytes.size(); i++) {
      if (got[i] != r.bytes[i]) {
        std::ostringstream os;
        os << "output mismatch at address 0x" << std::hex << (r.addr + i) << ": expected 0x"
           << int(r.bytes[i]) << ", got 0x" << int(got[i]);
        res.message = os.str();
        return res;
      }
    }
  }
  if (kc.flops_dp_expected && !res.watchdog_hit) {
    if (res.stats.total_flops[0] != kc.flops_dp_expected) {
      std::ostringstream os;
      os << "flop count mismatch: expected " << kc.flops_dp_expected << ", got "
         << res.stats.total_flops[0];
      res.message = os.str();
      return res;
    }
  }
  res.passed = true;
  return res;
}

std::string expected_digest(const KernelCase& kc) {
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  auto mix = [&](const uint8_t* p, size_t n) {
    for (size_t i = 0; i < n; i++) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  for (const KernelCase::Region& r : kc.expected) {
    uint8_t addr[8];
    for (int i = 0; i < 8; i++) addr[i] = uint8_t(r.addr >> (8 * i));
    mix(addr, 8);
    mix(r.bytes.data(), r.bytes.size());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<KernelCase> default_suite(const ChipConfig& cfg) {
  const uint32_t pes = cfg.pe_count();
  std::vector<KernelCase> cases;
  {
    KernelCase kc = gen_vecadd(1024, 0, false, pes, true);
    kc.name = "vecadd-ones";
    cases.push_back(std::move(kc));
  }
  cases.push_back(gen_vecadd(4096, 7, false, pes));
  cases.push_back(gen_vecadd(4096, 7, true, pes));
  cases.push_back(gen_dgemm(32, 32, 32, 16, 42, pes));
  cases.push_back(gen_dgemm(64, 64, 64, 16, 1, pes));
  cases.push_back(gen_dgemm(160, 160, 160, 20, 3, pes));
  auto [noflush, flushed] = litmus_noncoherent();
  cases.push_back(std::move(flushed));
  cases.push_back(std::move(noflush));
  return cases;
}

std::string manifest_json(const std::vector<KernelCase>& cases,
                          const std::vector<std::string>& params) {
  nlohmann::json j = nlohmann::json::array();
  for (size_t i = 0; i < cases.size(); i++) {
    nlohmann::json e;
    e["name"] = cases[i].name;
    e["params"] = nlohmann::json::parse(i < params.size() ? params[i] : "{}");
    e["digest"] = expected_digest(cases[i]);
    e["digest_algorithm"] = "fnv1a64";
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::vector<ManifestEntry> manifest_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<ManifestEntry> out;
  for (const nlohmann::json& e : j) {
    ManifestEntry m;
    m.name = e.at("name");
    m.params_json = e.at("params").dump();
    m.digest = e.at("digest");
    if (e.contains("seed")) m.seed = e.at("seed");
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace sc3sim
