#include "sc3sim/chip.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "sc3sim/semantics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sc3sim {

using detail::City;
using detail::CityMsg;
using detail::L1Waiter;
using detail::LlcMsg;
using detail::LlcSlice;
using detail::OutMsg;
using detail::Pe;

const char* status_name(ThreadStatus s) {
  switch (s) {
    case ThreadStatus::Ready: return "ready";
    case ThreadStatus::StalledOnMemory: return "stalled-on-memory";
    case ThreadStatus::StalledOnSfu: return "stalled-on-sfu";
    case ThreadStatus::AtBarrier: return "at-barrier";
    case ThreadStatus::Halted: return "halted";
  }
  return "?";
}

namespace {

uint64_t load_le(const uint8_t* p, int n) {
  uint64_t v = 0;
  for (int i = 0; i < n; i++) v |= uint64_t(p[i]) << (8 * i);
  return v;
}

void store_le(uint8_t* p, uint64_t v, int n) {
  for (int i = 0; i < n; i++) p[i] = uint8_t(v >> (8 * i));
}

constexpr uint16_t kNoOrigin = 0xffff;

}  // namespace

Chip::Chip(const ChipConfig& cfg)
    : cfg_(cfg),
      line_(cfg.l1d.line_size),
      hbm2_(cfg.hbm2, cfg.frequency_hz),
      ddr4_(cfg.ddr4, cfg.frequency_hz) {
  cfg_.validate();
  ram_.assign(cfg_.memory_size, 0);

  const uint32_t npes = cfg_.pe_count();
  pes_.resize(npes);
  for (uint32_t i = 0; i < npes; i++) {
    Pe& pe = pes_[i];
    pe.index = i;
    pe.city = i / cfg_.pes_per_city();
    pe.local.assign(cfg_.local_storage_bytes, 0);
    pe.l1d = std::make_unique<Cache>(cfg_.l1d);
    pe.l1i = std::make_unique<Cache>(cfg_.l1i);
  }

  cities_.resize(cfg_.city_count());
  for (uint32_t c = 0; c < cities_.size(); c++) {
    cities_[c].index = c;
    cities_[c].l2d = std::make_unique<Cache>(cfg_.l2d);
    cities_[c].l2i = std::make_unique<Cache>(cfg_.l2i);
    cities_[c].sfu_queues.resize(cfg_.pes_per_city());
  }

  CacheConfig slice_cfg = cfg_.llc;
  slice_cfg.capacity = cfg_.llc.capacity / cfg_.prefectures;
  slices_.resize(cfg_.prefectures);
  for (uint32_t s = 0; s < slices_.size(); s++) {
    slices_[s].index = s;
    slices_[s].cache = std::make_unique<Cache>(slice_cfg);
  }
}

uint32_t Chip::slice_of(uint64_t line) const { return (line / line_) % cfg_.prefectures; }

ChannelSet& Chip::channel_for(uint64_t addr) {
  if (cfg_.ddr4_window && ddr4_.enabled()) {
    auto [base, size] = *cfg_.ddr4_window;
    if (addr >= base && addr < base + size) return ddr4_;
  }
  return hbm2_.enabled() ? hbm2_ : ddr4_;
}

void Chip::write_memory(uint64_t addr, const std::vector<uint8_t>& bytes) {
  if (addr + bytes.size() > ram_.size()) throw SimError(SimError::Kind::Launch, "write_memory out of range");
  std::memcpy(ram_.data() + addr, bytes.data(), bytes.size());
}

std::vector<uint8_t> Chip::read_memory(uint64_t addr, size_t n) const {
  if (addr + n > ram_.size()) throw SimError(SimError::Kind::Launch, "read_memory out of range");
  return std::vector<uint8_t>(ram_.begin() + addr, ram_.begin() + addr + n);
}

void Chip::launch(const LaunchDescriptor& d) {
  if (launched_) throw SimError(SimError::Kind::Launch, "chip is not idle");
  if (!d.program || d.program->code.empty())
    throw SimError(SimError::Kind::Launch, "empty program");
  if (d.threads_per_pe < 1 || d.threads_per_pe > 8)
    throw SimError(SimError::Kind::Launch, "threads per PE must be in 1..8");

  const Program& p = *d.program;
  uint32_t entry = d.entry_index;
  if (!d.entry_label.empty()) {
    auto it = p.symbols.find(d.entry_label);
    if (it == p.symbols.end())
      throw SimError(SimError::Kind::Launch, "entry label not found: " + d.entry_label);
    entry = it->second;
  }
  if (entry >= p.code.size()) throw SimError(SimError::Kind::Launch, "entry out of range");

  const uint64_t text_end = cfg_.text_base + 4ull * p.words.size();
  if (text_end > ram_.size()) throw SimError(SimError::Kind::Launch, "text does not fit in memory");
  const uint64_t data_end = p.data_base + p.data.size();
  if (!p.data.empty()) {
    if (data_end > ram_.size()) throw SimError(SimError::Kind::Launch, "data does not fit in memory");
    if (p.data_base < text_end && cfg_.text_base < data_end)
      throw SimError(SimError::Kind::Launch, "data segment overlaps text");
  }

  uint64_t arg_base = d.arg_base;
  if (!d.arg_block.empty()) {
    if (arg_base == 0) {
      const uint64_t after = std::max<uint64_t>(text_end, p.data.empty() ? 0 : data_end);
      arg_base = (after + line_ - 1) / line_ * line_;
    }
    const uint64_t arg_end = arg_base + d.arg_block.size();
    if (arg_end > ram_.size()) throw SimError(SimError::Kind::Launch, "argument block out of range");
    const bool overlaps_text = arg_base < text_end && cfg_.text_base < arg_end;
    const bool overlaps_data = !p.data.empty() && arg_base < data_end && p.data_base < arg_end;
    if (overlaps_text || overlaps_data)
      throw SimError(SimError::Kind::Launch, "argument block overlaps program image");
  }

  // materialize the image
  for (size_t i = 0; i < p.words.size(); i++)
    store_le(ram_.data() + cfg_.text_base + 4 * i, p.words[i], 4);
  if (!p.data.empty()) std::memcpy(ram_.data() + p.data_base, p.data.data(), p.data.size());
  if (!d.arg_block.empty())
    std::memcpy(ram_.data() + arg_base, d.arg_block.data(), d.arg_block.size());

  program_ = &p;
  threads_per_pe_ = d.threads_per_pe;
  cycle_ = 0;
  live_ = 0;
  barrier_releases_ = 0;
  chip_barrier_waiters_.clear();

  for (Pe& pe : pes_) {
    pe.active_group = 0;
    pe.pending_switch = false;
    pe.cursor = 0;
    pe.wakes.clear();
    pe.outbox.clear();
    pe.mshr_d.clear();
    pe.mshr_i.clear();
    pe.stats = PerPeStats{};
    pe.issued_now = 0;
    pe.newly_halted = 0;
    pe.error.reset();
    for (uint32_t t = 0; t < 8; t++) {
      ThreadContext& th = pe.threads[t];
      th = ThreadContext{};
      if (t < d.threads_per_pe) {
        th.activated = true;
        th.status = ThreadStatus::Ready;
        th.pc = entry;
        th.gtid = pe.index * d.threads_per_pe + t;
        th.gpr[1] = th.gtid;
        th.gpr[2] = arg_base;
        live_++;
      }
    }
  }

  const uint32_t per_city = cfg_.pes_per_city() * threads_per_pe_;
  for (City& c : cities_) {
    c.barrier_participants = per_city;
    c.barrier_waiters.clear();
    c.sfu_cursor = 0;
    c.sfu_pipe.clear();
    for (auto& q : c.sfu_queues) q.clear();
  }
  chip_barrier_participants_ = live_;
  launched_ = true;
}

void Chip::trace_event(uint64_t cycle, int pe, int tid, const char* level, const char* kind,
                       uint64_t addr, const char* outcome, std::string* buf) {
  if (!trace_) return;
  char line[128];
  char origin[24];
  if (pe < 0)
    std::snprintf(origin, sizeof origin, "- -");
  else if (tid < 0)
    std::snprintf(origin, sizeof origin, "%d -", pe);
  else
    std::snprintf(origin, sizeof origin, "%d %d", pe, tid);
  std::snprintf(line, sizeof line, "%" PRIu64 " %s %s %s 0x%" PRIx64 " %s\n", cycle, origin,
                level, kind, addr, outcome);
  if (buf)
    buf->append(line);
  else
    (*trace_) << line;
}

// ---------------------------------------------------------------------------
// memory system phases
// ---------------------------------------------------------------------------

void Chip::channel_read(uint64_t line, uint16_t origin_pe, uint8_t origin_tid) {
  channel_for(line).enqueue(line, line_, cycle_, false, origin_pe, origin_tid);
}

void Chip::channel_write(uint64_t line, const uint8_t* bytes, uint16_t origin_pe,
                         uint8_t origin_tid) {
  // Data lands in RAM at enqueue; the channel queue carries the timing.
  std::memcpy(ram_.data() + line, bytes, line_);
  channel_for(line).enqueue(line, line_, cycle_, true, origin_pe, origin_tid);
}

void Chip::phase_channels() {
  for (ChannelSet* set : {&hbm2_, &ddr4_}) {
    if (!set->enabled()) continue;
    const char* level = set == &hbm2_ ? "hbm2" : "ddr4";
    for (const ChannelSet::Pending& p : set->complete_due(cycle_)) {
      if (p.write) {
        trace_event(cycle_, p.origin_pe == kNoOrigin ? -1 : p.origin_pe, p.origin_tid, level,
                    "writeback", p.addr, "complete", nullptr);
      } else {
        trace_event(cycle_, p.origin_pe == kNoOrigin ? -1 : p.origin_pe, p.origin_tid, level,
                    "read", p.addr, "complete", nullptr);
        deliver_to_llc(slice_of(p.addr), p.addr, ram_.data() + p.addr);
      }
    }
  }
}

void Chip::deliver_to_llc(uint32_t slice, uint64_t line, const uint8_t* bytes) {
  LlcSlice& s = slices_[slice];
  if (auto ev = s.cache->allocate(line, bytes, false); ev && ev->dirty)
    channel_write(ev->line_addr, ev->data.data(), kNoOrigin, 0);
  auto node = s.mshr.extract(line);
  if (!node.empty()) {
    for (const detail::LlcWaiter& w : node.mapped())
      deliver_to_city(w.city, line, s.cache->bytes(line), w.icache);
  }
}

void Chip::deliver_to_city(uint32_t city, uint64_t line, const uint8_t* bytes, bool icache) {
  City& c = cities_[city];
  Cache& cache = icache ? *c.l2i : *c.l2d;
  if (auto ev = cache.allocate(line, bytes, false); ev && ev->dirty) {
    LlcSlice& s = slices_[slice_of(ev->line_addr)];
    detail::TimedLlcMsg tm;
    tm.ready = cycle_ + cfg_.llc.hit_latency;
    tm.seq = s.seq++;
    tm.msg.kind = LlcMsg::Kind::Writeback;
    tm.msg.line = ev->line_addr;
    tm.msg.from_city = static_cast<uint16_t>(city);
    tm.msg.data = std::move(ev->data);
    s.inbox.push(std::move(tm));
  }
  auto& mshr = icache ? c.mshr_i : c.mshr_d;
  auto node = mshr.extract(line);
  if (!node.empty()) {
    for (uint16_t pe : node.mapped()) {
      if (icache)
        deliver_to_pe_l1i(pe, line, cache.bytes(line));
      else
        deliver_to_pe_l1d(pe, line, cache.bytes(line));
    }
  }
  (icache ? c.origin_i : c.origin_d).erase(line);
}

void Chip::wake_ready(uint32_t pe, uint8_t tid) {
  ThreadContext& th = pes_[pe].threads[tid];
  th.status = ThreadStatus::Ready;
}

void Chip::ack(uint16_t pe, uint8_t tid) {
  ThreadContext& th = pes_[pe].threads[tid];
  if (th.pending_acks > 0 && --th.pending_acks == 0) th.status = ThreadStatus::Ready;
}

void Chip::deliver_to_pe_l1d(uint32_t pe_idx, uint64_t line, const uint8_t* bytes) {
  Pe& pe = pes_[pe_idx];
  if (auto ev = pe.l1d->allocate(line, bytes, false); ev && ev->dirty) {
    City& c = cities_[pe.city];
    detail::TimedCityMsg tm;
    tm.ready = cycle_ + cfg_.l2d.hit_latency;
    tm.seq = c.seq++;
    tm.msg.kind = CityMsg::Kind::Writeback;
    tm.msg.line = ev->line_addr;
    tm.msg.from_pe = static_cast<uint16_t>(pe_idx);
    tm.msg.data = std::move(ev->data);
    c.inbox.push(std::move(tm));
    trace_event(cycle_, pe_idx, -1, "l1d", "writeback", ev->line_addr, "evict", nullptr);
  }
  auto node = pe.mshr_d.extract(line);
  if (node.empty()) return;
  for (const L1Waiter& w : node.mapped().waiters) {
    ThreadContext& th = pe.threads[w.tid];
    if (w.kind == L1Waiter::Kind::Store) {
      uint8_t tmp[8];
      store_le(tmp, w.store_value, w.size);
      pe.l1d->store_into(line, static_cast<uint32_t>(w.addr - line), tmp, w.size);
    } else if (w.kind == L1Waiter::Kind::Load) {
      const uint8_t* src = pe.l1d->bytes(line) + (w.addr - line);
      uint64_t v = load_le(src, w.size);
      if (!w.fp && w.size == 4) v = static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(v)));
      if (w.fp) {
        th.fpr[w.reg] = v;
        th.fpr_ready[w.reg] = cycle_;
      } else if (w.reg != 0) {
        th.gpr[w.reg] = v;
        th.gpr_ready[w.reg] = cycle_;
      }
    }
    th.status = ThreadStatus::Ready;
  }
}

void Chip::deliver_to_pe_l1i(uint32_t pe_idx, uint64_t line, const uint8_t* bytes) {
  Pe& pe = pes_[pe_idx];
  pe.l1i->allocate(line, bytes, false);  // instruction lines are never dirty
  auto node = pe.mshr_i.extract(line);
  if (node.empty()) return;
  for (const L1Waiter& w : node.mapped().waiters) pe.threads[w.tid].status = ThreadStatus::Ready;
}

void Chip::process_city_msg(City& c, CityMsg&& m) {
  switch (m.kind) {
    case CityMsg::Kind::FillD:
    case CityMsg::Kind::FillI: {
      const bool icache = m.kind == CityMsg::Kind::FillI;
      Cache& cache = icache ? *c.l2i : *c.l2d;
      const char* level = icache ? "l2i" : "l2d";
      const char* kind = icache ? "fetch" : "read";
      if (cache.access(m.line, false)) {
        trace_event(cycle_, m.from_pe, m.tid, level, kind, m.line, "hit", nullptr);
        if (icache)
          deliver_to_pe_l1i(m.from_pe, m.line, cache.bytes(m.line));
        else
          deliver_to_pe_l1d(m.from_pe, m.line, cache.bytes(m.line));
        return;
      }
      trace_event(cycle_, m.from_pe, m.tid, level, kind, m.line, "miss", nullptr);
      auto& mshr = icache ? c.mshr_i : c.mshr_d;
      auto it = mshr.find(m.line);
      if (it != mshr.end()) {
        it->second.push_back(m.from_pe);
        return;
      }
      mshr[m.line].push_back(m.from_pe);
      (icache ? c.origin_i : c.origin_d)[m.line] = {m.from_pe, m.tid};
      LlcSlice& s = slices_[slice_of(m.line)];
      detail::TimedLlcMsg tm;
      tm.ready = cycle_ + cfg_.llc.hit_latency;
      tm.seq = s.seq++;
      tm.msg.kind = LlcMsg::Kind::Fill;
      tm.msg.line = m.line;
      tm.msg.from_city = static_cast<uint16_t>(c.index);
      tm.msg.icache = icache;
      tm.msg.origin_pe = m.from_pe;
      tm.msg.origin_tid = m.tid;
      s.inbox.push(std::move(tm));
      return;
    }
    case CityMsg::Kind::Writeback: {
      c.l2d->add_writeback_bytes_in(line_);
      trace_event(cycle_, m.from_pe, m.tid, "l2d", "writeback", m.line, "apply", nullptr);
      if (!c.l2d->write_back_into(m.line, m.data.data())) {
        if (auto ev = c.l2d->allocate(m.line, m.data.data(), true); ev && ev->dirty) {
          LlcSlice& s = slices_[slice_of(ev->line_addr)];
          detail::TimedLlcMsg tm;
          tm.ready = cycle_ + cfg_.llc.hit_latency;
          tm.seq = s.seq++;
          tm.msg.kind = LlcMsg::Kind::Writeback;
          tm.msg.line = ev->line_addr;
          tm.msg.from_city = static_cast<uint16_t>(c.index);
          tm.msg.data = std::move(ev->data);
          s.inbox.push(std::move(tm));
        }
      }
      if (m.has_waiter) ack(m.waiter_pe, m.waiter_tid);
      return;
    }
    case CityMsg::Kind::L2Flush: {
      Cache::FlushResult fr = c.l2d->flush_line(m.line);
      trace_event(cycle_, m.from_pe, m.tid, "l2d", "flush", m.line,
                  fr.was_dirty ? "dirty" : (fr.present ? "clean" : "absent"), nullptr);
      if (fr.was_dirty) {
        LlcSlice& s = slices_[slice_of(m.line)];
        detail::TimedLlcMsg tm;
        tm.ready = cycle_ + cfg_.llc.hit_latency;
        tm.seq = s.seq++;
        tm.msg.kind = LlcMsg::Kind::Writeback;
        tm.msg.line = m.line;
        tm.msg.from_city = static_cast<uint16_t>(c.index);
        tm.msg.data = std::move(fr.data);
        tm.msg.has_waiter = m.has_waiter;
        tm.msg.waiter_pe = m.waiter_pe;
        tm.msg.waiter_tid = m.waiter_tid;
        s.inbox.push(std::move(tm));
      } else if (m.has_waiter) {
        ack(m.waiter_pe, m.waiter_tid);
      }
      return;
    }
  }
}

void Chip::process_llc_msg(LlcSlice& s, LlcMsg&& m) {
  switch (m.kind) {
    case LlcMsg::Kind::Fill: {
      if (s.cache->access(m.line, false)) {
        trace_event(cycle_, m.origin_pe, m.origin_tid, "llc", m.icache ? "fetch" : "read", m.line,
                    "hit", nullptr);
        deliver_to_city(m.from_city, m.line, s.cache->bytes(m.line), m.icache);
        return;
      }
      trace_event(cycle_, m.origin_pe, m.origin_tid, "llc", m.icache ? "fetch" : "read", m.line,
                  "miss", nullptr);
      auto it = s.mshr.find(m.line);
      if (it != s.mshr.end()) {
        it->second.push_back({m.from_city, m.icache, m.origin_pe, m.origin_tid});
        return;
      }
      s.mshr[m.line].push_back({m.from_city, m.icache, m.origin_pe, m.origin_tid});
      channel_read(m.line, m.origin_pe, m.origin_tid);
      return;
    }
    case LlcMsg::Kind::Writeback: {
      s.cache->add_writeback_bytes_in(line_);
      trace_event(cycle_, -1, 0, "llc", "writeback", m.line, "apply", nullptr);
      if (!s.cache->write_back_into(m.line, m.data.data())) {
        if (auto ev = s.cache->allocate(m.line, m.data.data(), true); ev && ev->dirty)
          channel_write(ev->line_addr, ev->data.data(), kNoOrigin, 0);
      }
      if (m.has_waiter) ack(m.waiter_pe, m.waiter_tid);
      return;
    }
  }
}

void Chip::phase_caches() {
  for (LlcSlice& s : slices_) {
    while (!s.inbox.empty() && s.inbox.top().ready <= cycle_) {
      LlcMsg m = std::move(const_cast<detail::TimedLlcMsg&>(s.inbox.top()).msg);
      s.inbox.pop();
      process_llc_msg(s, std::move(m));
    }
  }
  for (City& c : cities_) {
    while (!c.inbox.empty() && c.inbox.top().ready <= cycle_) {
      CityMsg m = std::move(const_cast<detail::TimedCityMsg&>(c.inbox.top()).msg);
      c.inbox.pop();
      process_city_msg(c, std::move(m));
    }
  }
}

void Chip::phase_sfu() {
  for (City& c : cities_) {
    while (!c.sfu_pipe.empty() && c.sfu_pipe.front().done <= cycle_) {
      const detail::SfuRequest r = c.sfu_pipe.front().req;
      c.sfu_pipe.pop_front();
      ThreadContext& th = pes_[r.pe].threads[r.tid];
      th.fpr[r.rd] = r.result;
      th.fpr_ready[r.rd] = cycle_;
      th.status = ThreadStatus::Ready;
    }
    const uint32_t n = static_cast<uint32_t>(c.sfu_queues.size());
    for (uint32_t k = 0; k < n; k++) {
      const uint32_t i = (c.sfu_cursor + k) % n;
      if (!c.sfu_queues[i].empty()) {
        detail::SfuRequest r = c.sfu_queues[i].front();
        c.sfu_queues[i].pop_front();
        c.sfu_pipe.push_back({cycle_ + cfg_.sfu_latency, r});
        c.sfu_cursor = (i + 1) % n;
        break;
      }
    }
  }
}

void Chip::phase_barriers() {
  for (City& c : cities_) {
    if (c.barrier_participants > 0 && c.barrier_waiters.size() == c.barrier_participants) {
      for (auto [pe, tid] : c.barrier_waiters) wake_ready(pe, tid);
      c.barrier_waiters.clear();
      barrier_releases_++;
    }
  }
  if (chip_barrier_participants_ > 0 &&
      chip_barrier_waiters_.size() == chip_barrier_participants_) {
    for (auto [pe, tid] : chip_barrier_waiters_) wake_ready(pe, tid);
    chip_barrier_waiters_.clear();
    barrier_releases_++;
  }
}

// ---------------------------------------------------------------------------
// PE issue
// ---------------------------------------------------------------------------

bool Chip::regs_ready(const ThreadContext& th, const Instruction& ins) const {
  auto g = [&](uint8_t r) { return th.gpr_ready[r] <= cycle_; };
  auto f = [&](uint8_t r) { return th.fpr_ready[r] <= cycle_; };
  switch (ins.op) {
    case Op::Nop: case Op::Halt: case Op::Chg: case Op::Sync:
      return true;
    case Op::Add: case Op::Sub: case Op::And: case Op::Or: case Op::Xor:
    case Op::Shl: case Op::Shr: case Op::Slt:
      return g(ins.rs1) && g(ins.rs2) && g(ins.rd);
    case Op::Addi:
      return g(ins.rs1) && g(ins.rd);
    case Op::Lui: case Op::Tid:
      return g(ins.rd);
    case Op::Fadd: case Op::Fsub: case Op::Fmul: case Op::Fmin: case Op::Fmax: case Op::Fdiv:
      return f(ins.rs1) && f(ins.rs2) && f(ins.rd);
    case Op::Fma:
      return f(ins.rs1) && f(ins.rs2) && f(ins.rs3) && f(ins.rd);
    case Op::Fsqrt:
      return f(ins.rs1) && f(ins.rd);
    case Op::Ld: case Op::Lw: case Op::Lls:
      return g(ins.rs1) && g(ins.rd);
    case Op::FLd: case Op::FLw: case Op::FLls:
      return g(ins.rs1) && f(ins.rd);
    case Op::Sd: case Op::Sw: case Op::Sls:
      return g(ins.rs1) && g(ins.rd);
    case Op::FSd: case Op::FSw: case Op::FSls:
      return g(ins.rs1) && f(ins.rd);
    case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bltu:
      return g(ins.rs1) && g(ins.rs2);
    case Op::Jal:
      return g(ins.rd);
    case Op::Jalr:
      return g(ins.rs1) && g(ins.rd);
    case Op::Flush: case Op::L2flush:
      return g(ins.rs1);
    case Op::Flushr:
      return g(ins.rs1) && g(ins.rs2);
    default:
      return true;
  }
}

void Chip::issue(Pe& pe, ThreadContext& th, const Instruction& ins) {
  const InstrClass cls = instr_class(ins.op);
  pe.stats.by_class[static_cast<int>(cls)]++;
  if (is_fp(ins.op))
    pe.stats.flops[static_cast<int>(ins.prec)] += flops_for(ins.op, ins.prec);

  auto write_gpr = [&](uint8_t r, uint64_t v, uint64_t ready) {
    if (r != 0) {
      th.gpr[r] = v;
      th.gpr_ready[r] = ready;
    }
  };
  auto write_fpr = [&](uint8_t r, uint64_t v, uint64_t ready) {
    th.fpr[r] = v;
    th.fpr_ready[r] = ready;
  };
  auto arch_error = [&](const std::string& what) {
    if (!pe.error) {
      std::ostringstream os;
      os << what << " (pe " << pe.index << ", thread " << int(th.gtid) << ", pc " << th.pc << ")";
      pe.error = os.str();
    }
  };

  switch (ins.op) {
    case Op::Nop:
      th.pc++;
      return;
    case Op::Add: case Op::Sub: case Op::And: case Op::Or: case Op::Xor:
    case Op::Shl: case Op::Shr: case Op::Slt:
      write_gpr(ins.rd, alu_eval(ins.op, th.gpr[ins.rs1], th.gpr[ins.rs2], 0),
                cycle_ + cfg_.alu_latency);
      th.pc++;
      return;
    case Op::Addi:
      write_gpr(ins.rd, alu_eval(ins.op, th.gpr[ins.rs1], 0, ins.imm), cycle_ + cfg_.alu_latency);
      th.pc++;
      return;
    case Op::Lui:
      write_gpr(ins.rd, alu_eval(ins.op, 0, 0, ins.imm), cycle_ + cfg_.alu_latency);
      th.pc++;
      return;
    case Op::Tid:
      write_gpr(ins.rd, th.gtid, cycle_ + cfg_.alu_latency);
      th.pc++;
      return;
    case Op::Fadd: case Op::Fsub: case Op::Fmul: case Op::Fma: case Op::Fmin: case Op::Fmax:
      write_fpr(ins.rd,
                fp_eval(ins.op, ins.prec, th.fpr[ins.rs1], th.fpr[ins.rs2], th.fpr[ins.rs3]),
                cycle_ + cfg_.fp_latency);
      th.pc++;
      return;
    case Op::Fdiv: case Op::Fsqrt: {
      const uint64_t result =
          fp_eval(ins.op, ins.prec, th.fpr[ins.rs1], th.fpr[ins.rs2], 0);
      OutMsg m;
      m.kind = OutMsg::Kind::Sfu;
      m.tid = static_cast<uint8_t>(&th - pe.threads.data());
      m.sfu_result = result;
      m.sfu_rd = ins.rd;
      pe.outbox.push_back(std::move(m));
      th.status = ThreadStatus::StalledOnSfu;
      pe.stats.sfu_ops++;
      th.pc++;
      return;
    }
    case Op::Ld: case Op::Lw: case Op::Sd: case Op::Sw:
    case Op::FLd: case Op::FLw: case Op::FSd: case Op::FSw: {
      const uint64_t addr = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
      const int size = access_size(ins.op);
      const uint8_t tid = static_cast<uint8_t>(&th - pe.threads.data());
      if (addr % size != 0) return arch_error("unaligned global access");
      if (addr > ram_.size() - size) return arch_error("global access out of memory range");
      const uint64_t line = pe.l1d->line_of(addr);
      const bool store = is_store(ins.op);
      const bool fp = fp_dest(ins.op) || ins.op == Op::FSd || ins.op == Op::FSw;
      const bool hit = pe.l1d->access(line, store);
      trace_event(cycle_, pe.index, tid, "l1d", store ? "write" : "read", addr,
                  hit ? "hit" : "miss", &pe.trace_buf);
      if (hit) {
        if (store) {
          uint8_t tmp[8];
          const uint64_t v = fp ? th.fpr[ins.rd] : th.gpr[ins.rd];
          store_le(tmp, v, size);
          pe.l1d->store_into(line, static_cast<uint32_t>(addr - line), tmp, size);
        } else {
          uint64_t v = load_le(pe.l1d->bytes(line) + (addr - line), size);
          if (!fp && size == 4)
            v = static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(v)));
          if (fp)
            write_fpr(ins.rd, v, cycle_ + cfg_.l1d.hit_latency);
          else
            write_gpr(ins.rd, v, cycle_ + cfg_.l1d.hit_latency);
        }
        th.status = ThreadStatus::StalledOnMemory;
        pe.wakes.push_back({cycle_ + cfg_.l1d.hit_latency, tid});
      } else {
        L1Waiter w;
        w.kind = store ? L1Waiter::Kind::Store : L1Waiter::Kind::Load;
        w.tid = tid;
        w.addr = addr;
        w.size = static_cast<uint8_t>(size);
        w.reg = ins.rd;
        w.fp = fp;
        if (store) w.store_value = fp ? th.fpr[ins.rd] : th.gpr[ins.rd];
        auto& entry = pe.mshr_d[line];
        entry.waiters.push_back(w);
        if (entry.waiters.size() == 1) {
          OutMsg m;
          m.kind = OutMsg::Kind::FillD;
          m.line = line;
          m.tid = tid;
          pe.outbox.push_back(std::move(m));
        }
        th.status = ThreadStatus::StalledOnMemory;
      }
      th.pc++;
      return;
    }
    case Op::Lls: case Op::Sls: case Op::FLls: case Op::FSls: {
      const uint64_t addr = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
      if (addr % 8 != 0) return arch_error("unaligned local-storage access");
      if (addr + 8 > pe.local.size()) return arch_error("local-storage address out of range");
      pe.stats.local_accesses++;
      const bool fp = ins.op == Op::FLls || ins.op == Op::FSls;
      if (is_store(ins.op)) {
        const uint64_t v = fp ? th.fpr[ins.rd] : th.gpr[ins.rd];
        store_le(pe.local.data() + addr, v, 8);
      } else {
        const uint64_t v = load_le(pe.local.data() + addr, 8);
        if (fp)
          write_fpr(ins.rd, v, cycle_ + cfg_.local_latency);
        else
          write_gpr(ins.rd, v, cycle_ + cfg_.local_latency);
      }
      th.pc++;
      return;
    }
    case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bltu: {
      const bool taken = branch_taken(ins.op, th.gpr[ins.rs1], th.gpr[ins.rs2]);
      th.pc = taken ? th.pc + static_cast<int64_t>(ins.imm) : th.pc + 1;
      return;
    }
    case Op::Jal:
      write_gpr(ins.rd, th.pc + 1, cycle_ + cfg_.alu_latency);
      th.pc += static_cast<int64_t>(ins.imm);
      return;
    case Op::Jalr: {
      const uint64_t target = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
      write_gpr(ins.rd, th.pc + 1, cycle_ + cfg_.alu_latency);
      th.pc = target;
      return;
    }
    case Op::Halt:
      th.status = ThreadStatus::Halted;
      pe.newly_halted++;
      return;
    case Op::Chg:
      pe.pending_switch = true;
      th.pc++;
      return;
    case Op::Flush: {
      const uint64_t addr = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
      const uint8_t tid = static_cast<uint8_t>(&th - pe.threads.data());
      th.pc++;
      th.status = ThreadStatus::StalledOnMemory;
      if (addr >= ram_.size()) {  // flush of an unmapped address is a no-op
        pe.wakes.push_back({cycle_ + cfg_.l1d.hit_latency, tid});
        return;
      }
      const uint64_t line = pe.l1d->line_of(addr);
      Cache::FlushResult fr = pe.l1d->flush_line(line);
      trace_event(cycle_, pe.index, tid, "l1d", "flush", line,
                  fr.was_dirty ? "dirty" : (fr.present ? "clean" : "absent"), &pe.trace_buf);
      if (fr.was_dirty) {
        OutMsg m;
        m.kind = OutMsg::Kind::Writeback;
        m.line = line;
        m.tid = tid;
        m.data = std::move(fr.data);
        m.has_waiter = true;
        pe.outbox.push_back(std::move(m));
        th.pending_acks = 1;
      } else {
        pe.wakes.push_back({cycle_ + cfg_.l1d.hit_latency, tid});
      }
      return;
    }
    case Op::Flushr: {
      const uint64_t base = th.gpr[ins.rs1];
      const uint64_t len = th.gpr[ins.rs2];
      const uint8_t tid = static_cast<uint8_t>(&th - pe.threads.data());
      th.pc++;
      th.status = ThreadStatus::StalledOnMemory;
      const uint64_t lo = std::min<uint64_t>(base, ram_.size());
      const uint64_t hi = lo + std::min<uint64_t>(len, ram_.size() - lo);
      uint32_t acks = 0;
      if (hi > lo) {
        const uint64_t first = pe.l1d->line_of(lo);
        const uint64_t last = pe.l1d->line_of(hi - 1);
        for (uint64_t line = first; line <= last; line += line_) {
          Cache::FlushResult fr = pe.l1d->flush_line(line);
          if (!fr.present) continue;
          trace_event(cycle_, pe.index, tid, "l1d", "flush", line,
                      fr.was_dirty ? "dirty" : "clean", &pe.trace_buf);
          if (fr.was_dirty) {
            OutMsg m;
            m.kind = OutMsg::Kind::Writeback;
            m.line = line;
            m.tid = tid;
            m.data = std::move(fr.data);
            m.has_waiter = true;
            pe.outbox.push_back(std::move(m));
            acks++;
          }
        }
      }
      th.pending_acks = acks;
      if (acks == 0) pe.wakes.push_back({cycle_ + cfg_.l1d.hit_latency, tid});
      return;
    }
    case Op::L2flush: {
      const uint64_t addr = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
      const uint8_t tid = static_cast<uint8_t>(&th - pe.threads.data());
      th.pc++;
      th.status = ThreadStatus::StalledOnMemory;
      if (addr >= ram_.size()) {
        pe.wakes.push_back({cycle_ + cfg_.l1d.hit_latency, tid});
        return;
      }
      OutMsg m;
      m.kind = OutMsg::Kind::L2Flush;
      m.line = pe.l1d->line_of(addr);
      m.tid = tid;
      m.has_waiter = true;
      pe.outbox.push_back(std::move(m));
      th.pending_acks = 1;
      return;
    }
    case Op::Sync: {
      OutMsg m;
      m.kind = OutMsg::Kind::Barrier;
      m.tid = static_cast<uint8_t>(&th - pe.threads.data());
      m.scope = ins.scope;
      pe.outbox.push_back(std::move(m));
      th.status = ThreadStatus::AtBarrier;
      th.barrier_scope = ins.scope;
      th.pc++;
      return;
    }
    default:
      return arch_error("illegal instruction");
  }
}

void Chip::step_pe(Pe& pe) {
  pe.issued_now = 0;

  // due wakeups
  if (!pe.wakes.empty()) {
    auto due = [&](const Pe::Wake& w) {
      if (w.cycle > cycle_) return false;
      pe.threads[w.tid].status = ThreadStatus::Ready;
      return true;
    };
    pe.wakes.erase(std::remove_if(pe.wakes.begin(), pe.wakes.end(), due), pe.wakes.end());
  }

  for (const ThreadContext& th : pe.threads)
    if (th.status == ThreadStatus::AtBarrier) pe.stats.barrier_wait_cycles++;

  const int base = pe.active_group * 4;
  uint32_t issued = 0;
  int last_slot = -1;
  for (int s = 0; s < 4 && issued < cfg_.issue_width; s++) {
    const int slot = (pe.cursor + s) % 4;
    ThreadContext& th = pe.threads[base + slot];
    if (!th.activated || th.status != ThreadStatus::Ready) continue;
    if (th.pc >= program_->code.size()) {
      if (!pe.error) {
        std::ostringstream os;
        os << "pc out of range (pe " << pe.index << ", thread " << th.gtid << ", pc " << th.pc
           << ")";
        pe.error = os.str();
      }
      continue;
    }
    const Instruction& ins = program_->code[th.pc];
    if (!regs_ready(th, ins)) continue;

    // instruction fetch through the L1I
    const uint64_t fetch_addr = cfg_.text_base + 4 * th.pc;
    const uint64_t fline = pe.l1i->line_of(fetch_addr);
    if (!pe.l1i->access(fline, false)) {
      trace_event(cycle_, pe.index, base + slot, "l1i", "fetch", fetch_addr, "miss",
                  &pe.trace_buf);
      auto& entry = pe.mshr_i[fline];
      L1Waiter w;
      w.kind = L1Waiter::Kind::Fetch;
      w.tid = static_cast<uint8_t>(base + slot);
      entry.waiters.push_back(w);
      if (entry.waiters.size() == 1) {
        OutMsg m;
        m.kind = OutMsg::Kind::FillI;
        m.line = fline;
        m.tid = static_cast<uint8_t>(base + slot);
        pe.outbox.push_back(std::move(m));
      }
      th.status = ThreadStatus::StalledOnMemory;
      continue;
    }

    issue(pe, th, ins);
    issued++;
    last_slot = slot;
  }

  if (issued > 0) {
    pe.cursor = (last_slot + 1) % 4;
    pe.stats.issue_cycles++;
  } else {
    pe.stats.full_stall_cycles++;
  }
  pe.stats.issued += issued;
  pe.issued_now = issued;
}

void Chip::commit_pe(Pe& pe) {
  issued_this_cycle_ += pe.issued_now;
  live_ -= pe.newly_halted;
  pe.newly_halted = 0;
  if (pe.error) {
    const std::string msg = *pe.error;
    pe.error.reset();
    throw SimError(SimError::Kind::Architectural, msg);
  }
  City& c = cities_[pe.city];
  for (OutMsg& m : pe.outbox) {
    switch (m.kind) {
      case OutMsg::Kind::FillD: {
        detail::TimedCityMsg tm;
        tm.ready = cycle_ + cfg_.l1d.hit_latency + cfg_.l2d.hit_latency;
        tm.seq = c.seq++;
        tm.msg.kind = CityMsg::Kind::FillD;
        tm.msg.line = m.line;
        tm.msg.from_pe = static_cast<uint16_t>(pe.index);
        tm.msg.tid = m.tid;
        c.inbox.push(std::move(tm));
        break;
      }
      case OutMsg::Kind::FillI: {
        detail::TimedCityMsg tm;
        tm.ready = cycle_ + cfg_.l1i.hit_latency + cfg_.l2i.hit_latency;
        tm.seq = c.seq++;
        tm.msg.kind = CityMsg::Kind::FillI;
        tm.msg.line = m.line;
        tm.msg.from_pe = static_cast<uint16_t>(pe.index);
        tm.msg.tid = m.tid;
        c.inbox.push(std::move(tm));
        break;
      }
      case OutMsg::Kind::Writeback: {
        detail::TimedCityMsg tm;
        tm.ready = cycle_ + cfg_.l1d.hit_latency + cfg_.l2d.hit_latency;
        tm.seq = c.seq++;
        tm.msg.kind = CityMsg::Kind::Writeback;
        tm.msg.line = m.line;
        tm.msg.from_pe = static_cast<uint16_t>(pe.index);
        tm.msg.tid = m.tid;
        tm.msg.data = std::move(m.data);
        tm.msg.has_waiter = m.has_waiter;
        tm.msg.waiter_pe = static_cast<uint16_t>(pe.index);
        tm.msg.waiter_tid = m.tid;
        c.inbox.push(std::move(tm));
        break;
      }
      case OutMsg::Kind::L2Flush: {
        detail::TimedCityMsg tm;
        tm.ready = cycle_ + cfg_.l1d.hit_latency + cfg_.l2d.hit_latency;
        tm.seq = c.seq++;
        tm.msg.kind = CityMsg::Kind::L2Flush;
        tm.msg.line = m.line;
        tm.msg.from_pe = static_cast<uint16_t>(pe.index);
        tm.msg.tid = m.tid;
        tm.msg.has_waiter = m.has_waiter;
        tm.msg.waiter_pe = static_cast<uint16_t>(pe.index);
        tm.msg.waiter_tid = m.tid;
        c.inbox.push(std::move(tm));
        break;
      }
      case OutMsg::Kind::Sfu: {
        const uint32_t local = pe.index % cfg_.pes_per_city();
        c.sfu_queues[local].push_back(
            {static_cast<uint16_t>(pe.index), m.tid, m.sfu_rd, m.sfu_result});
        break;
      }
      case OutMsg::Kind::Barrier: {
        if (m.scope == SyncScope::City)
          c.barrier_waiters.push_back({static_cast<uint16_t>(pe.index), m.tid});
        else
          chip_barrier_waiters_.push_back({static_cast<uint16_t>(pe.index), m.tid});
        break;
      }
    }
  }
  pe.outbox.clear();
  if (trace_ && !pe.trace_buf.empty()) {
    (*trace_) << pe.trace_buf;
    pe.trace_buf.clear();
  }
}

void Chip::phase_pes() {
  const int n = static_cast<int>(pes_.size());
#ifdef _OPENMP
  if (workers_ > 1) {
    omp_set_num_threads(workers_);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; i++) step_pe(pes_[i]);
    for (int i = 0; i < n; i++) commit_pe(pes_[i]);
    return;
  }
#endif
  for (int i = 0; i < n; i++) {
    step_pe(pes_[i]);
    commit_pe(pes_[i]);
  }
}

void Chip::boundary_switches() {
  for (Pe& pe : pes_) {
    bool sw = false;
    if (pe.pending_switch) {
      sw = true;
      pe.pending_switch = false;
    } else {
      const int base = pe.active_group * 4;
      bool active_live = false, other_live = false;
      for (int t = 0; t < 4; t++) {
        const ThreadContext& a = pe.threads[base + t];
        const ThreadContext& b = pe.threads[(base + 4 + t) % 8];
        if (a.activated && a.status != ThreadStatus::Halted) active_live = true;
        if (b.activated && b.status != ThreadStatus::Halted) other_live = true;
      }
      // A fully halted active group hands over to a live inactive group;
      // stalls never switch automatically.
      if (!active_live && other_live) sw = true;
    }
    if (sw) {
      pe.active_group ^= 1;
      pe.cursor = 0;
      pe.stats.group_switches++;
      switched_this_boundary_ = true;
    }
  }
}

bool Chip::quiescent_deadlock() const {
  if (live_ == 0) return false;
  if (!hbm2_.idle() || !ddr4_.idle()) return false;
  for (const LlcSlice& s : slices_)
    if (!s.inbox.empty()) return false;
  for (const City& c : cities_) {
    if (!c.inbox.empty() || !c.sfu_pipe.empty()) return false;
    for (const auto& q : c.sfu_queues)
      if (!q.empty()) return false;
    if (c.barrier_participants > 0 && c.barrier_waiters.size() == c.barrier_participants)
      return false;  // releases next cycle
  }
  if (chip_barrier_participants_ > 0 &&
      chip_barrier_waiters_.size() == chip_barrier_participants_)
    return false;
  for (const Pe& pe : pes_) {
    if (!pe.wakes.empty()) return false;
    for (const ThreadContext& th : pe.threads)
      if (th.activated && th.status == ThreadStatus::Ready) return false;
  }
  return true;
}

std::string Chip::snapshot() const {
  std::ostringstream os;
  uint64_t counts[5] = {0, 0, 0, 0, 0};
  for (const Pe& pe : pes_)
    for (const ThreadContext& th : pe.threads)
      if (th.activated) counts[static_cast<int>(th.status)]++;
  os << "thread status at cycle " << cycle_ << ":";
  const char* names[5] = {"ready", "stalled-on-memory", "stalled-on-sfu", "at-barrier", "halted"};
  for (int i = 0; i < 5; i++)
    if (counts[i]) os << " " << names[i] << "=" << counts[i];
  int listed = 0;
  for (const Pe& pe : pes_) {
    for (int t = 0; t < 8 && listed < 8; t++) {
      const ThreadContext& th = pe.threads[t];
      if (th.activated && th.status != ThreadStatus::Halted) {
        os << "; pe " << pe.index << " thread " << t << " " << status_name(th.status) << " pc "
           << th.pc;
        listed++;
      }
    }
  }
  return os.str();
}

RunStats Chip::run() {
  if (!launched_) throw SimError(SimError::Kind::Launch, "no kernel launched");

  while (live_ > 0) {
    if (cycle_ >= cfg_.watchdog_cycles)
      throw SimError(SimError::Kind::Watchdog,
                     "watchdog cycle limit reached; " + snapshot());
    issued_this_cycle_ = 0;
    switched_this_boundary_ = false;
    phase_channels();
    phase_caches();
    phase_sfu();
    phase_barriers();
    phase_pes();
    boundary_switches();
    if (live_ > 0 && issued_this_cycle_ == 0 && !switched_this_boundary_ &&
        quiescent_deadlock())
      throw SimError(SimError::Kind::Deadlock, "deadlock detected; " + snapshot());
    cycle_++;
  }

  stats_ = RunStats{};
  stats_.cycles = cycle_;
  stats_.frequency_hz = cfg_.frequency_hz;
  stats_.per_pe.reserve(pes_.size());
  for (Pe& pe : pes_) {
    pe.stats.l1d_hits = pe.l1d->hits();
    pe.stats.l1d_misses = pe.l1d->misses();
    pe.stats.l1d_writebacks = pe.l1d->writebacks();
    pe.stats.l1i_hits = pe.l1i->hits();
    pe.stats.l1i_misses = pe.l1i->misses();
    stats_.per_pe.push_back(pe.stats);
    stats_.l1d.hits += pe.l1d->hits();
    stats_.l1d.misses += pe.l1d->misses();
    stats_.l1d.writebacks_out += pe.l1d->writebacks();
    stats_.l1i.hits += pe.l1i->hits();
    stats_.l1i.misses += pe.l1i->misses();
  }
  for (City& c : cities_) {
    stats_.l2d.hits += c.l2d->hits();
    stats_.l2d.misses += c.l2d->misses();
    stats_.l2d.writebacks_out += c.l2d->writebacks();
    stats_.l2d.writeback_bytes_in += c.l2d->writeback_bytes_in();
    stats_.l2i.hits += c.l2i->hits();
    stats_.l2i.misses += c.l2i->misses();
  }
  for (LlcSlice& s : slices_) {
    stats_.llc.hits += s.cache->hits();
    stats_.llc.misses += s.cache->misses();
    stats_.llc.writebacks_out += s.cache->writebacks();
    stats_.llc.writeback_bytes_in += s.cache->writeback_bytes_in();
  }
  stats_.hbm2 = hbm2_.stats();
  stats_.ddr4 = ddr4_.stats();
  stats_.barrier_releases = barrier_releases_;
  stats_.finalize();
  launched_ = false;
  return stats_;
}

void Chip::drain_caches() {
  // lowest level first so the freshest (nearest-PE) copy lands last
  for (LlcSlice& s : slices_) {
    for (const Cache::Eviction& ev : s.cache->drain_dirty())
      std::memcpy(ram_.data() + ev.line_addr, ev.data.data(), line_);
    s.cache->invalidate_all();
  }
  for (City& c : cities_) {
    for (const Cache::Eviction& ev : c.l2d->drain_dirty())
      std::memcpy(ram_.data() + ev.line_addr, ev.data.data(), line_);
    c.l2d->invalidate_all();
    c.l2i->invalidate_all();
  }
  for (Pe& pe : pes_) {
    for (const Cache::Eviction& ev : pe.l1d->drain_dirty())
      std::memcpy(ram_.data() + ev.line_addr, ev.data.data(), line_);
    pe.l1d->invalidate_all();
    pe.l1i->invalidate_all();
  }
}

}  // namespace sc3sim
