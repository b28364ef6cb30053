#include "sc3sim/functional.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "sc3sim/semantics.hpp"

namespace sc3sim {

namespace {

uint64_t load_le(const uint8_t* p, int n) {
  uint64_t v = 0;
  for (int i = 0; i < n; i++) v |= uint64_t(p[i]) << (8 * i);
  return v;
}
void store_le(uint8_t* p, uint64_t v, int n) {
  for (int i = 0; i < n; i++) p[i] = uint8_t(v >> (8 * i));
}

struct FunctionalPe {
  int active_group = 0;
  bool pending_switch = false;
};

}  // namespace

FunctionalResult run_functional(const ChipConfig& cfg, const Program& p,
                                const LaunchDescriptor& d) {
  cfg.validate();
  if (p.code.empty()) throw SimError(SimError::Kind::Launch, "empty program");
  if (d.threads_per_pe < 1 || d.threads_per_pe > 8)
    throw SimError(SimError::Kind::Launch, "threads per PE must be in 1..8");

  uint32_t entry = d.entry_index;
  if (!d.entry_label.empty()) {
    auto it = p.symbols.find(d.entry_label);
    if (it == p.symbols.end())
      throw SimError(SimError::Kind::Launch, "entry label not found: " + d.entry_label);
    entry = it->second;
  }
  if (entry >= p.code.size()) throw SimError(SimError::Kind::Launch, "entry out of range");

  FunctionalResult r;
  r.memory.assign(cfg.memory_size, 0);

  const uint64_t text_end = cfg.text_base + 4ull * p.words.size();
  if (text_end > r.memory.size())
    throw SimError(SimError::Kind::Launch, "text does not fit in memory");
  for (size_t i = 0; i < p.words.size(); i++)
    store_le(r.memory.data() + cfg.text_base + 4 * i, p.words[i], 4);
  if (!p.data.empty()) {
    if (p.data_base + p.data.size() > r.memory.size())
      throw SimError(SimError::Kind::Launch, "data does not fit in memory");
    std::memcpy(r.memory.data() + p.data_base, p.data.data(), p.data.size());
  }
  uint64_t arg_base = d.arg_base;
  if (!d.arg_block.empty()) {
    if (arg_base == 0) {
      const uint64_t after =
          std::max<uint64_t>(text_end, p.data.empty() ? 0 : p.data_base + p.data.size());
      arg_base = (after + cfg.l1d.line_size - 1) / cfg.l1d.line_size * cfg.l1d.line_size;
    }
    if (arg_base + d.arg_block.size() > r.memory.size())
      throw SimError(SimError::Kind::Launch, "argument block out of range");
    std::memcpy(r.memory.data() + arg_base, d.arg_block.data(), d.arg_block.size());
  }

  const uint32_t npes = cfg.pe_count();
  const uint32_t pes_per_city = cfg.pes_per_city();
  r.threads.resize(8ull * npes);
  r.local.assign(npes, std::vector<uint8_t>(cfg.local_storage_bytes, 0));
  std::vector<FunctionalPe> pes(npes);

  uint64_t live = 0;
  for (uint32_t pe = 0; pe < npes; pe++) {
    for (uint32_t t = 0; t < d.threads_per_pe; t++) {
      FunctionalThread& th = r.threads[8 * pe + t];
      th.activated = true;
      th.status = ThreadStatus::Ready;
      th.pc = entry;
      th.gtid = pe * d.threads_per_pe + t;
      th.gpr[1] = th.gtid;
      th.gpr[2] = arg_base;
      live++;
    }
  }

  // barrier bookkeeping
  const uint32_t city_participants = pes_per_city * d.threads_per_pe;
  std::vector<uint32_t> city_arrived(cfg.city_count(), 0);
  uint64_t chip_arrived = 0;
  const uint64_t chip_participants = live;

  auto arch_error = [&](uint32_t pe, uint32_t slot, uint64_t pc, const std::string& what) {
    std::ostringstream os;
    os << what << " (pe " << pe << ", thread " << slot << ", pc " << pc << ")";
    throw SimError(SimError::Kind::Architectural, os.str());
  };

  while (live > 0) {
    if (r.rounds >= cfg.watchdog_cycles)
      throw SimError(SimError::Kind::Watchdog, "functional watchdog round limit reached");
    bool progressed = false;

    for (uint32_t pe = 0; pe < npes; pe++) {
      for (uint32_t slot = 0; slot < 8; slot++) {
        FunctionalThread& th = r.threads[8 * pe + slot];
        if (!th.activated || th.status != ThreadStatus::Ready) continue;
        if (static_cast<int>(slot / 4) != pes[pe].active_group) continue;

        if (th.pc >= p.code.size()) arch_error(pe, slot, th.pc, "pc out of range");
        const Instruction& ins = p.code[th.pc];
        r.executed++;
        r.by_class[static_cast<int>(instr_class(ins.op))]++;
        if (is_fp(ins.op)) r.flops[static_cast<int>(ins.prec)] += flops_for(ins.op, ins.prec);
        progressed = true;

        auto wg = [&](uint8_t reg, uint64_t v) {
          if (reg != 0) th.gpr[reg] = v;
        };

        switch (ins.op) {
          case Op::Nop:
            th.pc++;
            break;
          case Op::Add: case Op::Sub: case Op::And: case Op::Or: case Op::Xor:
          case Op::Shl: case Op::Shr: case Op::Slt:
            wg(ins.rd, alu_eval(ins.op, th.gpr[ins.rs1], th.gpr[ins.rs2], 0));
            th.pc++;
            break;
          case Op::Addi:
            wg(ins.rd, alu_eval(ins.op, th.gpr[ins.rs1], 0, ins.imm));
            th.pc++;
            break;
          case Op::Lui:
            wg(ins.rd, alu_eval(ins.op, 0, 0, ins.imm));
            th.pc++;
            break;
          case Op::Tid:
            wg(ins.rd, th.gtid);
            th.pc++;
            break;
          case Op::Fadd: case Op::Fsub: case Op::Fmul: case Op::Fma:
          case Op::Fmin: case Op::Fmax:
            th.fpr[ins.rd] =
                fp_eval(ins.op, ins.prec, th.fpr[ins.rs1], th.fpr[ins.rs2], th.fpr[ins.rs3]);
            th.pc++;
            break;
          case Op::Fdiv: case Op::Fsqrt:
            th.fpr[ins.rd] = fp_eval(ins.op, ins.prec, th.fpr[ins.rs1], th.fpr[ins.rs2], 0);
            th.pc++;
            break;
          case Op::Ld: case Op::Lw: case Op::Sd: case Op::Sw:
          case Op::FLd: case Op::FLw: case Op::FSd: case Op::FSw: {
            const uint64_t addr = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
            const int size = access_size(ins.op);
            if (addr % size) arch_error(pe, slot, th.pc, "unaligned global access");
            if (addr > r.memory.size() - size)
              arch_error(pe, slot, th.pc, "global access out of memory range");
            const bool fp = fp_dest(ins.op) || ins.op == Op::FSd || ins.op == Op::FSw;
            if (is_store(ins.op)) {
              store_le(r.memory.data() + addr, fp ? th.fpr[ins.rd] : th.gpr[ins.rd], size);
            } else {
              uint64_t v = load_le(r.memory.data() + addr, size);
              if (!fp && size == 4)
                v = static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(v)));
              if (fp)
                th.fpr[ins.rd] = v;
              else
                wg(ins.rd, v);
            }
            th.pc++;
            break;
          }
          case Op::Lls: case Op::Sls: case Op::FLls: case Op::FSls: {
            const uint64_t addr = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
            if (addr % 8) arch_error(pe, slot, th.pc, "unaligned local-storage access");
            if (addr + 8 > r.local[pe].size())
              arch_error(pe, slot, th.pc, "local-storage address out of range");
            const bool fp = ins.op == Op::FLls || ins.op == Op::FSls;
            if (is_store(ins.op)) {
              store_le(r.local[pe].data() + addr, fp ? th.fpr[ins.rd] : th.gpr[ins.rd], 8);
            } else {
              const uint64_t v = load_le(r.local[pe].data() + addr, 8);
              if (fp)
                th.fpr[ins.rd] = v;
              else
                wg(ins.rd, v);
            }
            th.pc++;
            break;
          }
          case Op::Beq: case Op::Bne: case Op::Blt: case Op::Bltu:
            th.pc = branch_taken(ins.op, th.gpr[ins.rs1], th.gpr[ins.rs2])
                        ? th.pc + static_cast<int64_t>(ins.imm)
                        : th.pc + 1;
            break;
          case Op::Jal:
            wg(ins.rd, th.pc + 1);
            th.pc += static_cast<int64_t>(ins.imm);
            break;
          case Op::Jalr: {
            const uint64_t target = th.gpr[ins.rs1] + static_cast<int64_t>(ins.imm);
            wg(ins.rd, th.pc + 1);
            th.pc = target;
            break;
          }
          case Op::Halt:
            th.status = ThreadStatus::Halted;
            live--;
            break;
          case Op::Chg:
            pes[pe].pending_switch = true;
            th.pc++;
            break;
          case Op::Flush: case Op::Flushr: case Op::L2flush:
            // no caches: flushes have no architectural effect
            th.pc++;
            break;
          case Op::Sync: {
            th.status = ThreadStatus::AtBarrier;
            th.barrier_scope = ins.scope;
            if (ins.scope == SyncScope::City)
              city_arrived[pe / pes_per_city]++;
            else
              chip_arrived++;
            th.pc++;
            break;
          }
          default:
            arch_error(pe, slot, th.pc, "illegal instruction");
        }
      }
    }

    // round boundary: barrier releases, then group switches
    for (uint32_t c = 0; c < city_arrived.size(); c++) {
      if (city_participants > 0 && city_arrived[c] == city_participants) {
        for (uint32_t pe = c * pes_per_city; pe < (c + 1) * pes_per_city; pe++)
          for (uint32_t t = 0; t < 8; t++) {
            FunctionalThread& th = r.threads[8 * pe + t];
            if (th.activated && th.status == ThreadStatus::AtBarrier &&
                th.barrier_scope == SyncScope::City)
              th.status = ThreadStatus::Ready;
          }
        city_arrived[c] = 0;
        progressed = true;
      }
    }
    if (chip_participants > 0 && chip_arrived == chip_participants) {
      for (FunctionalThread& th : r.threads)
        if (th.activated && th.status == ThreadStatus::AtBarrier &&
            th.barrier_scope == SyncScope::Chip)
          th.status = ThreadStatus::Ready;
      chip_arrived = 0;
      progressed = true;
    }

    for (uint32_t pe = 0; pe < npes; pe++) {
      bool sw = false;
      if (pes[pe].pending_switch) {
        sw = true;
        pes[pe].pending_switch = false;
        progressed = true;
      } else {
        bool active_live = false, other_live = false;
        const int base = pes[pe].active_group * 4;
        for (int t = 0; t < 4; t++) {
          const FunctionalThread& a = r.threads[8 * pe + base + t];
          const FunctionalThread& b = r.threads[8 * pe + (base + 4 + t) % 8];
          if (a.activated && a.status != ThreadStatus::Halted) active_live = true;
          if (b.activated && b.status != ThreadStatus::Halted) other_live = true;
        }
        if (!active_live && other_live) {
          sw = true;
          progressed = true;
        }
      }
      if (sw) pes[pe].active_group ^= 1;
    }

    if (!progressed && live > 0)
      throw SimError(SimError::Kind::Deadlock, "functional deadlock: no thread can progress");
    r.rounds++;
  }

  return r;
}

}  // namespace sc3sim
