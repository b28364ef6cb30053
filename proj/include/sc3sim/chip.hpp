#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "sc3sim/cache.hpp"
#include "sc3sim/channel.hpp"
#include "sc3sim/config.hpp"
#include "sc3sim/isa.hpp"
#include "sc3sim/stats.hpp"

namespace sc3sim {

enum class ThreadStatus : uint8_t { Ready, StalledOnMemory, StalledOnSfu, AtBarrier, Halted };
const char* status_name(ThreadStatus s);

struct ThreadContext {
  uint64_t pc = 0;
  std::array<uint64_t, kNumRegs> gpr{};
  std::array<uint64_t, kNumRegs> fpr{};
  ThreadStatus status = ThreadStatus::Halted;
  bool activated = false;
  uint32_t gtid = 0;
  SyncScope barrier_scope = SyncScope::City;
  uint32_t pending_acks = 0;  // outstanding flush writeback acknowledgements
  // register scoreboard: cycle at which the register value is available
  std::array<uint64_t, kNumRegs> gpr_ready{};
  std::array<uint64_t, kNumRegs> fpr_ready{};
};

struct LaunchDescriptor {
  const Program* program = nullptr;
  uint32_t threads_per_pe = 1;  // 1..8; threads 0-3 form group 0, 4-7 group 1
  std::string entry_label;      // empty = entry_index
  uint32_t entry_index = 0;
  std::vector<uint8_t> arg_block;
  uint64_t arg_base = 0;  // 0 = place after the data segment, line aligned
};

struct SimError : std::runtime_error {
  enum class Kind { Architectural, Deadlock, Watchdog, Launch };
  Kind kind;
  SimError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

namespace detail {

struct L1Waiter {
  enum class Kind : uint8_t { Load, Store, Fetch } kind;
  uint8_t tid;  // PE-local thread
  uint64_t addr = 0;
  uint8_t size = 0;
  uint8_t reg = 0;
  bool fp = false;
  uint64_t store_value = 0;
};

struct L1Mshr {
  std::vector<L1Waiter> waiters;
};

struct OutMsg {
  enum class Kind : uint8_t { FillD, FillI, Writeback, L2Flush, Sfu, Barrier } kind;
  uint64_t line = 0;
  uint8_t tid = 0;
  std::vector<uint8_t> data;  // writeback payload
  bool has_waiter = false;    // flush-family completion ack
  // sfu payload
  uint64_t sfu_result = 0;
  uint8_t sfu_rd = 0;
  // barrier payload
  SyncScope scope = SyncScope::City;
};

struct Pe {
  uint32_t index = 0;
  uint32_t city = 0;
  std::array<ThreadContext, 8> threads;
  int active_group = 0;
  bool pending_switch = false;
  int cursor = 0;
  std::vector<uint8_t> local;
  std::unique_ptr<Cache> l1d;
  std::unique_ptr<Cache> l1i;
  std::unordered_map<uint64_t, L1Mshr> mshr_d;
  std::unordered_map<uint64_t, L1Mshr> mshr_i;
  PerPeStats stats;

  struct Wake {
    uint64_t cycle;
    uint8_t tid;
  };
  std::vector<Wake> wakes;

  // per-cycle scratch, committed serially in PE-index order
  std::vector<OutMsg> outbox;
  std::string trace_buf;
  uint32_t issued_now = 0;
  uint32_t newly_halted = 0;
  std::optional<std::string> error;
};

struct CityMsg {
  enum class Kind : uint8_t { FillD, FillI, Writeback, L2Flush } kind;
  uint64_t line = 0;
  uint16_t from_pe = 0;  // global PE id (requester / trace origin)
  uint8_t tid = 0;
  std::vector<uint8_t> data;
  bool has_waiter = false;
  uint16_t waiter_pe = 0;
  uint8_t waiter_tid = 0;
};

struct TimedCityMsg {
  uint64_t ready;
  uint64_t seq;
  CityMsg msg;
};
struct CityMsgOrder {
  bool operator()(const TimedCityMsg& a, const TimedCityMsg& b) const {
    return a.ready != b.ready ? a.ready > b.ready : a.seq > b.seq;
  }
};

struct SfuRequest {
  uint16_t pe;  // global PE id
  uint8_t tid;
  uint8_t rd;
  uint64_t result;
};

struct City {
  uint32_t index = 0;
  std::unique_ptr<Cache> l2d;
  std::unique_ptr<Cache> l2i;
  std::priority_queue<TimedCityMsg, std::vector<TimedCityMsg>, CityMsgOrder> inbox;
  uint64_t seq = 0;
  std::unordered_map<uint64_t, std::vector<uint16_t>> mshr_d;  // line -> waiting PEs
  std::unordered_map<uint64_t, std::vector<uint16_t>> mshr_i;
  // first-origin bookkeeping for trace on merged fills
  std::unordered_map<uint64_t, std::pair<uint16_t, uint8_t>> origin_d;
  std::unordered_map<uint64_t, std::pair<uint16_t, uint8_t>> origin_i;

  std::vector<std::deque<SfuRequest>> sfu_queues;  // per city-local PE
  uint32_t sfu_cursor = 0;
  struct SfuInflight {
    uint64_t done;
    SfuRequest req;
  };
  std::deque<SfuInflight> sfu_pipe;

  uint32_t barrier_participants = 0;
  std::vector<std::pair<uint16_t, uint8_t>> barrier_waiters;
};

struct LlcWaiter {
  uint16_t city;
  bool icache;
  uint16_t origin_pe;
  uint8_t origin_tid;
};

struct LlcMsg {
  enum class Kind : uint8_t { Fill, Writeback } kind;
  uint64_t line = 0;
  uint16_t from_city = 0;
  bool icache = false;
  uint16_t origin_pe = 0;
  uint8_t origin_tid = 0;
  std::vector<uint8_t> data;
  bool has_waiter = false;
  uint16_t waiter_pe = 0;
  uint8_t waiter_tid = 0;
};

struct TimedLlcMsg {
  uint64_t ready;
  uint64_t seq;
  LlcMsg msg;
};
struct LlcMsgOrder {
  bool operator()(const TimedLlcMsg& a, const TimedLlcMsg& b) const {
    return a.ready != b.ready ? a.ready > b.ready : a.seq > b.seq;
  }
};

struct LlcSlice {
  uint32_t index = 0;
  std::unique_ptr<Cache> cache;
  std::priority_queue<TimedLlcMsg, std::vector<TimedLlcMsg>, LlcMsgOrder> inbox;
  uint64_t seq = 0;
  std::unordered_map<uint64_t, std::vector<LlcWaiter>> mshr;
};

}  // namespace detail

// The chip: hierarchy, clock loop, barrier network, host-controller launch
// interface and watchdog. Deterministic: repeated runs and any worker count
// produce bit-identical stats and memory images.
class Chip {
 public:
  explicit Chip(const ChipConfig& cfg);

  const ChipConfig& config() const { return cfg_; }

  // host controller (MP abstraction)
  void write_memory(uint64_t addr, const std::vector<uint8_t>& bytes);
  std::vector<uint8_t> read_memory(uint64_t addr, size_t n) const;
  void launch(const LaunchDescriptor& d);  // throws SimError::Launch
  RunStats run();                          // throws SimError
  // Host-side drain: write every dirty line back to memory (low levels
  // first so the levels nearest the PEs win) and invalidate all caches.
  // Not part of simulated time.
  void drain_caches();

  // introspection
  uint64_t cycle() const { return cycle_; }
  uint32_t pe_count() const { return static_cast<uint32_t>(pes_.size()); }
  const detail::Pe& pe(uint32_t i) const { return pes_[i]; }
  const ThreadContext& thread(uint32_t pe, uint32_t slot) const {
    return pes_[pe].threads[slot];
  }
  const std::vector<uint8_t>& memory() const { return ram_; }
  uint32_t activated_per_pe() const { return threads_per_pe_; }

  void set_trace(std::ostream* os) { trace_ = os; }
  void set_workers(int n) { workers_ = n; }  // <=1: serial reference path

  // stats snapshot (valid after run())
  const RunStats& stats() const { return stats_; }

 private:
  friend struct ChipTestPeek;
  using Pe = detail::Pe;
  using City = detail::City;
  using LlcSlice = detail::LlcSlice;

  void phase_channels();
  void phase_caches();
  void phase_sfu();
  void phase_barriers();
  void phase_pes();
  void commit_pe(Pe& pe);
  void boundary_switches();
  bool quiescent_deadlock() const;
  std::string snapshot() const;

  void step_pe(Pe& pe);
  void issue(Pe& pe, ThreadContext& th, const Instruction& ins);
  bool regs_ready(const ThreadContext& th, const Instruction& ins) const;

  void deliver_to_llc(uint32_t slice, uint64_t line, const uint8_t* bytes);
  void deliver_to_city(uint32_t city, uint64_t line, const uint8_t* bytes, bool icache);
  void deliver_to_pe_l1d(uint32_t pe, uint64_t line, const uint8_t* bytes);
  void deliver_to_pe_l1i(uint32_t pe, uint64_t line, const uint8_t* bytes);
  void process_city_msg(City& c, detail::CityMsg&& m);
  void process_llc_msg(LlcSlice& s, detail::LlcMsg&& m);
  void channel_write(uint64_t line, const uint8_t* bytes, uint16_t origin_pe, uint8_t origin_tid);
  void channel_read(uint64_t line, uint16_t origin_pe, uint8_t origin_tid);
  ChannelSet& channel_for(uint64_t addr);

  uint32_t slice_of(uint64_t line) const;
  void ack(uint16_t pe, uint8_t tid);
  void wake_ready(uint32_t pe, uint8_t tid);
  void trace_event(uint64_t cycle, int pe, int tid, const char* level, const char* kind,
                   uint64_t addr, const char* outcome, std::string* buf);

  ChipConfig cfg_;
  uint32_t line_;
  std::vector<Pe> pes_;
  std::vector<City> cities_;
  std::vector<LlcSlice> slices_;
  ChannelSet hbm2_;
  ChannelSet ddr4_;
  std::vector<uint8_t> ram_;

  const Program* program_ = nullptr;
  uint32_t threads_per_pe_ = 0;
  uint64_t cycle_ = 0;
  uint64_t live_ = 0;
  bool launched_ = false;
  uint64_t chip_barrier_participants_ = 0;
  std::vector<std::pair<uint16_t, uint8_t>> chip_barrier_waiters_;
  uint64_t barrier_releases_ = 0;
  bool switched_this_boundary_ = false;
  uint64_t issued_this_cycle_ = 0;

  std::ostream* trace_ = nullptr;
  int workers_ = 1;
  RunStats stats_;
};

}  // namespace sc3sim
