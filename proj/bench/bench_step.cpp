// Benchmark: serial reference PE stepping vs the OpenMP-parallel phase on an
// identical workload, verifying bit-identical results while comparing
// simulation throughput.

#include <chrono>
#include <cstdio>
#include <string>

#include "sc3sim/chip.hpp"
#include "sc3sim/kernels.hpp"
#include "sc3sim/report.hpp"

using namespace sc3sim;

namespace {

struct Result {
  double seconds;
  uint64_t cycles;
  std::string digest;
};

Result run_once(const ChipConfig& cfg, const KernelCase& kc, int workers) {
  Chip chip(cfg);
  chip.set_workers(workers);
  LaunchDescriptor d;
  d.program = &kc.program;
  d.threads_per_pe = kc.threads_per_pe;
  chip.launch(d);
  for (const auto& r : kc.inputs) chip.write_memory(r.addr, r.bytes);
  const auto t0 = std::chrono::steady_clock::now();
  const RunStats s = chip.run();
  const auto t1 = std::chrono::steady_clock::now();
  Result r;
  r.seconds = std::chrono::duration<double>(t1 - t0).count();
  r.cycles = s.cycles;
  r.digest = report_json(s);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  // a 4-city slice gives 16 PEs of stepping work per cycle
  ChipConfig cfg;
  cfg.prefectures = 1;
  cfg.cities_per_prefecture = 4;
  cfg.llc.capacity = 4 * 1024 * 1024;
  cfg.memory_size = 32 << 20;
  cfg.watchdog_cycles = 100'000'000;

  const uint64_t n = argc > 1 ? std::stoull(argv[1]) : 1 << 16;
  const int max_workers = argc > 2 ? std::stoi(argv[2]) : 4;
  const KernelCase kc = gen_vecadd(n, 1, true, cfg.pe_count());

  std::printf("workload: dual-group vecadd n=%llu on %u PEs\n",
              static_cast<unsigned long long>(n), cfg.pe_count());
  const Result ref = run_once(cfg, kc, 1);
  std::printf("  serial reference    %8.3f s   %.2f Mcycles/s\n", ref.seconds,
              double(ref.cycles) / ref.seconds / 1e6);
  for (int w = 2; w <= max_workers; w *= 2) {
    const Result par = run_once(cfg, kc, w);
    const bool same = par.digest == ref.digest && par.cycles == ref.cycles;
    std::printf("  openmp x%-2d          %8.3f s   %.2f Mcycles/s   speedup %.2fx   %s\n", w,
                par.seconds, double(par.cycles) / par.seconds / 1e6, ref.seconds / par.seconds,
                same ? "bit-identical" : "MISMATCH");
    if (!same) return 1;
  }
  return 0;
}
