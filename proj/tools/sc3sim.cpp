// Command-line driver: assemble, simulate, closed-form peak checks, kernel
// suite and energy calibration, wired for reproducible batch runs.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sc3sim/assembler.hpp"
#include "sc3sim/chip.hpp"
#include "sc3sim/config.hpp"
#include "sc3sim/channel.hpp"
#include "sc3sim/kernels.hpp"
#include "sc3sim/perf.hpp"
#include "sc3sim/report.hpp"

using namespace sc3sim;

namespace {

// exit codes: 0 ok, 2 usage, 3 input, 4 simulation (deadlock/watchdog),
// 5 validation failure
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitSim = 4;
constexpr int kExitValidation = 5;

int fail(int code, const char* category, const std::string& msg) {
  std::cerr << "sc3sim: error[" << category << "]: " << msg << "\n";
  return code;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << data;
}

ChipConfig load_cfg(const std::string& path, const std::string& preset) {
  if (!path.empty()) return load_config_file(path);
  if (preset == "sc2") return sc2_preset();
  if (preset == "sc3-800") return sc3_calibrated_800mhz();
  return sc3_default();
}

ReportFormat parse_format(const std::string& f) {
  if (f == "human") return ReportFormat::Human;
  if (f == "csv") return ReportFormat::Csv;
  if (f == "json") return ReportFormat::Json;
  throw std::invalid_argument("unknown format: " + f);
}

void print_peak(std::ostream& out, const ChipConfig& cfg) {
  const PeakModel pm = peak_model(cfg);
  char buf[160];
  std::snprintf(buf, sizeof buf, "peak performance (%u PEs at %.0f MHz)\n", cfg.pe_count(),
                cfg.frequency_hz / 1e6);
  out << buf;
  const char* names[3] = {"double precision", "single precision", "half precision"};
  for (int p = 0; p < 3; p++) {
    std::snprintf(buf, sizeof buf, "  %-18s %.1f TFlops  (exact %.4f TFlops)\n", names[p],
                  pm.peak(p) / 1e12, pm.peak(p) / 1e12);
    out << buf;
  }
  auto bw_line = [&](const ChannelConfig& ch) {
    if (ch.channels == 0) return;
    const double bps = peak_bandwidth(ch);
    if (bps >= 1e12)
      std::snprintf(buf, sizeof buf, "  %-18s %.1f TB/s   (exact %.1f GB/s)\n",
                    ch.technology.c_str(), bps / 1e12, bps / 1e9);
    else
      std::snprintf(buf, sizeof buf, "  %-18s %.1f GB/s\n", ch.technology.c_str(), bps / 1e9);
    out << buf;
  };
  out << "memory and interface bandwidth\n";
  bw_line(cfg.ddr4);
  bw_line(cfg.hbm2);
  bw_line(cfg.pcie);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cycle-approximate simulator of a PEZY-SC3-class MIMD many-core processor"};
  app.require_subcommand(1);

  // ---- asm ----
  auto* asm_cmd = app.add_subcommand("asm", "assemble or disassemble a program");
  std::string asm_input, asm_output;
  bool do_disasm = false;
  asm_cmd->add_option("--input", asm_input, "input file (.s or binary image)")->required();
  asm_cmd->add_option("--output", asm_output, "output file")->required();
  asm_cmd->add_flag("--disassemble", do_disasm, "binary image to assembly");

  // ---- run ----
  auto* run_cmd = app.add_subcommand("run", "simulate a program or a named kernel case");
  std::string run_cfg_path, run_preset = "sc3", run_program, run_kernel, run_format = "human";
  std::string run_output = "-", run_trace;
  uint64_t run_seed = 0;
  uint64_t kn = 4096;
  uint32_t km = 64, kk = 64, ktile = 16;
  uint32_t run_tpp = 0;
  int run_workers = 1;
  run_cmd->add_option("--config", run_cfg_path, "chip config json");
  run_cmd->add_option("--preset", run_preset, "built-in config preset (sc3, sc2, sc3-800)");
  run_cmd->add_option("--program", run_program, "assembly or binary program to run");
  run_cmd->add_option("--kernel", run_kernel,
                      "named kernel case: vecadd, vecadd-dual, dgemm, litmus-flushed, "
                      "litmus-noflush");
  run_cmd->add_option("--n", kn, "vecadd length");
  run_cmd->add_option("--m", km, "dgemm m=n dimension");
  run_cmd->add_option("--k", kk, "dgemm k dimension");
  run_cmd->add_option("--tile", ktile, "dgemm tile");
  run_cmd->add_option("--seed", run_seed, "kernel data seed (never affects timing)");
  run_cmd->add_option("--format", run_format, "report format: human, csv, json");
  run_cmd->add_option("--output", run_output, "report destination ('-' = stdout)");
  run_cmd->add_option("--trace", run_trace, "memory access trace file");
  run_cmd->add_option("--threads-per-pe", run_tpp, "threads to activate per PE (program runs)");
  run_cmd->add_option("--workers", run_workers, "internal workers for the PE phase");

  // ---- peak ----
  auto* peak_cmd = app.add_subcommand("peak", "closed-form peak, bandwidth and system checks");
  std::string peak_cfg_path, peak_preset = "sc3";
  double peak_intensity = -1.0;
  bool peak_system = false;
  peak_cmd->add_option("--config", peak_cfg_path, "chip config json");
  peak_cmd->add_option("--preset", peak_preset, "built-in config preset (sc3, sc2, sc3-800)");
  peak_cmd->add_option("--roofline", peak_intensity,
                       "print the attainable GFlops at this arithmetic intensity (flops/byte)");
  peak_cmd->add_flag("--system", peak_system, "print the published system arithmetic checks");

  // ---- suite ----
  auto* suite_cmd = app.add_subcommand("suite", "run the kernel suite");
  std::string suite_cfg_path, suite_preset = "sc3", suite_manifest;
  std::string suite_emit_manifest;
  int suite_jobs = 1;
  suite_cmd->add_option("--config", suite_cfg_path, "chip config json");
  suite_cmd->add_option("--preset", suite_preset, "built-in config preset");
  suite_cmd->add_option("--manifest", suite_manifest, "verify expected-output digests");
  suite_cmd->add_option("--emit-manifest", suite_emit_manifest, "write the manifest and exit");
  suite_cmd->add_option("--jobs", suite_jobs, "run cases in parallel workers");

  // ---- calibrate ----
  auto* cal_cmd = app.add_subcommand("calibrate", "energy model calibration report");
  std::string cal_format = "human";
  cal_cmd->add_option("--format", cal_format, "human or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*asm_cmd) {
      if (do_disasm) {
        std::string bytes = read_file(asm_input);
        Program p = from_image(std::vector<uint8_t>(bytes.begin(), bytes.end()));
        write_file(asm_output, disassemble(p));
      } else {
        Program p = parse_assembly(read_file(asm_input));
        std::vector<uint8_t> img = to_image(p);
        write_file(asm_output, std::string(img.begin(), img.end()));
      }
      return 0;
    }

    if (*peak_cmd) {
      const ChipConfig cfg = load_cfg(peak_cfg_path, peak_preset);
      print_peak(std::cout, cfg);
      if (peak_intensity >= 0) {
        const PeakModel pm = peak_model(cfg);
        const double bw =
            peak_bandwidth(cfg.hbm2.channels ? cfg.hbm2 : cfg.ddr4);
        const double att = roofline(peak_intensity, pm.peak(0), bw);
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "roofline\n  intensity %.4f flops/B -> attainable %.2f GFlops (dp)\n",
                      peak_intensity, att / 1e9);
        std::cout << buf;
      }
      if (peak_system) {
        const SystemReport sr = system_arithmetic_checks(50, 4, cfg);
        char buf[160];
        std::snprintf(buf, sizeof buf, "system arithmetic\n  50 nodes x 4 chips -> %" PRIu64
                                       " PEs\n  Rpeak at %.0f MHz: %.2f TFlops\n",
                      sr.total_pes, cfg.frequency_hz / 1e6, sr.rpeak_tflops);
        std::cout << buf;
        const double implied =
            implied_frequency_hz(2353.85, 200, cfg.pe_count(), cfg.flops_per_cycle[0]);
        std::snprintf(buf, sizeof buf,
                      "  implied frequency for Rpeak 2353.85 TFlops over 200 chips: %.0f MHz "
                      "(model-derived)\n",
                      implied / 1e6);
        std::cout << buf;
      }
      return 0;
    }

    if (*run_cmd) {
      const ChipConfig cfg = load_cfg(run_cfg_path, run_preset);
      std::ofstream trace_file;
      std::ostream* trace = nullptr;
      if (!run_trace.empty()) {
        trace_file.open(run_trace);
        if (!trace_file) return fail(kExitInput, "input", "cannot write trace: " + run_trace);
        trace = &trace_file;
      }

      RunStats stats;
      if (!run_kernel.empty()) {
        KernelCase kc;
        if (run_kernel == "vecadd")
          kc = gen_vecadd(kn, run_seed, false, cfg.pe_count());
        else if (run_kernel == "vecadd-dual")
          kc = gen_vecadd(kn, run_seed, true, cfg.pe_count());
        else if (run_kernel == "dgemm")
          kc = gen_dgemm(km, km, kk, ktile, run_seed, cfg.pe_count());
        else if (run_kernel == "litmus-flushed")
          kc = litmus_noncoherent().second;
        else if (run_kernel == "litmus-noflush")
          kc = litmus_noncoherent().first;
        else
          return fail(kExitUsage, "usage", "unknown kernel: " + run_kernel);
        ChipConfig run_cfg = cfg;
        if (kc.watchdog_override) run_cfg.watchdog_cycles = kc.watchdog_override;
        CaseResult res;
        {
          Chip chip(run_cfg);
          chip.set_workers(run_workers);
          if (trace) chip.set_trace(trace);
          LaunchDescriptor d;
          d.program = &kc.program;
          d.threads_per_pe = kc.threads_per_pe;
          chip.launch(d);
          for (const KernelCase::Region& r : kc.inputs) chip.write_memory(r.addr, r.bytes);
          try {
            stats = chip.run();
          } catch (const SimError& err) {
            if (!(kc.expect_watchdog && err.kind == SimError::Kind::Watchdog))
              return fail(kExitSim, "simulation", err.what());
            res.watchdog_hit = true;
          }
          chip.drain_caches();
          for (const KernelCase::Region& r : kc.expected) {
            const auto got = chip.read_memory(r.addr, r.bytes.size());
            if (got != r.bytes)
              return fail(kExitValidation, "validation",
                          "kernel output does not match its oracle");
          }
        }
        if (res.watchdog_hit)
          std::cerr << "note: run ended by watchdog, as pinned for this litmus case\n";
      } else if (!run_program.empty()) {
        std::string text = read_file(run_program);
        Program p;
        if (text.size() >= 4 && text.compare(0, 4, "SC3P") == 0)
          p = from_image(std::vector<uint8_t>(text.begin(), text.end()));
        else
          p = parse_assembly(text);
        Chip chip(cfg);
        chip.set_workers(run_workers);
        if (trace) chip.set_trace(trace);
        LaunchDescriptor d;
        d.program = &p;
        d.threads_per_pe = run_tpp ? run_tpp : 1;
        chip.launch(d);
        try {
          stats = chip.run();
        } catch (const SimError& err) {
          return fail(kExitSim, "simulation", err.what());
        }
      } else {
        return fail(kExitUsage, "usage", "run needs --program or --kernel");
      }

      std::ostringstream out;
      emit_report(stats, cfg, parse_format(run_format), out);
      if (run_output == "-")
        std::cout << out.str();
      else
        write_file(run_output, out.str());
      return 0;
    }

    if (*suite_cmd) {
      const ChipConfig cfg = load_cfg(suite_cfg_path, suite_preset);
      std::vector<KernelCase> cases = default_suite(cfg);
      if (!suite_emit_manifest.empty()) {
        std::vector<std::string> params;
        for (const KernelCase& kc : cases) params.push_back("{\"name\":\"" + kc.name + "\"}");
        write_file(suite_emit_manifest, manifest_json(cases, params));
        std::cout << "wrote manifest for " << cases.size() << " cases\n";
        return 0;
      }
      if (!suite_manifest.empty()) {
        auto entries = manifest_from_json(read_file(suite_manifest));
        if (entries.size() != cases.size())
          return fail(kExitValidation, "validation", "manifest size mismatch");
        for (size_t i = 0; i < cases.size(); i++) {
          if (entries[i].name != cases[i].name ||
              entries[i].digest != expected_digest(cases[i]))
            return fail(kExitValidation, "validation",
                        "manifest digest mismatch for case " + cases[i].name);
        }
      }
      std::vector<CaseResult> results(cases.size());
      const int jobs = std::max(1, suite_jobs);
      std::vector<std::thread> pool;
      std::atomic<size_t> next{0};
      for (int j = 0; j < jobs; j++) {
        pool.emplace_back([&] {
          while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cases.size()) break;
            results[i] = run_case(cfg, cases[i]);
          }
        });
      }
      for (auto& t : pool) t.join();
      bool all = true;
      for (size_t i = 0; i < cases.size(); i++) {
        std::cout << (results[i].passed ? "[pass] " : "[FAIL] ") << cases[i].name;
        if (!results[i].passed) std::cout << ": " << results[i].message;
        std::cout << "\n";
        all = all && results[i].passed;
      }
      std::cout << (all ? "suite: all cases passed\n" : "suite: failures\n");
      return all ? 0 : kExitValidation;
    }

    if (*cal_cmd) {
      const ChipConfig cfg = sc3_calibrated_800mhz();
      const RunStats scenario = calibration_scenario();
      const PeakModel pm = peak_model(cfg);
      const EnergyReport er = energy_report(scenario, cfg.energy, pm.peak(0));
      if (cal_format == "json") {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "{\n  \"power_w\": %.6f,\n  \"gflops_per_w_achieved\": %.6f,\n"
                      "  \"gflops_per_w_peak\": %.6f,\n  \"achieved_tflops\": %.6f,\n"
                      "  \"peak_tflops\": %.6f,\n  \"efficiency_of_peak\": %.4f\n}\n",
                      er.power_w, er.efficiency_achieved, er.efficiency_peak,
                      scenario.achieved_gflops_total / 1e3, pm.peak(0) / 1e12,
                      scenario.achieved_gflops_total * 1e9 / pm.peak(0));
        std::cout << buf;
      } else {
        char buf[512];
        std::cout << "energy calibration (full-chip DGEMM scenario at 800 MHz)\n";
        std::snprintf(buf, sizeof buf, "  power             %.1f W\n", er.power_w);
        std::cout << buf;
        std::snprintf(buf, sizeof buf,
                      "  efficiency        %.2f GFlops/W (achieved-based reading)\n",
                      er.efficiency_achieved);
        std::cout << buf;
        std::snprintf(buf, sizeof buf,
                      "  efficiency        %.2f GFlops/W (peak-based reading, alternate)\n",
                      er.efficiency_peak);
        std::cout << buf;
        std::snprintf(buf, sizeof buf, "  achieved          %.3f TFlops = %.1f%% of the %.2f "
                                       "TFlops peak\n",
                      scenario.achieved_gflops_total / 1e3,
                      scenario.achieved_gflops_total * 1e11 / pm.peak(0), pm.peak(0) / 1e12);
        std::cout << buf;
        std::cout << "  note: a calibration check against the published measurement, not an "
                     "independent prediction\n";
      }
      return 0;
    }
  } catch (const AsmError& e) {
    return fail(kExitInput, "input", e.what());
  } catch (const SimError& e) {
    return fail(e.kind == SimError::Kind::Launch ? kExitInput : kExitSim, "simulation",
                e.what());
  } catch (const std::exception& e) {
    return fail(kExitInput, "input", e.what());
  }
  return 0;
}
