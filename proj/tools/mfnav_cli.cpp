#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mfnav/harness.hpp"

namespace {

using namespace mfnav;

std::string scenario_name_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void write_cycle_timing(const TrialResult& t, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(std::filesystem::path(out_dir) /
                    ("timing_" + t.scenario_name + "_" + std::to_string(t.seed) + ".csv"));
  out << "cycle,stage,microseconds\n";
  for (std::size_t i = 0; i < t.cycles.size(); ++i) {
    const auto& c = t.cycles[i];
    out << i << ",perceive," << c.perceive_us << "\n"
        << i << ",predict," << c.predict_us << "\n"
        << i << ",reference," << c.reference_us << "\n"
        << i << ",select," << c.select_us << "\n"
        << i << ",solve," << c.solve_us << "\n"
        << i << ",postprocess," << c.post_us << "\n"
        << i << ",total," << c.total_us << "\n";
  }
}

int has_solver_error(const AblationReport& report) {
  for (const auto& t : report.trials)
    if (t.status == TrialStatus::SolverError) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-frame point-constrained navigation benchmark"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a single seeded trial");
  std::string run_scenario, run_mode = "gmm/multi_frame", run_planner = "mfneupan",
              run_out = "out";
  std::uint64_t run_seed = 0;
  bool run_timing = false, run_no_timing = false;
  run->add_option("scenario", run_scenario, "Scenario JSON file")->required();
  run->add_option("--mode", run_mode, "Ablation mode, e.g. gmm/multi_frame");
  run->add_option("--seed", run_seed, "Trial seed");
  run->add_option("--planner", run_planner, "mfneupan | dwa");
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--timing", run_timing, "Dump per-cycle stage timing CSV");
  run->add_flag("--no-timing", run_no_timing, "Exclude wall-time fields from metrics.json");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run a factorial ablation");
  std::vector<std::string> ab_scenarios, ab_modes = {"no_prediction", "constant_velocity", "gmm"};
  std::vector<std::uint64_t> ab_seeds = {0, 1, 2, 3, 4};
  std::string ab_out = "out";
  bool ab_no_timing = false;
  ablate->add_option("scenarios", ab_scenarios, "Scenario JSON files")->required();
  ablate->add_option("--modes", ab_modes, "Ablation modes");
  ablate->add_option("--seeds", ab_seeds, "Seeds");
  ablate->add_option("--out", ab_out, "Output directory");
  ablate->add_flag("--no-timing", ab_no_timing, "Exclude wall-time fields from metrics.json");

  // bench
  auto* bench = app.add_subcommand("bench", "Latency benchmark");
  std::string bench_scenario, bench_mode = "gmm/multi_frame";
  int bench_cycles = 500;
  bench->add_option("scenario", bench_scenario, "Scenario JSON file")->required();
  bench->add_option("--cycles", bench_cycles, "Number of planning cycles");
  bench->add_option("--mode", bench_mode, "Ablation mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      Scenario sc = load_scenario(run_scenario);
      const std::string name = scenario_name_of(run_scenario);
      HarnessOptions opts;
      opts.planner = run_planner;
      opts.record_cycles = run_timing;
      TrialResult t = run_trial(sc, name, parse_mode(run_mode), run_seed, opts);

      AblationReport report;
      report.trials.push_back(t);
      SummaryRow row;
      row.scenario_name = name;
      row.mode = mode_name(t.mode);
      row.trials = 1;
      row.successes = t.status == TrialStatus::Reached ? 1 : 0;
      row.mean_path_m = t.metrics.path_length_m;
      row.mean_cycle_ms = t.metrics.mean_cycle_ms;
      report.summary.push_back(row);
      emit_report(report, {{name, sc}}, run_out, !run_no_timing);
      if (run_timing) write_cycle_timing(t, run_out);

      std::printf("%s: %s, path %.2f m, %d steps, min clearance %.3f m\n", name.c_str(),
                  status_name(t.status).c_str(), t.metrics.path_length_m, t.metrics.steps,
                  t.metrics.min_clearance_m);
      return has_solver_error(report);
    }

    if (ablate->parsed()) {
      std::vector<std::pair<std::string, Scenario>> scenarios;
      for (const auto& path : ab_scenarios)
        scenarios.emplace_back(scenario_name_of(path), load_scenario(path));
      std::vector<AblationMode> modes;
      for (const auto& m : ab_modes) modes.push_back(parse_mode(m));

      AblationReport report = run_ablation(scenarios, modes, ab_seeds);
      emit_report(report, scenarios, ab_out, !ab_no_timing);

      std::printf("%-16s %-32s %8s %10s %10s\n", "scenario", "mode", "success", "mean_path",
                  "stddev");
      for (const auto& r : report.summary)
        std::printf("%-16s %-32s %4d/%-3d %9.2f m %8.2f m\n", r.scenario_name.c_str(),
                    r.mode.c_str(), r.successes, r.trials, r.mean_path_m, r.stddev_path_m);
      return has_solver_error(report);
    }

    if (bench->parsed()) {
      Scenario sc = load_scenario(bench_scenario);
      LatencySummary s = bench_latency(sc, parse_mode(bench_mode), bench_cycles);
      std::printf("%d cycles\n%-12s %10s %10s %10s\n", s.cycles, "stage", "mean_ms", "p50_ms",
                  "p95_ms");
      for (const auto& st : s.stages)
        std::printf("%-12s %10.3f %10.3f %10.3f\n", st.stage.c_str(), st.mean_ms, st.p50_ms,
                    st.p95_ms);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
