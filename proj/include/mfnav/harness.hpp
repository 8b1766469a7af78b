#pragma once

#include <string>
#include <vector>

#include "mfnav/dwa.hpp"
#include "mfnav/planner.hpp"
#include "mfnav/world.hpp"

namespace mfnav {

enum class PredictionMode { NoPrediction, ConstantVelocity, Gmm };
enum class FrameMode { SingleFrame, MultiFrame };

struct AblationMode {
  PredictionMode prediction = PredictionMode::Gmm;
  FrameMode frames = FrameMode::MultiFrame;
};

std::string mode_name(const AblationMode& m);
AblationMode parse_mode(const std::string& s);  // e.g. "gmm/multi_frame" or "gmm"

enum class TrialStatus { Reached, Collided, Timeout, SolverError };

std::string status_name(TrialStatus s);

struct RunMetrics {
  double path_length_m = 0.0;
  bool reached_goal = false;
  bool collided = false;
  int steps = 0;
  double min_clearance_m = 0.0;
  double mean_cycle_ms = 0.0;
  double p95_cycle_ms = 0.0;
  std::uint64_t seed = 0;
};

struct TrajectorySample {
  double t, x, y, theta, v, omega, clearance;
};

struct TrialResult {
  std::string scenario_name;
  AblationMode mode;
  std::string planner_name;  // "mfneupan" | "dwa"
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::Timeout;
  RunMetrics metrics;
  std::vector<TrajectorySample> trajectory;
  std::vector<CycleReport> cycles;
};

struct HarnessOptions {
  std::string planner = "mfneupan";
  bool record_cycles = false;
};

/// Builds the pipeline configuration for a scenario, applying any
/// `planner` / `prediction` overrides from the scenario file and the
/// ablation mode flags.
PipelineConfig make_pipeline_config(const Scenario& scenario, const AblationMode& mode);

TrialResult run_trial(const Scenario& scenario, const std::string& scenario_name,
                      const AblationMode& mode, std::uint64_t seed,
                      const HarnessOptions& opts = {});

struct SummaryRow {
  std::string scenario_name;
  std::string mode;
  int trials = 0;
  int successes = 0;
  double mean_path_m = 0.0;
  double stddev_path_m = 0.0;
  double mean_cycle_ms = 0.0;
};

struct AblationReport {
  std::vector<TrialResult> trials;
  std::vector<SummaryRow> summary;  // sorted by (scenario, mode)
};

AblationReport run_ablation(const std::vector<std::pair<std::string, Scenario>>& scenarios,
                            const std::vector<AblationMode>& modes,
                            const std::vector<std::uint64_t>& seeds,
                            const HarnessOptions& opts = {});

/// Writes metrics.json, table.csv and per-trial traj_<id>.csv + traj_<id>.svg.
/// Deterministic byte output when include_timing is false.
void emit_report(const AblationReport& report,
                 const std::vector<std::pair<std::string, Scenario>>& scenarios,
                 const std::string& out_dir, bool include_timing);

struct StageLatency {
  std::string stage;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
};

struct LatencySummary {
  int cycles = 0;
  std::vector<StageLatency> stages;  // includes a "total" row
  double mean_total_ms = 0.0;
};

LatencySummary bench_latency(const Scenario& scenario, const AblationMode& mode, int n_cycles);

/// Overhead SVG plot of one trial: map, obstacles, waypoints, trajectory.
std::string render_trial_svg(const TrialResult& trial, const Scenario& scenario);

}  // namespace mfnav
