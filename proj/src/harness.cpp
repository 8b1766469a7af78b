#include "mfnav/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace mfnav {

std::string mode_name(const AblationMode& m) {
  std::string p;
  switch (m.prediction) {
    case PredictionMode::NoPrediction: p = "no_prediction"; break;
    case PredictionMode::ConstantVelocity: p = "constant_velocity"; break;
    case PredictionMode::Gmm: p = "gmm"; break;
  }
  return p + (m.frames == FrameMode::SingleFrame ? "/single_frame" : "/multi_frame");
}

AblationMode parse_mode(const std::string& s) {
  AblationMode m;
  std::string pred = s;
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    pred = s.substr(0, slash);
    const std::string frames = s.substr(slash + 1);
    if (frames == "single_frame")
      m.frames = FrameMode::SingleFrame;
    else if (frames == "multi_frame")
      m.frames = FrameMode::MultiFrame;
    else
      throw std::invalid_argument("unknown frame mode: " + frames);
  }
  if (pred == "no_prediction")
    m.prediction = PredictionMode::NoPrediction;
  else if (pred == "constant_velocity")
    m.prediction = PredictionMode::ConstantVelocity;
  else if (pred == "gmm")
    m.prediction = PredictionMode::Gmm;
  else
    throw std::invalid_argument("unknown prediction mode: " + pred);
  return m;
}

std::string status_name(TrialStatus s) {
  switch (s) {
    case TrialStatus::Reached: return "reached";
    case TrialStatus::Collided: return "collided";
    case TrialStatus::Timeout: return "timeout";
    case TrialStatus::SolverError: return "solver_error";
  }
  return "unknown";
}

PipelineConfig make_pipeline_config(const Scenario& scenario, const AblationMode& mode) {
  PipelineConfig cfg;
  cfg.perception.z_min = scenario.sensor.z_min;
  cfg.perception.z_max = scenario.sensor.z_max;
  cfg.planner.v_max = scenario.v_max;
  cfg.planner.omega_max = scenario.omega_max;
  cfg.planner.robot_radius = scenario.robot_radius;
  cfg.planner.dt_plan = scenario.dt;
  cfg.prediction.dt_plan = scenario.dt;

  using nlohmann::json;
  if (!scenario.planner_json.empty()) {
    json p = json::parse(scenario.planner_json);
    cfg.planner.horizon = p.value("horizon", cfg.planner.horizon);
    cfg.planner.dt_plan = p.value("dt_plan", cfg.planner.dt_plan);
    if (p.contains("q")) for (int i = 0; i < 3; ++i) cfg.planner.q_weights[i] = p["q"][i];
    if (p.contains("r")) for (int i = 0; i < 2; ++i) cfg.planner.r_weights[i] = p["r"][i];
    cfg.planner.rho1 = p.value("rho1", cfg.planner.rho1);
    cfg.planner.d_safe = p.value("d_safe", cfg.planner.d_safe);
    cfg.planner.kappa = p.value("kappa", cfg.planner.kappa);
    cfg.planner.point_budget = p.value("point_budget", cfg.planner.point_budget);
    cfg.planner.v_ref = p.value("v_ref", cfg.planner.v_ref);
    cfg.planner.max_iterations = p.value("iterations", cfg.planner.max_iterations);
    cfg.planner.step_init = p.value("step_init", cfg.planner.step_init);
    cfg.post.lowpass_beta = p.value("lowpass_beta", cfg.post.lowpass_beta);
    cfg.post.omega_clip = p.value("omega_clip", cfg.post.omega_clip);
  }
  if (!scenario.prediction_json.empty()) {
    json p = json::parse(scenario.prediction_json);
    const std::string preset = p.value("gmm_preset", "sim");
    if (preset == "sim")
      cfg.prediction.gmm = GmmParams::sim_preset();
    else if (preset == "real")
      cfg.prediction.gmm = GmmParams::real_preset();
    else if (preset == "custom") {
      for (int i = 0; i < 3; ++i) {
        cfg.prediction.gmm.means[i] = p.at("means")[i];
        cfg.prediction.gmm.variances[i] = p.at("variances")[i];
        cfg.prediction.gmm.weights[i] = p.at("weights")[i];
      }
    } else {
      throw ScenarioError("prediction.gmm_preset: unknown preset '" + preset + "'");
    }
    cfg.prediction.gmm.validate();
    cfg.prediction.speed_threshold = p.value("speed_threshold", cfg.prediction.speed_threshold);
    cfg.prediction.n_steps = p.value("n_steps", cfg.prediction.n_steps);
    cfg.prediction.samples_per_step = p.value("samples_per_step", cfg.prediction.samples_per_step);
  }

  cfg.enable_virtual_points = mode.prediction != PredictionMode::NoPrediction;
  cfg.prediction.zero_offsets = mode.prediction == PredictionMode::ConstantVelocity;
  cfg.single_frame = mode.frames == FrameMode::SingleFrame;
  return cfg;
}

TrialResult run_trial(const Scenario& scenario, const std::string& scenario_name,
                      const AblationMode& mode, std::uint64_t seed,
                      const HarnessOptions& opts) {
  TrialResult result;
  result.scenario_name = scenario_name;
  result.mode = mode;
  result.planner_name = opts.planner;
  result.seed = seed;

  PipelineConfig pcfg = make_pipeline_config(scenario, mode);
  Planner planner(pcfg);

  DwaConfig dwa_cfg;
  dwa_cfg.v_max = scenario.v_max;
  dwa_cfg.omega_max = scenario.omega_max;
  dwa_cfg.robot_radius = scenario.robot_radius;
  dwa_cfg.dt = scenario.dt;

  std::mt19937_64 lidar_rng(seed);
  WorldState world = initial_world(scenario);

  std::vector<double> cycle_ms;
  double min_clear = clearance(world, scenario);
  std::vector<Pose2D> poses{world.robot.pose};
  result.trajectory.push_back({world.time, world.robot.pose.x, world.robot.pose.y,
                               world.robot.pose.theta, world.robot.v, world.robot.omega,
                               min_clear});

  result.status = TrialStatus::Timeout;
  const Vec2 goal{scenario.goal.x, scenario.goal.y};

  for (int step = 0; step < scenario.max_steps; ++step) {
    LidarScan scan = simulate_lidar(world, scenario, lidar_rng);
    // fresh offset stream per cycle, derived from the trial seed
    std::mt19937_64 cycle_rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(step) + 1);

    ControlCommand cmd;
    CycleReport rep;
    try {
      if (opts.planner == "dwa") {
        PointCloud2D cloud = preprocess_scan(scan, pcfg.perception.z_min, pcfg.perception.z_max,
                                             pcfg.perception.downsample_cell);
        PointCloud2D world_cloud = transform_cloud(cloud, world.robot.pose);
        ReferenceTrajectory ref = build_reference(scenario.waypoints, world.robot, pcfg.planner);
        cmd = dwa_plan(world.robot, world_cloud, ref.states.back().position(), dwa_cfg);
        rep.total_us = 0.0;
      } else {
        cmd = planner.plan_cycle(world.robot, scan, scenario.waypoints, cycle_rng, rep);
      }
    } catch (const SolverAbort&) {
      result.status = TrialStatus::SolverError;
      break;
    }
    cycle_ms.push_back(rep.total_us / 1000.0);
    if (opts.record_cycles) result.cycles.push_back(rep);

    world = step_world(world, scenario, cmd, scenario.dt);
    const double clear = clearance(world, scenario);
    min_clear = std::min(min_clear, clear);
    poses.push_back(world.robot.pose);
    result.trajectory.push_back({world.time, world.robot.pose.x, world.robot.pose.y,
                                 world.robot.pose.theta, world.robot.v, world.robot.omega,
                                 clear});

    if (world.collided) {
      result.status = TrialStatus::Collided;
      break;
    }
    if ((world.robot.pose.position() - goal).norm() <= scenario.goal.tolerance) {
      result.status = TrialStatus::Reached;
      break;
    }
  }

  RunMetrics& m = result.metrics;
  m.seed = seed;
  m.path_length_m = path_length(poses);
  m.reached_goal = result.status == TrialStatus::Reached;
  m.collided = result.status == TrialStatus::Collided;
  m.steps = static_cast<int>(poses.size()) - 1;
  m.min_clearance_m = min_clear;
  if (!cycle_ms.empty()) {
    double sum = 0.0;
    for (double c : cycle_ms) sum += c;
    m.mean_cycle_ms = sum / cycle_ms.size();
    std::vector<double> sorted = cycle_ms;
    std::sort(sorted.begin(), sorted.end());
    m.p95_cycle_ms = sorted[static_cast<std::size_t>(0.95 * (sorted.size() - 1))];
  }
  return result;
}

AblationReport run_ablation(const std::vector<std::pair<std::string, Scenario>>& scenarios,
                            const std::vector<AblationMode>& modes,
                            const std::vector<std::uint64_t>& seeds,
                            const HarnessOptions& opts) {
  AblationReport report;
  for (const auto& [name, sc] : scenarios)
    for (const auto& mode : modes)
      for (std::uint64_t seed : seeds)
        report.trials.push_back(run_trial(sc, name, mode, seed, opts));

  std::map<std::pair<std::string, std::string>, std::vector<const TrialResult*>> groups;
  for (const auto& t : report.trials)
    groups[{t.scenario_name, mode_name(t.mode)}].push_back(&t);

  for (const auto& [key, trials] : groups) {
    SummaryRow row;
    row.scenario_name = key.first;
    row.mode = key.second;
    row.trials = static_cast<int>(trials.size());
    double sum = 0.0, sum2 = 0.0, cyc = 0.0;
    for (const auto* t : trials) {
      if (t->status == TrialStatus::Reached) row.successes += 1;
      sum += t->metrics.path_length_m;
      sum2 += t->metrics.path_length_m * t->metrics.path_length_m;
      cyc += t->metrics.mean_cycle_ms;
    }
    const double n = static_cast<double>(row.trials);
    row.mean_path_m = sum / n;
    row.stddev_path_m = std::sqrt(std::max(0.0, sum2 / n - row.mean_path_m * row.mean_path_m));
    row.mean_cycle_ms = cyc / n;
    report.summary.push_back(row);
  }
  return report;
}

LatencySummary bench_latency(const Scenario& scenario, const AblationMode& mode, int n_cycles) {
  if (n_cycles < 100) throw std::invalid_argument("bench_latency: n_cycles must be >= 100");

  std::vector<CycleReport> reports;
  reports.reserve(n_cycles);
  std::uint64_t seed = scenario.seed;
  while (static_cast<int>(reports.size()) < n_cycles) {
    HarnessOptions opts;
    opts.record_cycles = true;
    TrialResult t = run_trial(scenario, "bench", mode, seed++, opts);
    for (auto& c : t.cycles) {
      reports.push_back(c);
      if (static_cast<int>(reports.size()) >= n_cycles) break;
    }
    if (t.cycles.empty()) break;  // degenerate scenario, avoid spinning
  }

  LatencySummary out;
  out.cycles = static_cast<int>(reports.size());

  auto stage_row = [&](const std::string& name, auto getter) {
    std::vector<double> ms;
    ms.reserve(reports.size());
    double sum = 0.0;
    for (const auto& r : reports) {
      double v = getter(r) / 1000.0;
      ms.push_back(v);
      sum += v;
    }
    std::sort(ms.begin(), ms.end());
    StageLatency s;
    s.stage = name;
    s.mean_ms = ms.empty() ? 0.0 : sum / ms.size();
    if (!ms.empty()) {
      s.p50_ms = ms[ms.size() / 2];
      s.p95_ms = ms[static_cast<std::size_t>(0.95 * (ms.size() - 1))];
    }
    out.stages.push_back(s);
    return s.mean_ms;
  };

  stage_row("perceive", [](const CycleReport& r) { return r.perceive_us; });
  stage_row("predict", [](const CycleReport& r) { return r.predict_us; });
  stage_row("reference", [](const CycleReport& r) { return r.reference_us; });
  stage_row("select", [](const CycleReport& r) { return r.select_us; });
  stage_row("solve", [](const CycleReport& r) { return r.solve_us; });
  stage_row("postprocess", [](const CycleReport& r) { return r.post_us; });
  out.mean_total_ms = stage_row("total", [](const CycleReport& r) { return r.total_us; });
  return out;
}

}  // namespace mfnav
