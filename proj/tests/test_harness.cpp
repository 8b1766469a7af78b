#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mfnav/harness.hpp"

using namespace mfnav;

namespace {

Scenario tiny_freespace() {
  return parse_scenario(R"({
    "map": {"bounds": [0, 0, 14, 6]},
    "robot": {"start": [1, 3, 0], "goal": [11, 3, 0.3]},
    "sensor": {"n_beams": 36, "fov": 6.283185307179586, "max_range": 8,
               "range_noise_sigma": 0.01, "z_band": [0.1, 1.0], "beam_z_levels": [0.5]},
    "waypoints": [[1,3],[3.5,3],[6,3],[8.5,3],[11,3]],
    "obstacles": [],
    "dt": 0.1, "max_steps": 300, "seed": 0,
    "planner": {"v_ref": 1.0}
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("mode names round-trip") {
  for (const char* name : {"no_prediction/single_frame", "constant_velocity/multi_frame",
                           "gmm/multi_frame", "gmm/single_frame"})
    CHECK(mode_name(parse_mode(name)) == name);
  CHECK(mode_name(parse_mode("gmm")) == "gmm/multi_frame");
  CHECK_THROWS_AS(parse_mode("banana"), std::invalid_argument);
}

TEST_CASE("run_trial: free-space run reaches the goal efficiently") {
  Scenario sc = tiny_freespace();
  TrialResult t = run_trial(sc, "tiny", parse_mode("gmm"), 0);
  CHECK(t.status == TrialStatus::Reached);
  CHECK(t.metrics.reached_goal);
  CHECK(t.metrics.path_length_m <= 10.5);
  CHECK(t.metrics.min_clearance_m > 0.0);
  CHECK(t.metrics.steps > 0);
}

TEST_CASE("run_trial: walled-off goal times out") {
  Scenario sc = parse_scenario(R"({
    "map": {"bounds": [0, 0, 14, 6]},
    "robot": {"start": [1, 3, 0], "goal": [11, 3, 0.3]},
    "sensor": {"n_beams": 36, "fov": 6.283185307179586, "max_range": 8,
               "range_noise_sigma": 0.0, "z_band": [0.1, 1.0], "beam_z_levels": [0.5]},
    "waypoints": [[1,3],[3.5,3],[6,3],[8.5,3],[11,3]],
    "obstacles": [
      {"shape": {"type": "polygon", "vertices": [[-0.3,-2.8],[0.3,-2.8],[0.3,2.8],[-0.3,2.8]]},
       "position": [8, 3]}
    ],
    "dt": 0.1, "max_steps": 150, "seed": 0
  })");
  TrialResult t = run_trial(sc, "walled", parse_mode("gmm"), 0);
  CHECK(t.status == TrialStatus::Timeout);
}

TEST_CASE("run_trial: fixed seed is fully deterministic") {
  Scenario sc = tiny_freespace();
  TrialResult a = run_trial(sc, "tiny", parse_mode("gmm"), 3);
  TrialResult b = run_trial(sc, "tiny", parse_mode("gmm"), 3);
  CHECK(a.status == b.status);
  CHECK(a.metrics.path_length_m == b.metrics.path_length_m);
  CHECK(a.metrics.min_clearance_m == b.metrics.min_clearance_m);
  CHECK(a.metrics.steps == b.metrics.steps);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].x == b.trajectory[i].x);
    CHECK(a.trajectory[i].y == b.trajectory[i].y);
  }
}

TEST_CASE("run_ablation: factorial counting and summary rows") {
  Scenario sc = tiny_freespace();
  sc.max_steps = 40;  // keep it quick; trials will time out, which is fine here
  std::vector<std::pair<std::string, Scenario>> scenarios = {{"a", sc}, {"b", sc}};
  auto report = run_ablation(scenarios,
                             {parse_mode("no_prediction"), parse_mode("constant_velocity"),
                              parse_mode("gmm")},
                             {0, 1, 2, 3, 4});
  CHECK(report.trials.size() == 30);
  CHECK(report.summary.size() == 6);
  for (const auto& row : report.summary) CHECK(row.trials == 5);
}

TEST_CASE("emit_report: deterministic bytes without timing, error when empty") {
  Scenario sc = tiny_freespace();
  sc.max_steps = 60;
  std::vector<std::pair<std::string, Scenario>> scenarios = {{"tiny", sc}};
  auto report = run_ablation(scenarios, {parse_mode("gmm")}, {0});

  auto tmp = std::filesystem::temp_directory_path() / "mfnav_report_test";
  std::filesystem::remove_all(tmp);
  emit_report(report, scenarios, (tmp / "a").string(), false);
  emit_report(report, scenarios, (tmp / "b").string(), false);

  CHECK(slurp(tmp / "a" / "metrics.json") == slurp(tmp / "b" / "metrics.json"));
  CHECK(slurp(tmp / "a" / "table.csv") == slurp(tmp / "b" / "table.csv"));
  CHECK(std::filesystem::exists(tmp / "a" / "traj_tiny_gmm-multi_frame_0.csv"));
  CHECK(std::filesystem::exists(tmp / "a" / "traj_tiny_gmm-multi_frame_0.svg"));

  const std::string traj = slurp(tmp / "a" / "traj_tiny_gmm-multi_frame_0.csv");
  CHECK(traj.rfind("t,x,y,theta,v,omega,clearance\n", 0) == 0);

  AblationReport empty;
  CHECK_THROWS_WITH_AS(emit_report(empty, scenarios, (tmp / "c").string(), false),
                       doctest::Contains("no results"), std::runtime_error);
  std::filesystem::remove_all(tmp);
}

TEST_CASE("reported path length equals path_length over the dumped trajectory") {
  Scenario sc = tiny_freespace();
  TrialResult t = run_trial(sc, "tiny", parse_mode("gmm"), 1);
  std::vector<Pose2D> poses;
  for (const auto& s : t.trajectory) poses.push_back({s.x, s.y, s.theta});
  CHECK(t.metrics.path_length_m == doctest::Approx(path_length(poses)).epsilon(1e-12));
}

TEST_CASE("bench_latency: rejects tiny cycle counts, reports stage rows") {
  Scenario sc = tiny_freespace();
  CHECK_THROWS_AS(bench_latency(sc, parse_mode("gmm"), 10), std::invalid_argument);
  LatencySummary s = bench_latency(sc, parse_mode("gmm"), 100);
  CHECK(s.cycles >= 100);
  REQUIRE(s.stages.size() == 7);
  CHECK(s.stages.back().stage == "total");
  CHECK(s.mean_total_ms > 0.0);
}
