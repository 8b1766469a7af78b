#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "mfnav/perception.hpp"
#include "mfnav/prediction.hpp"

namespace mfnav {

struct PlannerConfig {
  int horizon = 20;
  double dt_plan = 0.1;
  std::array<double, 3> q_weights{1.0, 1.0, 0.2};  // x, y, heading tracking
  std::array<double, 2> r_weights{0.1, 0.05};      // v, omega effort
  double rho1 = 10.0;                              // obstacle penalty coefficient
  double d_safe = 0.5;
  double kappa = 1.0;         // velocity weight gain: eta = 1 + kappa * speed
  int point_budget = 100;     // M
  double v_ref = 1.0;
  double v_max = 1.5;
  double omega_max = 2.0;
  double robot_radius = 0.4;
  int max_iterations = 50;
  double step_init = 0.2;     // initial gradient step, grows/shrinks adaptively
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
};

struct ControlPostConfig {
  double lowpass_beta = 0.5;  // v_out = beta * prev + (1 - beta) * v*
  double omega_clip = 1.5;
};

struct ReferenceTrajectory {
  std::vector<Pose2D> states;  // horizon + 1 entries
};

enum class ConstraintOrigin { CurrentScan, Virtual };

struct ConstraintPoint {
  Vec2 position;  // robot frame at solve time
  double eta = 1.0;
  ConstraintOrigin origin = ConstraintOrigin::CurrentScan;
};

struct CostBreakdown {
  double tracking = 0.0;
  double control = 0.0;
  double obstacle = 0.0;
  double total() const { return tracking + control + obstacle; }
};

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double wall_time_ms = 0.0;
  std::vector<double> cost_history;
};

struct SolverAbort : std::runtime_error {
  explicit SolverAbort(const std::string& msg, std::vector<ControlCommand> iterate = {})
      : std::runtime_error(msg), offending_iterate(std::move(iterate)) {}
  std::vector<ControlCommand> offending_iterate;
};

/// Marches along the 5-waypoint polyline from the robot's projection at
/// v_ref * dt_plan per step; holds the final point once exhausted.
ReferenceTrajectory build_reference(const std::vector<Vec2>& waypoints,
                                    const RobotState& robot, const PlannerConfig& cfg);

/// Merges current-scan points (eta = 1) with virtual points
/// (eta = 1 + kappa * source speed), keeps the point_budget nearest to the
/// robot, expressed in the robot frame.
std::vector<ConstraintPoint> select_points(const PointCloud2D& scan_world,
                                           const std::vector<VirtualPoint>& virtual_points,
                                           const Pose2D& robot_pose,
                                           const PlannerConfig& cfg);

/// Euclidean point-to-footprint distance; negative inside the disc.
double point_distance(const RobotState& state, const Vec2& p, double robot_radius);

CostBreakdown cost(const std::vector<ControlCommand>& controls, const RobotState& state,
                   const ReferenceTrajectory& ref, const std::vector<ConstraintPoint>& points,
                   const PlannerConfig& cfg);

/// Analytic gradient of cost().total() w.r.t. the flattened control sequence
/// (v_0, w_0, v_1, w_1, ...), by reverse accumulation through the rollout.
std::vector<double> cost_gradient(const std::vector<ControlCommand>& controls,
                                  const RobotState& state, const ReferenceTrajectory& ref,
                                  const std::vector<ConstraintPoint>& points,
                                  const PlannerConfig& cfg);

/// Projected gradient descent with Armijo backtracking; monotone cost.
std::vector<ControlCommand> solve_mpc(const RobotState& state, const ReferenceTrajectory& ref,
                                      const std::vector<ConstraintPoint>& points,
                                      const PlannerConfig& cfg,
                                      const std::vector<ControlCommand>& warm_start,
                                      SolveReport& report);

ControlCommand postprocess(double v_star, double omega_star, double prev_v_out,
                           const ControlPostConfig& cfg);

struct CycleReport {
  double perceive_us = 0.0;
  double predict_us = 0.0;
  double reference_us = 0.0;
  double select_us = 0.0;
  double solve_us = 0.0;
  double post_us = 0.0;
  double total_us = 0.0;
  SolveReport solve;
  std::size_t n_tracks = 0;
  std::size_t n_virtual = 0;
  std::size_t n_constraints = 0;
};

struct PipelineConfig {
  PerceptionConfig perception;
  PredictionConfig prediction;
  PlannerConfig planner;
  ControlPostConfig post;
  bool enable_virtual_points = true;   // off: no-prediction ablation
  bool single_frame = false;           // on: velocities treated as zero
};

/// Stateful receding-horizon pipeline: owns the frame buffer, tracker,
/// warm start and low-pass memory for one robot.
class Planner {
 public:
  explicit Planner(PipelineConfig cfg) : cfg_(std::move(cfg)) {}

  /// Full cycle on a new scan: perceive -> predict -> reference -> select
  /// -> solve -> postprocess.
  ControlCommand plan_cycle(const RobotState& state, const LidarScan& scan,
                            const std::vector<Vec2>& waypoints, std::mt19937_64& rng,
                            CycleReport& report);

  const PipelineConfig& config() const { return cfg_; }
  const TrackerState& tracker() const { return tracker_; }
  const FrameBuffer& buffer() const { return buffer_; }

 private:
  PipelineConfig cfg_;
  FrameBuffer buffer_;
  TrackerState tracker_;
  std::vector<ControlCommand> warm_start_;
  double prev_v_out_ = 0.0;
};

}  // namespace mfnav
