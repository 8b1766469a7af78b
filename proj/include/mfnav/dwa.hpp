#pragma once

#include "mfnav/perception.hpp"

namespace mfnav {

struct DwaConfig {
  double v_max = 1.5;
  double omega_max = 2.0;
  double accel_v = 2.0;       // m/s^2 window growth
  double accel_omega = 4.0;   // rad/s^2
  double dt = 0.1;
  double sim_time = 1.5;
  int v_samples = 8;
  int omega_samples = 15;
  double robot_radius = 0.4;
  double weight_heading = 1.0;
  double weight_clearance = 0.45;
  double weight_velocity = 0.8;
  double clearance_cap = 1.0;
};

/// Velocity-sampling baseline: evaluates a window of (v, omega) pairs by
/// rolling out a short arc and scoring goal heading, obstacle clearance
/// and forward progress.
ControlCommand dwa_plan(const RobotState& state, const PointCloud2D& scan_world,
                        const Vec2& local_goal, const DwaConfig& cfg);

}  // namespace mfnav
