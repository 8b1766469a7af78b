#include "mfnav/dwa.hpp"

#include <algorithm>
#include <cmath>

namespace mfnav {

ControlCommand dwa_plan(const RobotState& state, const PointCloud2D& scan_world,
                        const Vec2& local_goal, const DwaConfig& cfg) {
  const double v_lo = std::max(0.0, state.v - cfg.accel_v * cfg.dt);
  const double v_hi = std::min(cfg.v_max, state.v + cfg.accel_v * cfg.dt);
  const double w_lo = std::max(-cfg.omega_max, state.omega - cfg.accel_omega * cfg.dt);
  const double w_hi = std::min(cfg.omega_max, state.omega + cfg.accel_omega * cfg.dt);

  double best_score = -std::numeric_limits<double>::infinity();
  ControlCommand best{0.0, 0.0};

  for (int iv = 0; iv <= cfg.v_samples; ++iv) {
    const double v = v_lo + (v_hi - v_lo) * iv / std::max(1, cfg.v_samples);
    for (int iw = 0; iw <= cfg.omega_samples; ++iw) {
      const double w = w_lo + (w_hi - w_lo) * iw / std::max(1, cfg.omega_samples);

      // rollout the arc
      Pose2D p = state.pose;
      double min_clear = cfg.clearance_cap;
      bool hit = false;
      const int steps = static_cast<int>(cfg.sim_time / cfg.dt);
      for (int k = 0; k < steps && !hit; ++k) {
        p.x += v * std::cos(p.theta) * cfg.dt;
        p.y += v * std::sin(p.theta) * cfg.dt;
        p.theta += w * cfg.dt;
        for (const auto& q : scan_world.points) {
          const double d = (q - p.position()).norm() - cfg.robot_radius;
          if (d < 0.0) {
            hit = true;
            break;
          }
          min_clear = std::min(min_clear, d);
        }
      }
      if (hit) continue;

      const double goal_ang = std::atan2(local_goal.y - p.y, local_goal.x - p.x);
      const double heading = M_PI - std::abs(normalize_angle(goal_ang - p.theta));
      const double score = cfg.weight_heading * heading +
                           cfg.weight_clearance * min_clear +
                           cfg.weight_velocity * v;
      if (score > best_score) {
        best_score = score;
        best = {v, w};
      }
    }
  }
  return best;
}

}  // namespace mfnav
