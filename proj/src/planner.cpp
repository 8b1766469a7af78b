#include "mfnav/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mfnav/kernels.hpp"

namespace mfnav {

namespace {

double now_us() {
  using namespace std::chrono;
  return duration<double, std::micro>(steady_clock::now().time_since_epoch()).count();
}

struct Polyline {
  std::vector<Vec2> pts;
  std::vector<double> cum;  // cumulative arc length at each vertex

  explicit Polyline(const std::vector<Vec2>& waypoints) : pts(waypoints) {
    cum.resize(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
      cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  }

  double total() const { return cum.back(); }

  /// Arc-length parameter of the closest point on the polyline.
  double project(const Vec2& p) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const Vec2 a = pts[i - 1], b = pts[i];
      const Vec2 ab = b - a;
      const double len2 = ab.squaredNorm();
      double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      const Vec2 q = a + ab * t;
      const double d2 = (p - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_s = cum[i - 1] + std::sqrt(len2) * t;
      }
    }
    return best_s;
  }

  Pose2D at(double s) const {
    if (s >= total()) {
      // hold the final point with the last segment heading
      Vec2 tangent = (pts.back() - pts[pts.size() - 2]).normalized();
      return {pts.back().x, pts.back().y, std::atan2(tangent.y, tangent.x)};
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (s <= cum[i]) {
        const Vec2 a = pts[i - 1], b = pts[i];
        const double seg = cum[i] - cum[i - 1];
        const double t = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
        const Vec2 q = a + (b - a) * t;
        const Vec2 tangent = (b - a).normalized();
        return {q.x, q.y, std::atan2(tangent.y, tangent.x)};
      }
    }
    return at(total());
  }
};

}  // namespace

ReferenceTrajectory build_reference(const std::vector<Vec2>& waypoints,
                                    const RobotState& robot, const PlannerConfig& cfg) {
  Polyline line(waypoints);
  const double s0 = line.project(robot.pose.position());
  ReferenceTrajectory ref;
  ref.states.reserve(cfg.horizon + 1);
  for (int k = 0; k <= cfg.horizon; ++k)
    ref.states.push_back(line.at(s0 + cfg.v_ref * cfg.dt_plan * k));
  return ref;
}

std::vector<ConstraintPoint> select_points(const PointCloud2D& scan_world,
                                           const std::vector<VirtualPoint>& virtual_points,
                                           const Pose2D& robot_pose,
                                           const PlannerConfig& cfg) {
  struct Entry {
    ConstraintPoint cp;
    double dist;
  };
  const double c = std::cos(robot_pose.theta);
  const double s = std::sin(robot_pose.theta);
  auto to_robot = [&](const Vec2& w) -> Vec2 {
    const double dx = w.x - robot_pose.x;
    const double dy = w.y - robot_pose.y;
    return {c * dx + s * dy, -s * dx + c * dy};
  };

  std::vector<Entry> entries;
  entries.reserve(scan_world.points.size() + virtual_points.size());
  for (const auto& p : scan_world.points) {
    Vec2 local = to_robot(p);
    entries.push_back({{local, 1.0, ConstraintOrigin::CurrentScan}, local.norm()});
  }
  for (const auto& vp : virtual_points) {
    Vec2 local = to_robot(vp.position);
    entries.push_back(
        {{local, 1.0 + cfg.kappa * vp.source_speed, ConstraintOrigin::Virtual}, local.norm()});
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.cp.position.x != b.cp.position.x) return a.cp.position.x < b.cp.position.x;
    return a.cp.position.y < b.cp.position.y;
  });
  if (entries.size() > static_cast<std::size_t>(cfg.point_budget))
    entries.resize(cfg.point_budget);

  std::vector<ConstraintPoint> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(e.cp);
  return out;
}

double point_distance(const RobotState& state, const Vec2& p, double robot_radius) {
  return (p - state.pose.position()).norm() - robot_radius;
}

namespace {

struct RolloutWorkspace {
  std::vector<double> px, py, eta;  // constraint arrays for the kernel
  std::vector<Pose2D> states;

  void load_points(const std::vector<ConstraintPoint>& points) {
    const std::size_t n = points.size();
    px.resize(n);
    py.resize(n);
    eta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = points[i].position.x;
      py[i] = points[i].position.y;
      eta[i] = points[i].eta;
    }
  }
};

void rollout(const std::vector<ControlCommand>& controls, const RobotState& state, double dt,
             std::vector<Pose2D>& states) {
  states.clear();
  states.push_back(state.pose);
  for (const auto& u : controls) {
    const Pose2D& p = states.back();
    states.push_back({p.x + u.v * std::cos(p.theta) * dt,
                      p.y + u.v * std::sin(p.theta) * dt,
                      p.theta + u.omega * dt});
  }
}

}  // namespace

CostBreakdown cost(const std::vector<ControlCommand>& controls, const RobotState& state,
                   const ReferenceTrajectory& ref, const std::vector<ConstraintPoint>& points,
                   const PlannerConfig& cfg) {
  RolloutWorkspace ws;
  ws.load_points(points);
  rollout(controls, state, cfg.dt_plan, ws.states);

  CostBreakdown bd;
  const auto& q = cfg.q_weights;
  for (std::size_t k = 0; k < ws.states.size() && k < ref.states.size(); ++k) {
    const double ex = ws.states[k].x - ref.states[k].x;
    const double ey = ws.states[k].y - ref.states[k].y;
    const double eth = normalize_angle(ws.states[k].theta - ref.states[k].theta);
    bd.tracking += q[0] * ex * ex + q[1] * ey * ey + q[2] * eth * eth;
  }
  for (const auto& u : controls)
    bd.control += cfg.r_weights[0] * u.v * u.v + cfg.r_weights[1] * u.omega * u.omega;
  if (!points.empty()) {
    for (std::size_t k = 1; k < ws.states.size(); ++k) {
      auto acc = kernels::hinge_penalty(ws.px.data(), ws.py.data(), ws.eta.data(), points.size(),
                                        ws.states[k].x, ws.states[k].y, cfg.robot_radius,
                                        cfg.d_safe);
      bd.obstacle += cfg.rho1 * acc.cost;
    }
  }
  return bd;
}

std::vector<double> cost_gradient(const std::vector<ControlCommand>& controls,
                                  const RobotState& state, const ReferenceTrajectory& ref,
                                  const std::vector<ConstraintPoint>& points,
                                  const PlannerConfig& cfg) {
  const std::size_t H = controls.size();
  RolloutWorkspace ws;
  ws.load_points(points);
  rollout(controls, state, cfg.dt_plan, ws.states);

  // direct per-state cost gradients dL/ds_k
  std::vector<std::array<double, 3>> ds(H + 1, {0.0, 0.0, 0.0});
  const auto& q = cfg.q_weights;
  for (std::size_t k = 0; k <= H; ++k) {
    if (k < ref.states.size()) {
      ds[k][0] += 2.0 * q[0] * (ws.states[k].x - ref.states[k].x);
      ds[k][1] += 2.0 * q[1] * (ws.states[k].y - ref.states[k].y);
      ds[k][2] += 2.0 * q[2] * normalize_angle(ws.states[k].theta - ref.states[k].theta);
    }
    if (k >= 1 && !points.empty()) {
      auto acc = kernels::hinge_penalty(ws.px.data(), ws.py.data(), ws.eta.data(), points.size(),
                                        ws.states[k].x, ws.states[k].y, cfg.robot_radius,
                                        cfg.d_safe);
      ds[k][0] += cfg.rho1 * acc.gx;
      ds[k][1] += cfg.rho1 * acc.gy;
    }
  }

  // reverse pass: lambda_k = dL/ds_k + (df/ds_k)^T lambda_{k+1}
  std::vector<double> grad(2 * H, 0.0);
  std::array<double, 3> lambda = ds[H];
  const double dt = cfg.dt_plan;
  for (std::size_t k = H; k-- > 0;) {
    const Pose2D& p = ws.states[k];
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const double v = controls[k].v;
    // df/du_k^T * lambda_{k+1} plus direct control effort
    grad[2 * k] = ct * dt * lambda[0] + st * dt * lambda[1] + 2.0 * cfg.r_weights[0] * v;
    grad[2 * k + 1] = dt * lambda[2] + 2.0 * cfg.r_weights[1] * controls[k].omega;
    // lambda_k = dL/ds_k + (df/ds_k)^T lambda_{k+1}
    const double l2 = -v * st * dt * lambda[0] + v * ct * dt * lambda[1] + lambda[2];
    lambda = {lambda[0] + ds[k][0], lambda[1] + ds[k][1], l2 + ds[k][2]};
  }
  return grad;
}

std::vector<ControlCommand> solve_mpc(const RobotState& state, const ReferenceTrajectory& ref,
                                      const std::vector<ConstraintPoint>& points,
                                      const PlannerConfig& cfg,
                                      const std::vector<ControlCommand>& warm_start,
                                      SolveReport& report) {
  const double t0 = now_us();
  const std::size_t H = static_cast<std::size_t>(cfg.horizon);

  std::vector<ControlCommand> u(H);
  if (warm_start.size() == H) u = warm_start;

  auto project = [&](std::vector<ControlCommand>& seq) {
    for (auto& c : seq) {
      c.v = std::clamp(c.v, -cfg.v_max, cfg.v_max);
      c.omega = std::clamp(c.omega, -cfg.omega_max, cfg.omega_max);
    }
  };
  project(u);

  auto eval = [&](const std::vector<ControlCommand>& seq) {
    double c = cost(seq, state, ref, points, cfg).total();
    if (!std::isfinite(c)) throw SolverAbort("solve_mpc: non-finite cost", seq);
    return c;
  };

  double f = eval(u);
  report.initial_cost = f;
  report.cost_history = {f};
  double step = cfg.step_init;

  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    std::vector<double> g = cost_gradient(u, state, ref, points, cfg);
    double gnorm2 = 0.0;
    for (double gi : g) gnorm2 += gi * gi;
    if (gnorm2 < 1e-16) break;

    bool accepted = false;
    double alpha = step;
    for (int bt = 0; bt < 20; ++bt) {
      std::vector<ControlCommand> trial = u;
      for (std::size_t k = 0; k < H; ++k) {
        trial[k].v -= alpha * g[2 * k];
        trial[k].omega -= alpha * g[2 * k + 1];
      }
      project(trial);
      // Armijo on the projected step
      double decrease = 0.0;
      for (std::size_t k = 0; k < H; ++k) {
        decrease += g[2 * k] * (u[k].v - trial[k].v);
        decrease += g[2 * k + 1] * (u[k].omega - trial[k].omega);
      }
      const double f_trial = eval(trial);
      if (f_trial <= f - cfg.armijo_c * decrease) {
        u = std::move(trial);
        f = f_trial;
        accepted = true;
        step = alpha * 2.0;  // tentative growth for the next iterate
        break;
      }
      alpha *= cfg.armijo_shrink;
    }
    report.cost_history.push_back(f);
    if (!accepted) break;
  }

  report.iterations = it;
  report.final_cost = f;
  report.wall_time_ms = (now_us() - t0) / 1000.0;
  return u;
}

ControlCommand postprocess(double v_star, double omega_star, double prev_v_out,
                           const ControlPostConfig& cfg) {
  ControlCommand out;
  out.v = cfg.lowpass_beta * prev_v_out + (1.0 - cfg.lowpass_beta) * v_star;
  out.omega = std::clamp(omega_star, -cfg.omega_clip, cfg.omega_clip);
  return out;
}

ControlCommand Planner::plan_cycle(const RobotState& state, const LidarScan& scan,
                                   const std::vector<Vec2>& waypoints, std::mt19937_64& rng,
                                   CycleReport& report) {
  const double t_start = now_us();

  // perceive
  double t = now_us();
  PointCloud2D cloud = preprocess_scan(scan, cfg_.perception.z_min, cfg_.perception.z_max,
                                       cfg_.perception.downsample_cell);
  PointCloud2D world_cloud = transform_cloud(cloud, state.pose);
  buffer_.push(world_cloud);
  std::vector<TrackedObstacle> tracks = perceive(buffer_, tracker_, cfg_.perception);
  if (cfg_.single_frame) {
    for (auto& tr : tracks) tr.smoothed_velocity = {0.0, 0.0};
  }
  report.perceive_us = now_us() - t;
  report.n_tracks = tracks.size();

  // predict
  t = now_us();
  std::vector<VirtualPoint> virtual_points;
  if (cfg_.enable_virtual_points)
    virtual_points = predict(tracks, cfg_.prediction, rng);
  report.predict_us = now_us() - t;
  report.n_virtual = virtual_points.size();

  // reference
  t = now_us();
  ReferenceTrajectory ref = build_reference(waypoints, state, cfg_.planner);
  report.reference_us = now_us() - t;

  // select constraint points (robot frame)
  t = now_us();
  std::vector<ConstraintPoint> constraints =
      select_points(world_cloud, virtual_points, state.pose, cfg_.planner);
  report.select_us = now_us() - t;
  report.n_constraints = constraints.size();

  // solve in the robot frame: state at origin, reference transformed
  t = now_us();
  RobotState local_state;
  local_state.v = state.v;
  local_state.omega = state.omega;
  const double c = std::cos(state.pose.theta), s = std::sin(state.pose.theta);
  ReferenceTrajectory local_ref;
  local_ref.states.reserve(ref.states.size());
  for (const auto& r : ref.states) {
    const double dx = r.x - state.pose.x, dy = r.y - state.pose.y;
    local_ref.states.push_back({c * dx + s * dy, -s * dx + c * dy,
                                normalize_angle(r.theta - state.pose.theta)});
  }
  std::vector<ControlCommand> solution =
      solve_mpc(local_state, local_ref, constraints, cfg_.planner, warm_start_, report.solve);
  report.solve_us = now_us() - t;

  // shift for next cycle's warm start
  warm_start_ = solution;
  if (!warm_start_.empty()) {
    warm_start_.erase(warm_start_.begin());
    warm_start_.push_back(warm_start_.back());
  }

  // postprocess
  t = now_us();
  ControlCommand cmd = postprocess(solution.front().v, solution.front().omega, prev_v_out_, cfg_.post);
  prev_v_out_ = cmd.v;
  report.post_us = now_us() - t;

  report.total_us = now_us() - t_start;
  return cmd;
}

}  // namespace mfnav
