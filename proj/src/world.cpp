#include "mfnav/world.hpp"

#include <algorithm>
#include <cmath>

namespace mfnav {

Vec2 ObstacleScript::position_at(double t) const {
  if (waypath.empty()) return {};
  if (t <= waypath.front().time) return waypath.front().position;
  if (t >= waypath.back().time) return waypath.back().position;
  for (std::size_t i = 1; i < waypath.size(); ++i) {
    if (t <= waypath[i].time) {
      const auto& a = waypath[i - 1];
      const auto& b = waypath[i];
      double u = (t - a.time) / (b.time - a.time);
      return a.position + (b.position - a.position) * u;
    }
  }
  return waypath.back().position;
}

Vec2 ObstacleScript::velocity_at(double t) const {
  if (waypath.size() < 2) return {};
  if (t < waypath.front().time || t >= waypath.back().time) return {};
  for (std::size_t i = 1; i < waypath.size(); ++i) {
    if (t < waypath[i].time) {
      const auto& a = waypath[i - 1];
      const auto& b = waypath[i];
      return (b.position - a.position) * (1.0 / (b.time - a.time));
    }
  }
  return {};
}

double obstacle_signed_distance(const Vec2& p, const ObstacleShape& shape, const Vec2& center) {
  if (const auto* disc = std::get_if<DiscShape>(&shape))
    return (p - center).norm() - disc->radius;
  const auto& poly = std::get<PolygonShape>(shape);
  std::vector<Vec2> verts;
  verts.reserve(poly.vertices.size());
  for (const auto& v : poly.vertices) verts.push_back(v + center);
  return point_polygon_signed_distance(p, verts);
}

WorldState initial_world(const Scenario& scenario) {
  WorldState w;
  w.time = 0.0;
  w.robot.pose = scenario.start;
  int id = 0;
  for (const auto& s : scenario.static_obstacles)
    w.obstacle_poses.push_back({id++, s.position_at(0.0), {}});
  for (const auto& d : scenario.dynamic_obstacles)
    w.obstacle_poses.push_back({id++, d.position_at(0.0), d.velocity_at(0.0)});
  w.collided = clearance(w, scenario) < 0.0;
  return w;
}

WorldState step_world(const WorldState& world, const Scenario& scenario,
                      const ControlCommand& control, double dt) {
  WorldState next;
  next.time = world.time + dt;

  const double v = std::clamp(control.v, -scenario.v_max, scenario.v_max);
  const double omega = std::clamp(control.omega, -scenario.omega_max, scenario.omega_max);

  const Pose2D& p = world.robot.pose;
  next.robot.pose.x = p.x + v * std::cos(p.theta) * dt;
  next.robot.pose.y = p.y + v * std::sin(p.theta) * dt;
  next.robot.pose.theta = normalize_angle(p.theta + omega * dt);
  next.robot.v = v;
  next.robot.omega = omega;

  int id = 0;
  next.obstacle_poses.reserve(world.obstacle_poses.size());
  for (const auto& s : scenario.static_obstacles)
    next.obstacle_poses.push_back({id++, s.position_at(next.time), {}});
  for (const auto& d : scenario.dynamic_obstacles)
    next.obstacle_poses.push_back({id++, d.position_at(next.time), d.velocity_at(next.time)});

  next.collided = clearance(next, scenario) < 0.0;
  return next;
}

double clearance(const WorldState& world, const Scenario& scenario) {
  const Vec2 rp = world.robot.pose.position();
  double min_d = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  for (const auto& s : scenario.static_obstacles)
    min_d = std::min(min_d, obstacle_signed_distance(rp, s.shape, world.obstacle_poses[i++].position));
  for (const auto& d : scenario.dynamic_obstacles)
    min_d = std::min(min_d, obstacle_signed_distance(rp, d.shape, world.obstacle_poses[i++].position));
  return min_d - scenario.robot_radius;
}

double path_length(const std::vector<Pose2D>& trajectory) {
  double len = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    len += std::hypot(trajectory[i].x - trajectory[i - 1].x,
                      trajectory[i].y - trajectory[i - 1].y);
  return len;
}

namespace {

double first_hit(const Vec2& origin, const Vec2& dir, const ObstacleShape& shape,
                 const Vec2& center) {
  if (const auto* disc = std::get_if<DiscShape>(&shape))
    return ray_circle_intersect(origin, dir, center, disc->radius);
  const auto& poly = std::get<PolygonShape>(shape);
  double best = -1.0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly.vertices[i] + center;
    const Vec2 b = poly.vertices[(i + 1) % n] + center;
    double t = ray_segment_intersect(origin, dir, a, b);
    if (t >= 0.0 && (best < 0.0 || t < best)) best = t;
  }
  return best;
}

}  // namespace

LidarScan simulate_lidar(const WorldState& world, const Scenario& scenario,
                         std::mt19937_64& rng) {
  const SensorConfig& s = scenario.sensor;
  LidarScan scan;
  scan.timestamp = world.time;
  const Vec2 origin = world.robot.pose.position();
  const double heading = world.robot.pose.theta;
  std::normal_distribution<double> noise(0.0, s.range_noise_sigma);

  const RectBounds& mb = scenario.map_bounds;
  const Vec2 corners[4] = {{mb.x_min, mb.y_min}, {mb.x_max, mb.y_min},
                           {mb.x_max, mb.y_max}, {mb.x_min, mb.y_max}};

  for (int b = 0; b < s.n_beams; ++b) {
    const double local = -s.fov / 2.0 + s.fov * (static_cast<double>(b) / s.n_beams);
    const double ang = heading + local;
    const Vec2 dir{std::cos(ang), std::sin(ang)};

    double best = -1.0;
    std::size_t i = 0;
    for (const auto& so : scenario.static_obstacles) {
      double t = first_hit(origin, dir, so.shape, world.obstacle_poses[i++].position);
      if (t >= 0.0 && (best < 0.0 || t < best)) best = t;
    }
    for (const auto& dyn : scenario.dynamic_obstacles) {
      double t = first_hit(origin, dir, dyn.shape, world.obstacle_poses[i++].position);
      if (t >= 0.0 && (best < 0.0 || t < best)) best = t;
    }
    // map boundary walls
    for (int c = 0; c < 4; ++c) {
      double t = ray_segment_intersect(origin, dir, corners[c], corners[(c + 1) % 4]);
      if (t >= 0.0 && (best < 0.0 || t < best)) best = t;
    }

    if (best < 0.0 || best > s.max_range) continue;
    for (double z : s.beam_z_levels) {
      double range = best + (s.range_noise_sigma > 0.0 ? noise(rng) : 0.0);
      if (range < 0.0 || range > s.max_range) continue;
      scan.points.push_back({range * std::cos(local), range * std::sin(local), z});
    }
  }
  return scan;
}

}  // namespace mfnav
