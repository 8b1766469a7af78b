#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "mfnav/geometry.hpp"

namespace mfnav {

struct DiscShape {
  double radius = 0.5;
};

struct PolygonShape {
  std::vector<Vec2> vertices;  // convex, counterclockwise
};

using ObstacleShape = std::variant<DiscShape, PolygonShape>;

struct WaypathKnot {
  double time = 0.0;
  Vec2 position;
};

struct ObstacleScript {
  ObstacleShape shape;
  std::vector<WaypathKnot> waypath;  // times strictly increasing
  bool is_static() const { return waypath.size() <= 1; }

  Vec2 position_at(double t) const;
  Vec2 velocity_at(double t) const;
};

struct SensorConfig {
  int n_beams = 72;
  double fov = 2.0 * M_PI;
  double max_range = 10.0;
  double range_noise_sigma = 0.0;
  double z_min = 0.1;
  double z_max = 1.0;
  std::vector<double> beam_z_levels = {0.0, 0.5, 1.2};
};

struct GoalSpec {
  double x = 0.0;
  double y = 0.0;
  double tolerance = 0.3;
};

struct RectBounds {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;
  bool contains(const Vec2& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct Scenario {
  RectBounds map_bounds;
  std::vector<ObstacleScript> static_obstacles;
  std::vector<ObstacleScript> dynamic_obstacles;
  Pose2D start;
  GoalSpec goal;
  std::vector<Vec2> waypoints;  // exactly 5
  SensorConfig sensor;
  double dt = 0.1;
  int max_steps = 1000;
  std::uint64_t seed = 0;

  double robot_radius = 0.4;
  double v_max = 1.5;
  double omega_max = 2.0;

  // optional tuning blocks carried through from the scenario file
  std::string planner_json;     // raw JSON of the "planner" key, empty if absent
  std::string prediction_json;  // raw JSON of the "prediction" key, empty if absent
};

struct ObstaclePose {
  int id = 0;
  Vec2 position;
  Vec2 velocity;  // ground truth
};

struct WorldState {
  double time = 0.0;
  RobotState robot;
  std::vector<ObstaclePose> obstacle_poses;
  bool collided = false;
};

struct LidarScan {
  double timestamp = 0.0;
  struct Point {
    double x, y, z;  // robot body frame
  };
  std::vector<Point> points;
};

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses and validates a scenario file. Throws ScenarioError naming the
/// offending field or invariant.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

WorldState initial_world(const Scenario& scenario);

/// Euler-integrates the robot, advances scripted obstacles, refreshes the
/// collided flag. Controls saturate at the scenario bounds.
WorldState step_world(const WorldState& world, const Scenario& scenario,
                      const ControlCommand& control, double dt);

/// Raycast lidar: one ray per beam per z-level, exact first-hit ranges with
/// Gaussian range noise, points in the robot body frame.
LidarScan simulate_lidar(const WorldState& world, const Scenario& scenario,
                         std::mt19937_64& rng);

double path_length(const std::vector<Pose2D>& trajectory);

/// Minimum distance from the robot footprint boundary to any obstacle
/// boundary; negative when penetrating.
double clearance(const WorldState& world, const Scenario& scenario);

/// Signed distance from a point to an obstacle boundary placed at `center`.
double obstacle_signed_distance(const Vec2& p, const ObstacleShape& shape, const Vec2& center);

}  // namespace mfnav
