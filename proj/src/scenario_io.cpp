#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mfnav/world.hpp"

namespace mfnav {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ScenarioError(field + ": " + msg);
}

Vec2 parse_vec2(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() < 2) fail(field, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

ObstacleScript parse_obstacle(const json& j, const std::string& field) {
  ObstacleScript ob;
  if (!j.contains("shape")) fail(field + ".shape", "missing");
  const json& sh = j["shape"];
  const std::string type = sh.value("type", "disc");
  if (type == "disc") {
    double r = sh.value("radius", 0.5);
    if (r <= 0.0) fail(field + ".shape.radius", "must be > 0");
    ob.shape = DiscShape{r};
  } else if (type == "polygon") {
    PolygonShape poly;
    for (const auto& v : sh.at("vertices")) poly.vertices.push_back(parse_vec2(v, field + ".shape.vertices"));
    if (poly.vertices.size() < 3) fail(field + ".shape.vertices", "polygon needs >= 3 vertices");
    // convex and counterclockwise
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = poly.vertices[i];
      const Vec2 b = poly.vertices[(i + 1) % n];
      const Vec2 c = poly.vertices[(i + 2) % n];
      const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
      if (cross < 0.0) fail(field + ".shape.vertices", "polygon must be convex and counterclockwise");
    }
    ob.shape = std::move(poly);
  } else {
    fail(field + ".shape.type", "unknown shape '" + type + "'");
  }

  if (j.contains("waypath")) {
    double prev_t = -std::numeric_limits<double>::infinity();
    for (const auto& k : j["waypath"]) {
      WaypathKnot knot;
      knot.time = k.at("t").get<double>();
      knot.position = {k.at("x").get<double>(), k.at("y").get<double>()};
      if (knot.time <= prev_t) fail(field + ".waypath", "times must be strictly increasing");
      prev_t = knot.time;
      ob.waypath.push_back(knot);
    }
  } else if (j.contains("position")) {
    ob.waypath.push_back({0.0, parse_vec2(j["position"], field + ".position")});
  }
  if (ob.waypath.empty()) fail(field, "needs 'waypath' or 'position'");
  return ob;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }

  Scenario sc;

  const json& map = j.contains("map") ? j["map"] : json::object();
  if (map.contains("bounds")) {
    const auto& b = map["bounds"];
    if (!b.is_array() || b.size() != 4) fail("map.bounds", "expected [x_min, y_min, x_max, y_max]");
    sc.map_bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  } else {
    fail("map.bounds", "missing");
  }

  const json& robot = j.contains("robot") ? j["robot"] : json::object();
  if (!robot.contains("start")) fail("robot.start", "missing");
  const auto& st = robot["start"];
  sc.start = {st[0].get<double>(), st[1].get<double>(),
              st.size() > 2 ? normalize_angle(st[2].get<double>()) : 0.0};
  if (!robot.contains("goal")) fail("robot.goal", "missing");
  const auto& gl = robot["goal"];
  sc.goal = {gl[0].get<double>(), gl[1].get<double>(),
             gl.size() > 2 ? gl[2].get<double>() : 0.3};
  sc.robot_radius = robot.value("radius", 0.4);
  sc.v_max = robot.value("v_max", 1.5);
  sc.omega_max = robot.value("omega_max", 2.0);

  if (j.contains("sensor")) {
    const json& s = j["sensor"];
    sc.sensor.n_beams = s.value("n_beams", sc.sensor.n_beams);
    sc.sensor.fov = s.value("fov", sc.sensor.fov);
    sc.sensor.max_range = s.value("max_range", sc.sensor.max_range);
    sc.sensor.range_noise_sigma = s.value("range_noise_sigma", sc.sensor.range_noise_sigma);
    if (s.contains("z_band")) {
      sc.sensor.z_min = s["z_band"][0].get<double>();
      sc.sensor.z_max = s["z_band"][1].get<double>();
    }
    if (s.contains("beam_z_levels"))
      sc.sensor.beam_z_levels = s["beam_z_levels"].get<std::vector<double>>();
  }
  if (sc.sensor.n_beams < 1) fail("sensor.n_beams", "must be >= 1");
  if (sc.sensor.max_range <= 0.0) fail("sensor.max_range", "must be > 0");
  if (sc.sensor.z_min >= sc.sensor.z_max) fail("sensor.z_band", "z_min must be < z_max");

  if (!j.contains("waypoints")) fail("waypoints", "missing");
  for (const auto& w : j["waypoints"]) sc.waypoints.push_back(parse_vec2(w, "waypoints"));
  if (sc.waypoints.size() != 5) fail("waypoints", "expected 5");

  if (j.contains("obstacles")) {
    int idx = 0;
    for (const auto& o : j["obstacles"]) {
      std::string field = "obstacles[" + std::to_string(idx++) + "]";
      ObstacleScript ob = parse_obstacle(o, field);
      if (ob.is_static())
        sc.static_obstacles.push_back(std::move(ob));
      else
        sc.dynamic_obstacles.push_back(std::move(ob));
    }
  }

  sc.dt = j.value("dt", 0.1);
  if (sc.dt <= 0.0) fail("dt", "must be > 0");
  sc.max_steps = j.value("max_steps", 1000);
  if (sc.max_steps < 1) fail("max_steps", "must be >= 1");
  sc.seed = j.value("seed", std::uint64_t{0});

  if (!sc.map_bounds.contains(sc.start.position())) fail("robot.start", "outside map bounds");
  if (!sc.map_bounds.contains({sc.goal.x, sc.goal.y})) fail("robot.goal", "outside map bounds");

  if (j.contains("planner")) sc.planner_json = j["planner"].dump();
  if (j.contains("prediction")) sc.prediction_json = j["prediction"].dump();

  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace mfnav
