#include <algorithm>
#include <limits>
#include <random>

#include "doctest.h"
#include "mfnav/planner.hpp"

using namespace mfnav;

namespace {

// Independent straight-line evaluator of the objective, written against the
// cost definition rather than the implementation (no shared kernels).
double cost_oracle(const std::vector<ControlCommand>& controls, const RobotState& state,
                   const ReferenceTrajectory& ref, const std::vector<ConstraintPoint>& points,
                   const PlannerConfig& cfg) {
  std::vector<Pose2D> s{state.pose};
  for (const auto& u : controls) {
    Pose2D p = s.back();
    s.push_back({p.x + u.v * std::cos(p.theta) * cfg.dt_plan,
                 p.y + u.v * std::sin(p.theta) * cfg.dt_plan, p.theta + u.omega * cfg.dt_plan});
  }
  double total = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    double ex = s[k].x - ref.states[k].x;
    double ey = s[k].y - ref.states[k].y;
    double et = normalize_angle(s[k].theta - ref.states[k].theta);
    total += cfg.q_weights[0] * ex * ex + cfg.q_weights[1] * ey * ey + cfg.q_weights[2] * et * et;
  }
  for (const auto& u : controls)
    total += cfg.r_weights[0] * u.v * u.v + cfg.r_weights[1] * u.omega * u.omega;
  for (std::size_t k = 1; k < s.size(); ++k) {
    for (const auto& p : points) {
      double dist = std::hypot(p.position.x - s[k].x, p.position.y - s[k].y) - cfg.robot_radius;
      double hinge = std::max(0.0, cfg.d_safe - dist);
      total += cfg.rho1 * p.eta * hinge * hinge;
    }
  }
  return total;
}

ReferenceTrajectory straight_ref(int horizon, double step, double y = 0.0) {
  ReferenceTrajectory ref;
  for (int k = 0; k <= horizon; ++k) ref.states.push_back({step * k, y, 0.0});
  return ref;
}

std::vector<Vec2> straight_waypoints() {
  return {{0, 0}, {2, 0}, {4, 0}, {6, 0}, {8, 0}};
}

}  // namespace

TEST_CASE("build_reference: arc-length marching from the polyline start") {
  PlannerConfig cfg;
  cfg.horizon = 3;
  cfg.v_ref = 1.0;
  cfg.dt_plan = 0.1;
  RobotState robot;
  ReferenceTrajectory ref = build_reference(straight_waypoints(), robot, cfg);
  REQUIRE(ref.states.size() == 4);
  for (int k = 0; k <= 3; ++k) {
    CHECK(ref.states[k].x == doctest::Approx(0.1 * k).epsilon(1e-12));
    CHECK(ref.states[k].y == doctest::Approx(0.0));
    CHECK(ref.states[k].theta == doctest::Approx(0.0));
  }
}

TEST_CASE("build_reference: past the final waypoint holds the final point") {
  PlannerConfig cfg;
  RobotState robot;
  robot.pose = {9.5, 0.3, 0.0};
  ReferenceTrajectory ref = build_reference(straight_waypoints(), robot, cfg);
  for (const auto& s : ref.states) {
    CHECK(s.x == doctest::Approx(8.0));
    CHECK(s.y == doctest::Approx(0.0));
  }
}

TEST_CASE("build_reference: lateral offset projects perpendicular") {
  PlannerConfig cfg;
  RobotState robot;
  robot.pose = {3.0, 1.0, 0.0};
  ReferenceTrajectory ref = build_reference(straight_waypoints(), robot, cfg);
  CHECK(ref.states[0].x == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(ref.states[0].y == doctest::Approx(0.0));
}

TEST_CASE("build_reference invariant: consecutive states at most v_ref*dt apart") {
  PlannerConfig cfg;
  cfg.v_ref = 1.3;
  std::vector<Vec2> wps = {{0, 0}, {1, 1}, {1.5, 0.2}, {3, 0}, {4, 2}};
  RobotState robot;
  robot.pose = {0.4, 0.6, 0.0};
  ReferenceTrajectory ref = build_reference(wps, robot, cfg);
  for (std::size_t k = 1; k < ref.states.size(); ++k) {
    double d = std::hypot(ref.states[k].x - ref.states[k - 1].x,
                          ref.states[k].y - ref.states[k - 1].y);
    CHECK(d <= cfg.v_ref * cfg.dt_plan + 1e-9);
  }
}

TEST_CASE("select_points: keeps the M nearest (brute-force sort oracle)") {
  PlannerConfig cfg;
  cfg.point_budget = 100;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0);

  PointCloud2D scan;
  for (int i = 0; i < 150; ++i) scan.points.push_back({u(rng), u(rng)});
  std::vector<VirtualPoint> vps;
  for (int i = 0; i < 60; ++i) vps.push_back({{u(rng), u(rng)}, 0, 1, 0.5});

  Pose2D robot{0.3, -0.2, 0.4};
  auto selected = select_points(scan, vps, robot, cfg);
  REQUIRE(selected.size() == 100);

  std::vector<double> all_d;
  for (const auto& p : scan.points) all_d.push_back((p - robot.position()).norm());
  for (const auto& vp : vps) all_d.push_back((vp.position - robot.position()).norm());
  std::sort(all_d.begin(), all_d.end());
  const double cutoff = all_d[99];
  for (const auto& cp : selected) CHECK(cp.position.norm() <= cutoff + 1e-9);
}

TEST_CASE("select_points: velocity weight and empty input") {
  PlannerConfig cfg;
  cfg.kappa = 1.0;
  std::vector<VirtualPoint> vps = {{{1, 0}, 7, 1, 1.0}};
  auto sel = select_points(PointCloud2D{}, vps, Pose2D{}, cfg);
  REQUIRE(sel.size() == 1);
  CHECK(sel[0].eta == doctest::Approx(2.0));
  CHECK(sel[0].origin == ConstraintOrigin::Virtual);

  CHECK(select_points(PointCloud2D{}, {}, Pose2D{}, cfg).empty());
}

TEST_CASE("point_distance sign convention") {
  RobotState state;
  CHECK(point_distance(state, {1, 0}, 0.4) == doctest::Approx(0.6));
  CHECK(point_distance(state, {0, 0}, 0.4) == doctest::Approx(-0.4));
  CHECK(point_distance(state, {0.4, 0}, 0.4) == doctest::Approx(0.0));
}

TEST_CASE("cost: zero residuals give zero cost") {
  PlannerConfig cfg;
  cfg.horizon = 5;
  std::vector<ControlCommand> zeros(5, {0.0, 0.0});
  RobotState state;  // at origin on a stationary reference
  ReferenceTrajectory ref = straight_ref(5, 0.0);
  auto bd = cost(zeros, state, ref, {}, cfg);
  CHECK(bd.total() == 0.0);
}

TEST_CASE("cost: obstacle term exactly zero with no points") {
  PlannerConfig cfg;
  cfg.horizon = 5;
  std::vector<ControlCommand> u(5, {1.0, 0.3});
  RobotState state;
  auto bd = cost(u, state, straight_ref(5, 0.1), {}, cfg);
  CHECK(bd.obstacle == 0.0);
  CHECK(bd.total() > 0.0);
}

TEST_CASE("cost matches the independent evaluator on random instances") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    PlannerConfig cfg;
    cfg.horizon = 5;
    RobotState state;
    state.pose = {u(rng), u(rng), u(rng)};
    std::vector<ControlCommand> controls;
    for (int k = 0; k < 5; ++k) controls.push_back({u(rng), u(rng)});
    ReferenceTrajectory ref;
    for (int k = 0; k <= 5; ++k) ref.states.push_back({u(rng), u(rng), u(rng)});
    std::vector<ConstraintPoint> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({{u(rng) * 2, u(rng) * 2}, 1.0 + std::abs(u(rng))});

    auto bd = cost(controls, state, ref, pts, cfg);
    CHECK(bd.total() == doctest::Approx(cost_oracle(controls, state, ref, pts, cfg)).epsilon(1e-9));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    PlannerConfig cfg;
    cfg.horizon = 2 + static_cast<int>(rng() % 9);  // H <= 10
    RobotState state;
    state.pose = {u(rng), u(rng), u(rng)};
    std::vector<ControlCommand> controls;
    for (int k = 0; k < cfg.horizon; ++k) controls.push_back({u(rng), u(rng)});
    ReferenceTrajectory ref;
    for (int k = 0; k <= cfg.horizon; ++k) ref.states.push_back({u(rng), u(rng), u(rng)});
    std::vector<ConstraintPoint> pts;
    const int npts = static_cast<int>(rng() % 21);
    for (int i = 0; i < npts; ++i) pts.push_back({{u(rng) * 2, u(rng) * 2}, 1.0 + std::abs(u(rng))});

    auto grad = cost_gradient(controls, state, ref, pts, cfg);
    for (std::size_t d = 0; d < grad.size(); ++d) {
      auto cp = controls, cm = controls;
      if (d % 2 == 0) {
        cp[d / 2].v += h;
        cm[d / 2].v -= h;
      } else {
        cp[d / 2].omega += h;
        cm[d / 2].omega -= h;
      }
      const double fd = (cost(cp, state, ref, pts, cfg).total() -
                         cost(cm, state, ref, pts, cfg).total()) / (2 * h);
      const double denom = std::max({1.0, std::abs(fd), std::abs(grad[d])});
      CHECK(std::abs(grad[d] - fd) / denom < 1e-4);
    }
  }
}

TEST_CASE("hinge correctness: far points contribute exactly zero") {
  PlannerConfig cfg;
  cfg.horizon = 5;
  std::vector<ControlCommand> u(5, {1.0, 0.0});
  RobotState state;
  // rollout stays within x in [0, 0.5]; point far beyond d_safe of every state
  std::vector<ConstraintPoint> pts = {{{10.0, 10.0}, 3.0}};
  auto bd = cost(u, state, straight_ref(5, 0.1), pts, cfg);
  CHECK(bd.obstacle == 0.0);
}

TEST_CASE("solve_mpc: free space drives straight") {
  PlannerConfig cfg;
  RobotState state;
  ReferenceTrajectory ref = straight_ref(cfg.horizon, cfg.v_ref * cfg.dt_plan);
  SolveReport rep;
  auto u = solve_mpc(state, ref, {}, cfg, {}, rep);
  REQUIRE(u.size() == static_cast<std::size_t>(cfg.horizon));
  CHECK(u[0].v > 0.0);
  CHECK(std::abs(u[0].omega) < 0.05);
  CHECK(rep.final_cost <= rep.initial_cost);
}

TEST_CASE("solve_mpc: avoids a point wall on the reference") {
  PlannerConfig cfg;
  RobotState state;
  ReferenceTrajectory ref = straight_ref(cfg.horizon, cfg.v_ref * cfg.dt_plan);
  std::vector<ConstraintPoint> wall;
  for (int i = -5; i <= 5; ++i) wall.push_back({{1.0, 0.1 * i}, 1.0});

  SolveReport rep;
  auto solution = solve_mpc(state, ref, wall, cfg, {}, rep);

  // naive reference tracker that ignores the wall
  std::vector<ControlCommand> naive(cfg.horizon, {cfg.v_ref, 0.0});
  CHECK(cost(solution, state, ref, wall, cfg).total() <
        cost(naive, state, ref, wall, cfg).total());
}

TEST_CASE("solve_mpc: converged warm start is a near fixed point") {
  PlannerConfig cfg;
  cfg.max_iterations = 200;
  RobotState state;
  ReferenceTrajectory ref = straight_ref(cfg.horizon, cfg.v_ref * cfg.dt_plan);
  SolveReport rep1;
  auto u1 = solve_mpc(state, ref, {}, cfg, {}, rep1);
  SolveReport rep2;
  solve_mpc(state, ref, {}, cfg, u1, rep2);
  CHECK(rep2.initial_cost - rep2.final_cost < 1e-6);
}

TEST_CASE("solve_mpc: cost history is non-increasing") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PlannerConfig cfg;
  cfg.horizon = 8;
  RobotState state;
  ReferenceTrajectory ref = straight_ref(8, 0.12, 0.3);
  std::vector<ConstraintPoint> pts;
  for (int i = 0; i < 15; ++i) pts.push_back({{u(rng), u(rng)}, 1.5});
  SolveReport rep;
  solve_mpc(state, ref, pts, cfg, {}, rep);
  for (std::size_t i = 1; i < rep.cost_history.size(); ++i)
    CHECK(rep.cost_history[i] <= rep.cost_history[i - 1] + 1e-12);
}

TEST_CASE("raising rho1 by 10x never increases the raw obstacle violation") {
  // classic penalty-method monotonicity: at the optimum, the unweighted
  // violation sum (obstacle term / rho1) is non-increasing in rho1, and the
  // non-obstacle part of the cost is non-decreasing.
  PlannerConfig cfg;
  cfg.horizon = 10;
  cfg.max_iterations = 300;
  RobotState state;
  ReferenceTrajectory ref = straight_ref(10, 0.1);
  std::vector<ConstraintPoint> pts;
  for (int i = -3; i <= 3; ++i) pts.push_back({{0.8, 0.15 * i}, 1.0});

  SolveReport r1, r2;
  auto u1 = solve_mpc(state, ref, pts, cfg, {}, r1);
  auto bd1 = cost(u1, state, ref, pts, cfg);

  PlannerConfig cfg10 = cfg;
  cfg10.rho1 *= 10.0;
  auto u2 = solve_mpc(state, ref, pts, cfg10, {}, r2);
  auto bd2 = cost(u2, state, ref, pts, cfg10);

  REQUIRE(bd1.obstacle > 0.0);  // constraints active at the base optimum
  CHECK(bd2.obstacle / cfg10.rho1 <= bd1.obstacle / cfg.rho1 + 1e-9);
  CHECK(bd2.tracking + bd2.control >= bd1.tracking + bd1.control - 1e-9);
}

TEST_CASE("tiny-instance brute force: continuous optimum beats the 21x21 grid") {
  PlannerConfig cfg;
  cfg.horizon = 2;
  cfg.max_iterations = 300;
  RobotState state;
  ReferenceTrajectory ref = straight_ref(2, 0.15, 0.05);
  std::vector<ConstraintPoint> pts = {{{0.3, 0.0}, 1.0}};

  double best_grid = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= 20; ++a)
    for (int b = 0; b <= 20; ++b)
      for (int c = 0; c <= 20; ++c)
        for (int d = 0; d <= 20; ++d) {
          std::vector<ControlCommand> u = {
              {-cfg.v_max + 2 * cfg.v_max * a / 20.0, -cfg.omega_max + 2 * cfg.omega_max * b / 20.0},
              {-cfg.v_max + 2 * cfg.v_max * c / 20.0, -cfg.omega_max + 2 * cfg.omega_max * d / 20.0}};
          best_grid = std::min(best_grid, cost(u, state, ref, pts, cfg).total());
        }

  SolveReport rep;
  auto u = solve_mpc(state, ref, pts, cfg, {}, rep);
  CHECK(cost(u, state, ref, pts, cfg).total() <= best_grid + 1e-3);
}

TEST_CASE("solve_mpc: non-finite cost aborts with the offending iterate") {
  PlannerConfig cfg;
  RobotState state;
  state.pose.x = std::numeric_limits<double>::quiet_NaN();
  ReferenceTrajectory ref = straight_ref(cfg.horizon, 0.1);
  SolveReport rep;
  CHECK_THROWS_AS(solve_mpc(state, ref, {}, cfg, {}, rep), SolverAbort);
}

TEST_CASE("postprocess") {
  ControlPostConfig cfg;
  cfg.lowpass_beta = 0.5;
  cfg.omega_clip = 1.0;
  ControlCommand out = postprocess(1.0, 2.0, 0.0, cfg);
  CHECK(out.v == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.omega == doctest::Approx(1.0));

  cfg.lowpass_beta = 0.0;
  CHECK(postprocess(0.7, 0.0, 0.3, cfg).v == doctest::Approx(0.7));
}

TEST_CASE("postprocess invariants: clip bound and convexity") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> bu(0.0, 0.999);
  for (int i = 0; i < 1000; ++i) {
    ControlPostConfig cfg;
    cfg.lowpass_beta = bu(rng);
    cfg.omega_clip = 0.1 + std::abs(u(rng));
    const double v_star = u(rng), prev = u(rng);
    ControlCommand out = postprocess(v_star, u(rng), prev, cfg);
    CHECK(std::abs(out.omega) <= cfg.omega_clip);
    CHECK(out.v >= std::min(prev, v_star) - 1e-12);
    CHECK(out.v <= std::max(prev, v_star) + 1e-12);
  }
}
