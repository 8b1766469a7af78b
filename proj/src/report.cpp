#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfnav/harness.hpp"

namespace mfnav {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '/' || c == ' ') c = '-';
  return s;
}

std::string trial_id(const TrialResult& t) {
  return sanitize(t.scenario_name) + "_" + sanitize(mode_name(t.mode)) + "_" +
         std::to_string(t.seed);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string render_trial_svg(const TrialResult& trial, const Scenario& scenario) {
  const RectBounds& b = scenario.map_bounds;
  const double margin = 1.0;
  const double w = b.x_max - b.x_min + 2 * margin;
  const double h = b.y_max - b.y_min + 2 * margin;
  const double scale = 40.0;

  std::ostringstream svg;
  auto X = [&](double x) { return (x - b.x_min + margin) * scale; };
  auto Y = [&](double y) { return (b.y_max - y + margin) * scale; };

  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w * scale)
      << "\" height=\"" << fmt(h * scale) << "\">\n";
  svg << "<rect x=\"" << fmt(X(b.x_min)) << "\" y=\"" << fmt(Y(b.y_max)) << "\" width=\""
      << fmt((b.x_max - b.x_min) * scale) << "\" height=\"" << fmt((b.y_max - b.y_min) * scale)
      << "\" fill=\"white\" stroke=\"black\"/>\n";

  auto draw_shape = [&](const ObstacleShape& shape, const Vec2& center, const char* fill) {
    if (const auto* disc = std::get_if<DiscShape>(&shape)) {
      svg << "<circle cx=\"" << fmt(X(center.x)) << "\" cy=\"" << fmt(Y(center.y)) << "\" r=\""
          << fmt(disc->radius * scale) << "\" fill=\"" << fill << "\"/>\n";
    } else {
      const auto& poly = std::get<PolygonShape>(shape);
      svg << "<polygon points=\"";
      for (const auto& v : poly.vertices)
        svg << fmt(X(center.x + v.x)) << "," << fmt(Y(center.y + v.y)) << " ";
      svg << "\" fill=\"" << fill << "\"/>\n";
    }
  };

  for (const auto& so : scenario.static_obstacles)
    draw_shape(so.shape, so.position_at(0.0), "#444444");
  for (const auto& dyn : scenario.dynamic_obstacles) {
    draw_shape(dyn.shape, dyn.position_at(0.0), "#cc8800");
    svg << "<polyline fill=\"none\" stroke=\"#cc8800\" stroke-dasharray=\"4 3\" points=\"";
    for (const auto& k : dyn.waypath) svg << fmt(X(k.position.x)) << "," << fmt(Y(k.position.y)) << " ";
    svg << "\"/>\n";
  }

  svg << "<polyline fill=\"none\" stroke=\"#999999\" points=\"";
  for (const auto& wp : scenario.waypoints) svg << fmt(X(wp.x)) << "," << fmt(Y(wp.y)) << " ";
  svg << "\"/>\n";
  for (const auto& wp : scenario.waypoints)
    svg << "<circle cx=\"" << fmt(X(wp.x)) << "\" cy=\"" << fmt(Y(wp.y))
        << "\" r=\"3\" fill=\"#999999\"/>\n";

  svg << "<polyline fill=\"none\" stroke=\"#cc0000\" stroke-width=\"2\" points=\"";
  for (const auto& s : trial.trajectory) svg << fmt(X(s.x)) << "," << fmt(Y(s.y)) << " ";
  svg << "\"/>\n";

  svg << "<circle cx=\"" << fmt(X(scenario.start.x)) << "\" cy=\"" << fmt(Y(scenario.start.y))
      << "\" r=\"5\" fill=\"#0066cc\"/>\n";
  svg << "<circle cx=\"" << fmt(X(scenario.goal.x)) << "\" cy=\"" << fmt(Y(scenario.goal.y))
      << "\" r=\"" << fmt(scenario.goal.tolerance * scale)
      << "\" fill=\"none\" stroke=\"#009900\" stroke-width=\"2\"/>\n";
  svg << "<text x=\"8\" y=\"16\" font-size=\"14\">" << trial_id(trial) << " ["
      << status_name(trial.status) << ", " << fmt(trial.metrics.path_length_m) << " m]</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void emit_report(const AblationReport& report,
                 const std::vector<std::pair<std::string, Scenario>>& scenarios,
                 const std::string& out_dir, bool include_timing) {
  if (report.trials.empty()) throw std::runtime_error("no results to report");
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  auto scenario_of = [&](const std::string& name) -> const Scenario& {
    for (const auto& [n, sc] : scenarios)
      if (n == name) return sc;
    throw std::runtime_error("emit_report: unknown scenario " + name);
  };

  // metrics.json — hand-formatted for stable key order and float format
  std::ostringstream js;
  js << "{\n  \"trials\": [\n";
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    const auto& t = report.trials[i];
    js << "    {\"scenario\": \"" << t.scenario_name << "\", \"mode\": \"" << mode_name(t.mode)
       << "\", \"planner\": \"" << t.planner_name << "\", \"seed\": " << t.seed
       << ", \"status\": \"" << status_name(t.status) << "\", \"path_length_m\": "
       << fmt(t.metrics.path_length_m) << ", \"min_clearance_m\": "
       << fmt(t.metrics.min_clearance_m) << ", \"steps\": " << t.metrics.steps;
    if (include_timing)
      js << ", \"mean_cycle_ms\": " << fmt(t.metrics.mean_cycle_ms)
         << ", \"p95_cycle_ms\": " << fmt(t.metrics.p95_cycle_ms);
    js << "}" << (i + 1 < report.trials.size() ? "," : "") << "\n";
  }
  js << "  ],\n  \"summary\": [\n";
  for (std::size_t i = 0; i < report.summary.size(); ++i) {
    const auto& r = report.summary[i];
    js << "    {\"scenario\": \"" << r.scenario_name << "\", \"mode\": \"" << r.mode
       << "\", \"trials\": " << r.trials << ", \"successes\": " << r.successes
       << ", \"mean_path_m\": " << fmt(r.mean_path_m) << ", \"stddev_path_m\": "
       << fmt(r.stddev_path_m);
    if (include_timing) js << ", \"mean_cycle_ms\": " << fmt(r.mean_cycle_ms);
    js << "}" << (i + 1 < report.summary.size() ? "," : "") << "\n";
  }
  js << "  ]\n}\n";
  write_file(dir / "metrics.json", js.str());

  // table.csv
  std::ostringstream csv;
  csv << "scenario,mode,trials,successes,mean_path_m,stddev_path_m";
  if (include_timing) csv << ",mean_cycle_ms";
  csv << "\n";
  for (const auto& r : report.summary) {
    csv << r.scenario_name << "," << r.mode << "," << r.trials << "," << r.successes << ","
        << fmt(r.mean_path_m) << "," << fmt(r.stddev_path_m);
    if (include_timing) csv << "," << fmt(r.mean_cycle_ms);
    csv << "\n";
  }
  write_file(dir / "table.csv", csv.str());

  // per-trial trajectory CSVs and SVG plots
  for (const auto& t : report.trials) {
    std::ostringstream traj;
    traj << "t,x,y,theta,v,omega,clearance\n";
    for (const auto& s : t.trajectory)
      traj << fmt(s.t) << "," << fmt(s.x) << "," << fmt(s.y) << "," << fmt(s.theta) << ","
           << fmt(s.v) << "," << fmt(s.omega) << "," << fmt(s.clearance) << "\n";
    write_file(dir / ("traj_" + trial_id(t) + ".csv"), traj.str());
    write_file(dir / ("traj_" + trial_id(t) + ".svg"),
               render_trial_svg(t, scenario_of(t.scenario_name)));
  }
}

}  // namespace mfnav
