#include "mfnav/prediction.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mfnav {

void GmmParams::validate() const {
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("gmm weights must be non-negative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("gmm weights must sum to 1");
  for (double v : variances)
    if (v <= 0.0) throw std::invalid_argument("gmm variances must be > 0");
}

double GmmParams::mixture_mean() const {
  double m = 0.0;
  for (int k = 0; k < 3; ++k) m += weights[k] * means[k];
  return m;
}

double GmmParams::mixture_variance() const {
  const double m = mixture_mean();
  double second = 0.0;
  for (int k = 0; k < 3; ++k) second += weights[k] * (variances[k] + means[k] * means[k]);
  return second - m * m;
}

GmmParams GmmParams::sim_preset() {
  return {{0.0, 0.1, -0.1}, {0.002, 0.002, 0.002}, {0.4, 0.3, 0.3}};
}

GmmParams GmmParams::real_preset() {
  return {{0.0, 0.05, 0.1}, {0.01, 0.01, 0.01}, {0.3, 0.5, 0.2}};
}

double sample_gmm(const GmmParams& params, std::mt19937_64& rng) {
  std::discrete_distribution<int> component(params.weights.begin(), params.weights.end());
  const int k = component(rng);
  std::normal_distribution<double> normal(params.means[k], std::sqrt(params.variances[k]));
  return normal(rng);
}

std::vector<VirtualPoint> scatter_points(const TrackedObstacle& track,
                                         const PredictionConfig& cfg, std::mt19937_64& rng) {
  std::vector<VirtualPoint> out;
  const Vec2 v_hat = track.smoothed_velocity;
  const double speed = v_hat.norm();
  if (speed <= cfg.speed_threshold) return out;

  const Vec2 dir = v_hat * (1.0 / speed);
  const Vec2 perp = dir.perp();  // (-dy, dx)
  const Vec2 origin = track.position();
  const double step = cfg.tie_step_to_speed ? speed * cfg.dt_plan : cfg.step_size;

  out.reserve(static_cast<std::size_t>(cfg.n_steps) * cfg.samples_per_step);
  for (int j = 1; j <= cfg.n_steps; ++j) {
    for (int s = 0; s < cfg.samples_per_step; ++s) {
      const double o = cfg.zero_offsets ? 0.0 : sample_gmm(cfg.gmm, rng);
      VirtualPoint vp;
      vp.position = origin + dir * (static_cast<double>(j) * step) + perp * o;
      vp.source_track_id = track.id;
      vp.step_index = j;
      vp.source_speed = speed;
      out.push_back(vp);
    }
  }
  return out;
}

std::vector<VirtualPoint> predict(const std::vector<TrackedObstacle>& tracks,
                                  const PredictionConfig& cfg, std::mt19937_64& rng) {
  std::vector<VirtualPoint> out;
  for (const auto& t : tracks) {
    auto pts = scatter_points(t, cfg, rng);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

}  // namespace mfnav
