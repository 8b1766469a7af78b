#pragma once

#include <array>
#include <random>
#include <vector>

#include "mfnav/perception.hpp"

namespace mfnav {

struct GmmParams {
  std::array<double, 3> means{0.0, 0.1, -0.1};
  std::array<double, 3> variances{0.002, 0.002, 0.002};
  std::array<double, 3> weights{0.4, 0.3, 0.3};

  void validate() const;  // throws std::invalid_argument
  double mixture_mean() const;
  double mixture_variance() const;

  static GmmParams sim_preset();
  static GmmParams real_preset();
};

struct PredictionConfig {
  GmmParams gmm = GmmParams::sim_preset();
  double speed_threshold = 0.3;
  int n_steps = 20;
  double step_size = 0.1;        // used when tie_step_to_speed is false
  bool tie_step_to_speed = true; // step = ||v_hat|| * dt_plan
  double dt_plan = 0.1;
  int samples_per_step = 3;
  bool zero_offsets = false;     // constant-velocity ablation: o forced to 0
};

struct VirtualPoint {
  Vec2 position;
  int source_track_id = 0;
  int step_index = 1;  // j in [1, n_steps]
  double source_speed = 0.0;
};

/// Draws a lateral offset: component k ~ Categorical(weights), then
/// Normal(mean_k, sqrt(variance_k)).
double sample_gmm(const GmmParams& params, std::mt19937_64& rng);

/// Scatters virtual points along the track's predicted direction; empty
/// when the smoothed speed does not exceed the threshold.
std::vector<VirtualPoint> scatter_points(const TrackedObstacle& track,
                                         const PredictionConfig& cfg, std::mt19937_64& rng);

std::vector<VirtualPoint> predict(const std::vector<TrackedObstacle>& tracks,
                                  const PredictionConfig& cfg, std::mt19937_64& rng);

}  // namespace mfnav
