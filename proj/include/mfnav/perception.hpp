#pragma once

#include <Eigen/Dense>
#include <deque>
#include <vector>

#include "mfnav/geometry.hpp"
#include "mfnav/world.hpp"

namespace mfnav {

struct PointCloud2D {
  std::vector<Vec2> points;
  double timestamp = 0.0;
};

struct DbscanParams {
  double epsilon = 1.0;
  int min_pts = 5;
};

struct Cluster {
  std::vector<Vec2> members;
  Vec2 centroid;
  double bounding_radius = 0.0;
};

struct DbscanResult {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> noise;  // indices into the input cloud
};

struct TrackedObstacle {
  int id = 0;
  Eigen::Vector4d state = Eigen::Vector4d::Zero();  // px, py, vx, vy
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  Vec2 smoothed_velocity;
  int age = 1;
  int missed = 0;
  double last_time = 0.0;
  Cluster last_cluster;

  Vec2 position() const { return {state[0], state[1]}; }
  Vec2 raw_velocity() const { return {state[2], state[3]}; }
};

/// Ring of the latest preprocessed clouds; capacity fixed at 10 frames.
class FrameBuffer {
 public:
  static constexpr std::size_t kCapacity = 10;

  void push(PointCloud2D cloud);
  bool empty() const { return frames_.empty(); }
  std::size_t size() const { return frames_.size(); }
  const PointCloud2D& newest() const { return frames_.back(); }
  const PointCloud2D& at(std::size_t i) const { return frames_[i]; }

 private:
  std::deque<PointCloud2D> frames_;
};

struct KalmanConfig {
  double process_noise = 0.05;      // per-axis acceleration density
  double measurement_noise = 0.05;  // position sigma, m
};

struct PerceptionConfig {
  double z_min = 0.1;
  double z_max = 1.0;
  double downsample_cell = 0.05;
  double gaussian_sigma = 0.1;
  DbscanParams dbscan;
  double match_gate = 1.0;
  int miss_limit = 3;
  KalmanConfig kalman;
  double smoothing_alpha = 0.7;
};

struct TrackerState {
  std::vector<TrackedObstacle> tracks;
  int next_id = 0;
};

/// Height-band filter, planar projection, grid downsample (cell centroid).
PointCloud2D preprocess_scan(const LidarScan& scan, double z_min, double z_max, double cell);

/// Body frame -> world frame at the given robot pose.
PointCloud2D transform_cloud(const PointCloud2D& cloud, const Pose2D& robot_pose);

/// Each point becomes the Gaussian-weighted mean of its neighbors within
/// 3*sigma (self included). Point count unchanged.
PointCloud2D gaussian_filter(const PointCloud2D& cloud, double sigma);

DbscanResult dbscan(const PointCloud2D& cloud, const DbscanParams& params);

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track index, cluster index)
  std::vector<std::size_t> births;                           // unmatched cluster indices
  std::vector<std::size_t> unmatched_tracks;                 // track indices with no cluster
};

/// Greedy matching by ascending centroid distance, gated; ties broken by
/// lower track id then lower cluster index.
MatchResult match_clusters(const std::vector<TrackedObstacle>& tracks,
                           const std::vector<Cluster>& clusters, double gate);

/// Constant-velocity predict + position update. Throws std::invalid_argument
/// if the input covariance is not symmetric PSD.
TrackedObstacle kalman_update(const TrackedObstacle& track, const Vec2& measured_centroid,
                              double dt, const KalmanConfig& cfg);

/// v_hat_k = alpha * v_hat_{k-1} + (1 - alpha) * v_k
Vec2 smooth_velocity(const Vec2& prev, const Vec2& meas, double alpha);

/// Full per-frame pipeline on the newest buffered cloud; mutates the tracker.
std::vector<TrackedObstacle> perceive(const FrameBuffer& buffer, TrackerState& state,
                                      const PerceptionConfig& cfg);

}  // namespace mfnav
