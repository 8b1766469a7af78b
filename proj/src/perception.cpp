#include "mfnav/perception.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mfnav/kernels.hpp"

namespace mfnav {

void FrameBuffer::push(PointCloud2D cloud) {
  frames_.push_back(std::move(cloud));
  if (frames_.size() > kCapacity) frames_.pop_front();
}

PointCloud2D preprocess_scan(const LidarScan& scan, double z_min, double z_max, double cell) {
  struct CellAccum {
    double sx = 0.0, sy = 0.0;
    int n = 0;
  };
  // ordered map keeps the output deterministic
  std::map<std::pair<long, long>, CellAccum> grid;
  for (const auto& p : scan.points) {
    if (p.z < z_min || p.z > z_max) continue;
    auto key = std::make_pair(static_cast<long>(std::floor(p.x / cell)),
                              static_cast<long>(std::floor(p.y / cell)));
    auto& acc = grid[key];
    acc.sx += p.x;
    acc.sy += p.y;
    acc.n += 1;
  }
  PointCloud2D out;
  out.timestamp = scan.timestamp;
  out.points.reserve(grid.size());
  for (const auto& [key, acc] : grid)
    out.points.push_back({acc.sx / acc.n, acc.sy / acc.n});
  return out;
}

PointCloud2D transform_cloud(const PointCloud2D& cloud, const Pose2D& robot_pose) {
  PointCloud2D out;
  out.timestamp = cloud.timestamp;
  out.points.reserve(cloud.points.size());
  const double c = std::cos(robot_pose.theta);
  const double s = std::sin(robot_pose.theta);
  for (const auto& p : cloud.points)
    out.points.push_back({robot_pose.x + c * p.x - s * p.y,
                          robot_pose.y + s * p.x + c * p.y});
  return out;
}

PointCloud2D gaussian_filter(const PointCloud2D& cloud, double sigma) {
  const std::size_t n = cloud.points.size();
  PointCloud2D out;
  out.timestamp = cloud.timestamp;
  out.points.resize(n);
  if (n == 0) return out;

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = cloud.points[i].x;
    ys[i] = cloud.points[i].y;
  }
  const double cutoff2 = 9.0 * sigma * sigma;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t i = 0; i < n; ++i) {
    auto sums = kernels::gaussian_weight_sums(xs.data(), ys.data(), n, xs[i], ys[i],
                                              inv_two_sigma2, cutoff2);
    out.points[i] = {sums.wx / sums.w, sums.wy / sums.w};
  }
  return out;
}

DbscanResult dbscan(const PointCloud2D& cloud, const DbscanParams& params) {
  const std::size_t n = cloud.points.size();
  DbscanResult result;
  if (n == 0) return result;

  const double eps2 = params.epsilon * params.epsilon;
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((cloud.points[i] - cloud.points[j]).squaredNorm() <= eps2)
        neighbors[i].push_back(j);  // includes self
    }
  }

  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i)
    core[i] = static_cast<int>(neighbors[i].size()) >= params.min_pts;

  // density-connected components over core points
  constexpr int kNoise = -1;
  std::vector<int> label(n, kNoise);
  int cluster_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || label[i] != kNoise) continue;
    label[i] = cluster_id;
    std::vector<std::size_t> frontier{i};
    while (!frontier.empty()) {
      const std::size_t p = frontier.back();
      frontier.pop_back();
      for (std::size_t q : neighbors[p]) {
        if (!core[q] || label[q] != kNoise) continue;
        label[q] = cluster_id;
        frontier.push_back(q);
      }
    }
    ++cluster_id;
  }
  // border points join the cluster of their lowest-index core neighbor
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (std::size_t q : neighbors[i]) {
      if (core[q]) {
        label[i] = label[q];
        break;
      }
    }
  }

  result.clusters.resize(cluster_id);
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kNoise)
      result.noise.push_back(i);
    else
      result.clusters[label[i]].members.push_back(cloud.points[i]);
  }
  for (auto& c : result.clusters) {
    Vec2 sum;
    for (const auto& p : c.members) sum = sum + p;
    c.centroid = sum * (1.0 / static_cast<double>(c.members.size()));
    for (const auto& p : c.members)
      c.bounding_radius = std::max(c.bounding_radius, (p - c.centroid).norm());
  }
  return result;
}

MatchResult match_clusters(const std::vector<TrackedObstacle>& tracks,
                           const std::vector<Cluster>& clusters, double gate) {
  struct Candidate {
    double dist;
    int track_id;
    std::size_t track_idx;
    std::size_t cluster_idx;
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      double d = (tracks[t].position() - clusters[c].centroid).norm();
      if (d <= gate) candidates.push_back({d, tracks[t].id, t, c});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.track_id != b.track_id) return a.track_id < b.track_id;
    return a.cluster_idx < b.cluster_idx;
  });

  MatchResult result;
  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> cluster_used(clusters.size(), false);
  for (const auto& c : candidates) {
    if (track_used[c.track_idx] || cluster_used[c.cluster_idx]) continue;
    track_used[c.track_idx] = true;
    cluster_used[c.cluster_idx] = true;
    result.matches.emplace_back(c.track_idx, c.cluster_idx);
  }
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (!cluster_used[c]) result.births.push_back(c);
  for (std::size_t t = 0; t < tracks.size(); ++t)
    if (!track_used[t]) result.unmatched_tracks.push_back(t);
  return result;
}

namespace {

void check_psd(const Eigen::Matrix4d& P) {
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-6)
    throw std::invalid_argument("kalman_update: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(P);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("kalman_update: covariance not PSD");
}

}  // namespace

TrackedObstacle kalman_update(const TrackedObstacle& track, const Vec2& measured_centroid,
                              double dt, const KalmanConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("kalman_update: dt must be > 0");
  check_psd(track.covariance);

  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;

  // discretized white-acceleration process noise, per axis
  const double q = cfg.process_noise;
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt2 * dt2;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  Q(0, 0) = Q(1, 1) = q * dt4 / 4.0;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = q * dt3 / 2.0;
  Q(2, 2) = Q(3, 3) = q * dt2;

  Eigen::Vector4d x = F * track.state;
  Eigen::Matrix4d P = F * track.covariance * F.transpose() + Q;

  Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;
  const double r2 = cfg.measurement_noise * cfg.measurement_noise;
  Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * r2;

  Eigen::Vector2d z(measured_centroid.x, measured_centroid.y);
  Eigen::Vector2d innov = z - H * x;
  Eigen::Matrix2d S = H * P * H.transpose() + R;
  Eigen::Matrix<double, 4, 2> K = P * H.transpose() * S.inverse();

  TrackedObstacle out = track;
  out.state = x + K * innov;
  // Joseph form keeps the covariance symmetric PSD
  Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * H;
  out.covariance = IKH * P * IKH.transpose() + K * R * K.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

Vec2 smooth_velocity(const Vec2& prev, const Vec2& meas, double alpha) {
  return {alpha * prev.x + (1.0 - alpha) * meas.x,
          alpha * prev.y + (1.0 - alpha) * meas.y};
}

std::vector<TrackedObstacle> perceive(const FrameBuffer& buffer, TrackerState& state,
                                      const PerceptionConfig& cfg) {
  if (buffer.empty()) throw std::invalid_argument("perceive: empty frame buffer");
  const PointCloud2D& frame = buffer.newest();

  PointCloud2D filtered = gaussian_filter(frame, cfg.gaussian_sigma);
  DbscanResult clustered = dbscan(filtered, cfg.dbscan);

  MatchResult match = match_clusters(state.tracks, clustered.clusters, cfg.match_gate);

  std::vector<TrackedObstacle> next_tracks;
  next_tracks.reserve(state.tracks.size() + match.births.size());

  for (const auto& [t_idx, c_idx] : match.matches) {
    const TrackedObstacle& prev = state.tracks[t_idx];
    const Cluster& cluster = clustered.clusters[c_idx];
    double dt = frame.timestamp - prev.last_time;
    if (dt <= 0.0) dt = 1e-3;
    TrackedObstacle updated = kalman_update(prev, cluster.centroid, dt, cfg.kalman);
    updated.smoothed_velocity =
        smooth_velocity(prev.smoothed_velocity, updated.raw_velocity(), cfg.smoothing_alpha);
    updated.age += 1;
    updated.missed = 0;
    updated.last_time = frame.timestamp;
    updated.last_cluster = cluster;
    next_tracks.push_back(std::move(updated));
  }

  for (std::size_t t_idx : match.unmatched_tracks) {
    TrackedObstacle t = state.tracks[t_idx];
    t.missed += 1;
    if (t.missed > cfg.miss_limit) continue;  // death
    next_tracks.push_back(std::move(t));
  }

  for (std::size_t c_idx : match.births) {
    const Cluster& cluster = clustered.clusters[c_idx];
    TrackedObstacle t;
    t.id = state.next_id++;
    t.state << cluster.centroid.x, cluster.centroid.y, 0.0, 0.0;
    t.covariance = Eigen::Matrix4d::Identity();
    t.covariance(0, 0) = t.covariance(1, 1) = 0.1;
    t.covariance(2, 2) = t.covariance(3, 3) = 10.0;  // inflated velocity block
    t.smoothed_velocity = {0.0, 0.0};
    t.age = 1;
    t.missed = 0;
    t.last_time = frame.timestamp;
    t.last_cluster = cluster;
    next_tracks.push_back(std::move(t));
  }

  std::sort(next_tracks.begin(), next_tracks.end(),
            [](const TrackedObstacle& a, const TrackedObstacle& b) { return a.id < b.id; });
  state.tracks = next_tracks;
  return next_tracks;
}

}  // namespace mfnav
