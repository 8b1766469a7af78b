#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops of the pipeline: the obstacle hinge penalty
// accumulated over the constraint set at every rollout state, and the
// Gaussian-kernel weight sums of the point-cloud smoother. A scalar
// reference implementation always exists; an AVX2 variant is selected at
// runtime when the CPU supports it. Both are equivalence-tested.
namespace mfnav::kernels {

enum class Backend { Scalar, Avx2 };

/// Currently active backend (auto-detected on first use).
Backend active_backend();

/// Force a backend, used by the equivalence tests. Throws if unsupported.
void force_backend(Backend b);

std::string backend_name(Backend b);

struct HingeAccum {
  double cost = 0.0;  // sum_j eta_j * max(0, d_safe - dist_j)^2
  double gx = 0.0;    // d cost / d rx
  double gy = 0.0;    // d cost / d ry
};

/// dist_j = ||p_j - (rx, ry)|| - radius (disc footprint). Accumulates the
/// weighted hinge penalty and its gradient w.r.t. the robot position.
HingeAccum hinge_penalty(const double* px, const double* py, const double* eta,
                         std::size_t n, double rx, double ry, double radius,
                         double d_safe);

struct WeightSums {
  double w = 0.0;
  double wx = 0.0;
  double wy = 0.0;
};

/// Gaussian kernel sums over all points within sqrt(cutoff2) of (cx, cy):
/// w_i = exp(-d2_i * inv_two_sigma2), accumulating (w, w*x, w*y).
WeightSums gaussian_weight_sums(const double* xs, const double* ys, std::size_t n,
                                double cx, double cy, double inv_two_sigma2,
                                double cutoff2);

namespace detail {
HingeAccum hinge_penalty_scalar(const double* px, const double* py, const double* eta,
                                std::size_t n, double rx, double ry, double radius,
                                double d_safe);
WeightSums gaussian_weight_sums_scalar(const double* xs, const double* ys, std::size_t n,
                                       double cx, double cy, double inv_two_sigma2,
                                       double cutoff2);
HingeAccum hinge_penalty_avx2(const double* px, const double* py, const double* eta,
                              std::size_t n, double rx, double ry, double radius,
                              double d_safe);
WeightSums gaussian_weight_sums_avx2(const double* xs, const double* ys, std::size_t n,
                                     double cx, double cy, double inv_two_sigma2,
                                     double cutoff2);
bool avx2_supported();
}  // namespace detail

}  // namespace mfnav::kernels
