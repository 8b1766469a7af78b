#include <cmath>

#include "mfnav/kernels.hpp"

namespace mfnav::kernels::detail {

HingeAccum hinge_penalty_scalar(const double* px, const double* py, const double* eta,
                                std::size_t n, double rx, double ry, double radius,
                                double d_safe) {
  HingeAccum acc;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = px[j] - rx;
    const double dy = py[j] - ry;
    const double r = std::sqrt(dx * dx + dy * dy);
    const double hinge = d_safe - (r - radius);
    if (hinge <= 0.0) continue;
    acc.cost += eta[j] * hinge * hinge;
    if (r > 1e-12) {
      // d hinge^2 / d rx = 2*hinge * (dx / r); dist decreases as robot approaches
      const double s = 2.0 * eta[j] * hinge / r;
      acc.gx += s * dx;
      acc.gy += s * dy;
    }
  }
  return acc;
}

WeightSums gaussian_weight_sums_scalar(const double* xs, const double* ys, std::size_t n,
                                       double cx, double cy, double inv_two_sigma2,
                                       double cutoff2) {
  WeightSums acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - cx;
    const double dy = ys[i] - cy;
    const double d2 = dx * dx + dy * dy;
    if (d2 > cutoff2) continue;
    const double w = std::exp(-d2 * inv_two_sigma2);
    acc.w += w;
    acc.wx += w * xs[i];
    acc.wy += w * ys[i];
  }
  return acc;
}

}  // namespace mfnav::kernels::detail
