#include <stdexcept>

#include "mfnav/kernels.hpp"

namespace mfnav::kernels {

namespace {
Backend detect() { return detail::avx2_supported() ? Backend::Avx2 : Backend::Scalar; }
Backend g_backend = detect();
}  // namespace

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !detail::avx2_supported())
    throw std::runtime_error("AVX2 backend not supported on this CPU");
  g_backend = b;
}

std::string backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

HingeAccum hinge_penalty(const double* px, const double* py, const double* eta,
                         std::size_t n, double rx, double ry, double radius,
                         double d_safe) {
  if (g_backend == Backend::Avx2)
    return detail::hinge_penalty_avx2(px, py, eta, n, rx, ry, radius, d_safe);
  return detail::hinge_penalty_scalar(px, py, eta, n, rx, ry, radius, d_safe);
}

WeightSums gaussian_weight_sums(const double* xs, const double* ys, std::size_t n,
                                double cx, double cy, double inv_two_sigma2,
                                double cutoff2) {
  if (g_backend == Backend::Avx2)
    return detail::gaussian_weight_sums_avx2(xs, ys, n, cx, cy, inv_two_sigma2, cutoff2);
  return detail::gaussian_weight_sums_scalar(xs, ys, n, cx, cy, inv_two_sigma2, cutoff2);
}

}  // namespace mfnav::kernels
