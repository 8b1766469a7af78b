#include <cmath>

#include "mfnav/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace mfnav::kernels::detail {

namespace {
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}
}  // namespace

HingeAccum hinge_penalty_avx2(const double* px, const double* py, const double* eta,
                              std::size_t n, double rx, double ry, double radius,
                              double d_safe) {
  const __m256d vrx = _mm256_set1_pd(rx);
  const __m256d vry = _mm256_set1_pd(ry);
  const __m256d vrad = _mm256_set1_pd(radius);
  const __m256d vsafe = _mm256_set1_pd(d_safe);
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d veps = _mm256_set1_pd(1e-12);
  const __m256d vtwo = _mm256_set1_pd(2.0);

  __m256d cost = vzero, gx = vzero, gy = vzero;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + j), vrx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + j), vry);
    const __m256d r2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    const __m256d r = _mm256_sqrt_pd(r2);
    const __m256d hinge = _mm256_sub_pd(vsafe, _mm256_sub_pd(r, vrad));
    const __m256d active = _mm256_cmp_pd(hinge, vzero, _CMP_GT_OQ);
    if (_mm256_movemask_pd(active) == 0) continue;
    const __m256d e = _mm256_loadu_pd(eta + j);
    const __m256d h = _mm256_and_pd(hinge, active);
    cost = _mm256_fmadd_pd(e, _mm256_mul_pd(h, h), cost);
    // gradient only where r > eps
    const __m256d rsafe = _mm256_cmp_pd(r, veps, _CMP_GT_OQ);
    const __m256d s = _mm256_and_pd(
        _mm256_div_pd(_mm256_mul_pd(vtwo, _mm256_mul_pd(e, h)), _mm256_max_pd(r, veps)),
        rsafe);
    gx = _mm256_fmadd_pd(s, dx, gx);
    gy = _mm256_fmadd_pd(s, dy, gy);
  }
  HingeAccum acc;
  acc.cost = hsum(cost);
  acc.gx = hsum(gx);
  acc.gy = hsum(gy);
  for (; j < n; ++j) {
    const double dxj = px[j] - rx;
    const double dyj = py[j] - ry;
    const double r = std::sqrt(dxj * dxj + dyj * dyj);
    const double hinge = d_safe - (r - radius);
    if (hinge <= 0.0) continue;
    acc.cost += eta[j] * hinge * hinge;
    if (r > 1e-12) {
      const double s = 2.0 * eta[j] * hinge / r;
      acc.gx += s * dxj;
      acc.gy += s * dyj;
    }
  }
  return acc;
}

WeightSums gaussian_weight_sums_avx2(const double* xs, const double* ys, std::size_t n,
                                     double cx, double cy, double inv_two_sigma2,
                                     double cutoff2) {
  const __m256d vcx = _mm256_set1_pd(cx);
  const __m256d vcy = _mm256_set1_pd(cy);
  const __m256d vcut = _mm256_set1_pd(cutoff2);

  WeightSums acc;
  alignas(32) double d2buf[4];
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(xs + i);
    const __m256d y = _mm256_loadu_pd(ys + i);
    const __m256d dx = _mm256_sub_pd(x, vcx);
    const __m256d dy = _mm256_sub_pd(y, vcy);
    const __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, vcut, _CMP_LE_OQ));
    if (mask == 0) continue;
    _mm256_store_pd(d2buf, d2);
    for (int lane = 0; lane < 4; ++lane) {
      if (!(mask & (1 << lane))) continue;
      const double w = std::exp(-d2buf[lane] * inv_two_sigma2);
      acc.w += w;
      acc.wx += w * xs[i + lane];
      acc.wy += w * ys[i + lane];
    }
  }
  for (; i < n; ++i) {
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

bool avx2_supported() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }

}  // namespace mfnav::kernels::detail

#else  // non-x86: scalar fallbacks keep the symbols defined

namespace mfnav::kernels::detail {

HingeAccum hinge_penalty_avx2(const double* px, const double* py, const double* eta,
                              std::size_t n, double rx, double ry, double radius,
                              double d_safe) {
  return hinge_penalty_scalar(px, py, eta, n, rx, ry, radius, d_safe);
}

WeightSums gaussian_weight_sums_avx2(const double* xs, const double* ys, std::size_t n,
                                     double cx, double cy, double inv_two_sigma2,
                                     double cutoff2) {
  return gaussian_weight_sums_scalar(xs, ys, n, cx, cy, inv_two_sigma2, cutoff2);
}

bool avx2_supported() { return false; }

}  // namespace mfnav::kernels::detail

#endif
