#include "orlicz/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

#include <cmath>
#include <limits>

namespace orlicz::kernels {
namespace {

// Two 2-lane accumulators reproduce the scalar 4-lane order.
double sum_neon(const double* w, const double* v, std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a01 = vfmaq_f64(a01, vld1q_f64(w + i), vld1q_f64(v + i));
    a23 = vfmaq_f64(a23, vld1q_f64(w + i + 2), vld1q_f64(v + i + 2));
  }
  double s = (vgetq_lane_f64(a01, 0) + vgetq_lane_f64(a01, 1)) +
             (vgetq_lane_f64(a23, 0) + vgetq_lane_f64(a23, 1));
  for (; i < n; ++i) s = std::fma(w[i], v[i], s);
  return s;
}

double masked_sum_neon(const double* w, const double* v, const std::uint8_t* m, std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    uint64x2_t k01 = {m[i] ? ~0ull : 0ull, m[i + 1] ? ~0ull : 0ull};
    uint64x2_t k23 = {m[i + 2] ? ~0ull : 0ull, m[i + 3] ? ~0ull : 0ull};
    float64x2_t n01 = vfmaq_f64(a01, vld1q_f64(w + i), vld1q_f64(v + i));
    float64x2_t n23 = vfmaq_f64(a23, vld1q_f64(w + i + 2), vld1q_f64(v + i + 2));
    a01 = vbslq_f64(k01, n01, a01);
    a23 = vbslq_f64(k23, n23, a23);
  }
  double s = (vgetq_lane_f64(a01, 0) + vgetq_lane_f64(a01, 1)) +
             (vgetq_lane_f64(a23, 0) + vgetq_lane_f64(a23, 1));
  for (; i < n; ++i)
    if (m[i]) s = std::fma(w[i], v[i], s);
  return s;
}

ArgMax affine_max_neon(const double* x, const double* c, std::size_t n, double s) {
  const double ninf = -std::numeric_limits<double>::infinity();
  float64x2_t best = vdupq_n_f64(ninf);
  float64x2_t best_idx = vdupq_n_f64(0.0);
  float64x2_t idx = {0.0, 1.0};
  const float64x2_t two = vdupq_n_f64(2.0);
  const float64x2_t sv = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t val = vfmaq_f64(vnegq_f64(vld1q_f64(c + i)), sv, vld1q_f64(x + i));
    uint64x2_t gt = vcgtq_f64(val, best);
    best = vbslq_f64(gt, val, best);
    best_idx = vbslq_f64(gt, idx, best_idx);
    idx = vaddq_f64(idx, two);
  }
  ArgMax out{ninf, 0};
  for (int j = 0; j < 2; ++j) {
    double bv = j ? vgetq_lane_f64(best, 1) : vgetq_lane_f64(best, 0);
    auto k = static_cast<std::size_t>(j ? vgetq_lane_f64(best_idx, 1) : vgetq_lane_f64(best_idx, 0));
    if (bv > out.value || (bv == out.value && bv > ninf && k < out.index)) out = {bv, k};
  }
  for (; i < n; ++i) {
    double val = std::fma(s, x[i], -c[i]);
    if (val > out.value) out = {val, i};
  }
  return out;
}

const Table kNeon{Isa::Neon, sum_neon, masked_sum_neon, affine_max_neon};

}  // namespace

namespace detail {
const Table* neon_table_impl() { return &kNeon; }
}  // namespace detail

}  // namespace orlicz::kernels

#else

namespace orlicz::kernels::detail {
const Table* neon_table_impl() { return nullptr; }
}  // namespace orlicz::kernels::detail

#endif
