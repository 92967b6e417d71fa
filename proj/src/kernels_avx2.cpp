#include "orlicz/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <cmath>
#include <limits>

#define ORLICZ_AVX2 __attribute__((target("avx2,fma")))

namespace orlicz::kernels {
namespace {

ORLICZ_AVX2 double sum_avx2(const double* w, const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(v + i), acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) s = std::fma(w[i], v[i], s);
  return s;
}

ORLICZ_AVX2 double masked_sum_avx2(const double* w, const double* v, const std::uint8_t* m,
                                   std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    int bytes;
    __builtin_memcpy(&bytes, m + i, 4);
    __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(bytes));
    __m256d keep = _mm256_castsi256_pd(
        _mm256_xor_si256(_mm256_cmpeq_epi64(wide, zero), _mm256_set1_epi64x(-1)));
    __m256d next = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(v + i), acc);
    acc = _mm256_blendv_pd(acc, next, keep);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i)
    if (m[i]) s = std::fma(w[i], v[i], s);
  return s;
}

ORLICZ_AVX2 ArgMax affine_max_avx2(const double* x, const double* c, std::size_t n, double s) {
  const double ninf = -std::numeric_limits<double>::infinity();
  __m256d best = _mm256_set1_pd(ninf);
  __m256d best_idx = _mm256_setzero_pd();
  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d step = _mm256_set1_pd(4.0);
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d val = _mm256_fmsub_pd(sv, _mm256_loadu_pd(x + i), _mm256_loadu_pd(c + i));
    __m256d gt = _mm256_cmp_pd(val, best, _CMP_GT_OQ);
    best = _mm256_blendv_pd(best, val, gt);
    best_idx = _mm256_blendv_pd(best_idx, idx, gt);
    idx = _mm256_add_pd(idx, step);
  }
  alignas(32) double bv[4], bi[4];
  _mm256_store_pd(bv, best);
  _mm256_store_pd(bi, best_idx);
  ArgMax out{ninf, 0};
  for (int j = 0; j < 4; ++j) {
    auto k = static_cast<std::size_t>(bi[j]);
    if (bv[j] > out.value || (bv[j] == out.value && bv[j] > ninf && k < out.index))
      out = {bv[j], k};
  }
  for (; i < n; ++i) {
    double val = std::fma(s, x[i], -c[i]);
    if (val > out.value) out = {val, i};
  }
  return out;
}

const Table kAvx2{Isa::Avx2, sum_avx2, masked_sum_avx2, affine_max_avx2};

}  // namespace

namespace detail {
const Table* avx2_table_impl() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &kAvx2 : nullptr;
}
}  // namespace detail

}  // namespace orlicz::kernels

#else

namespace orlicz::kernels::detail {
const Table* avx2_table_impl() { return nullptr; }
}  // namespace orlicz::kernels::detail

#endif
