#include "orlicz/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace orlicz::kernels {

namespace detail {
const Table* avx2_table_impl();
const Table* neon_table_impl();
}  // namespace detail

namespace {

double sum_scalar(const double* w, const double* v, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) acc[j] = std::fma(w[i + j], v[i + j], acc[j]);
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (; i < n; ++i) s = std::fma(w[i], v[i], s);
  return s;
}

double masked_sum_scalar(const double* w, const double* v, const std::uint8_t* m, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j)
      if (m[i + j]) acc[j] = std::fma(w[i + j], v[i + j], acc[j]);
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (; i < n; ++i)
    if (m[i]) s = std::fma(w[i], v[i], s);
  return s;
}

ArgMax affine_max_scalar(const double* x, const double* c, std::size_t n, double s) {
  ArgMax best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < n; ++i) {
    double val = std::fma(s, x[i], -c[i]);
    if (val > best.value) best = {val, i};
  }
  return best;
}

const Table kScalar{Isa::Scalar, sum_scalar, masked_sum_scalar, affine_max_scalar};

const Table& pick() {
  if (const char* env = std::getenv("ORLICZ_FORCE_SCALAR"); env && *env && *env != '0')
    return kScalar;
  if (const Table* t = detail::avx2_table_impl()) return *t;
  if (const Table* t = detail::neon_table_impl()) return *t;
  return kScalar;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

const Table& scalar_table() { return kScalar; }
const Table* avx2_table() { return detail::avx2_table_impl(); }
const Table* neon_table() { return detail::neon_table_impl(); }

const Table& active() {
  static const Table& t = pick();
  return t;
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    default: return "scalar";
  }
}

double weighted_sum(std::span<const double> w, std::span<const double> v) {
  check_sizes(w.size(), v.size());
  return active().weighted_sum(w.data(), v.data(), w.size());
}

double masked_weighted_sum(std::span<const double> w, std::span<const double> v,
                           std::span<const std::uint8_t> mask) {
  check_sizes(w.size(), v.size());
  check_sizes(w.size(), mask.size());
  return active().masked_weighted_sum(w.data(), v.data(), mask.data(), w.size());
}

ArgMax affine_max(std::span<const double> x, std::span<const double> c, double s) {
  check_sizes(x.size(), c.size());
  return active().affine_max(x.data(), c.data(), x.size(), s);
}

}  // namespace orlicz::kernels
