#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Reduction kernels behind a runtime-dispatched function table. Every ISA
// variant accumulates in four interleaved lanes with fused multiply-add, so
// scalar and vector results agree bit for bit.
namespace orlicz::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct ArgMax {
  double value;
  std::size_t index;
};

struct Table {
  Isa isa;
  double (*weighted_sum)(const double* w, const double* v, std::size_t n);
  double (*masked_weighted_sum)(const double* w, const double* v, const std::uint8_t* mask,
                                std::size_t n);
  // max_i (s * x_i - c_i); ties resolve to the smallest index.
  ArgMax (*affine_max)(const double* x, const double* c, std::size_t n, double s);
};

const Table& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks it.
const Table* avx2_table();
const Table* neon_table();

// Chosen once: best available ISA unless ORLICZ_FORCE_SCALAR is set.
const Table& active();
const char* isa_name(Isa isa);

double weighted_sum(std::span<const double> w, std::span<const double> v);
double masked_weighted_sum(std::span<const double> w, std::span<const double> v,
                           std::span<const std::uint8_t> mask);
ArgMax affine_max(std::span<const double> x, std::span<const double> c, double s);

}  // namespace orlicz::kernels
