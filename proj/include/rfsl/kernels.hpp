#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop arithmetic over contiguous double arrays. Every table computes
// bit-identical results: reductions use four interleaved partial sums combined
// as (s0 + s1) + (s2 + s3), followed by a sequential tail, and no variant uses
// fused multiply-add.
namespace rfsl::kernels {

struct KernelTable {
  std::string_view name;
  // sum_j x[j] * y[j]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_j w[j] * (x[j] - m[j])^2
  double (*weighted_sq_dist)(const double* x, const double* m, const double* w, std::size_t n);
  // y[j] += alpha * x[j]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[j] = alpha * x[j] + beta * y[j]
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
  // out[j] = a[j] * x[j] + b[j]
  void (*affine)(const double* a, const double* b, const double* x, double* out, std::size_t n);
  // y[j] += eta * (a[j] * y[j] + b[j])
  void (*euler_affine)(const double* a, const double* b, double eta, double* y, std::size_t n);
};

const KernelTable& scalar();
// nullptr when the CPU or the build lacks AVX2.
const KernelTable* avx2();

// Selected once at first use: AVX2 when available unless RFSL_KERNELS=scalar.
const KernelTable& active();

}  // namespace rfsl::kernels
