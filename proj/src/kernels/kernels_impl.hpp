#pragma once

#include "rfsl/kernels.hpp"

namespace rfsl::kernels::detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
double weighted_sq_dist_scalar(const double* x, const double* m, const double* w, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void axpby_scalar(double alpha, const double* x, double beta, double* y, std::size_t n);
void affine_scalar(const double* a, const double* b, const double* x, double* out, std::size_t n);
void euler_affine_scalar(const double* a, const double* b, double eta, double* y, std::size_t n);

// Defined only when the compiler can target AVX2.
bool avx2_compiled();
double dot_avx2(const double* x, const double* y, std::size_t n);
double weighted_sq_dist_avx2(const double* x, const double* m, const double* w, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void axpby_avx2(double alpha, const double* x, double beta, double* y, std::size_t n);
void affine_avx2(const double* a, const double* b, const double* x, double* out, std::size_t n);
void euler_affine_avx2(const double* a, const double* b, double eta, double* y, std::size_t n);

}  // namespace rfsl::kernels::detail
