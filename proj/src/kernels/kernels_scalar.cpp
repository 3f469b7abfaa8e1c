#include "kernels_impl.hpp"

namespace rfsl::kernels::detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += x[j] * y[j];
    s1 += x[j + 1] * y[j + 1];
    s2 += x[j + 2] * y[j + 2];
    s3 += x[j + 3] * y[j + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; j < n; ++j) s += x[j] * y[j];
  return s;
}

double weighted_sq_dist_scalar(const double* x, const double* m, const double* w, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const double d0 = x[j] - m[j];
    const double d1 = x[j + 1] - m[j + 1];
    const double d2 = x[j + 2] - m[j + 2];
    const double d3 = x[j + 3] - m[j + 3];
    s0 += w[j] * (d0 * d0);
    s1 += w[j + 1] * (d1 * d1);
    s2 += w[j + 2] * (d2 * d2);
    s3 += w[j + 3] * (d3 * d3);
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; j < n; ++j) {
    const double d = x[j] - m[j];
    s += w[j] * (d * d);
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

void axpby_scalar(double alpha, const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] = alpha * x[j] + beta * y[j];
}

void affine_scalar(const double* a, const double* b, const double* x, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = a[j] * x[j] + b[j];
}

void euler_affine_scalar(const double* a, const double* b, double eta, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += eta * (a[j] * y[j] + b[j]);
}

}  // namespace rfsl::kernels::detail
