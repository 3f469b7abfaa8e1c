#include "kernels_impl.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define RFSL_HAVE_AVX2 1
#include <immintrin.h>
#else
#define RFSL_HAVE_AVX2 0
#endif

namespace rfsl::kernels::detail {

#if RFSL_HAVE_AVX2

bool avx2_compiled() { return true; }

namespace {

// Lane j of the accumulator holds s_j of the scalar reference.
__attribute__((target("avx2"))) inline double fold(__m256d acc) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

__attribute__((target("avx2"))) double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  }
  double s = fold(acc);
  for (; j < n; ++j) s += x[j] * y[j];
  return s;
}

__attribute__((target("avx2"))) double weighted_sq_dist_avx2(const double* x, const double* m,
                                                             const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(m + j));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + j), _mm256_mul_pd(d, d)));
  }
  double s = fold(acc);
  for (; j < n; ++j) {
    const double d = x[j] - m[j];
    s += w[j] * (d * d);
  }
  return s;
}

__attribute__((target("avx2"))) void axpy_avx2(double alpha, const double* x, double* y,
                                               std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + j), _mm256_mul_pd(va, _mm256_loadu_pd(x + j)));
    _mm256_storeu_pd(y + j, r);
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

__attribute__((target("avx2"))) void axpby_avx2(double alpha, const double* x, double beta,
                                                double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + j)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(y + j)));
    _mm256_storeu_pd(y + j, r);
  }
  for (; j < n; ++j) y[j] = alpha * x[j] + beta * y[j];
}

__attribute__((target("avx2"))) void affine_avx2(const double* a, const double* b, const double* x,
                                                 double* out, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(x + j)),
                                    _mm256_loadu_pd(b + j));
    _mm256_storeu_pd(out + j, r);
  }
  for (; j < n; ++j) out[j] = a[j] * x[j] + b[j];
}

__attribute__((target("avx2"))) void euler_affine_avx2(const double* a, const double* b, double eta,
                                                       double* y, std::size_t n) {
  const __m256d ve = _mm256_set1_pd(eta);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d vy = _mm256_loadu_pd(y + j);
    const __m256d v = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(a + j), vy), _mm256_loadu_pd(b + j));
    _mm256_storeu_pd(y + j, _mm256_add_pd(vy, _mm256_mul_pd(ve, v)));
  }
  for (; j < n; ++j) y[j] += eta * (a[j] * y[j] + b[j]);
}

#else

bool avx2_compiled() { return false; }
double dot_avx2(const double* x, const double* y, std::size_t n) { return dot_scalar(x, y, n); }
double weighted_sq_dist_avx2(const double* x, const double* m, const double* w, std::size_t n) {
  return weighted_sq_dist_scalar(x, m, w, n);
}
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) { axpy_scalar(alpha, x, y, n); }
void axpby_avx2(double alpha, const double* x, double beta, double* y, std::size_t n) {
  axpby_scalar(alpha, x, beta, y, n);
}
void affine_avx2(const double* a, const double* b, const double* x, double* out, std::size_t n) {
  affine_scalar(a, b, x, out, n);
}
void euler_affine_avx2(const double* a, const double* b, double eta, double* y, std::size_t n) {
  euler_affine_scalar(a, b, eta, y, n);
}

#endif

}  // namespace rfsl::kernels::detail
