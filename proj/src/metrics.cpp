#include "rfsl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfsl/error.hpp"
#include "rfsl/kernels.hpp"
#include "rfsl/parallel.hpp"
#include "rfsl/rng.hpp"

namespace rfsl {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double tv_round(const Matrix& a, const Matrix& b, std::uint64_t seed, std::size_t round, const TvOptions& opt) {
  const std::size_t na = a.rows(), nb = b.rows(), total = na + nb, d = a.cols();
  std::vector<std::size_t> perm(total);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng::Stream s(seed, rng::Domain::TvSplit, round);
  for (std::size_t i = total - 1; i > 0; --i) std::swap(perm[i], perm[s.below(i + 1)]);

  const std::size_t n_train = total / 2, n_test = total - n_train;
  auto row_of = [&](std::size_t k) { return k < na ? a.row(k) : b.row(k - na); };

  // Training statistics.
  std::vector<double> mu(d, 0.0), scale(d, 0.0);
  for (std::size_t i = 0; i < n_train; ++i) {
    const auto x = row_of(perm[i]);
    for (std::size_t j = 0; j < d; ++j) mu[j] += x[j];
  }
  for (auto& v : mu) v /= static_cast<double>(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    const auto x = row_of(perm[i]);
    for (std::size_t j = 0; j < d; ++j) scale[j] += (x[j] - mu[j]) * (x[j] - mu[j]);
  }
  for (auto& v : scale) {
    const double sd = std::sqrt(v / static_cast<double>(n_train));
    v = sd > 0.0 ? 1.0 / sd : 1.0;
  }

  Matrix train(n_train, d), test(n_test, d);
  std::vector<double> y_train(n_train), y_test(n_test);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t k = perm[i];
    const auto x = row_of(k);
    const bool is_train = i < n_train;
    auto dst = is_train ? train.row(i) : test.row(i - n_train);
    for (std::size_t j = 0; j < d; ++j) dst[j] = (x[j] - mu[j]) * scale[j];
    (is_train ? y_train[i] : y_test[i - n_train]) = k < na ? 1.0 : 0.0;
  }

  const auto& K = kernels::active();
  std::vector<double> w(d, 0.0), grad(d);
  double bias = 0.0;
  const double inv_m = 1.0 / static_cast<double>(n_train);
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
      const double* x = train.row(i).data();
      const double r = sigmoid(K.dot(w.data(), x, d) + bias) - y_train[i];
      K.axpy(r, x, grad.data(), d);
      grad_b += r;
    }
    // w <- w - step * (grad / m + l2 * w)
    K.axpby(-opt.step * inv_m, grad.data(), 1.0 - opt.step * opt.l2, w.data(), d);
    bias -= opt.step * grad_b * inv_m;
  }

  std::size_t hit[2] = {0, 0}, count[2] = {0, 0};
  for (std::size_t i = 0; i < n_test; ++i) {
    const double z = K.dot(w.data(), test.row(i).data(), d) + bias;
    const int label = y_test[i] > 0.5 ? 1 : 0;
    const int pred = z > 0.0 ? 1 : 0;
    ++count[label];
    if (pred == label) ++hit[label];
  }
  if (count[0] == 0 || count[1] == 0) return 0.0;
  const double balanced = 0.5 * (static_cast<double>(hit[0]) / static_cast<double>(count[0]) +
                                 static_cast<double>(hit[1]) / static_cast<double>(count[1]));
  return std::max(0.0, 2.0 * balanced - 1.0);
}

}  // namespace

TvEstimate estimate_tv(const Matrix& a, const Matrix& b, std::uint64_t seed, const TvOptions& options) {
  if (a.cols() != b.cols()) throw DomainError("estimate_tv: batches have different dimensions");
  if (a.cols() == 0) throw DomainError("estimate_tv: zero-dimensional batches");
  if (a.rows() < options.min_samples || b.rows() < options.min_samples)
    throw DomainError("estimate_tv: each batch needs at least " + std::to_string(options.min_samples) + " rows");
  if (options.rounds == 0) throw DomainError("estimate_tv: rounds must be positive");

  TvEstimate est;
  est.rounds = options.rounds;
  est.per_round.assign(options.rounds, 0.0);
  parallel_for(
      options.rounds, options.threads,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) est.per_round[r] = tv_round(a, b, seed, r, options);
      },
      1);

  double sum = 0.0;
  for (double v : est.per_round) sum += v;
  const double n = static_cast<double>(options.rounds);
  const double mean = sum / n;
  est.value = std::clamp(mean, 0.0, 1.0);
  if (options.rounds > 1) {
    double ss = 0.0;
    for (double v : est.per_round) ss += (v - mean) * (v - mean);
    est.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return est;
}

TvEstimate estimate_tv(const SampleBatch& a, const SampleBatch& b, std::size_t rounds, std::uint64_t seed) {
  TvOptions opt;
  opt.rounds = rounds;
  return estimate_tv(a.data, b.data, seed, opt);
}

namespace {

double normal_cdf(double x, double mu, double sd) { return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0))); }

}  // namespace

double tv_oracle_gaussian_1d(double mu1, double v1, double mu2, double v2) {
  if (!(v1 > 0.0) || !(v2 > 0.0)) throw DomainError("tv_oracle_gaussian_1d: variances must be positive");
  // log p - log q = A x^2 + B x + C
  const double A = 0.5 * (1.0 / v2 - 1.0 / v1);
  const double B = mu1 / v1 - mu2 / v2;
  const double C = 0.5 * (mu2 * mu2 / v2 - mu1 * mu1 / v1) + 0.5 * std::log(v2 / v1);
  std::vector<double> cuts;
  if (A == 0.0) {
    if (B != 0.0) cuts.push_back(-C / B);
  } else {
    const double disc = B * B - 4.0 * A * C;
    if (disc > 0.0) {
      const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
      cuts.push_back(q / A);
      if (q != 0.0) cuts.push_back(C / q);
      std::sort(cuts.begin(), cuts.end());
    }
  }
  const double s1 = std::sqrt(v1), s2 = std::sqrt(v2);
  double total = 0.0, lo = -INFINITY;
  cuts.push_back(INFINITY);
  for (double hi : cuts) {
    const double p = normal_cdf(hi, mu1, s1) - normal_cdf(lo, mu1, s1);
    const double q = normal_cdf(hi, mu2, s2) - normal_cdf(lo, mu2, s2);
    total += std::abs(p - q);
    lo = hi;
  }
  return std::clamp(0.5 * total, 0.0, 1.0);
}

MomentStats moment_stats(const Matrix& data) {
  const std::size_t n = data.rows(), d = data.cols();
  if (n < 2) throw DomainError("moment_stats: need at least two rows");
  MomentStats m{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += data(i, j);
  for (auto& v : m.mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = data(i, j) - m.mean[j];
      m.var[j] += c * c;
    }
  for (auto& v : m.var) v /= static_cast<double>(n - 1);
  return m;
}

MomentStats moment_stats(const SampleBatch& batch) { return moment_stats(batch.data); }

}  // namespace rfsl
