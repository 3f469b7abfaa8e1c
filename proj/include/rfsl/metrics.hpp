#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rfsl/batch.hpp"

namespace rfsl {

struct TvEstimate {
  double value = 0.0;      // mean of per_round, clipped to [0, 1]
  double std_error = 0.0;  // sample standard deviation / sqrt(rounds)
  std::size_t rounds = 0;
  std::vector<double> per_round;
};

// Linear logistic probe settings for the classifier-based TV estimate.
struct TvOptions {
  std::size_t rounds = 10;
  std::size_t iterations = 500;
  double step = 0.1;
  double l2 = 1e-4;
  std::size_t threads = 1;
  std::size_t min_samples = 200;
};

// Each round: random half/half split of the pooled labeled rows, features
// standardized with training statistics, full-batch gradient descent on the
// L2-regularized logistic loss, estimate max(0, 2 * balanced test accuracy - 1).
// Round r depends only on (data, seed, r). Throws DomainError on dimension
// mismatch or fewer than min_samples rows in either batch.
TvEstimate estimate_tv(const Matrix& a, const Matrix& b, std::uint64_t seed, const TvOptions& options = {});
TvEstimate estimate_tv(const SampleBatch& a, const SampleBatch& b, std::size_t rounds, std::uint64_t seed);

// 1/2 int |N(x; mu1, v1) - N(x; mu2, v2)| dx, split at the density crossing points.
double tv_oracle_gaussian_1d(double mu1, double v1, double mu2, double v2);

struct MomentStats {
  std::vector<double> mean;
  std::vector<double> var;  // unbiased
};

MomentStats moment_stats(const Matrix& data);
MomentStats moment_stats(const SampleBatch& batch);

}  // namespace rfsl
