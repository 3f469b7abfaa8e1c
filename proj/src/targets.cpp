#include "rfsl/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rfsl/error.hpp"
#include "rfsl/rng.hpp"

namespace rfsl {

namespace {

std::size_t count_nonzero(const std::vector<double>& var) {
  return static_cast<std::size_t>(std::count_if(var.begin(), var.end(), [](double v) { return v > 0.0; }));
}

void check_time(double t, std::size_t dim, std::span<const double> x) {
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("time must lie in [0, 1), got " + std::to_string(t));
  if (x.size() != dim) throw DomainError("point dimension does not match target");
}

// log w_c + log N(x; t mu_c, diag(t^2 v_c + (1 - t)^2)) for every component.
std::vector<double> component_log_densities(const Target& target, double t, std::span<const double> x) {
  const double s = (1.0 - t) * (1.0 - t);
  std::vector<double> out;
  out.reserve(target.components().size());
  for (const auto& c : target.components()) {
    double acc = std::log(c.weight);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = t * t * c.var[j] + s;
      const double d = x[j] - t * c.mean[j];
      acc -= 0.5 * (d * d / var + std::log(2.0 * std::numbers::pi * var));
    }
    out.push_back(acc);
  }
  return out;
}

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

Target::Target(std::vector<GaussianComponent> components, std::optional<std::size_t> intrinsic_dim)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("target needs at least one component");
  dim_ = components_.front().mean.size();
  if (dim_ == 0) throw DomainError("target dimension must be positive");

  double weight_sum = 0.0;
  bool degenerate = true;
  double radius = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.var.size() != dim_)
      throw DomainError("component mean/var dimension mismatch");
    if (!(c.weight > 0.0)) throw DomainError("component weights must be positive");
    weight_sum += c.weight;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      if (!(c.var[j] >= 0.0) || !std::isfinite(c.var[j]) || !std::isfinite(c.mean[j]))
        throw DomainError("component variances must be finite and >= 0");
      if (c.var[j] > 0.0) degenerate = false;
      norm2 += c.mean[j] * c.mean[j];
    }
    radius = std::max(radius, std::sqrt(norm2));
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) throw DomainError("component weights must sum to 1");
  support_radius_ = degenerate ? radius : std::numeric_limits<double>::infinity();

  // Coordinates carrying variance in at least one component.
  std::vector<double> any(dim_, 0.0);
  for (const auto& c : components_)
    for (std::size_t j = 0; j < dim_; ++j) any[j] = std::max(any[j], c.var[j]);
  const std::size_t computed = count_nonzero(any);

  if (intrinsic_dim) {
    if (*intrinsic_dim > dim_) throw DomainError("intrinsic_dim exceeds dim");
    if (single_component() && *intrinsic_dim != computed)
      throw DomainError("intrinsic_dim " + std::to_string(*intrinsic_dim) +
                        " does not match the " + std::to_string(computed) +
                        " coordinates with nonzero variance");
    intrinsic_dim_ = *intrinsic_dim;
  } else {
    intrinsic_dim_ = computed;
  }
}

Target Target::gaussian(std::vector<double> mean, std::vector<double> var) {
  return Target({GaussianComponent{1.0, std::move(mean), std::move(var)}});
}

Target Target::low_rank(std::size_t dim, std::size_t k, double mean_value) {
  if (k > dim) throw DomainError("intrinsic dimension exceeds ambient dimension");
  std::vector<double> var(dim, 0.0);
  std::fill(var.begin(), var.begin() + static_cast<std::ptrdiff_t>(k), 1.0);
  return Target({GaussianComponent{1.0, std::vector<double>(dim, mean_value), std::move(var)}}, k);
}

Target Target::point_mass(std::vector<double> location) {
  std::vector<double> var(location.size(), 0.0);
  return Target({GaussianComponent{1.0, std::move(location), std::move(var)}});
}

std::vector<double> Target::mean() const {
  std::vector<double> m(dim_, 0.0);
  for (const auto& c : components_)
    for (std::size_t j = 0; j < dim_; ++j) m[j] += c.weight * c.mean[j];
  return m;
}

std::vector<double> Target::cov_diag() const {
  const auto m = mean();
  std::vector<double> v(dim_, 0.0);
  for (const auto& c : components_)
    for (std::size_t j = 0; j < dim_; ++j) {
      const double d = c.mean[j] - m[j];
      v[j] += c.weight * (c.var[j] + d * d);
    }
  return v;
}

std::string Target::describe() const {
  std::ostringstream os;
  os << "gmm(d=" << dim_ << ",k=" << intrinsic_dim_ << ",components=" << components_.size() << ")";
  return os.str();
}

PosteriorMoments posterior_moments(const Target& target, double t, std::span<const double> x) {
  check_time(t, target.dim(), x);
  const std::size_t d = target.dim();
  const double s = (1.0 - t) * (1.0 - t);

  auto logs = component_log_densities(target, t, x);
  const double norm = log_sum_exp(logs);

  PosteriorMoments pm{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::vector<double> second(d, 0.0);
  for (std::size_t c = 0; c < logs.size(); ++c) {
    const double r = std::exp(logs[c] - norm);
    const auto& comp = target.components()[c];
    for (std::size_t j = 0; j < d; ++j) {
      const double v = comp.var[j];
      const double denom = t * t * v + s;
      const double m = (t * v * x[j] + s * comp.mean[j]) / denom;
      const double cv = v * s / denom;
      pm.mean[j] += r * m;
      second[j] += r * (cv + m * m);
    }
  }
  for (std::size_t j = 0; j < d; ++j)
    pm.cov_diag[j] = std::max(0.0, second[j] - pm.mean[j] * pm.mean[j]);
  if (target.single_component()) {
    // Avoid the cancellation in E[X^2] - E[X]^2 when there is nothing to mix.
    const auto& comp = target.components().front();
    for (std::size_t j = 0; j < d; ++j) pm.cov_diag[j] = comp.var[j] * s / (t * t * comp.var[j] + s);
  }
  return pm;
}

std::vector<double> velocity(const Target& target, double t, std::span<const double> x) {
  std::vector<double> out(target.dim());
  FieldOracle(target).velocity(t, x, out);
  return out;
}

std::vector<double> score(const Target& target, double t, std::span<const double> x) {
  std::vector<double> out(target.dim());
  FieldOracle(target).score(t, x, out);
  return out;
}

double log_marginal_density(const Target& target, double t, std::span<const double> x) {
  check_time(t, target.dim(), x);
  return log_sum_exp(component_log_densities(target, t, x));
}

SampleBatch sample_target(const Target& target, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_target needs n >= 1");
  const std::size_t d = target.dim();
  const auto& comps = target.components();

  SampleBatch batch;
  batch.data = Matrix(n, d);
  batch.meta.sampler = "target";
  batch.meta.target = target.describe();
  batch.meta.seed = seed;
  batch.meta.terminal_time = 1.0;

  std::vector<double> sd;
  for (std::size_t i = 0; i < n; ++i) {
    rng::Stream stream(seed, rng::Domain::TargetDraw, i);
    std::size_t c = 0;
    if (comps.size() > 1) {
      const double u = stream.uniform();
      double acc = 0.0;
      for (c = 0; c + 1 < comps.size(); ++c) {
        acc += comps[c].weight;
        if (u < acc) break;
      }
    }
    auto row = batch.data.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double v = comps[c].var[j];
      row[j] = comps[c].mean[j] + (v > 0.0 ? std::sqrt(v) * stream.normal() : 0.0);
    }
  }
  return batch;
}

SampleBatch blur_samples(const SampleBatch& batch, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("blur delta must lie in [0, 1]");
  SampleBatch out = batch;
  out.trajectory.clear();
  out.meta.sampler = "blurred";
  out.meta.seed = seed;
  if (delta == 0.0) return out;
  const std::size_t d = batch.dim();
  std::vector<double> z(d);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    rng::Stream stream(seed, rng::Domain::Blur, i);
    stream.fill_normal(z);
    auto row = out.data.row(i);
    for (std::size_t j = 0; j < d; ++j) row[j] = (1.0 - delta) * row[j] + delta * z[j];
  }
  return out;
}

}  // namespace rfsl
