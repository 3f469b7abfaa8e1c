#include <cmath>

#include "rfsl/error.hpp"
#include "rfsl/samplers.hpp"

namespace rfsl {

namespace {

// Coordinate j of the exact fields of N(mu, v) at time t.
struct Coef {
  double v_slope, v_intercept, s_slope, s_intercept;
};

Coef coef(double t, double mu, double var) {
  const double u = 1.0 - t;
  const double denom = t * t * var + u * u;
  return {(t * var - u) / denom, u * mu / denom, -1.0 / denom, t * mu / denom};
}

double sigma2(double t) { return (1.0 - t) * (1.0 - t) + t * t; }

void push(MomentPath& path, std::vector<double>& m, std::vector<double>& v, double t) {
  path.times.push_back(t);
  path.mean.push_back(m);
  path.var.push_back(v);
}

}  // namespace

MomentPath gaussian_pushforward(const Target& target, const TimeGrid& grid, SamplerKind kind,
                                const SamplerOptions& options,
                                std::optional<std::pair<std::vector<double>, std::vector<double>>> initial) {
  if (!target.single_component()) throw DomainError("gaussian_pushforward: target must be a single Gaussian");
  if (kind == SamplerKind::Ddpm) throw DomainError("gaussian_pushforward: use gaussian_pushforward_ddpm");
  validate_grid(grid);
  if (requires_positive_start(kind) && !(grid.times[0] > 0.0))
    throw DomainError("gaussian_pushforward: sampler requires t_0 > 0");

  const auto& comp = target.components().front();
  const std::size_t d = target.dim();
  std::vector<double> m(d, 0.0), v(d, sigma2(grid.times[0]));
  if (initial) {
    if (initial->first.size() != d || initial->second.size() != d)
      throw DomainError("gaussian_pushforward: initial moments have wrong dimension");
    m = initial->first;
    v = initial->second;
  }

  MomentPath path;
  push(path, m, v, grid.times[0]);
  const std::size_t steps = options.final_step ? grid.n_steps : grid.n_steps - 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = grid.times[i], tn = grid.times[i + 1], dt = tn - t;
    for (std::size_t j = 0; j < d; ++j) {
      const Coef c = coef(t, comp.mean[j], comp.var[j]);
      double a = 0.0, b = 0.0, noise_var = 0.0;
      switch (kind) {
        case SamplerKind::Rf:
          a = 1.0 + dt * c.v_slope;
          b = dt * c.v_intercept;
          break;
        case SamplerKind::DdimRf: {
          const double k = dt * (1.0 - t) / t;
          a = tn / t + k * c.s_slope;
          b = k * c.s_intercept;
          break;
        }
        case SamplerKind::StocRf: {
          const double s2i = sigma2(t), s2n = sigma2(tn);
          const double r2i = t * t / s2i, r2n = tn * tn / s2n;
          const double eta = 1.0 - r2i / r2n;
          const double psi = options.zero_noise
                                 ? 0.0
                                 : (r2i / r2n) * ((1.0 - tn) * (1.0 - tn) / s2n) / ((1.0 - t) * (1.0 - t) / s2i) * eta;
          const double outer = std::sqrt(s2n) * std::sqrt(r2n / r2i);
          const double si = std::sqrt(s2i);
          a = outer * (1.0 / si + eta * si * c.s_slope);
          b = outer * eta * si * c.s_intercept;
          noise_var = outer * outer * psi;
          break;
        }
        case SamplerKind::Langevin: {
          const double gamma = options.langevin_gamma_scale * (1.0 - t) / t;
          a = 1.0 + dt * (c.v_slope + gamma * c.s_slope);
          b = dt * (c.v_intercept + gamma * c.s_intercept);
          noise_var = 2.0 * dt * gamma;
          break;
        }
        case SamplerKind::Ddpm:
          break;
      }
      m[j] = a * m[j] + b;
      v[j] = a * a * v[j] + noise_var;
    }
    push(path, m, v, tn);
  }
  return path;
}

MomentPath gaussian_pushforward_ddpm(const Target& target, const DdpmSchedule& schedule) {
  if (!target.single_component()) throw DomainError("gaussian_pushforward: target must be a single Gaussian");
  const auto& comp = target.components().front();
  const std::size_t d = target.dim(), n = schedule.n_steps;
  auto t_of = [&](std::size_t tau) {
    const double w = schedule.omega(tau);
    return std::sqrt(w) / (std::sqrt(w) + std::sqrt(1.0 - w));
  };

  // Track y = x / sigma_t, starting from N(0, I) at tau = N.
  std::vector<double> my(d, 0.0), vy(d, 1.0);
  MomentPath path;
  auto record = [&](std::size_t tau) {
    const double t = (tau == 0) ? 1.0 : t_of(tau);
    const double s = std::sqrt(sigma2(t));
    std::vector<double> mx(d), vx(d);
    for (std::size_t j = 0; j < d; ++j) {
      mx[j] = s * my[j];
      vx[j] = s * s * vy[j];
    }
    path.times.push_back(t);
    path.mean.push_back(std::move(mx));
    path.var.push_back(std::move(vx));
  };
  record(n);
  for (std::size_t tau = n; tau >= 2; --tau) {
    const double a = schedule.alpha(tau), w = schedule.omega(tau);
    const double t = t_of(tau), s = std::sqrt(sigma2(t));
    const double nu2 = (a - w) * (1.0 - a) / (1.0 - w);
    const double ia = 1.0 / std::sqrt(a);
    for (std::size_t j = 0; j < d; ++j) {
      const Coef c = coef(t, comp.mean[j], comp.var[j]);
      // s_{Y'}(y) = sigma * (s_slope * sigma * y + s_intercept)
      const double A = ia * (1.0 + (1.0 - a) * s * s * c.s_slope);
      const double B = ia * (1.0 - a) * s * c.s_intercept;
      my[j] = A * my[j] + B;
      vy[j] = A * A * vy[j] + ia * ia * nu2;
    }
    record(tau - 1);
  }
  return path;
}

}  // namespace rfsl
