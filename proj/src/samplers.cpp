#include "rfsl/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfsl/error.hpp"
#include "rfsl/kernels.hpp"
#include "rfsl/parallel.hpp"
#include "rfsl/rng.hpp"

namespace rfsl {

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Rf:
      return "rf";
    case SamplerKind::StocRf:
      return "stoc-rf";
    case SamplerKind::Langevin:
      return "langevin";
    case SamplerKind::Ddpm:
      return "ddpm";
    case SamplerKind::DdimRf:
      return "ddim-rf";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  if (name == "rf") return SamplerKind::Rf;
  if (name == "stoc-rf") return SamplerKind::StocRf;
  if (name == "langevin") return SamplerKind::Langevin;
  if (name == "ddpm") return SamplerKind::Ddpm;
  if (name == "ddim-rf") return SamplerKind::DdimRf;
  throw DomainError("unknown sampler '" + std::string(name) + "'");
}

bool requires_positive_start(SamplerKind kind) { return kind != SamplerKind::Rf; }

StocRfCoefficients stoc_rf_coefficients(const TimeGrid& grid) {
  validate_grid(grid);
  const std::size_t n = grid.n_steps;
  StocRfCoefficients c;
  c.sigma2.resize(n + 1);
  c.r2.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = grid.times[i], u = grid.tail(i);
    c.sigma2[i] = u * u + t * t;
    c.r2[i] = t * t / c.sigma2[i];
  }
  c.eta.resize(n);
  c.psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // With u = 1 - t: 1 - R_i^2 / R_{i+1}^2 = dt (t_{i+1} u_i + t_i u_{i+1}) / (sigma_i^2 t_{i+1}^2)
    // and (R_i^2 / R_{i+1}^2)(1 - R_{i+1}^2) / (1 - R_i^2) = (t_i u_{i+1} / (t_{i+1} u_i))^2.
    const double ti = grid.times[i], tn = grid.times[i + 1];
    const double ui = grid.tail(i), un = grid.tail(i + 1);
    c.eta[i] = grid.step(i) * (tn * ui + ti * un) / (c.sigma2[i] * tn * tn);
    const double q = ti * un / (tn * ui);
    c.psi[i] = q * q * c.eta[i];
  }
  return c;
}

double ddim_eta(double t_i, double t_next) { return ddim_eta(t_i, t_next, 1.0 - t_i, 1.0 - t_next); }

double ddim_eta(double t_i, double t_next, double u_i, double u_next) {
  const double dt = t_i >= 0.5 ? u_i - u_next : t_next - t_i;
  const double s2i = u_i * u_i + t_i * t_i;
  const double one_minus_ratio = dt * (t_next * u_i + t_i * u_next) / (s2i * t_next * t_next);
  const double root = t_i * u_next / (t_next * u_i);
  return one_minus_ratio / (1.0 + root);
}

void ddim_rf_step(const FieldSlice& slice, double t_next, DdimForm form, std::span<const double> y,
                  std::span<double> out) {
  const double t = slice.time();
  if (!(t > 0.0)) throw DomainError("ddim_rf: score undefined at t = 0");
  slice.score(y, out);
  const std::size_t d = y.size();
  if (form == DdimForm::Simplified) {
    const double scale = t_next / t;
    const double gain = (t_next - t) * (1.0 - t) / t;
    for (std::size_t j = 0; j < d; ++j) out[j] = scale * y[j] + gain * out[j];
    return;
  }
  const double sigma_i = std::sqrt((1.0 - t) * (1.0 - t) + t * t);
  const double sigma_n = std::sqrt((1.0 - t_next) * (1.0 - t_next) + t_next * t_next);
  const double ri = t / sigma_i, rn = t_next / sigma_n;
  const double eta = ddim_eta(t, t_next);
  const double outer = sigma_n * rn / ri;
  const double inv_sigma = 1.0 / sigma_i;
  const double gain = eta * sigma_i;
  for (std::size_t j = 0; j < d; ++j) out[j] = outer * (y[j] * inv_sigma + gain * out[j]);
}

namespace {

struct Plan {
  SamplerKind kind = SamplerKind::Rf;
  const TimeGrid* grid = nullptr;
  const DdpmSchedule* schedule = nullptr;
  std::size_t steps = 0;  // number of updates taken
  std::vector<FieldSlice> slices;
  // Per-step scalars; meaning depends on kind.
  std::vector<double> c0, c1, c2, c3;
};

void check_start(SamplerKind kind, const TimeGrid& grid) {
  if (requires_positive_start(kind) && !(grid.times[0] > 0.0))
    throw DomainError(std::string(to_string(kind)) + " requires t_0 > 0 (use the ddpm grid)");
}

Plan make_plan(SamplerKind kind, const FieldOracle& oracle, const TimeGrid& grid, const SamplerOptions& opt,
               const DdpmSchedule* schedule) {
  validate_grid(grid);
  check_start(kind, grid);
  Plan p;
  p.kind = kind;
  p.grid = &grid;
  p.schedule = schedule;
  const std::size_t n = grid.n_steps;
  p.steps = opt.final_step ? n : n - 1;
  p.slices.reserve(p.steps);
  for (std::size_t i = 0; i < p.steps; ++i) p.slices.push_back(oracle.at(grid.times[i]));
  p.c0.assign(p.steps, 0.0);
  p.c1.assign(p.steps, 0.0);
  p.c2.assign(p.steps, 0.0);
  p.c3.assign(p.steps, 0.0);

  switch (kind) {
    case SamplerKind::Rf:
    case SamplerKind::DdimRf:
      for (std::size_t i = 0; i < p.steps; ++i) p.c0[i] = grid.step(i);
      break;
    case SamplerKind::StocRf: {
      const auto co = stoc_rf_coefficients(grid);
      for (std::size_t i = 0; i < p.steps; ++i) {
        const double si = std::sqrt(co.sigma2[i]);
        const double sn = std::sqrt(co.sigma2[i + 1]);
        p.c0[i] = sn * std::sqrt(co.r2[i + 1] / co.r2[i]);  // outer factor
        p.c1[i] = 1.0 / si;
        p.c2[i] = co.eta[i] * si;
        p.c3[i] = opt.zero_noise ? 0.0 : std::sqrt(co.psi[i]);
      }
      break;
    }
    case SamplerKind::Langevin:
      for (std::size_t i = 0; i < p.steps; ++i) {
        const double t = grid.times[i];
        const double eta = grid.step(i);
        const double gamma = opt.langevin_gamma_scale * (1.0 - t) / t;
        p.c0[i] = eta;
        p.c1[i] = gamma;
        p.c2[i] = std::sqrt(2.0 * eta * gamma);
      }
      break;
    case SamplerKind::Ddpm:
      for (std::size_t i = 0; i < p.steps; ++i) {
        const std::size_t tau = n - i;
        const double a = schedule->alpha(tau), w = schedule->omega(tau);
        if (a - w < 0.0) throw DomainError("ddpm: alpha_tau < omega_tau at tau = " + std::to_string(tau));
        const double t = grid.times[i];
        p.c0[i] = 1.0 / std::sqrt(a);
        p.c1[i] = (1.0 - a) * std::sqrt((1.0 - t) * (1.0 - t) + t * t);  // delta_tau * sigma_t
        p.c2[i] = (w >= 1.0) ? 0.0 : std::sqrt((a - w) * (1.0 - a) / (1.0 - w));
        p.c3[i] = std::sqrt((1.0 - t) * (1.0 - t) + t * t);  // sigma_t
      }
      break;
  }
  return p;
}

double sigma_at(double t) { return std::sqrt((1.0 - t) * (1.0 - t) + t * t); }

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Rows of `states` hold RF coordinates at grid.times[0] on entry and the
// terminal iterate on exit. For DDPM the state is carried in y = x / sigma_t.
void run_plan(const Plan& p, Matrix& states, std::uint64_t seed, const SamplerOptions& opt,
              std::vector<TrajectoryFrame>* frames, bool ddpm_unit_start) {
  const std::size_t n = states.rows(), d = states.cols();
  const auto& K = kernels::active();
  const auto& times = p.grid->times;

  if (frames) {
    frames->clear();
    for (std::size_t k = 0; k <= p.steps; ++k) frames->push_back({k, times[k], Matrix(n, d)});
  }

  parallel_for(n, opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(d), f(d), g(d), w(d);
    for (std::size_t r = begin; r < end; ++r) {
      auto row = states.row(r);
      std::copy(row.begin(), row.end(), y.begin());
      if (frames) std::copy(y.begin(), y.end(), (*frames)[0].states.row(r).begin());
      if (p.kind == SamplerKind::Ddpm && !ddpm_unit_start) {
        const double inv = 1.0 / p.c3[0];
        for (auto& v : y) v *= inv;
      }

      for (std::size_t i = 0; i < p.steps; ++i) {
        const FieldSlice& sl = p.slices[i];
        switch (p.kind) {
          case SamplerKind::Rf:
            if (sl.affine()) {
              K.euler_affine(sl.velocity_slope().data(), sl.velocity_intercept().data(), p.c0[i], y.data(), d);
            } else {
              sl.velocity(y, f);
              K.axpy(p.c0[i], f.data(), y.data(), d);
            }
            break;
          case SamplerKind::DdimRf:
            ddim_rf_step(sl, times[i + 1], opt.ddim_form, y, f);
            y.swap(f);
            break;
          case SamplerKind::StocRf: {
            sl.score(y, f);
            const double outer = p.c0[i], inv_s = p.c1[i], gain = p.c2[i], noise = p.c3[i];
            if (noise > 0.0) {
              rng::Stream(seed, rng::Domain::StepNoise, r, i).fill_normal(w);
              for (std::size_t j = 0; j < d; ++j) y[j] = outer * (y[j] * inv_s + gain * f[j] + noise * w[j]);
            } else {
              for (std::size_t j = 0; j < d; ++j) y[j] = outer * (y[j] * inv_s + gain * f[j]);
            }
            break;
          }
          case SamplerKind::Langevin: {
            sl.velocity(y, f);
            const double eta = p.c0[i], gamma = p.c1[i], noise = p.c2[i];
            if (gamma != 0.0) {
              sl.score(y, g);
              rng::Stream(seed, rng::Domain::StepNoise, r, i).fill_normal(w);
              for (std::size_t j = 0; j < d; ++j) y[j] += eta * (f[j] + gamma * g[j]) + noise * w[j];
            } else {
              K.axpy(eta, f.data(), y.data(), d);
            }
            break;
          }
          case SamplerKind::Ddpm: {
            const double sigma = p.c3[i];
            for (std::size_t j = 0; j < d; ++j) g[j] = sigma * y[j];
            sl.score(g, f);
            const double inv_sqrt_a = p.c0[i], gain = p.c1[i], nu = p.c2[i];
            if (nu > 0.0) {
              rng::Stream(seed, rng::Domain::StepNoise, r, i).fill_normal(w);
              for (std::size_t j = 0; j < d; ++j) y[j] = inv_sqrt_a * (y[j] + gain * f[j] + nu * w[j]);
            } else {
              for (std::size_t j = 0; j < d; ++j) y[j] = inv_sqrt_a * (y[j] + gain * f[j]);
            }
            break;
          }
        }
        if (frames) {
          auto dst = (*frames)[i + 1].states.row(r);
          if (p.kind == SamplerKind::Ddpm) {
            const double s = sigma_at(times[i + 1]);
            for (std::size_t j = 0; j < d; ++j) dst[j] = s * y[j];
          } else {
            std::copy(y.begin(), y.end(), dst.begin());
          }
        }
      }

      if (p.kind == SamplerKind::Ddpm) {
        const double s = sigma_at(times[p.steps]);
        for (auto& v : y) v *= s;
      }
      if (!all_finite(y))
        throw NonFiniteState(std::string(to_string(p.kind)) + ": non-finite state in trajectory " +
                             std::to_string(r));
      std::copy(y.begin(), y.end(), row.begin());
    }
  });
}

SampleBatch finish(SamplerKind kind, const FieldOracle& oracle, const TimeGrid& grid, std::size_t steps,
                   std::uint64_t seed, Matrix data, std::vector<TrajectoryFrame> frames) {
  SampleBatch b;
  b.data = std::move(data);
  b.trajectory = std::move(frames);
  b.meta.sampler = std::string(to_string(kind));
  b.meta.grid = describe(grid);
  b.meta.target = oracle.describe();
  b.meta.seed = seed;
  b.meta.terminal_time = grid.times[steps];
  return b;
}

SampleBatch run_grid_sampler(SamplerKind kind, const FieldOracle& oracle, const TimeGrid& grid, std::size_t n,
                             std::uint64_t seed, const SamplerOptions& opt) {
  if (n == 0) throw DomainError("sample count must be positive");
  Plan p = make_plan(kind, oracle, grid, opt, nullptr);
  Matrix states = initial_states(grid, n, oracle.dim(), seed);
  std::vector<TrajectoryFrame> frames;
  run_plan(p, states, seed, opt, opt.record_trajectories ? &frames : nullptr, false);
  return finish(kind, oracle, grid, p.steps, seed, std::move(states), std::move(frames));
}

}  // namespace

Matrix initial_states(const TimeGrid& grid, std::size_t n, std::size_t dim, std::uint64_t seed) {
  Matrix m(n, dim);
  const double sigma = sigma_at(grid.times[0]);
  for (std::size_t i = 0; i < n; ++i) {
    rng::Stream s(seed, rng::Domain::InitialState, i);
    auto row = m.row(i);
    s.fill_normal(row);
    if (sigma != 1.0)
      for (auto& v : row) v *= sigma;
  }
  return m;
}

SampleBatch rf_euler(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                     const SamplerOptions& options) {
  return run_grid_sampler(SamplerKind::Rf, oracle, grid, n, seed, options);
}

SampleBatch stoc_rf(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                    const SamplerOptions& options) {
  return run_grid_sampler(SamplerKind::StocRf, oracle, grid, n, seed, options);
}

SampleBatch langevin_rf(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                        const SamplerOptions& options) {
  return run_grid_sampler(SamplerKind::Langevin, oracle, grid, n, seed, options);
}

SampleBatch ddim_rf(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                    const SamplerOptions& options) {
  return run_grid_sampler(SamplerKind::DdimRf, oracle, grid, n, seed, options);
}

SampleBatch ddpm_sample(const FieldOracle& oracle, const DdpmSchedule& schedule, std::size_t n,
                        std::uint64_t seed, const SamplerOptions& options) {
  if (n == 0) throw DomainError("sample count must be positive");
  const TimeGrid grid = ddpm_induced_rf_grid(schedule);
  Plan p = make_plan(SamplerKind::Ddpm, oracle, grid, options, &schedule);
  // y_N ~ N(0, I) from the same substreams as every other sampler's initial draw.
  Matrix states(n, oracle.dim());
  for (std::size_t i = 0; i < n; ++i) rng::Stream(seed, rng::Domain::InitialState, i).fill_normal(states.row(i));
  std::vector<TrajectoryFrame> frames;
  run_plan(p, states, seed, options, options.record_trajectories ? &frames : nullptr, true);
  if (!frames.empty()) {
    const double s0 = sigma_at(grid.times[0]);
    for (auto& v : frames[0].states.values()) v *= s0;
  }
  return finish(SamplerKind::Ddpm, oracle, grid, p.steps, seed, std::move(states), std::move(frames));
}

SampleBatch integrate(SamplerKind kind, const FieldOracle& oracle, const TimeGrid& grid, const Matrix& initial,
                      std::uint64_t seed, const SamplerOptions& options) {
  if (kind == SamplerKind::Ddpm) throw DomainError("integrate: use ddpm_sample for the ddpm sampler");
  if (initial.cols() != oracle.dim()) throw DomainError("integrate: initial state dimension mismatch");
  Plan p = make_plan(kind, oracle, grid, options, nullptr);
  Matrix states = initial;
  std::vector<TrajectoryFrame> frames;
  run_plan(p, states, seed, options, options.record_trajectories ? &frames : nullptr, false);
  return finish(kind, oracle, grid, p.steps, seed, std::move(states), std::move(frames));
}

}  // namespace rfsl
