#include "rfsl/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "rfsl/error.hpp"

namespace rfsl {

std::string_view to_string(GridKind kind) {
  switch (kind) {
    case GridKind::Uniform:
      return "uniform";
    case GridKind::UShaped:
      return "ushaped";
    case GridKind::DdpmInduced:
      return "ddpm";
  }
  return "unknown";
}

GridKind grid_kind_from_string(std::string_view name) {
  if (name == "uniform") return GridKind::Uniform;
  if (name == "ushaped") return GridKind::UShaped;
  if (name == "ddpm") return GridKind::DdpmInduced;
  throw DomainError("unknown grid kind '" + std::string(name) + "'");
}

namespace {

void check_ushaped_steps(std::size_t n_steps) {
  if (n_steps < 4 || n_steps % 2 != 0)
    throw DomainError("U-shaped grid needs an even number of steps >= 4, got " +
                      std::to_string(n_steps));
}

}  // namespace

double solve_growth(std::size_t n_steps, double delta) {
  check_ushaped_steps(n_steps);
  if (!(delta > 0.0 && delta <= 0.5))
    throw DomainError("growth solve needs 0 < delta <= 1/2, got " + std::to_string(delta));
  const double log_growth =
      2.0 * std::log(1.0 / (2.0 * delta)) / static_cast<double>(n_steps - 2);
  return std::expm1(log_growth);
}

TimeGrid build_ushaped_grid(std::size_t n_steps, double delta) {
  check_ushaped_steps(n_steps);
  if (!(delta > 0.0 && delta < 0.5))
    throw DomainError("U-shaped grid needs 0 < delta < 1/2, got " + std::to_string(delta));
  const double h = solve_growth(n_steps, delta);
  const std::size_t half = n_steps / 2;

  TimeGrid grid;
  grid.kind = GridKind::UShaped;
  grid.n_steps = n_steps;
  grid.delta = delta;
  grid.growth = h;
  grid.times.assign(n_steps + 1, 0.0);

  auto& t = grid.times;
  auto& c = grid.tails;
  c.assign(n_steps + 1, 0.0);
  // Closed form t_j = (1/2) (1 + h)^{j - N/2}; avoids compounding rounding of the recurrence.
  const double log_growth = std::log1p(h);
  t[1] = delta;
  for (std::size_t j = 2; j < half; ++j) t[j] = 0.5 * std::exp(-static_cast<double>(half - j) * log_growth);
  t[half] = 0.5;
  for (std::size_t j = 0; j <= half; ++j) c[j] = 1.0 - t[j];
  for (std::size_t j = 1; j < half; ++j) {
    t[n_steps - j] = 1.0 - t[j];
    c[n_steps - j] = t[j];
  }
  t[n_steps] = 1.0;
  c[n_steps] = 0.0;

  for (std::size_t j = 0; j < n_steps; ++j) {
    if (!(t[j + 1] > t[j]))
      throw DomainError("U-shaped grid degenerates at index " + std::to_string(j) +
                        " (delta too close to 1/2 for N = " + std::to_string(n_steps) + ")");
  }
  return grid;
}

TimeGrid build_uniform_grid(std::size_t n_steps) {
  if (n_steps == 0) throw DomainError("uniform grid needs at least one step");
  TimeGrid grid;
  grid.kind = GridKind::Uniform;
  grid.n_steps = n_steps;
  grid.times.resize(n_steps + 1);
  const double n = static_cast<double>(n_steps);
  grid.tails.resize(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) {
    grid.times[i] = static_cast<double>(i) / n;
    grid.tails[i] = static_cast<double>(n_steps - i) / n;
  }
  grid.delta = grid.tails[n_steps - 1];
  return grid;
}

DdpmSchedule build_ddpm_schedule(std::size_t n_steps, double c0, double c1) {
  if (n_steps < 2) throw DomainError("DDPM schedule needs N >= 2");
  if (!(c0 > 0.0) || !(c1 > 0.0)) throw DomainError("DDPM schedule needs c0 > 0 and c1 > 0");

  const double n = static_cast<double>(n_steps);
  const double rate = c1 * std::log(n) / n;
  const double beta1 = std::pow(n, -c0);

  DdpmSchedule s;
  s.c0 = c0;
  s.c1 = c1;
  s.n_steps = n_steps;
  s.betas.assign(n_steps + 1, 0.0);
  s.alphas.assign(n_steps + 1, 1.0);
  s.omegas.assign(n_steps + 1, 1.0);

  s.betas[1] = beta1;
  for (std::size_t tau = 1; tau < n_steps; ++tau) {
    const double growth = beta1 * std::pow(1.0 + rate, static_cast<double>(tau));
    s.betas[tau + 1] = rate * std::min(growth, 1.0);
  }
  for (std::size_t tau = 1; tau <= n_steps; ++tau) {
    const double b = s.betas[tau];
    if (!(b > 0.0 && b < 1.0))
      throw DomainError("beta_" + std::to_string(tau) + " = " + std::to_string(b) +
                        " is outside (0, 1); c0/c1 incompatible with N = " +
                        std::to_string(n_steps));
    s.alphas[tau] = 1.0 - b;
    s.omegas[tau] = s.omegas[tau - 1] * s.alphas[tau];
  }
  if (!(s.omegas[n_steps] > 0.0)) throw DomainError("cumulative product omega_N underflowed");
  return s;
}

TimeGrid ddpm_induced_rf_grid(const DdpmSchedule& schedule) {
  const std::size_t n = schedule.n_steps;
  TimeGrid grid;
  grid.kind = GridKind::DdpmInduced;
  grid.n_steps = n;
  grid.times.resize(n + 1);
  grid.tails.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = schedule.omega(n - i);
    const double a = std::sqrt(w), b = std::sqrt(1.0 - w);
    grid.times[i] = a / (a + b);
    grid.tails[i] = b / (a + b);
  }
  grid.times[n] = 1.0;
  grid.tails[n] = 0.0;
  grid.delta = grid.tails[n - 1];
  validate_grid(grid);
  return grid;
}

double default_delta(std::size_t n_steps, std::optional<std::size_t> dim) {
  if (n_steps == 0) throw DomainError("default_delta needs N >= 1");
  double delta = 1.0 / static_cast<double>(n_steps);
  if (dim && *dim > 0) delta = std::min(delta, 1.0 / static_cast<double>(*dim));
  return delta;
}

void validate_grid(const TimeGrid& grid) {
  const auto& t = grid.times;
  if (grid.n_steps == 0 || t.size() != grid.n_steps + 1)
    throw DomainError("time grid must hold n_steps + 1 points");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || t[i] < 0.0 || t[i] > 1.0)
      throw DomainError("time grid entry " + std::to_string(i) + " outside [0, 1]");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw DomainError("time grid not strictly increasing at index " + std::to_string(i));
  }
  if (t.back() != 1.0) throw DomainError("time grid must end at t = 1");
  if (!grid.tails.empty()) {
    if (grid.tails.size() != t.size()) throw DomainError("time grid complements have the wrong length");
    for (std::size_t i = 0; i < t.size(); ++i)
      if (!(std::abs(grid.tails[i] - (1.0 - t[i])) <= 0x1p-52))
        throw DomainError("time grid complement inconsistent at index " + std::to_string(i));
  }
}

}  // namespace rfsl

namespace rfsl {

std::string describe(const TimeGrid& grid) {
  std::string out(to_string(grid.kind));
  out += "(N=" + std::to_string(grid.n_steps);
  if (grid.kind != GridKind::Uniform) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ",delta=%.6g", grid.delta);
    out += buf;
  }
  out += ")";
  return out;
}

}  // namespace rfsl
