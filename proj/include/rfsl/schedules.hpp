#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rfsl {

enum class GridKind { Uniform, UShaped, DdpmInduced };

std::string_view to_string(GridKind kind);
GridKind grid_kind_from_string(std::string_view name);

// Ordered discretization 0 <= t_0 < t_1 < ... < t_N = 1 of the RF clock.
//
// Uniform and UShaped grids start at t_0 = 0. A DdpmInduced grid starts at
// t(omega_N) > 0; its last entry is t(omega_0) = 1, kept so that every kind has
// N + 1 points and samplers uniformly stop at times[N - 1].
struct TimeGrid {
  std::vector<double> times;
  std::size_t n_steps = 0;
  // Gap 1 - t_{N-1} at the terminal end (for UShaped this is the construction delta).
  double delta = 0.0;
  // Geometric growth factor (UShaped only; zero otherwise).
  double growth = 0.0;
  GridKind kind = GridKind::Uniform;

  // Complements 1 - t_i computed without cancellation; may be left empty.
  std::vector<double> tails;

  double tail(std::size_t i) const { return tails.empty() ? 1.0 - times[i] : tails[i]; }
  // t_{i+1} - t_i, taken from the complements in the upper half of [0, 1].
  double step(std::size_t i) const {
    if (!tails.empty() && times[i] >= 0.5) return tails[i] - tails[i + 1];
    return times[i + 1] - times[i];
  }
  double terminal_time() const { return times[n_steps - 1]; }
};

// Discrete DDPM noise schedule indexed by tau = 1..N; index 0 holds the
// conventions beta_0 = 0, alpha_0 = omega_0 = 1.
struct DdpmSchedule {
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> omegas;
  double c0 = 0.0;
  double c1 = 0.0;
  std::size_t n_steps = 0;

  double beta(std::size_t tau) const { return betas[tau]; }
  double alpha(std::size_t tau) const { return alphas[tau]; }
  double omega(std::size_t tau) const { return omegas[tau]; }
};

// Growth h with delta * (1 + h)^((N - 2) / 2) = 1/2. Requires N even, N >= 4 and
// 0 < delta <= 1/2 (delta = 1/2 gives h = 0).
double solve_growth(std::size_t n_steps, double delta);

// Geometric grid dense at both ends: t_1 = delta, t_j = (1 + h) t_{j-1} up to
// t_{N/2} = 1/2, then mirrored so that t_j + t_{N-j} = 1.
TimeGrid build_ushaped_grid(std::size_t n_steps, double delta);

TimeGrid build_uniform_grid(std::size_t n_steps);

// beta_1 = N^{-c0}; beta_{tau+1} = (c1 log N / N) * min(beta_1 (1 + c1 log N / N)^tau, 1).
DdpmSchedule build_ddpm_schedule(std::size_t n_steps, double c0, double c1);

// t_i = t(N - i) with t(tau) = sqrt(w_tau) / (sqrt(w_tau) + sqrt(1 - w_tau)).
TimeGrid ddpm_induced_rf_grid(const DdpmSchedule& schedule);

// min(1/N, 1/d) when the data dimension is known, 1/N otherwise.
double default_delta(std::size_t n_steps, std::optional<std::size_t> dim = std::nullopt);

// Strictly increasing, finite, within [0, 1], with times.size() == n_steps + 1.
void validate_grid(const TimeGrid& grid);

// Short descriptor such as "ushaped(N=100,delta=0.01)".
std::string describe(const TimeGrid& grid);

}  // namespace rfsl
