#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rfsl/batch.hpp"
#include "rfsl/schedules.hpp"
#include "rfsl/targets.hpp"

namespace rfsl {

enum class SamplerKind { Rf, StocRf, Langevin, Ddpm, DdimRf };

std::string_view to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(std::string_view name);
// Score-based samplers need t_0 > 0.
bool requires_positive_start(SamplerKind kind);

// Per-grid-index quantities of the stochastic RF update, for i = 0..N:
// sigma2 = (1-t)^2 + t^2, r2 = t^2 / sigma2. Per step i = 0..N-1:
// eta = 1 - r2_i / r2_{i+1}, psi = (r2_i / r2_{i+1}) (1 - r2_{i+1}) / (1 - r2_i) * eta.
struct StocRfCoefficients {
  std::vector<double> sigma2;
  std::vector<double> r2;
  std::vector<double> eta;
  std::vector<double> psi;
};

StocRfCoefficients stoc_rf_coefficients(const TimeGrid& grid);

enum class DdimForm { Simplified, Scaled };

struct SamplerOptions {
  std::size_t threads = 1;
  bool record_trajectories = false;
  // Also take the deterministic-time step t_{N-1} -> t_N = 1.
  bool final_step = false;
  // Multiplies gamma_t = (1 - t) / t in the Langevin-corrected sampler.
  double langevin_gamma_scale = 1.0;
  // Forces psi_i = 0 in stoc_rf.
  bool zero_noise = false;
  DdimForm ddim_form = DdimForm::Simplified;
};

// Euler steps Y <- Y + (t_{i+1} - t_i) v(Y). Starts from Y_{t_0} ~ N(0, sigma_{t_0}^2 I).
SampleBatch rf_euler(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                     const SamplerOptions& options = {});
// Variance-preserving stochastic RF update; needs t_0 > 0.
SampleBatch stoc_rf(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                    const SamplerOptions& options = {});
// Euler-Maruyama for dZ = (v + gamma s) dt + sqrt(2 gamma) dB, gamma_t = (1 - t) / t; needs t_0 > 0.
SampleBatch langevin_rf(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                        const SamplerOptions& options = {});
// Deterministic sampler obtained from DDIM by the RF time change; needs t_0 > 0.
SampleBatch ddim_rf(const FieldOracle& oracle, const TimeGrid& grid, std::size_t n, std::uint64_t seed,
                    const SamplerOptions& options = {});
// Ancestral DDPM in y = x / sigma_t coordinates over tau = N..2, returned as x at t(1).
SampleBatch ddpm_sample(const FieldOracle& oracle, const DdpmSchedule& schedule, std::size_t n,
                        std::uint64_t seed, const SamplerOptions& options = {});

// Same samplers started from explicit rows at grid.times[0] (RF coordinates).
// Step noise for row i still comes from the (seed, i, step) substreams.
SampleBatch integrate(SamplerKind kind, const FieldOracle& oracle, const TimeGrid& grid, const Matrix& initial,
                      std::uint64_t seed, const SamplerOptions& options = {});

// Initial states sigma_{t_0} z with z from the (seed, row) initial-state substreams.
Matrix initial_states(const TimeGrid& grid, std::size_t n, std::size_t dim, std::uint64_t seed);

// One step of the DDIM-derived sampler from t_i to t_next in either algebraic form.
void ddim_rf_step(const FieldSlice& slice, double t_next, DdimForm form, std::span<const double> y,
                  std::span<double> out);
// eta_i = (1 - R_i^2 / R_{i+1}^2) / (1 + sqrt((R_i^2 / R_{i+1}^2)(1 - R_{i+1}^2) / (1 - R_i^2)))
// of the scaled DDIM form, evaluated without cancellation. u = 1 - t may be
// passed separately when it is known more accurately than 1 - t.
double ddim_eta(double t_i, double t_next);
double ddim_eta(double t_i, double t_next, double u_i, double u_next);

// Per-grid-index mean and variance (per coordinate) of a sampler's iterates.
struct MomentPath {
  std::vector<double> times;
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> var;
};

// Exact propagation of mean and variance through the affine update maps of
// `kind` for a single-component Gaussian target with the exact field. Throws
// DomainError for mixtures. The initial law defaults to N(0, sigma_{t_0}^2 I).
MomentPath gaussian_pushforward(const Target& target, const TimeGrid& grid, SamplerKind kind,
                                const SamplerOptions& options = {},
                                std::optional<std::pair<std::vector<double>, std::vector<double>>> initial = {});
// Moments of the DDPM sampler mapped to RF coordinates at t(tau), tau = N..1.
MomentPath gaussian_pushforward_ddpm(const Target& target, const DdpmSchedule& schedule);

}  // namespace rfsl
