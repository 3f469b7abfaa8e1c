#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rfsl/matrix.hpp"
#include "rfsl/targets.hpp"

namespace rfsl {

// Noise-rate profile beta(tau) > 0 of the OU forward process
// dY = -beta Y dtau + sqrt(2 beta) dB. Empty means beta = 1.
struct BetaProfile {
  std::function<double(double)> beta;

  bool constant() const noexcept { return !beta; }
  // int_0^tau beta(u) du
  double integral(double tau) const;
  // tau with integral(tau) = value, value >= 0.
  double inverse_integral(double value) const;
};

// t(s) = sqrt(s) / (1 + sqrt(s)), s > 0.
double rf_time_from_sl(double s);
// s(t) = (t / (1 - t))^2, 0 < t < 1.
double sl_time_from_rf(double t);
// tau(s) solving int_0^tau beta = log(1 + 1/s) / 2.
double ddpm_time_from_sl(double s, const BetaProfile& beta = {});
double sl_time_from_ddpm(double tau, const BetaProfile& beta = {});
// t = sqrt(w) / (sqrt(w) + sqrt(1 - w)), 0 < w < 1.
double rf_time_from_ddpm(double omega);
// w = t^2 / sigma_t^2.
double omega_from_rf_time(double t);
// RF time of the OU process at tau, through w = exp(-2 int beta).
double rf_time_from_ddpm_time(double tau, const BetaProfile& beta = {});
double ddpm_time_from_rf(double t, const BetaProfile& beta = {});

enum class TimeChangeKind { SlToRf, RfToSl, SlToDdpmOu, DdpmToRf };

struct TimeChange {
  TimeChangeKind kind = TimeChangeKind::SlToRf;
  BetaProfile beta;

  double operator()(double x) const;
  double inverse(double y) const;
};

// theta in (0, 1) with (b(theta) / a(theta))^2 = 1 / s, by bisection to full
// double precision. a(0) = b(1) = 0 and a(1) = b(0) = 1 are expected. Throws
// NoRootError when b/a is not strictly decreasing on (0, 1) or no sign change exists.
double interpolant_time_change(const std::function<double(double)>& a, const std::function<double(double)>& b,
                               double s);

enum class ProcessKind { Sl, RfLinear, DdpmForward };

std::string_view to_string(ProcessKind kind);

struct ForwardPath {
  ProcessKind kind = ProcessKind::Sl;
  std::vector<double> times;   // in the process's own clock
  std::vector<Matrix> states;  // one n x d matrix per time
};

// Exact-in-law simulation on strictly increasing clock points:
//   Sl:          U_s = s X_1 + B_s                       (s > 0)
//   RfLinear:    X_t = t X_1 + t W_{(1-t)^2 / t^2}         (0 < t < 1)
//   DdpmForward: Y_tau = sqrt(w)(X_1 + B_{(1-w)/w}), w = exp(-2 tau)   (tau > 0)
// Brownian values along a path are built from independent increments.
ForwardPath simulate_forward(ProcessKind kind, const Target& target, const std::vector<double>& clock,
                             std::size_t n, std::uint64_t seed);

struct EquivalenceRecord {
  double s = 0.0;
  std::string pair;       // "sl-rf", "sl-ddpm", "rf-ddpm"
  std::string statistic;  // "mean" or "var"
  double max_gap = 0.0;   // over coordinates
  double max_z = 0.0;     // max |gap| / standard error
  bool pass = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceRecord> records;
  double z_threshold = 4.0;
  bool pass = false;
};

// Simulates U_s / s, X_{t(s)} / t(s) and Y_{tau(s)} / sqrt(w) with independent
// randomness and compares per-coordinate means and variances pairwise.
EquivalenceReport check_marginal_equivalence(const Target& target, const std::vector<double>& s_points,
                                             std::size_t n, std::uint64_t seed);

// Posterior variance Var(X_1 | X_t) averaged over X_t, for a 1-D target.
double expected_posterior_variance(const Target& target, double t, int power = 1);

// max over t of |dE[S_t]/dt + 2t/(1-t)^3 E[S_t^2]| / |dE[S_t]/dt| with S_t the
// 1-D posterior variance (absolute when the derivative vanishes). Central
// differences with step 1e-5; mixture expectations by Gauss-Hermite quadrature.
double covariance_ode_residual(const Target& target, const std::vector<double>& t_points);

// Nodes and weights of n-point Gauss-Hermite quadrature for weight exp(-x^2).
void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace rfsl
