#include "rfsl/localization.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "rfsl/error.hpp"
#include "rfsl/rng.hpp"

namespace rfsl {

double BetaProfile::integral(double tau) const {
  if (tau < 0.0) throw DomainError("beta integral: tau must be >= 0");
  if (constant()) return tau;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(beta, 0.0, tau, 15, 1e-14);
}

double BetaProfile::inverse_integral(double value) const {
  if (value < 0.0) throw DomainError("beta integral inverse: value must be >= 0");
  if (constant()) return value;
  if (value == 0.0) return 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (integral(hi) < value) {
    hi *= 2.0;
    if (++expansions > 200) throw NoRootError("beta integral does not reach the requested value");
  }
  auto f = [&](double tau) { return integral(tau) - value; };
  boost::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto [lo, up] = boost::math::tools::toms748_solve(f, 0.0, hi, -value, f(hi), tol, iters);
  return 0.5 * (lo + up);
}

double rf_time_from_sl(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("rf_time_from_sl: s must be positive and finite");
  const double r = std::sqrt(s);
  return r / (1.0 + r);
}

double sl_time_from_rf(double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("sl_time_from_rf: t must lie in (0, 1)");
  const double q = t / (1.0 - t);
  return q * q;
}

double ddpm_time_from_sl(double s, const BetaProfile& beta) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("ddpm_time_from_sl: s must be positive and finite");
  return beta.inverse_integral(0.5 * std::log1p(1.0 / s));
}

double sl_time_from_ddpm(double tau, const BetaProfile& beta) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("sl_time_from_ddpm: tau must be positive");
  return 1.0 / std::expm1(2.0 * beta.integral(tau));
}

double rf_time_from_ddpm(double omega) {
  if (!(omega > 0.0 && omega < 1.0)) throw DomainError("rf_time_from_ddpm: omega must lie in (0, 1)");
  const double a = std::sqrt(omega);
  return a / (a + std::sqrt(1.0 - omega));
}

double omega_from_rf_time(double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("omega_from_rf_time: t must lie in (0, 1)");
  return t * t / ((1.0 - t) * (1.0 - t) + t * t);
}

double rf_time_from_ddpm_time(double tau, const BetaProfile& beta) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("rf_time_from_ddpm_time: tau must be positive");
  const double i2 = 2.0 * beta.integral(tau);
  const double w = std::exp(-i2), one_minus_w = -std::expm1(-i2);
  const double a = std::sqrt(w);
  return a / (a + std::sqrt(one_minus_w));
}

double ddpm_time_from_rf(double t, const BetaProfile& beta) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("ddpm_time_from_rf: t must lie in (0, 1)");
  // (1 - w) / w = ((1 - t) / t)^2
  const double q = (1.0 - t) / t;
  return beta.inverse_integral(0.5 * std::log1p(q * q));
}

double TimeChange::operator()(double x) const {
  switch (kind) {
    case TimeChangeKind::SlToRf:
      return rf_time_from_sl(x);
    case TimeChangeKind::RfToSl:
      return sl_time_from_rf(x);
    case TimeChangeKind::SlToDdpmOu:
      return ddpm_time_from_sl(x, beta);
    case TimeChangeKind::DdpmToRf:
      return rf_time_from_ddpm_time(x, beta);
  }
  throw DomainError("unknown time change");
}

double TimeChange::inverse(double y) const {
  switch (kind) {
    case TimeChangeKind::SlToRf:
      return sl_time_from_rf(y);
    case TimeChangeKind::RfToSl:
      return rf_time_from_sl(y);
    case TimeChangeKind::SlToDdpmOu:
      return sl_time_from_ddpm(y, beta);
    case TimeChangeKind::DdpmToRf:
      return ddpm_time_from_rf(y, beta);
  }
  throw DomainError("unknown time change");
}

double interpolant_time_change(const std::function<double(double)>& a, const std::function<double(double)>& b,
                               double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("interpolant_time_change: s must be positive");
  constexpr int probes = 1024;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < probes; ++k) {
    const double th = static_cast<double>(k) / probes;
    const double r = b(th) / a(th);
    if (!(r < prev)) throw NoRootError("interpolant_time_change: b/a is not strictly decreasing");
    prev = r;
  }
  // g > 0 where r^2 > 1/s, i.e. near theta = 0.
  auto g = [&](double th) {
    const double av = a(th), bv = b(th);
    return s * bv * bv - av * av;
  };
  double lo = 0.0, hi = 1.0;
  if (!(g(lo) > 0.0 && g(hi) < 0.0)) throw NoRootError("interpolant_time_change: no sign change on [0, 1]");
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    (gm > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::Sl:
      return "sl";
    case ProcessKind::RfLinear:
      return "rf";
    case ProcessKind::DdpmForward:
      return "ddpm";
  }
  return "unknown";
}

ForwardPath simulate_forward(ProcessKind kind, const Target& target, const std::vector<double>& clock,
                             std::size_t n, std::uint64_t seed) {
  if (clock.empty()) throw DomainError("simulate_forward: no clock points");
  if (n == 0) throw DomainError("simulate_forward: n must be positive");
  for (std::size_t k = 0; k < clock.size(); ++k) {
    const double c = clock[k];
    const bool ok = (kind == ProcessKind::RfLinear) ? (c > 0.0 && c < 1.0) : (c > 0.0 && std::isfinite(c));
    if (!ok) throw DomainError("simulate_forward: clock point outside the process domain");
    if (k > 0 && !(c > clock[k - 1])) throw DomainError("simulate_forward: clock points must increase");
  }

  const std::size_t m = clock.size(), d = target.dim();
  // Brownian clock u_k for each point.
  std::vector<double> u(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double c = clock[k];
    switch (kind) {
      case ProcessKind::Sl:
        u[k] = c;
        break;
      case ProcessKind::RfLinear:
        u[k] = (1.0 - c) * (1.0 - c) / (c * c);
        break;
      case ProcessKind::DdpmForward:
        u[k] = std::expm1(2.0 * c);  // (1 - w) / w
        break;
    }
  }
  // Visit Brownian times in increasing order; RF clock runs them backwards.
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < m; ++k) order[k] = (kind == ProcessKind::RfLinear) ? m - 1 - k : k;

  const SampleBatch x1 = sample_target(target, n, rng::substream_key(seed, rng::Domain::ForwardProcess, 0, 0));
  ForwardPath path{kind, clock, std::vector<Matrix>(m, Matrix(n, d))};
  std::vector<double> w(d), z(d);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(w.begin(), w.end(), 0.0);
    double u_prev = 0.0;
    const auto x = x1.data.row(i);
    for (std::size_t step = 0; step < m; ++step) {
      const std::size_t k = order[step];
      rng::Stream(seed, rng::Domain::ForwardProcess, i + 1, step).fill_normal(z);
      const double sd = std::sqrt(u[k] - u_prev);
      for (std::size_t j = 0; j < d; ++j) w[j] += sd * z[j];
      u_prev = u[k];
      auto out = path.states[k].row(i);
      const double c = clock[k];
      switch (kind) {
        case ProcessKind::Sl:
          for (std::size_t j = 0; j < d; ++j) out[j] = c * x[j] + w[j];
          break;
        case ProcessKind::RfLinear:
          for (std::size_t j = 0; j < d; ++j) out[j] = c * x[j] + c * w[j];
          break;
        case ProcessKind::DdpmForward: {
          const double a = std::exp(-c);
          for (std::size_t j = 0; j < d; ++j) out[j] = a * (x[j] + w[j]);
          break;
        }
      }
    }
  }
  return path;
}

namespace {

struct ColumnStats {
  std::vector<double> mean, var, var_se;
};

ColumnStats column_stats(const Matrix& m, double scale) {
  const std::size_t n = m.rows(), d = m.cols();
  ColumnStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += scale * m(i, j);
  for (auto& v : s.mean) v /= static_cast<double>(n);
  std::vector<double> m4(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = scale * m(i, j) - s.mean[j];
      s.var[j] += c * c;
      m4[j] += c * c * c * c;
    }
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    const double v = s.var[j] / nn;
    const double k4 = m4[j] / nn;
    s.var[j] = s.var[j] / (nn - 1.0);
    s.var_se[j] = std::sqrt(std::max(k4 - v * v, 0.0) / nn);
  }
  return s;
}

void compare(EquivalenceReport& rep, double s, const char* pair, const ColumnStats& a, const ColumnStats& b,
             std::size_t n) {
  const double nn = static_cast<double>(n);
  EquivalenceRecord mean_rec{s, pair, "mean"}, var_rec{s, pair, "var"};
  for (std::size_t j = 0; j < a.mean.size(); ++j) {
    const double gm = std::abs(a.mean[j] - b.mean[j]);
    const double se_m = std::sqrt(a.var[j] / nn + b.var[j] / nn);
    const double gv = std::abs(a.var[j] - b.var[j]);
    const double se_v = std::hypot(a.var_se[j], b.var_se[j]);
    mean_rec.max_gap = std::max(mean_rec.max_gap, gm);
    var_rec.max_gap = std::max(var_rec.max_gap, gv);
    // Zero standard error only arises for degenerate coordinates, where any gap is rounding.
    mean_rec.max_z = std::max(mean_rec.max_z, se_m > 0.0 ? gm / se_m : (gm > 1e-12 ? INFINITY : 0.0));
    var_rec.max_z = std::max(var_rec.max_z, se_v > 0.0 ? gv / se_v : (gv > 1e-12 ? INFINITY : 0.0));
  }
  mean_rec.pass = mean_rec.max_z <= rep.z_threshold;
  var_rec.pass = var_rec.max_z <= rep.z_threshold;
  rep.records.push_back(mean_rec);
  rep.records.push_back(var_rec);
}

}  // namespace

EquivalenceReport check_marginal_equivalence(const Target& target, const std::vector<double>& s_points,
                                             std::size_t n, std::uint64_t seed) {
  EquivalenceReport rep;
  for (std::size_t k = 0; k < s_points.size(); ++k) {
    const double s = s_points[k];
    const double t = rf_time_from_sl(s);
    const double tau = ddpm_time_from_sl(s);
    const double sqrt_w = std::exp(-tau);
    // Independent randomness for each process and clock.
    const auto sl = simulate_forward(ProcessKind::Sl, target, {s}, n,
                                     rng::substream_key(seed, rng::Domain::ForwardProcess, k, 1));
    const auto rf = simulate_forward(ProcessKind::RfLinear, target, {t}, n,
                                     rng::substream_key(seed, rng::Domain::ForwardProcess, k, 2));
    const auto dd = simulate_forward(ProcessKind::DdpmForward, target, {tau}, n,
                                     rng::substream_key(seed, rng::Domain::ForwardProcess, k, 3));
    const auto a = column_stats(sl.states[0], 1.0 / s);
    const auto b = column_stats(rf.states[0], 1.0 / t);
    const auto c = column_stats(dd.states[0], 1.0 / sqrt_w);
    compare(rep, s, "sl-rf", a, b, n);
    compare(rep, s, "sl-ddpm", a, c, n);
    compare(rep, s, "rf-ddpm", b, c, n);
  }
  rep.pass = true;
  for (const auto& r : rep.records) rep.pass = rep.pass && r.pass;
  return rep;
}

void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n == 0) throw DomainError("gauss_hermite: n must be positive");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k) / 2.0);
    jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = off;
    jac(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.resize(n);
  weights.resize(n);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) {
    nodes[k] = es.eigenvalues()(static_cast<Eigen::Index>(k));
    const double v0 = es.eigenvectors()(0, static_cast<Eigen::Index>(k));
    weights[k] = mu0 * v0 * v0;
  }
}

namespace {

constexpr std::size_t kHermiteNodes = 200;

const std::pair<std::vector<double>, std::vector<double>>& hermite_rule() {
  static const auto rule = [] {
    std::pair<std::vector<double>, std::vector<double>> r;
    gauss_hermite(kHermiteNodes, r.first, r.second);
    return r;
  }();
  return rule;
}

}  // namespace

double expected_posterior_variance(const Target& target, double t, int power) {
  if (target.dim() != 1) throw DomainError("expected_posterior_variance: target must be 1-D");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("expected_posterior_variance: t must lie in (0, 1)");
  if (target.single_component()) {
    const double x = 0.0;
    const double v = posterior_moments(target, t, std::span<const double>(&x, 1)).cov_diag[0];
    return power == 1 ? v : std::pow(v, power);
  }
  const auto& [nodes, weights] = hermite_rule();
  double acc = 0.0;
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (const auto& c : target.components()) {
    const double centre = t * c.mean[0];
    const double spread = std::sqrt(2.0 * (t * t * c.var[0] + (1.0 - t) * (1.0 - t)));
    double part = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double x = centre + spread * nodes[k];
      const double v = posterior_moments(target, t, std::span<const double>(&x, 1)).cov_diag[0];
      part += weights[k] * (power == 1 ? v : std::pow(v, power));
    }
    acc += c.weight * part * inv_sqrt_pi;
  }
  return acc;
}

double covariance_ode_residual(const Target& target, const std::vector<double>& t_points) {
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (double t : t_points) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("covariance_ode_residual: t must lie in (0, 1)");
    if (!(t - h > 0.0 && t + h < 1.0)) throw DomainError("covariance_ode_residual: t too close to the boundary");
    const double deriv =
        (expected_posterior_variance(target, t + h) - expected_posterior_variance(target, t - h)) / (2.0 * h);
    const double u = 1.0 - t;
    const double rhs = -(2.0 * t / (u * u * u)) * expected_posterior_variance(target, t, 2);
    const double gap = std::abs(deriv - rhs);
    worst = std::max(worst, deriv != 0.0 ? gap / std::abs(deriv) : gap);
  }
  return worst;
}

}  // namespace rfsl
