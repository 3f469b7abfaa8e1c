#include "rfsl/checks.hpp"

#include <cmath>
#include <ostream>

#include "rfsl/error.hpp"
#include "rfsl/io.hpp"
#include "rfsl/localization.hpp"
#include "rfsl/rng.hpp"
#include "rfsl/samplers.hpp"

namespace rfsl {

namespace {

CheckRecord at_most(std::string name, double observed, double tolerance) {
  return {std::move(name), observed, tolerance, observed <= tolerance};
}

}  // namespace

std::vector<CheckRecord> ushaped_grid_checks(const TimeGrid& grid) {
  if (grid.kind != GridKind::UShaped) throw DomainError("ushaped_grid_checks: grid is not U-shaped");
  const auto& t = grid.times;
  const std::size_t n = grid.n_steps;
  const double h = grid.growth;
  constexpr double rel = 1e-12;

  double sym = 0.0;
  for (std::size_t j = 1; j < n; ++j) sym = std::max(sym, std::abs(t[j] + t[n - j] - 1.0));

  double geo = 0.0, ratio = 0.0, square = 0.0, sum = 0.0, gap = 0.0;
  for (std::size_t i = 1; i + 2 <= n; ++i) {
    const double eta = grid.step(i);
    const double ci = grid.tail(i), cn = grid.tail(i + 1);
    const double expect = t[i] < 0.5 ? h * t[i] : h * cn;
    geo = std::max(geo, std::abs(eta - expect) / expect);
    ratio = std::max({ratio, eta / ci / h, eta / cn / h});
    const double q = eta * ci / cn;
    square = std::max(square, q * q / (h * h));
    const double r = eta / (cn * t[i]);
    sum += r * r;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double eta = grid.step(i);
    const double a = grid.tail(i) / t[i], b = grid.tail(i + 1) / t[i + 1];
    gap = std::max(gap, (a * a - b * b) / (2.0 * eta / (t[i] * t[i] * t[i])));
  }
  const double bound = 8.0 * std::log(1.0 / (2.0 * grid.delta)) / static_cast<double>(n);

  return {
      at_most("midpoint", std::abs(t[n / 2] - 0.5), 1e-12),
      at_most("symmetry", sym, 1e-12),
      at_most("spacing-geometric", geo, rel),
      at_most("spacing-ratio", ratio, 1.0 + rel),
      at_most("spacing-square", square, 1.0 + rel),
      at_most("spacing-sum", sum / (4.0 * h * h * static_cast<double>(n)), 1.0),
      at_most("reciprocal-gap", gap, 1.0 + rel),
      at_most("growth-bound", h / bound, 1.0),
  };
}

namespace {

void prefixed(std::vector<CheckRecord>& out, const std::string& prefix, std::vector<CheckRecord> recs) {
  for (auto& r : recs) {
    r.name = prefix + r.name;
    out.push_back(std::move(r));
  }
}

std::vector<CheckRecord> grid_suite() {
  std::vector<CheckRecord> out;
  const std::pair<std::size_t, double> cases[] = {{6, 0.125}, {50, 0.02}, {100, 0.01}, {100, 0.001},
                                                  {200, 0.005}, {1000, 0.001}, {64, 0.2}};
  for (const auto& [n, delta] : cases) {
    const TimeGrid g = build_ushaped_grid(n, delta);
    prefixed(out, "ushaped(N=" + std::to_string(n) + ",delta=" + format_double(delta) + ")/", ushaped_grid_checks(g));
  }
  const std::tuple<std::size_t, double, double> ddpm[] = {{100, 2.0, 4.0}, {200, 2.0, 4.0}, {100, 2.0, 1.0}};
  for (const auto& [n, c0, c1] : ddpm) {
    const DdpmSchedule s = build_ddpm_schedule(n, c0, c1);
    const std::string p = "ddpm(N=" + std::to_string(n) + ",c0=" + format_double(c0) + ",c1=" + format_double(c1) + ")/";
    out.push_back(at_most(p + "beta1", std::abs(s.beta(1) - std::pow(static_cast<double>(n), -c0)), 0.0));
    double mono = -INFINITY;
    for (std::size_t tau = 1; tau <= n; ++tau) mono = std::max(mono, s.omega(tau) - s.omega(tau - 1));
    out.push_back({p + "omega-decreasing", mono, 0.0, mono < 0.0});
    const TimeGrid g = ddpm_induced_rf_grid(s);
    const auto c = stoc_rf_coefficients(g);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const bool ok = c.sigma2[i] >= 0.5 && c.sigma2[i] <= 1.0 && c.r2[i] >= 0.0 && c.r2[i] < 1.0 &&
                      c.eta[i] > 0.0 && c.eta[i] < 1.0 && c.psi[i] >= 0.0;
      if (!ok) worst = 1.0;
    }
    out.push_back(at_most(p + "stoc-rf-coefficients", worst, 0.0));
  }
  return out;
}

std::vector<CheckRecord> equivalence_suite(std::uint64_t seed, std::size_t threads) {
  std::vector<CheckRecord> out;
  const Target target = Target::low_rank(10, 8);
  const auto rep = check_marginal_equivalence(target, {0.25, 1.0, 4.0}, 100000, seed);
  for (const auto& r : rep.records)
    out.push_back({"marginal(s=" + format_double(r.s) + ")/" + r.pair + "/" + r.statistic, r.max_z, rep.z_threshold,
                   r.pass});

  // Coupled DDPM and stochastic RF trajectories.
  const FieldOracle oracle(target);
  const DdpmSchedule sched = build_ddpm_schedule(100, 2.0, 4.0);
  const TimeGrid grid = ddpm_induced_rf_grid(sched);
  SamplerOptions opt;
  opt.threads = threads;
  opt.record_trajectories = true;
  const auto a = ddpm_sample(oracle, sched, 100, seed, opt);
  const auto b = stoc_rf(oracle, grid, 100, seed, opt);
  double dev = 0.0;
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    const auto va = a.trajectory[k].states.values(), vb = b.trajectory[k].states.values();
    for (std::size_t j = 0; j < va.size(); ++j) dev = std::max(dev, std::abs(va[j] - vb[j]));
  }
  out.push_back(at_most("ddpm-vs-stoc-rf/max-deviation", dev, 1e-10));
  return out;
}

std::vector<CheckRecord> covariance_suite() {
  std::vector<CheckRecord> out;
  std::vector<double> ts;
  for (int i = 0; i < 20; ++i) ts.push_back(0.05 + 0.9 * i / 19.0);
  out.push_back(at_most("gaussian", covariance_ode_residual(Target::gaussian({0.0}, {1.0}), ts), 1e-6));
  const Target mix({{0.5, {-2.0}, {1.0}}, {0.5, {2.0}, {1.0}}});
  out.push_back(at_most("mixture", covariance_ode_residual(mix, ts), 1e-4));
  out.push_back(at_most("point-mass", covariance_ode_residual(Target::point_mass({1.5}), ts), 1e-12));
  return out;
}

std::vector<CheckRecord> identities_suite(std::uint64_t seed) {
  std::vector<CheckRecord> out;
  double rt = 0.0, comp = 0.0;
  for (int k = -60; k <= 60; ++k) {
    const double s = std::pow(10.0, k / 10.0);
    rt = std::max(rt, std::abs(sl_time_from_rf(rf_time_from_sl(s)) - s) / s);
    rt = std::max(rt, std::abs(sl_time_from_ddpm(ddpm_time_from_sl(s)) - s) / s);
    const double t = rf_time_from_sl(s);
    comp = std::max(comp, std::abs(rf_time_from_ddpm_time(ddpm_time_from_sl(s)) - t) / t);
  }
  out.push_back(at_most("time-change/round-trip", rt, 1e-12));
  out.push_back(at_most("time-change/composition", comp, 1e-12));

  double eta_id = 0.0;
  for (double c1 : {1.0, 4.0}) {
    const TimeGrid g = ddpm_induced_rf_grid(build_ddpm_schedule(100, 2.0, c1));
    for (std::size_t i = 0; i + 1 < g.n_steps; ++i) {
      const double ti = g.times[i], tn = g.times[i + 1], ui = g.tail(i);
      const double lhs = ddim_eta(ti, tn, ui, g.tail(i + 1)) * (ui * ui + ti * ti);
      const double rhs = g.step(i) * ui / tn;
      eta_id = std::max(eta_id, std::abs(lhs - rhs) / rhs);
    }
  }
  out.push_back(at_most("ddim/eta-sigma-identity", eta_id, 1e-12));

  const Target target = Target::low_rank(10, 8);
  const FieldOracle oracle(target);
  rng::Stream s(seed, rng::Domain::Test, 1);
  double paths = 0.0, tweedie = 0.0;
  std::vector<double> x(10), a(10), b(10), v(10), sc(10);
  for (int rep = 0; rep < 1000; ++rep) {
    const double t = 0.01 + 0.97 * s.uniform();
    const double tn = t + (1.0 - t) * 0.5 * s.uniform();
    for (auto& xi : x) xi = 8.0 * t + 3.0 * s.normal();
    const FieldSlice slice = oracle.at(t);
    ddim_rf_step(slice, tn, DdimForm::Simplified, x, a);
    ddim_rf_step(slice, tn, DdimForm::Scaled, x, b);
    slice.velocity(x, v);
    slice.score(x, sc);
    for (std::size_t j = 0; j < x.size(); ++j) {
      paths = std::max(paths, std::abs(a[j] - b[j]) / std::max(1.0, std::abs(a[j])));
      const double rebuilt = x[j] / t + (1.0 - t) / t * sc[j];
      tweedie = std::max(tweedie, std::abs(rebuilt - v[j]) / std::max(1.0, std::abs(v[j])));
    }
  }
  out.push_back(at_most("ddim/two-path-agreement", paths, 1e-10));
  out.push_back(at_most("tweedie/velocity-from-score", tweedie, 1e-10));
  return out;
}

}  // namespace

const std::vector<std::string>& check_suite_names() {
  static const std::vector<std::string> names{"grid", "equivalence", "covariance", "identities"};
  return names;
}

std::vector<CheckRecord> run_check_suite(std::string_view suite, std::uint64_t seed, std::size_t threads) {
  if (suite == "grid") return grid_suite();
  if (suite == "equivalence") return equivalence_suite(seed, threads);
  if (suite == "covariance") return covariance_suite();
  if (suite == "identities") return identities_suite(seed);
  throw DomainError("unknown check suite '" + std::string(suite) + "'");
}

void write_check_report(std::ostream& out, const std::vector<CheckRecord>& records) {
  out << "name,observed,tolerance,pass\n";
  for (const auto& r : records)
    out << r.name << ',' << format_double(r.observed) << ',' << format_double(r.tolerance) << ','
        << (r.pass ? "true" : "false") << '\n';
}

}  // namespace rfsl
