#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rfsl/error.hpp"
#include "rfsl/metrics.hpp"
#include "rfsl/rng.hpp"
#include "rfsl/samplers.hpp"

using namespace rfsl;

namespace {

double s2(double t) { return (1 - t) * (1 - t) + t * t; }

TimeGrid manual_grid(std::vector<double> times) {
  TimeGrid g;
  g.n_steps = times.size() - 1;
  g.delta = 1.0 - times[g.n_steps - 1];
  g.kind = GridKind::Uniform;
  g.times = std::move(times);
  return g;
}

// Reference Euler iterate of the exact Gaussian velocity, written from the definition.
double rf_velocity_1d(double t, double mu, double var, double x) {
  const double post_mean = mu + t * var / (t * t * var + (1 - t) * (1 - t)) * (x - t * mu);
  return (post_mean - x) / (1 - t);
}

double score_1d(double t, double mu, double var, double x) {
  return -(x - t * mu) / (t * t * var + (1 - t) * (1 - t));
}

double max_rel(const Matrix& a, const Matrix& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]) / (1 + std::abs(b.values()[i])));
  return m;
}

}  // namespace

TEST(SamplerKind, NamesRoundTrip) {
  for (auto k : {SamplerKind::Rf, SamplerKind::StocRf, SamplerKind::Langevin, SamplerKind::Ddpm, SamplerKind::DdimRf})
    EXPECT_EQ(sampler_kind_from_string(to_string(k)), k);
  EXPECT_THROW(sampler_kind_from_string("euler"), DomainError);
  EXPECT_FALSE(requires_positive_start(SamplerKind::Rf));
  EXPECT_TRUE(requires_positive_start(SamplerKind::StocRf));
}

TEST(StocRfCoefficients, HalfToTwoThirdsExample) {
  const auto c = stoc_rf_coefficients(manual_grid({0.5, 2.0 / 3.0, 1.0}));
  EXPECT_NEAR(c.sigma2[0], 0.5, 1e-15);
  EXPECT_NEAR(c.r2[0], 0.5, 1e-15);
  EXPECT_NEAR(c.r2[1], 0.8, 1e-15);
  EXPECT_NEAR(c.eta[0], 3.0 / 8.0, 1e-15);
  EXPECT_NEAR(c.psi[0], 3.0 / 32.0, 1e-15);
}

TEST(StocRfCoefficients, MatchRatioDefinitionOnDdpmGrid) {
  const auto grid = ddpm_induced_rf_grid(build_ddpm_schedule(200, 2, 4));
  const auto c = stoc_rf_coefficients(grid);
  for (std::size_t i = 0; i + 1 < grid.n_steps; ++i) {
    const double ri = c.r2[i], rn = c.r2[i + 1];
    const double eta = 1 - ri / rn;
    const double psi = (ri / rn) * (1 - rn) / (1 - ri) * eta;
    EXPECT_NEAR(c.eta[i], eta, 1e-9 * eta + 1e-15);
    EXPECT_NEAR(c.psi[i], psi, 1e-9 * psi + 1e-15);
    EXPECT_GT(c.eta[i], 0);
    EXPECT_LT(c.eta[i], 1);
  }
}

TEST(DdimEta, ExampleAndIdentity) {
  EXPECT_NEAR(ddim_eta(0.5, 2.0 / 3.0), 0.25, 1e-15);
  EXPECT_NEAR(ddim_eta(0.5, 2.0 / 3.0) * s2(0.5), 1.0 / 8.0, 1e-15);
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 1000; ++rep) {
    double a = std::uniform_real_distribution<double>(1e-3, 0.999)(g);
    double b = std::uniform_real_distribution<double>(1e-3, 0.999)(g);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    const double lhs = ddim_eta(a, b) * s2(a);
    const double rhs = (b - a) * (1 - a) / b;
    EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
  }
}

TEST(RfEuler, PointMassTrajectoriesAreStraightLines) {
  const FieldOracle o(Target::point_mass({3.0, -1.0}));
  const auto grid = build_ushaped_grid(20, 0.05);
  SamplerOptions opt;
  opt.record_trajectories = true;
  const auto b = rf_euler(o, grid, 7, 11, opt);
  ASSERT_EQ(b.trajectory.size(), grid.n_steps);
  const auto& y0 = b.trajectory[0].states;
  for (const auto& fr : b.trajectory) {
    EXPECT_EQ(fr.t, grid.times[fr.step]);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const double c = j == 0 ? 3.0 : -1.0;
        EXPECT_NEAR(fr.states(i, j), (1 - fr.t) * y0(i, j) + fr.t * c, 1e-12);
      }
  }
  EXPECT_EQ(b.meta.sampler, "rf");
  EXPECT_EQ(b.meta.terminal_time, grid.times[grid.n_steps - 1]);
}

TEST(RfEuler, SingleFinalStepLandsOnPointMass) {
  const FieldOracle o(Target::point_mass({2.5}));
  SamplerOptions opt;
  opt.final_step = true;
  const auto b = rf_euler(o, build_uniform_grid(1), 5, 0, opt);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(b.data(i, 0), 2.5, 1e-14);
  EXPECT_EQ(b.meta.terminal_time, 1.0);
}

TEST(RfEuler, InitialStatesFollowStreams) {
  const auto grid = build_uniform_grid(10);
  const auto m = initial_states(grid, 3, 4, 99);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> z(4);
    rng::Stream(99, rng::Domain::InitialState, i).fill_normal(z);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), z[j]);
  }
  const auto dg = ddpm_induced_rf_grid(build_ddpm_schedule(100, 2, 4));
  const auto m2 = initial_states(dg, 3, 4, 99);
  EXPECT_NEAR(m2(1, 2), std::sqrt(s2(dg.times[0])) * m(1, 2), 1e-15);
}

TEST(RfEuler, MatchesHandWrittenEulerOnMixture) {
  const Target t({{0.5, {-1.0}, {0.5}}, {0.5, {2.0}, {0.3}}});
  const FieldOracle o(t);
  const auto grid = build_ushaped_grid(30, 0.02);
  const auto b = rf_euler(o, grid, 20, 4);
  const auto y0 = initial_states(grid, 20, 1, 4);
  for (std::size_t r = 0; r < 20; ++r) {
    double y = y0(r, 0);
    for (std::size_t i = 0; i + 1 < grid.n_steps; ++i) {
      const double tt = grid.times[i];
      // mixture velocity by responsibilities
      double w[2], v[2];
      const double mus[2] = {-1.0, 2.0}, vars[2] = {0.5, 0.3};
      double tot = 0;
      for (int c = 0; c < 2; ++c) {
        const double D = tt * tt * vars[c] + (1 - tt) * (1 - tt);
        w[c] = 0.5 * std::exp(-0.5 * (y - tt * mus[c]) * (y - tt * mus[c]) / D) / std::sqrt(D);
        v[c] = rf_velocity_1d(tt, mus[c], vars[c], y);
        tot += w[c];
      }
      y += (grid.times[i + 1] - tt) * (w[0] * v[0] + w[1] * v[1]) / tot;
    }
    EXPECT_NEAR(b.data(r, 0), y, 1e-10 * (1 + std::abs(y)));
  }
}

TEST(RfEuler, PerStepMomentsMatchAffinePushforward) {
  const Target target = Target::low_rank(6, 4, 8.0);
  const auto grid = build_ushaped_grid(50, 0.02);
  SamplerOptions opt;
  opt.record_trajectories = true;
  const std::size_t n = 5000;
  const auto b = rf_euler(FieldOracle(target), grid, n, 21, opt);
  const auto path = gaussian_pushforward(target, grid, SamplerKind::Rf);
  ASSERT_EQ(path.times.size(), b.trajectory.size());
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    const auto ms = moment_stats(b.trajectory[k].states);
    for (std::size_t j = 0; j < 6; ++j) {
      const double sd = std::sqrt(path.var[k][j]);
      EXPECT_NEAR(ms.mean[j], path.mean[k][j], 4 * sd / std::sqrt(n) + 1e-9);
      EXPECT_NEAR(ms.var[j], path.var[k][j], 4 * path.var[k][j] * std::sqrt(2.0 / (n - 1)) + 1e-9);
    }
  }
}

TEST(Pushforward, RfMatchesIndependentRecursion) {
  const Target target = Target::gaussian({1.0, -3.0}, {2.0, 0.0});
  const auto grid = build_ushaped_grid(40, 0.01);
  const auto path = gaussian_pushforward(target, grid, SamplerKind::Rf);
  const double mu[2] = {1.0, -3.0}, var[2] = {2.0, 0.0};
  for (std::size_t j = 0; j < 2; ++j) {
    double m = 0, v = 1;
    for (std::size_t i = 0; i + 1 < grid.n_steps; ++i) {
      const double t = grid.times[i], dt = grid.times[i + 1] - t;
      const double a = 1 + dt * (rf_velocity_1d(t, mu[j], var[j], 1.0) - rf_velocity_1d(t, mu[j], var[j], 0.0));
      const double c = dt * rf_velocity_1d(t, mu[j], var[j], 0.0);
      m = a * m + c;
      v = a * a * v;
      EXPECT_NEAR(path.mean[i + 1][j], m, 1e-10 * (1 + std::abs(m)));
      EXPECT_NEAR(path.var[i + 1][j], v, 1e-10 * (1 + v));
    }
  }
  EXPECT_THROW(gaussian_pushforward(Target({{0.5, {0.0}, {1.0}}, {0.5, {1.0}, {1.0}}}), grid, SamplerKind::Rf),
               DomainError);
}

TEST(StocRf, CovarianceMatchesPushforward) {
  const Target target = Target::low_rank(4, 3, 2.0);
  const auto grid = ddpm_induced_rf_grid(build_ddpm_schedule(100, 2, 4));
  const std::size_t n = 8000;
  const auto b = stoc_rf(FieldOracle(target), grid, n, 6);
  const auto path = gaussian_pushforward(target, grid, SamplerKind::StocRf);
  const auto ms = moment_stats(b);
  const auto& m = path.mean.back();
  const auto& v = path.var.back();
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(ms.mean[j], m[j], 4 * std::sqrt(v[j] / n) + 1e-12);
    EXPECT_NEAR(ms.var[j], v[j], 4 * v[j] * std::sqrt(2.0 / (n - 1)) + 1e-12);
  }
  EXPECT_LT(v[3], 0.05 * v[0]);
}

TEST(Ddpm, CovarianceMatchesPushforward) {
  const Target target = Target::low_rank(3, 2, 1.0);
  const auto sched = build_ddpm_schedule(100, 2, 4);
  const std::size_t n = 8000;
  const auto b = ddpm_sample(FieldOracle(target), sched, n, 12);
  const auto path = gaussian_pushforward_ddpm(target, sched);
  ASSERT_EQ(path.times.size(), sched.n_steps);
  EXPECT_EQ(path.times.back(), b.meta.terminal_time);
  const auto& m = path.mean.back();
  const auto& v = path.var.back();
  const auto ms = moment_stats(b);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(ms.mean[j], m[j], 4 * std::sqrt(v[j] / n) + 1e-12);
    EXPECT_NEAR(ms.var[j], v[j], 4 * v[j] * std::sqrt(2.0 / (n - 1)) + 1e-12);
  }
}

TEST(Ddpm, CoupledWithStocRfPointwise) {
  const Target target = Target({{0.6, {1.0, 0.0, -2.0}, {0.5, 1.0, 0.0}}, {0.4, {-1.0, 2.0, 0.0}, {1.0, 0.2, 0.0}}});
  const FieldOracle o(target);
  const auto sched = build_ddpm_schedule(100, 2, 4);
  const auto grid = ddpm_induced_rf_grid(sched);
  SamplerOptions opt;
  opt.record_trajectories = true;
  const auto a = ddpm_sample(o, sched, 50, 31, opt);
  const auto b = stoc_rf(o, grid, 50, 31, opt);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t k = 0; k < a.trajectory.size(); ++k)
    EXPECT_LE(max_rel(a.trajectory[k].states, b.trajectory[k].states), 1e-10) << "step " << k;
}

TEST(Ddpm, CoefficientAsymptotics) {
  const auto sched = build_ddpm_schedule(1000, 2, 4);
  for (std::size_t tau = 2; tau <= 1000; tau += 37) {
    const double a = sched.alpha(tau), w = sched.omega(tau), beta = 1 - a;
    EXPECT_NEAR((1 - a) / std::sqrt(a), beta, beta * beta);
    const double nu = std::sqrt((a - w) * (1 - a) / (1 - w));
    EXPECT_NEAR(nu / std::sqrt(a), std::sqrt(beta), std::sqrt(beta) * (beta + beta * w / (1 - w)));
  }
}

TEST(DdimRf, FormsAgreeAndTrackRf) {
  const Target target({{0.3, {1.0, 2.0}, {0.4, 1.0}}, {0.7, {-2.0, 0.0}, {1.0, 0.1}}});
  const FieldOracle o(target);
  std::mt19937_64 g(9);
  std::normal_distribution<double> nd;
  std::vector<double> y(2), a(2), b(2);
  for (int rep = 0; rep < 1000; ++rep) {
    double t0 = std::uniform_real_distribution<double>(0.01, 0.98)(g);
    double t1 = std::uniform_real_distribution<double>(t0, 0.99)(g);
    if (!(t1 > t0)) continue;
    for (auto& v : y) v = 3 * nd(g);
    const auto sl = o.at(t0);
    ddim_rf_step(sl, t1, DdimForm::Simplified, y, a);
    ddim_rf_step(sl, t1, DdimForm::Scaled, y, b);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a[j], b[j], 1e-10 * (1 + std::abs(a[j])));
  }
  // Simplified form is an Euler step of the velocity written through the score.
  const auto sl = o.at(0.4);
  y = {0.3, -1.2};
  ddim_rf_step(sl, 0.45, DdimForm::Simplified, y, a);
  std::vector<double> v(2);
  sl.velocity(y, v);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a[j], y[j] + 0.05 * v[j], 1e-13);

  const auto grid = ddpm_induced_rf_grid(build_ddpm_schedule(100, 2, 4));
  const auto x = initial_states(grid, 30, 2, 5);
  const auto d1 = ddim_rf(o, grid, 30, 5);
  const auto r1 = integrate(SamplerKind::Rf, o, grid, x, 5);
  EXPECT_LE(max_rel(d1.data, r1.data), 1e-10);
}

TEST(Langevin, ZeroGammaIsRf) {
  const Target target = Target::low_rank(3, 2, 4.0);
  const FieldOracle o(target);
  const auto grid = ddpm_induced_rf_grid(build_ddpm_schedule(60, 2, 4));
  const auto x = initial_states(grid, 10, 3, 2);
  SamplerOptions opt;
  opt.langevin_gamma_scale = 0.0;
  const auto l = integrate(SamplerKind::Langevin, o, grid, x, 2, opt);
  const auto r = integrate(SamplerKind::Rf, o, grid, x, 2);
  EXPECT_EQ(l.data, r.data);
}

TEST(Langevin, MomentsMatchPushforward) {
  const Target target = Target::gaussian({3.0, -1.0}, {1.0, 0.5});
  const auto grid = ddpm_induced_rf_grid(build_ddpm_schedule(100, 2, 4));
  const std::size_t n = 8000;
  const auto b = langevin_rf(FieldOracle(target), grid, n, 17);
  const auto path = gaussian_pushforward(target, grid, SamplerKind::Langevin);
  const auto ms = moment_stats(b);
  for (std::size_t j = 0; j < 2; ++j) {
    const double v = path.var.back()[j];
    EXPECT_NEAR(ms.mean[j], path.mean.back()[j], 4 * std::sqrt(v / n));
    EXPECT_NEAR(ms.var[j], v, 4 * v * std::sqrt(2.0 / (n - 1)));
  }
}

TEST(Samplers, ThreadCountDoesNotChangeOutput) {
  const Target target({{0.5, {1.0, 1.0}, {0.2, 0.3}}, {0.5, {-1.0, 0.0}, {1.0, 0.0}}});
  const FieldOracle o(target);
  const auto grid = ddpm_induced_rf_grid(build_ddpm_schedule(50, 2, 4));
  const auto sched = build_ddpm_schedule(50, 2, 4);
  for (auto kind : {SamplerKind::Rf, SamplerKind::StocRf, SamplerKind::Langevin, SamplerKind::DdimRf}) {
    SamplerOptions one, four;
    four.threads = 4;
    const auto x = initial_states(grid, 300, 2, 8);
    EXPECT_EQ(integrate(kind, o, grid, x, 8, one).data, integrate(kind, o, grid, x, 8, four).data);
  }
  SamplerOptions four;
  four.threads = 4;
  EXPECT_EQ(ddpm_sample(o, sched, 300, 8).data, ddpm_sample(o, sched, 300, 8, four).data);
}

TEST(Samplers, ErrorPaths) {
  const FieldOracle o(Target::low_rank(3, 2));
  const auto grid = build_ushaped_grid(10, 0.1);
  EXPECT_THROW(stoc_rf(o, grid, 5, 0), DomainError);
  EXPECT_THROW(langevin_rf(o, grid, 5, 0), DomainError);
  EXPECT_THROW(ddim_rf(o, grid, 5, 0), DomainError);
  EXPECT_THROW(rf_euler(o, grid, 0, 0), DomainError);
  EXPECT_THROW(integrate(SamplerKind::Ddpm, o, grid, Matrix(2, 3), 0), DomainError);
  EXPECT_THROW(integrate(SamplerKind::Rf, o, grid, Matrix(2, 4), 0), DomainError);
  const auto blow = perturb_field(o, {PerturbationSpec::Kind::ScaleBias, 1e300, 0});
  EXPECT_THROW(rf_euler(blow, build_uniform_grid(10), 4, 0), NonFiniteState);
}

TEST(Samplers, ScoreMatchesClosedForm) {
  const FieldOracle o(Target::gaussian({2.0}, {0.5}));
  std::vector<double> x{1.3}, s(1);
  o.score(0.7, x, s);
  EXPECT_NEAR(s[0], score_1d(0.7, 2.0, 0.5, 1.3), 1e-14);
}
