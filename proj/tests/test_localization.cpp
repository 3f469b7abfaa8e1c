#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rfsl/error.hpp"
#include "rfsl/localization.hpp"
#include "rfsl/metrics.hpp"
#include "support/oracles.hpp"

using namespace rfsl;

namespace {

std::vector<double> log_sweep(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return v;
}

// E over X_t of Var(X_1 | X_t)^power for a 1-D mixture, by Simpson over x with
// the component-wise conjugate posterior.
double expected_var_oracle(const std::vector<oracle::Comp1d>& mix, double t, int power) {
  const double u = 1 - t;
  auto f = [&](double x) {
    double z = 0, m1 = 0, m2 = 0;
    for (const auto& c : mix) {
      const double D = t * t * c.var + u * u;
      const double w = c.w * oracle::normal_pdf(x, t * c.mu, D);
      const double pm = c.mu + t * c.var / D * (x - t * c.mu);
      const double pv = c.var * u * u / D;
      z += w;
      m1 += w * pm;
      m2 += w * (pv + pm * pm);
    }
    if (z == 0) return 0.0;
    const double v = m2 / z - (m1 / z) * (m1 / z);
    return z * std::pow(v, power);
  };
  return oracle::simpson(f, -40, 40, 40000);
}

}  // namespace

TEST(TimeMaps, Examples) {
  EXPECT_DOUBLE_EQ(rf_time_from_sl(1.0), 0.5);
  EXPECT_NEAR(rf_time_from_sl(4.0), 2.0 / 3.0, 1e-16);
  EXPECT_NEAR(ddpm_time_from_sl(1.0), 0.5 * std::log(2.0), 1e-16);
  EXPECT_NEAR(ddpm_time_from_sl(0.3465735902799726), 0.5 * std::log1p(1 / 0.3465735902799726), 1e-15);
  EXPECT_LT(ddpm_time_from_sl(1e12), 1e-12);
  EXPECT_DOUBLE_EQ(rf_time_from_ddpm(0.5), 0.5);
  EXPECT_NEAR(rf_time_from_ddpm(0.2), 1.0 / 3.0, 1e-15);
  EXPECT_GT(rf_time_from_ddpm(1 - 1e-12), 1 - 1e-5);
  EXPECT_LT(rf_time_from_ddpm(1e-12), 1e-5);
  for (auto bad : {0.0, -1.0}) {
    EXPECT_THROW(rf_time_from_sl(bad), DomainError);
    EXPECT_THROW(ddpm_time_from_sl(bad), DomainError);
  }
  EXPECT_THROW(rf_time_from_ddpm(0.0), DomainError);
  EXPECT_THROW(rf_time_from_ddpm(1.0), DomainError);
  EXPECT_THROW(sl_time_from_rf(1.0), DomainError);
}

TEST(TimeMaps, RoundTripsOverLogSweeps) {
  for (double s : log_sweep(1e-6, 1e6, 241)) {
    EXPECT_NEAR(sl_time_from_rf(rf_time_from_sl(s)), s, 1e-12 * s);
    EXPECT_NEAR(sl_time_from_ddpm(ddpm_time_from_sl(s)), s, 1e-12 * s);
    const double t = rf_time_from_sl(s);
    // identity ((1 - t) / t)^2 = 1 / s
    EXPECT_NEAR((1 - t) * (1 - t) / (t * t), 1 / s, 1e-12 / s);
    for (auto k : {TimeChangeKind::SlToRf, TimeChangeKind::SlToDdpmOu}) {
      const TimeChange tc{k, {}};
      EXPECT_NEAR(tc.inverse(tc(s)), s, 1e-12 * s);
    }
  }
  for (double x : log_sweep(1e-6, 0.5, 100)) {
    for (double t : {x, 1 - x}) {
      const TimeChange rs{TimeChangeKind::RfToSl, {}};
      EXPECT_NEAR(rs.inverse(rs(t)), t, 1e-12 * t);
    }
    for (double w : {x, 1 - x}) EXPECT_NEAR(omega_from_rf_time(rf_time_from_ddpm(w)), w, 1e-12 * w);
  }
  for (double tau : log_sweep(1e-6, 20.0, 200)) {
    const TimeChange dr{TimeChangeKind::DdpmToRf, {}};
    EXPECT_NEAR(dr.inverse(dr(tau)), tau, 1e-12 * tau);
    EXPECT_NEAR(ddpm_time_from_rf(rf_time_from_ddpm_time(tau)), tau, 1e-12 * tau);
  }
}

TEST(TimeMaps, DdpmCompositionEqualsRfMap) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> ls(-6, 6);
  for (int i = 0; i < 1000; ++i) {
    const double s = std::pow(10.0, ls(g));
    const double tau = 0.5 * std::log1p(1 / s);
    const double w = std::exp(-2 * tau);
    const double t = std::sqrt(w) / (std::sqrt(w) + std::sqrt(1 - w));
    EXPECT_NEAR(rf_time_from_ddpm_time(ddpm_time_from_sl(s)), rf_time_from_sl(s), 1e-12 * rf_time_from_sl(s));
    EXPECT_NEAR(t, rf_time_from_sl(s), 1e-12 * t);
  }
}

TEST(TimeMaps, SigmaIdentity) {
  std::mt19937_64 g(2);
  for (int i = 0; i < 1000; ++i) {
    const double w = std::uniform_real_distribution<double>(1e-9, 1 - 1e-9)(g);
    const double t = rf_time_from_ddpm(w);
    EXPECT_NEAR(oracle::sigma2(t) * w, t * t, 1e-12 * t * t);
    EXPECT_NEAR(omega_from_rf_time(t), w, 1e-12 * w + 1e-15);
  }
}

TEST(TimeMaps, GeneralBetaProfile) {
  BetaProfile lin{[](double tau) { return 1 + tau; }};
  for (double tau : {1e-4, 0.1, 0.7, 3.0}) {
    EXPECT_NEAR(lin.integral(tau), tau + tau * tau / 2, 1e-12 * tau);
    EXPECT_NEAR(lin.inverse_integral(lin.integral(tau)), tau, 1e-10 * tau);
  }
  for (double s : log_sweep(1e-3, 1e3, 25)) {
    const double tau = ddpm_time_from_sl(s, lin);
    // tau + tau^2/2 = log(1 + 1/s) / 2
    const double target = 0.5 * std::log1p(1 / s);
    EXPECT_NEAR(tau, -1 + std::sqrt(1 + 2 * target), 1e-10 * tau);
    EXPECT_NEAR(sl_time_from_ddpm(tau, lin), s, 1e-9 * s);
    EXPECT_NEAR(rf_time_from_ddpm_time(tau, lin), rf_time_from_sl(s), 1e-10);
  }
  BetaProfile one;
  EXPECT_TRUE(one.constant());
  EXPECT_DOUBLE_EQ(one.integral(0.3), 0.3);
}

TEST(InterpolantTimeChange, LinearAndTrigonometric) {
  auto lin_a = [](double th) { return th; };
  auto lin_b = [](double th) { return 1 - th; };
  auto trig_a = [](double th) { return std::sin(std::numbers::pi * th / 2); };
  auto trig_b = [](double th) { return std::cos(std::numbers::pi * th / 2); };
  EXPECT_NEAR(interpolant_time_change(trig_a, trig_b, 1.0), 0.5, 1e-12);
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> ls(-3, 3);
  for (int i = 0; i < 200; ++i) {
    const double s = std::pow(10.0, ls(g));
    EXPECT_NEAR(interpolant_time_change(lin_a, lin_b, s), rf_time_from_sl(s), 1e-12);
    const double th = interpolant_time_change(trig_a, trig_b, s);
    const double t = trig_a(th) / (trig_a(th) + trig_b(th));
    EXPECT_NEAR(t, rf_time_from_sl(s), 1e-10);
  }
}

TEST(InterpolantTimeChange, NonMonotoneRatioThrows) {
  auto a = [](double th) { return th; };
  auto b = [](double th) { return (1 - th) * (1 + 3 * std::sin(4 * std::numbers::pi * th) * th); };
  EXPECT_THROW(interpolant_time_change(a, b, 1.0), NoRootError);
}

TEST(ForwardProcess, SlPointMassMarginalsAndIncrements) {
  const auto target = Target::point_mass({1.5, -0.5});
  const std::vector<double> clock{0.5, 2.0};
  const std::size_t n = 40000;
  const auto p = simulate_forward(ProcessKind::Sl, target, clock, n, 3);
  ASSERT_EQ(p.states.size(), 2u);
  EXPECT_EQ(p.times, clock);
  for (std::size_t k = 0; k < 2; ++k) {
    const double s = clock[k];
    Matrix r = p.states[k];
    for (auto& v : r.values()) v /= s;
    const auto ms = moment_stats(r);
    EXPECT_NEAR(ms.mean[0], 1.5, 4 * std::sqrt(1 / s / n));
    EXPECT_NEAR(ms.var[1], 1 / s, 4 / s * std::sqrt(2.0 / n));
  }
  // Cov(U_{s1}, U_{s2}) = min(s1, s2) for a point mass
  double cov = 0;
  for (std::size_t i = 0; i < n; ++i) cov += (p.states[0](i, 0) - 0.5 * 1.5) * (p.states[1](i, 0) - 2.0 * 1.5);
  cov /= n;
  EXPECT_NEAR(cov, 0.5, 4 * std::sqrt(0.5 * 2.0 / n) + 4 * 0.5 / std::sqrt(n));
}

TEST(ForwardProcess, RfAndDdpmMarginals) {
  const auto gauss = Target::gaussian({0.0, 0.0}, {1.0, 1.0});
  const std::size_t n = 40000;
  const std::vector<double> ts{0.2, 0.5, 0.9};
  const auto rf = simulate_forward(ProcessKind::RfLinear, gauss, ts, n, 5);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double v = oracle::sigma2(ts[k]);
    const auto ms = moment_stats(rf.states[k]);
    EXPECT_NEAR(ms.mean[0], 0.0, 4 * std::sqrt(v / n));
    EXPECT_NEAR(ms.var[1], v, 4 * v * std::sqrt(2.0 / n));
  }
  const auto lr = Target::gaussian({2.0, 3.0}, {0.5, 0.0});
  const std::vector<double> taus{0.1, 1.0};
  const auto dd = simulate_forward(ProcessKind::DdpmForward, lr, taus, n, 6);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double w = std::exp(-2 * taus[k]);
    const auto ms = moment_stats(dd.states[k]);
    const double v0 = w * 0.5 + (1 - w), v1 = 1 - w;
    EXPECT_NEAR(ms.mean[0], std::sqrt(w) * 2.0, 4 * std::sqrt(v0 / n));
    EXPECT_NEAR(ms.mean[1], std::sqrt(w) * 3.0, 4 * std::sqrt(v1 / n));
    EXPECT_NEAR(ms.var[0], v0, 4 * v0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(ms.var[1], v1, 4 * v1 * std::sqrt(2.0 / n));
  }
  EXPECT_THROW(simulate_forward(ProcessKind::RfLinear, gauss, {0.5, 1.0}, 10, 0), DomainError);
  EXPECT_THROW(simulate_forward(ProcessKind::Sl, gauss, {0.0}, 10, 0), DomainError);
  EXPECT_THROW(simulate_forward(ProcessKind::Sl, gauss, {2.0, 1.0}, 10, 0), DomainError);
}

TEST(MarginalEquivalence, GaussianPointMassAndLowRank) {
  const std::vector<double> s_points{0.25, 1.0, 4.0};
  for (const auto& target :
       {Target::gaussian(std::vector<double>(3, 0.0), std::vector<double>(3, 1.0)), Target::point_mass({1.0, -2.0}),
        Target::low_rank(10, 8)}) {
    const auto rep = check_marginal_equivalence(target, s_points, 20000, 7);
    EXPECT_TRUE(rep.pass) << target.describe();
    EXPECT_EQ(rep.records.size(), s_points.size() * 3 * 2);
    for (const auto& r : rep.records) EXPECT_EQ(r.pass, r.max_z <= rep.z_threshold);
  }
}

TEST(MarginalEquivalence, DetectsAWrongClock) {
  // Comparing a point-mass SL path against a deliberately shifted one must fail:
  // simulate SL at s and 2s and treat them as equal in law.
  const auto target = Target::point_mass({0.0});
  const auto a = simulate_forward(ProcessKind::Sl, target, {1.0}, 20000, 1);
  const auto b = simulate_forward(ProcessKind::Sl, target, {2.0}, 20000, 2);
  Matrix ra = a.states[0], rb = b.states[0];
  for (auto& v : rb.values()) v /= 2.0;
  const double va = moment_stats(ra).var[0], vb = moment_stats(rb).var[0];
  EXPECT_GT(std::abs(va - vb) / (va * std::sqrt(2.0 / 20000)), 4.0);
}

TEST(CovarianceOde, ExpectedPosteriorVarianceMatchesOracle) {
  const auto g = Target::gaussian({0.0}, {1.0});
  EXPECT_NEAR(expected_posterior_variance(g, 0.5), 0.5, 1e-15);
  const Target mix({{0.5, {-2.0}, {1.0}}, {0.5, {2.0}, {1.0}}});
  const std::vector<oracle::Comp1d> m{{0.5, -2.0, 1.0}, {0.5, 2.0, 1.0}};
  for (double t : {0.1, 0.4, 0.8, 0.95})
    for (int p : {1, 2}) {
      const double ref = expected_var_oracle(m, t, p);
      EXPECT_NEAR(expected_posterior_variance(mix, t, p), ref, 1e-9 * (1 + ref)) << t << " " << p;
    }
}

TEST(CovarianceOde, ResidualsAreSmall) {
  const auto g = Target::gaussian({0.0}, {1.0});
  // closed form at t = 1/2: d/dt E[S_t] = -2t(1-t)/sigma^4 = -2
  const double h = 1e-5;
  const double d = (expected_posterior_variance(g, 0.5 + h) - expected_posterior_variance(g, 0.5 - h)) / (2 * h);
  EXPECT_NEAR(d, -2.0, 1e-8);
  std::vector<double> ts;
  for (int i = 0; i < 20; ++i) ts.push_back(0.05 + 0.9 * i / 19.0);
  EXPECT_LT(covariance_ode_residual(g, ts), 1e-6);
  EXPECT_LT(covariance_ode_residual(Target::gaussian({1.0}, {3.0}), ts), 1e-6);
  EXPECT_EQ(covariance_ode_residual(Target::point_mass({2.0}), ts), 0.0);
  const Target mix({{0.5, {-2.0}, {1.0}}, {0.5, {2.0}, {1.0}}});
  EXPECT_LT(covariance_ode_residual(mix, ts), 1e-4);
  EXPECT_THROW(covariance_ode_residual(g, {0.0}), DomainError);
  EXPECT_THROW(covariance_ode_residual(g, {1.0}), DomainError);
}

TEST(GaussHermite, IntegratesPolynomialsExactly) {
  std::vector<double> x, w;
  gauss_hermite(20, x, w);
  ASSERT_EQ(x.size(), 20u);
  double m0 = 0, m2 = 0, m4 = 0, m3 = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    m0 += w[i];
    m2 += w[i] * x[i] * x[i];
    m3 += w[i] * x[i] * x[i] * x[i];
    m4 += w[i] * std::pow(x[i], 4);
  }
  const double sp = std::sqrt(std::numbers::pi);
  EXPECT_NEAR(m0, sp, 1e-13);
  EXPECT_NEAR(m2, sp / 2, 1e-13);
  EXPECT_NEAR(m3, 0.0, 1e-13);
  EXPECT_NEAR(m4, 3 * sp / 4, 1e-13);
}
