#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "focklab/numerics.hpp"

using namespace focklab;

namespace {

// ln(n!) by direct compensated summation of logs.
double log_factorial_oracle(int n) {
  KahanSum s;
  for (int k = 2; k <= n; ++k) s += std::log(static_cast<double>(k));
  return s.value();
}

// e^{-x} I0(x) = (1/pi) int_0^pi e^{x (cos t - 1)} dt
double bessel_quadrature_oracle(double x) {
  auto r = integrate_interval([x](double t) { return std::exp(x * (std::cos(t) - 1.0)); }, 0.0, std::numbers::pi,
                              QuadratureOptions::with_tol(1e-14));
  return r.value / std::numbers::pi;
}

}  // namespace

TEST(LogGamma, ReferenceValues) {
  EXPECT_EQ(log_gamma(1.0), 0.0);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
  EXPECT_NEAR(log_gamma(0.5), 0.5723649429, 1e-10);
  EXPECT_NEAR(log_gamma(11.0), log_factorial_oracle(10), 1e-12 * 15.1);
  EXPECT_NEAR(log_gamma(11.0), 15.1044125731, 1e-10);
}

TEST(LogGamma, IntegerFactorialsAcrossRange) {
  for (int n : {3, 5, 20, 100, 1000, 12345, 999999}) {
    const double expected = log_factorial_oracle(n - 1);
    EXPECT_NEAR(log_gamma(n), expected, 1e-12 * std::abs(expected)) << "n=" << n;
  }
}

TEST(LogGamma, HalfIntegers) {
  // Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!)
  for (int n : {1, 2, 7, 30, 400}) {
    const double expected =
        log_factorial_oracle(2 * n) + 0.5 * std::log(std::numbers::pi) - n * std::log(4.0) - log_factorial_oracle(n);
    EXPECT_NEAR(log_gamma(n + 0.5), expected, 1e-12 * std::abs(expected)) << "n=" << n;
  }
}

TEST(LogGamma, RecurrenceProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logx(std::log(0.5), std::log(1e6));
  for (int i = 0; i < 200; ++i) {
    const double x = std::exp(logx(rng));
    const double lhs = log_gamma(x + 1.0) - log_gamma(x);
    EXPECT_NEAR(lhs, std::log(x), 2e-12 * std::max(1.0, std::abs(log_gamma(x + 1.0)))) << "x=" << x;
  }
}

TEST(LogGamma, DomainError) {
  EXPECT_THROW(log_gamma(0.0), ValidationError);
  EXPECT_THROW(log_gamma(-1.5), ValidationError);
}

TEST(BesselI0Scaled, ReferenceValues) {
  EXPECT_EQ(bessel_i0_scaled(0.0), 1.0);
  EXPECT_NEAR(bessel_i0_scaled(1.0), 0.4657596076, 1e-10);
  // e^{-100} I0(100); asymptotic series (2 pi x)^{-1/2} (1 + 1/(8x) + 9/(128 x^2) + ...)
  EXPECT_NEAR(bessel_i0_scaled(100.0), 0.0399443793, 1e-10);
}

TEST(BesselI0Scaled, MatchesIntegralRepresentation) {
  for (double x : {0.01, 0.3, 1.0, 4.5, 12.0, 24.9, 25.1, 40.0, 100.0, 2500.0}) {
    const double oracle = bessel_quadrature_oracle(x);
    EXPECT_NEAR(bessel_i0_scaled(x), oracle, 1e-10 * oracle) << "x=" << x;
  }
}

TEST(BesselI0Scaled, BoundedAndMonotoneOnGrid) {
  double prev = bessel_i0_scaled(0.0);
  for (double x = 0.01; x < 1e4; x *= 1.05) {
    const double v = bessel_i0_scaled(x);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_LT(v, prev) << "x=" << x;
    prev = v;
  }
}

TEST(IntegrateInterval, Examples) {
  auto r1 = integrate_interval([](double r) { return 2 * r; }, 0.0, 1.0, 1e-12);
  EXPECT_EQ(r1.status, QuadratureStatus::Converged);
  EXPECT_NEAR(r1.value, 1.0, 1e-14);

  auto r2 = integrate_interval([](double r) { return 2 * r * std::exp(-r * r); }, 0.0, 10.0, 1e-12);
  EXPECT_EQ(r2.status, QuadratureStatus::Converged);
  EXPECT_NEAR(r2.value, -std::expm1(-100.0), 1e-12);
  EXPECT_LE(r2.error_estimate, 1e-12);

  auto r3 = integrate_interval([](double r) { return 1.0 / r; }, 0.0, 1.0, 1e-10);
  EXPECT_EQ(r3.status, QuadratureStatus::Divergent);
}

TEST(IntegrateInterval, DivergenceAtUpperEndpoint) {
  auto r = integrate_interval([](double r) { return 1.0 / ((1.0 - r) * (1.0 - r)); }, 0.0, 1.0, 1e-10);
  EXPECT_EQ(r.status, QuadratureStatus::Divergent);
}

TEST(IntegrateInterval, IntegrableSingularityIsNotFlagged) {
  // r^{-0.9}: slow but convergent; must not be certified divergent
  QuadratureOptions o = QuadratureOptions::with_tol(1e-6);
  auto r = integrate_interval([](double r) { return std::pow(r, -0.5); }, 0.0, 1.0, o);
  EXPECT_EQ(r.status, QuadratureStatus::Converged);
  EXPECT_NEAR(r.value, 2.0, 1e-5);
  auto slow = integrate_interval([](double r) { return std::pow(r, -0.9); }, 0.0, 1.0, o);
  EXPECT_NE(slow.status, QuadratureStatus::Divergent);
}

TEST(IntegrateInterval, DivergenceSurvivesDeeperRecursion) {
  for (double p : {1.0, 1.2, 1.5, 2.0, 3.0}) {
    auto f = [p](double r) { return std::pow(r, -p); };
    QuadratureOptions o = QuadratureOptions::with_tol(1e-10);
    auto shallow = integrate_interval(f, 0.0, 1.0, o);
    o.max_depth *= 2;
    auto deep = integrate_interval(f, 0.0, 1.0, o);
    EXPECT_EQ(shallow.status, QuadratureStatus::Divergent) << "p=" << p;
    EXPECT_EQ(deep.status, QuadratureStatus::Divergent) << "p=" << p;
  }
}

TEST(IntegrateInterval, MaxDepthWhenNoCertificate) {
  QuadratureOptions o = QuadratureOptions::with_tol(1e-14);
  o.max_depth = 5;
  o.detect_divergence = false;
  auto r = integrate_interval([](double r) { return std::sqrt(r); }, 0.0, 1.0, o);
  EXPECT_EQ(r.status, QuadratureStatus::MaxDepth);
}

TEST(IntegrateInterval, ConvergedImpliesErrorWithinTolerance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    const QuadratureOptions o = QuadratureOptions::with_tol(1e-11);
    auto r = integrate_interval([&](double x) { return std::exp(-a * x) * std::cos(b * x); }, 0.0, 3.0, o);
    ASSERT_TRUE(r.converged());
    EXPECT_LE(r.error_estimate, o.tolerance_for(r.value));
    const double exact = (a - std::exp(-3 * a) * (a * std::cos(3 * b) - b * std::sin(3 * b))) / (a * a + b * b);
    EXPECT_NEAR(r.value, exact, 1e-10);
  }
}

TEST(IntegrateInterval, Linearity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  auto f = [](double x) { return std::exp(-x * x) * (1 + x); };
  auto g = [](double x) { return std::sqrt(x) * std::sin(3 * x); };
  for (int i = 0; i < 20; ++i) {
    const double a = coef(rng);
    const double b = coef(rng);
    auto rf = integrate_interval(f, 0.0, 2.0, 1e-12);
    auto rg = integrate_interval(g, 0.0, 2.0, 1e-12);
    auto rs = integrate_interval([&](double x) { return a * f(x) + b * g(x); }, 0.0, 2.0, 1e-12);
    const double combined = std::abs(a) * rf.error_estimate + std::abs(b) * rg.error_estimate + rs.error_estimate;
    EXPECT_NEAR(rs.value, a * rf.value + b * rg.value, combined + 1e-14);
  }
}

TEST(IntegrateInterval, Deterministic) {
  auto f = [](double x) { return std::exp(-x) * std::log1p(x * x); };
  auto a = integrate_interval(f, 0.0, 20.0, 1e-12);
  auto b = integrate_interval(f, 0.0, 20.0, 1e-12);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.error_estimate, b.error_estimate);
}

TEST(IntegrateSemiInfinite, GaussianDecay) {
  auto r = integrate_semi_infinite([](double r) { return 2 * r * std::exp(-r * r); }, 0.0, 1.0, 1e-12);
  EXPECT_TRUE(r.converged());
  EXPECT_NEAR(r.value, 1.0, 1e-11);
}

TEST(IntegrateSemiInfinite, GammaHalf) {
  TailEnvelope env;
  env.shape = TailEnvelope::Shape::Exponential;
  env.start = 1.0;
  env.log_magnitude = -1.0;  // r^{-1/2} e^{-r} <= e^{-1} e^{-(r-1)} for r >= 1
  env.scale = 1.0;
  auto r = integrate_semi_infinite([](double r) { return std::exp(-r) / std::sqrt(r); }, 0.0, env,
                                   QuadratureOptions::with_tol(1e-9));
  EXPECT_TRUE(r.converged()) << to_string(r.status);
  EXPECT_NEAR(r.value, std::sqrt(std::numbers::pi), 1e-8);
  EXPECT_NEAR(r.value, 1.7724538509, 1e-8);
}

TEST(IntegrateSemiInfinite, DivergentAtOrigin) {
  TailEnvelope env;
  env.shape = TailEnvelope::Shape::Exponential;
  env.start = 1.0;
  env.log_magnitude = -1.0;
  auto r = integrate_semi_infinite([](double r) { return std::exp(-r) * std::pow(r, -1.5); }, 0.0, env,
                                   QuadratureOptions::with_tol(1e-10));
  EXPECT_EQ(r.status, QuadratureStatus::Divergent);
}

TEST(LogMagnitudeTest, Arithmetic) {
  const auto a = LogMagnitude::from_value(3.0);
  const auto b = LogMagnitude::from_value(-5.0);
  EXPECT_NEAR((a * b).value(), -15.0, 1e-13);
  EXPECT_NEAR((a + b).value(), -2.0, 1e-13);
  EXPECT_TRUE((a + LogMagnitude::from_value(-3.0)).is_zero());
  const auto huge = LogMagnitude::from_log(800.0);
  EXPECT_NEAR((huge / LogMagnitude::from_log(799.0)).value(), std::exp(1.0), 1e-12);
  EXPECT_EQ(LogMagnitude::zero().sign, 0);
}

TEST(LogSum, MatchesDirectSum) {
  LogSumAccumulator acc;
  KahanSum direct;
  for (int k = 0; k < 100; ++k) {
    const double lt = -0.01 * (k - 40) * (k - 40);
    acc.add_log(lt);
    direct += std::exp(lt);
  }
  EXPECT_NEAR(std::exp(acc.log_value()), direct.value(), 1e-13 * direct.value());
}
