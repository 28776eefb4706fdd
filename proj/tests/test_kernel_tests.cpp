#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "focklab/heat.hpp"
#include "focklab/kernel_tests.hpp"
#include "oracles.hpp"

using namespace focklab;

namespace {

AnnuliConfig annuli(int hi = 200) {
  AnnuliConfig c;
  c.n_max = hi;
  return c;
}

// Thin-annulus oracle for the quadratic test of the indicator annuli:
// (1/pi) int_{A_m} e^{-|z-a|^2} dA ~ 4 a_m rho_m e^{-(a_m - a)^2} e^{-2 a a_m} I0(2 a a_m).
double thin_annuli_quadratic(double a, int n_lo, int n_hi) {
  double s = 0.0;
  for (int m = n_lo; m <= n_hi; ++m) {
    const double am = std::sqrt(double(m));
    if (std::abs(am - a) > 8.0) continue;  // e^{-64} relative
    const double u = 2.0 * a * am;
    const double d = std::pow(double(m), 2.5) * std::log(double(m));
    s += d * d * 4.0 * am * std::pow(double(m), -4.5) * std::exp(-(am - a) * (am - a)) *
         std::cyl_bessel_i(0.0, u) * std::exp(-u);
  }
  return s;
}

RadialSymbol scaled(const RadialSymbol& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<SymbolTerm> terms;
  for (auto t : g.terms()) {
    if (auto* p = std::get_if<PowerPiece>(&t)) p->amplitude *= U(rng);
    if (auto* a = std::get_if<AnnulusPiece>(&t)) a->amplitude *= U(rng);
    terms.push_back(t);
  }
  return RadialSymbol(g.name() + "-scaled", std::move(terms));
}

KernelScan synthetic(const std::vector<int>& ns, auto&& f) {
  KernelScan s;
  s.order = KernelOrder::Quadratic;
  for (int n : ns) {
    s.centers.push_back(std::sqrt(double(n)));
    s.values.push_back(f(double(n)));
    s.tail_bounds.push_back(0.0);
  }
  classify_scan(s);
  return s;
}

}  // namespace

TEST(GaussianAverage, Examples) {
  const auto one = constant_symbol(1.0);
  for (double a : {0.0, 1.0, 7.5, 30.0}) {
    EXPECT_NEAR(gaussian_average(one, KernelOrder::Linear, a), 1.0, 1e-10);
    EXPECT_NEAR(gaussian_average(one, KernelOrder::Quadratic, a), 1.0, 1e-10);
  }
  EXPECT_NEAR(gaussian_average(disk_indicator(), KernelOrder::Linear, 0.0), 1.0 - std::exp(-1.0), 1e-12);

  const auto g = build_annuli_symbol(annuli());
  const double c = 1e-3;
  const double E100 = 4.0 * c * std::pow(100.0, -5.0);
  const double floor = 0.99 * AnnuliConfig::d(100) * AnnuliConfig::d(100) * E100 / std::numbers::pi;
  EXPECT_NEAR(floor, 0.0268, 1e-4);
  EXPECT_GT(gaussian_average(g, KernelOrder::Quadratic, 10.0), floor);
}

TEST(GaussianAverage, QuadraticDivergesForStrongSingularity) {
  EXPECT_THROW(gaussian_average(build_power_symbol(-1.5, std::pair{0.0, 1.0}), KernelOrder::Quadratic, 0.0),
               DivergentError);
  EXPECT_NO_THROW(gaussian_average(build_power_symbol(-1.5, std::pair{0.0, 1.0}), KernelOrder::Linear, 0.0));
}

TEST(GaussianAverage, AgreesWithAngularOracle) {
  const std::vector<RadialSymbol> syms{disk_indicator(2.0, 3.0), build_power_symbol(-0.7, std::pair{0.0, 4.0}),
                                       RadialSymbol("rings", {AnnulusPiece{2.0, 0.1, 3.0, false},
                                                              AnnulusPiece{4.0, 0.3, 1.5, true}})};
  for (const auto& g : syms)
    for (double a : {0.0, 1.3, 4.0})
      for (int p : {1, 2}) {
        const auto order = p == 1 ? KernelOrder::Linear : KernelOrder::Quadratic;
        const double v = gaussian_average(g, order, a, 1e-12);
        const double o = oracle::gaussian_average_2d(g, a, p);
        EXPECT_NEAR(v, o, 1e-9 * std::max(1.0, o)) << g.name() << " a=" << a << " p=" << p;
      }
}

TEST(GaussianAverage, AnnuliQuadraticMatchesThinAnnulusOracle) {
  const auto g = build_annuli_symbol(annuli());
  for (int n : {20, 50, 100, 150, 200}) {
    const double a = std::sqrt(double(n));
    // members far from the window contribute below 1e-12 relative
    const double o = thin_annuli_quadratic(a, 2, 2000);
    const double v = gaussian_average(g, KernelOrder::Quadratic, a, 1e-12);
    EXPECT_LT(std::abs(v - o) / o, 1e-6) << n;
  }
}

TEST(GaussianAverage, OrderBridgeIsExact) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = oracle::random_compact_symbol(rng, -0.9);
    const double a = 6.0 * U(rng);
    EXPECT_EQ(gaussian_average(g, KernelOrder::Quadratic, a), gaussian_average(squared(g), KernelOrder::Linear, a));
  }
  const auto ann = build_annuli_symbol(annuli());
  EXPECT_EQ(gaussian_average(ann, KernelOrder::Quadratic, 9.0), gaussian_average(squared(ann), KernelOrder::Linear, 9.0));
}

TEST(GaussianAverage, LinearEqualsQuarterTimeHeat) {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_compact_symbol(rng);
    const double a = 8.0 * U(rng);
    const double l = gaussian_average(g, KernelOrder::Linear, a);
    EXPECT_LE(std::abs(l - heat_transform_radial(g, 0.25, a)), 1e-8 * l);
  }
}

TEST(Admissibility, AnnuliAdmissibleAtEveryProbe) {
  const auto g = build_annuli_symbol(annuli());
  for (int n : {0, 50, 200}) {
    const double a = n == 0 ? 0.0 : std::sqrt(double(n));
    const auto r = coherent_state_admissibility(g, a, 200);
    EXPECT_TRUE(r.admissible) << n;
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_GE(r.tail_bound, 0.0);
  }
  const auto r50 = coherent_state_admissibility(g, std::sqrt(50.0), 200);
  EXPECT_LT(r50.tail_bound, 1e-6 * r50.value);
}

TEST(Admissibility, TailBoundsTheOmittedMembers) {
  // remainder beyond n_max = 60 against the full value at n_max = 400
  const auto g = build_annuli_symbol(annuli());
  const double a = std::sqrt(40.0);
  const auto short_run = coherent_state_admissibility(g, a, 60, 1e-12);
  const auto long_run = coherent_state_admissibility(g, a, 400, 1e-12);
  EXPECT_GE(short_run.value + short_run.tail_bound, long_run.value * (1.0 - 1e-10));
  EXPECT_LE(short_run.value, long_run.value * (1.0 + 1e-10));
}

TEST(Admissibility, StrongSingularityIsInadmissible) {
  const auto r = coherent_state_admissibility(build_power_symbol(-1.5, std::pair{0.0, 1.0}), 0.0, 200);
  EXPECT_FALSE(r.admissible);
  const auto ok = coherent_state_admissibility(build_power_symbol(-0.5, std::pair{0.0, 1.0}), 0.0, 200);
  EXPECT_TRUE(ok.admissible);
}

TEST(SupremalScan, ConstantLooksBounded) {
  std::vector<double> centers;
  for (int i = 0; i <= 20; ++i) centers.push_back(i);
  const auto s = supremal_scan(constant_symbol(1.0), KernelOrder::Linear, centers);
  EXPECT_EQ(s.verdict, ScanVerdict::BoundedLooking);
  EXPECT_NEAR(s.sup, 1.0, 1e-10);
}

TEST(SupremalScan, AnnuliLinearBoundedBelowCeiling) {
  const auto g = build_annuli_symbol(annuli());
  const auto s = supremal_scan(g, KernelOrder::Linear, annuli_centers(2, 200));
  EXPECT_EQ(s.verdict, ScanVerdict::BoundedLooking);
  const auto m = l1_norm_area(g);
  EXPECT_LE(s.sup, (m.partial + m.tail_bound) / std::numbers::pi);
}

TEST(SupremalScan, AnnuliQuadraticDiverges) {
  const auto g = build_annuli_symbol(annuli());
  const auto s = supremal_scan(g, KernelOrder::Quadratic, annuli_centers(20, 200));
  EXPECT_EQ(s.verdict, ScanVerdict::Diverging);
  EXPECT_TRUE(s.last_third_increasing);
  EXPECT_GT(s.growth_ratio, 3.0);
  // pointwise finite everywhere, yet the uniform test fails
  for (double a : {0.0, s.centers.front(), s.centers.back()})
    EXPECT_TRUE(coherent_state_admissibility(g, a, 200).admissible);
}

TEST(SupremalScan, RejectsUnsortedCenters) {
  EXPECT_THROW(supremal_scan(constant_symbol(1.0), KernelOrder::Linear, {2.0, 1.0}), ValidationError);
}

TEST(ClassifyScan, Rules) {
  const std::vector<int> ns{10, 20, 30, 40, 50, 60, 70, 80, 90};
  EXPECT_EQ(synthetic(ns, [](double n) { return n * n; }).verdict, ScanVerdict::Diverging);
  // increasing but less than 3x the early median
  EXPECT_EQ(synthetic(ns, [](double n) { return 100.0 + n; }).verdict, ScanVerdict::BoundedLooking);
  // large but not increasing at the end
  auto zigzag = synthetic(ns, [](double n) { return n == 80 ? 1e6 : n * n; });
  EXPECT_FALSE(zigzag.last_third_increasing);
  EXPECT_EQ(zigzag.verdict, ScanVerdict::BoundedLooking);
  const auto s = synthetic(ns, [](double n) { return n; });
  EXPECT_EQ(s.cumulative_sup.back(), 90.0);
  EXPECT_EQ(s.sup, 90.0);
}

TEST(ScanProperty, InvariantsOnRandomSymbols) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_compact_symbol(rng, -0.9);
    for (auto order : {KernelOrder::Linear, KernelOrder::Quadratic}) {
      const auto s = supremal_scan(g, order, annuli_centers(1, 40), 1e-10, 1);
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        EXPECT_GE(s.values[i], 0.0);
        EXPECT_GE(s.tail_bounds[i], 0.0);
      }
      if (s.verdict == ScanVerdict::Diverging) {
        EXPECT_TRUE(s.last_third_increasing);
      }
    }
  }
}

TEST(ScanProperty, MonotoneDomination) {
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g2 = oracle::random_compact_symbol(rng, -0.9);
    const auto g1 = scaled(g2, rng);
    for (auto order : {KernelOrder::Linear, KernelOrder::Quadratic}) {
      const auto s1 = supremal_scan(g1, order, annuli_centers(0, 30), 1e-12, 1);
      const auto s2 = supremal_scan(g2, order, annuli_centers(0, 30), 1e-12, 1);
      for (std::size_t i = 0; i < s1.values.size(); ++i) EXPECT_LE(s1.values[i], s2.values[i] + 1e-12) << trial;
    }
  }
}

TEST(ScanProperty, ThreadCountDoesNotChangeValues) {
  const auto g = build_annuli_symbol(annuli());
  const auto a = supremal_scan(g, KernelOrder::Quadratic, annuli_centers(20, 80), 1e-10, 1);
  const auto b = supremal_scan(g, KernelOrder::Quadratic, annuli_centers(20, 80), 1e-10, 4);
  EXPECT_EQ(a.values, b.values);
}

TEST(FitDivergenceRate, SyntheticLogSquared) {
  std::vector<int> ns;
  for (double n = 2.0; n <= 5000.0; n *= 1.1)
    if (ns.empty() || int(std::lround(n)) != ns.back()) ns.push_back(int(std::lround(n)));
  const auto s = synthetic(ns, [](double n) { return std::log(n) * std::log(n); });
  ASSERT_EQ(s.verdict, ScanVerdict::Diverging);
  const auto f = fit_divergence_rate(s, RateModel::LogSquared);
  EXPECT_EQ(f.exponent, 0.0);
  EXPECT_NEAR(f.c_lo, 1.0, 1e-12);
  EXPECT_NEAR(f.c_hi, 1.0, 1e-12);
  EXPECT_NEAR(f.constant, 1.0, 1e-12);
}

TEST(FitDivergenceRate, SyntheticPowerTimesLogSquared) {
  std::vector<int> ns;
  for (int n = 20; n <= 200; ++n) ns.push_back(n);
  const auto s = synthetic(ns, [](double n) { return 7.0 * std::pow(n, 1.3) * std::log(n) * std::log(n); });
  const auto f = fit_divergence_rate(s, RateModel::PowerTimesLogSquared);
  EXPECT_NEAR(f.exponent, 1.3, 1e-10);
  EXPECT_NEAR(f.constant, 7.0, 1e-8);
  EXPECT_NEAR(f.band_width(), 1.0, 1e-10);
}

TEST(FitDivergenceRate, Errors) {
  std::vector<int> ns{10, 20, 30, 40, 50, 60, 70, 80, 90};
  EXPECT_THROW(fit_divergence_rate(synthetic(ns, [](double n) { return 100.0 + n; }), RateModel::LogSquared),
               ValidationError);
  // steep power growth leaves a residual band far wider than 10x under LogSquared
  const auto steep = synthetic(ns, [](double n) { return std::pow(n, 4.0); });
  EXPECT_THROW(fit_divergence_rate(steep, RateModel::LogSquared), FitRejected);
}

TEST(FitDivergenceRate, AnnuliQuadraticScan) {
  const auto g = build_annuli_symbol(annuli());
  const auto s = supremal_scan(g, KernelOrder::Quadratic, annuli_centers(20, 200));
  const auto f = fit_divergence_rate(s, RateModel::LogSquared);
  EXPECT_GT(f.c_lo, 0.0);
  // all ~sqrt(n) neighbouring annuli inside the Gaussian window contribute:
  // window sum of d_m^2 |A_m| e^{-(a_m - a_n)^2} ~ n^{-4} n^5 ln^2 n
  const auto p = fit_divergence_rate(s, RateModel::PowerTimesLogSquared);
  EXPECT_GT(p.exponent, 0.8);
  EXPECT_LT(p.exponent, 1.2);
  const double window = thin_annuli_quadratic(std::sqrt(200.0), 2, 2000) / thin_annuli_quadratic(std::sqrt(50.0), 2, 2000);
  EXPECT_NEAR(s.values.back() / s.values[30], window, 1e-5 * window);
}
