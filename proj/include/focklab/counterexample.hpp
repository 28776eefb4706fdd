#pragma once

// The annuli counterexample: sectors E_n inside A_n, normalized test
// functions f_n = c_n 1_{E_n}, the moment series for ||U_g f_n||^2, the
// kernel lower bound on E_n x E_n, and the aggregated suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "focklab/heat.hpp"
#include "focklab/kernel_tests.hpp"
#include "focklab/parallel.hpp"
#include "focklab/symbols.hpp"

namespace focklab {

struct SectorTest {
  int n = 0;
  double a = 0.0;
  double rho = 0.0;
  double d = 0.0;
  double phi = 0.0;
  double area_E = 0.0;       // 4 a rho phi
  LogMagnitude c_n_sq_log;   // |c_n|^2 = pi e^{a^2} / |E_n|
};

inline SectorTest sector_geometry(int n, double c) {
  AnnuliConfig cfg;
  cfg.c = c;
  cfg.n_min = 2;
  cfg.n_max = std::max(n, 2);
  cfg.validate();
  if (n < 2) throw ValidationError("sector_geometry: n must be >= 2");
  SectorTest s;
  s.n = n;
  s.a = AnnuliConfig::a(n);
  s.rho = AnnuliConfig::rho(n);
  s.d = AnnuliConfig::d(n);
  s.phi = cfg.phi(n);
  s.area_E = 4.0 * s.a * s.rho * s.phi;
  s.c_n_sq_log = LogMagnitude::from_log(std::log(std::numbers::pi) + double(n) - std::log(s.area_E));
  return s;
}

/// ||f_n||^2_{L^2(mu)} = e^{-rho^2} sinh(2 a rho) / (2 a rho).
inline double test_fn_norm_sq(int n, double c) {
  const auto s = sector_geometry(n, c);
  const double x = 2.0 * s.a * s.rho;
  const double x2 = x * x;
  // sinh(x)/x by its series when x is small, so 1 + O((a rho)^2) survives rounding
  const double log_sinhc = x < 1e-2 ? std::log1p(x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0)
                                    : std::log(std::sinh(x) / x);
  return 1.0 + std::expm1(log_sinhc - s.rho * s.rho);
}

// ---------------------------------------------------------------------------
// Moment series

struct MomentSeries {
  int k_max = 0;
  std::vector<double> log_terms;  // ln(|m_k|^2 / k!)
  double log_partial_sum = -kInf;
  double truncation_bound = 0.0;  // bound on the omitted terms, same scale as the sum
  double norm_sq = 0.0;           // ||U_g f_n||^2
  double log_norm_sq = -kInf;
};

namespace detail {

/// ln int_{a-rho}^{a+rho} r^{k+1} e^{-r^2} [psi((r-a)/rho)] dr
inline double log_radial_moment(double a, double rho, int k, bool smooth, double tol) {
  const double L = (k + 1) * std::log(a) - a * a;
  auto f = [&](double u) {
    const double r = a + rho * u;
    const double prof = smooth ? log_smooth_bump_profile(u) : 0.0;
    if (prof == -kInf) return 0.0;
    return std::exp((k + 1) * std::log(r) - r * r - L + prof);
  };
  QuadratureOptions o;
  o.abs_tol = 0.0;
  o.rel_tol = tol;
  const auto q = integrate_interval(f, -1.0, 1.0, o);
  if (!q.converged()) throw NumericFailure("radial moment quadrature did not converge");
  return L + std::log(rho) + std::log(q.value);
}

}  // namespace detail

/// ||U_g f_n||^2 = d^2 |c_n|^2 sum_k |m_k|^2 / k!,  m_k = (1/pi) ang_k R_k.
/// Summation stops after 50 consecutive terms below tol * running sum, once
/// k >= n + 20 sqrt(n). The symbol on E_n is d psi when smooth.
inline MomentSeries ug_fn_norm_sq_series(int n, double c, double tol = 1e-12, bool smooth = false) {
  MomentSeries ms;
  if (c == 0.0) {
    ms.norm_sq = 0.0;
    return ms;
  }
  const auto s = sector_geometry(n, c);
  const int k_floor = n + static_cast<int>(std::ceil(20.0 * std::sqrt(double(n))));
  const int k_limit = 4 * n + 1000;
  LogSumAccumulator sum;
  int quiet = 0;
  const double log_tol = std::log(tol);
  const double quad_tol = std::max(tol, 1e-12);
  for (int k = 0; k <= k_limit; ++k) {
    const double ang = k == 0 ? 2.0 * s.phi : 2.0 * std::sin(k * s.phi) / k;
    if (!(ang > 0.0)) throw NumericFailure("moment series: angular factor left (0, 2 phi]");
    const double log_m = -std::log(std::numbers::pi) + std::log(ang) + detail::log_radial_moment(s.a, s.rho, k, smooth, quad_tol);
    const double log_term = 2.0 * log_m - log_gamma(k + 1.0);
    ms.log_terms.push_back(log_term);
    sum.add_log(log_term);
    quiet = log_term < log_tol + sum.log_value() ? quiet + 1 : 0;
    if (k >= k_floor && quiet >= 50) {
      ms.k_max = k;
      break;
    }
  }
  if (ms.k_max == 0) throw TruncationFailure("moment series for n=" + std::to_string(n) + " did not settle by k=" + std::to_string(k_limit));
  ms.log_partial_sum = sum.log_value();
  // past the Poisson-like peak consecutive ratios decrease; bound the rest geometrically
  const std::size_t K = ms.log_terms.size();
  const double log_q = ms.log_terms[K - 1] - ms.log_terms[K - 2];
  const double log_scale = 2.0 * std::log(s.d) + s.c_n_sq_log.log_abs;
  if (log_q < 0.0)
    ms.truncation_bound = std::exp(ms.log_terms[K - 1] + log_q - std::log(-std::expm1(log_q)) + log_scale);
  else
    ms.truncation_bound = kInf;
  ms.log_norm_sq = log_scale + ms.log_partial_sum;
  ms.norm_sq = std::exp(ms.log_norm_sq);
  return ms;
}

inline double ug_fn_norm_sq(int n, double c, double tol = 1e-12, bool smooth = false) {
  return ug_fn_norm_sq_series(n, c, tol, smooth).norm_sq;
}

/// mu(E_n) = (1/pi) int_{E_n} e^{-|z|^2} dA = (2 phi / pi) (e^{-(a-rho)^2} - e^{-(a+rho)^2}) / 2
inline double sector_gaussian_mass(int n, double c) {
  const auto s = sector_geometry(n, c);
  return s.phi / std::numbers::pi * std::exp(-(s.a - s.rho) * (s.a - s.rho)) * -std::expm1(-4.0 * s.a * s.rho);
}

// ---------------------------------------------------------------------------
// Kernel lower bound on E_n x E_n

struct KernelLowerResult {
  double min_scaled_re = kInf;
  double max_abs_im = 0.0;
  int samples = 0;
};

/// Points (r, theta, r', theta') from a 4-D Kronecker lattice with a seeded
/// Cranley-Patterson shift, plus the 16 corners of the box.
inline KernelLowerResult kernel_lower_check(int n, double c, int sample_count, std::uint64_t seed) {
  const auto s = sector_geometry(n, c);
  // generalized golden ratio for d = 4: root of x^5 = x + 1
  const double g = 1.1673039782614187;
  const double alpha[4] = {1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g), 1.0 / (g * g * g * g)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double shift[4];
  for (double& v : shift) v = unit(rng);

  KernelLowerResult out;
  auto visit = [&](const double x[4]) {
    const double dr = s.rho * (2.0 * x[0] - 1.0);
    const double dr2 = s.rho * (2.0 * x[2] - 1.0);
    const double th = s.phi * (2.0 * x[1] - 1.0);
    const double th2 = s.phi * (2.0 * x[3] - 1.0);
    const double r = s.a + dr;
    const double r2 = s.a + dr2;
    const double delta = th - th2;
    const double half = std::sin(0.5 * delta);
    // r r' cos D - r^2 - r'^2 + a^2 without cancellation
    const double expo = -s.a * (dr + dr2) + dr * dr2 - dr * dr - dr2 * dr2 - 2.0 * r * r2 * half * half;
    const double im = r * r2 * std::sin(delta);
    const double scaled = std::exp(expo) * std::cos(im);
    out.min_scaled_re = std::min(out.min_scaled_re, scaled);
    out.max_abs_im = std::max(out.max_abs_im, std::abs(im));
    ++out.samples;
  };
  for (int corner = 0; corner < 16; ++corner) {
    double x[4];
    for (int j = 0; j < 4; ++j) x[j] = (corner >> j) & 1 ? 1.0 : 0.0;
    visit(x);
  }
  for (int i = 0; i < std::max(0, sample_count - 16); ++i) {
    double x[4];
    for (int j = 0; j < 4; ++j) {
      const double v = shift[j] + (i + 1) * alpha[j];
      x[j] = v - std::floor(v);
    }
    visit(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suite

struct SuiteOptions {
  double tol = 1e-10;
  unsigned threads = 0;
  int scan_start = 20;  // first a_n of the quadratic scan
};

struct AdmissibilityEntry {
  double center = 0.0;
  Admissibility result;
};

struct HeatEntry {
  double t = 0.0;
  double x = 0.0;
  double value = 0.0;
  double bound = 0.0;
  bool ok = false;
};

struct FnRatioEntry {
  int n = 0;
  double ug_norm_sq = 0.0;
  double fn_norm_sq = 0.0;
  double ratio = 0.0;
  double floor = 0.0;       // 0.2 d^2 |E| (times profile factor when smooth)
  double over_log_sq = 0.0;  // ratio / ln^2 n
};

struct FloorEntry {
  int n = 0;
  double value = 0.0;
  double floor = 0.0;  // 0.9 d^2 |E| / pi (times profile factor when smooth)
};

struct CounterexampleReport {
  AnnuliConfig config;
  std::vector<int> probes;

  std::vector<AdmissibilityEntry> admissibility;
  bool admissibility_ok = false;

  std::vector<HeatEntry> heat;
  bool heat_ok = false;

  KernelScan t_scan;
  MassEstimate l1;
  double t_ceiling = 0.0;
  bool t_ok = false;

  KernelScan u_scan;
  std::vector<FloorEntry> u_floors;
  bool u_floors_ok = false;
  double u_growth_50_to_max = 0.0;
  std::vector<FnRatioEntry> fn_ratios;
  bool fn_ratios_ok = false;
  double fn_band = 0.0;
  bool fit_ok = false;
  FitRecord fit;
  std::string log_squared_fit;  // accepted band or rejection message
  bool insufficient_range = false;
  bool u_ok = false;

  bool passed = false;
  std::vector<std::string> failures;
};

inline CounterexampleReport run_counterexample_suite(const AnnuliConfig& cfg, std::vector<int> probes,
                                                     const SuiteOptions& opt = {}) {
  cfg.validate();
  std::sort(probes.begin(), probes.end());
  for (int n : probes)
    if (n < cfg.n_min || n > cfg.n_max) throw ValidationError("annuli suite: probe " + std::to_string(n) + " outside [n_min, n_max]");
  CounterexampleReport R;
  R.config = cfg;
  R.probes = probes;
  const RadialSymbol g = build_annuli_symbol(cfg);
  const double c1 = cfg.smooth ? 0.5 * kBumpProfileIntegral : 1.0;
  const double c2 = cfg.smooth ? 0.5 * kBumpProfileSquaredIntegral : 1.0;
  auto d2E = [&](int n) { return AnnuliConfig::d(n) * AnnuliConfig::d(n) * 4.0 * cfg.c * std::pow(double(n), -5.0); };

  // (1) pointwise admissibility of coherent states
  std::vector<double> centers{0.0};
  for (int n : probes) {
    centers.push_back(0.5 * AnnuliConfig::a(n));
    centers.push_back(AnnuliConfig::a(n));
  }
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  const auto adm = parallel_map(
      centers, [&](double a) { return coherent_state_admissibility(g, a, cfg.n_max, opt.tol); }, opt.threads);
  R.admissibility_ok = true;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    R.admissibility.push_back({centers[i], adm[i]});
    R.admissibility_ok = R.admissibility_ok && adm[i].admissible;
  }
  if (!R.admissibility_ok) R.failures.push_back("admissibility");

  // (2) heat transforms under the L1 ceiling
  std::vector<std::pair<double, double>> tx;
  for (double t : {1.0, 0.25, 0.125, 1.0 / 32.0}) {
    tx.emplace_back(t, 0.0);
    for (int n : probes) tx.emplace_back(t, AnnuliConfig::a(n));
  }
  const auto heat = parallel_map(
      tx, [&](const std::pair<double, double>& p) { return heat_transform_detail(g, p.first, p.second, opt.tol); },
      opt.threads);
  R.heat_ok = true;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    HeatEntry e;
    e.t = tx[i].first;
    e.x = tx[i].second;
    e.value = heat[i].upper();
    e.bound = heat_sup_bound(g, e.t);
    e.ok = heat[i].converged() && e.value <= e.bound * (1.0 + 1e-9);
    R.heat_ok = R.heat_ok && e.ok;
    R.heat.push_back(e);
  }
  if (!R.heat_ok) R.failures.push_back("heat");

  // (3) linear scan below the form ceiling
  R.l1 = l1_norm_area(g);
  R.t_ceiling = R.l1.upper() / std::numbers::pi;
  R.t_scan = supremal_scan(g, KernelOrder::Linear, annuli_centers(cfg.n_min, cfg.n_max), opt.tol, opt.threads);
  R.t_ok = R.t_scan.verdict == ScanVerdict::BoundedLooking && R.t_scan.sup + R.t_scan.tail_bound <= R.t_ceiling;
  if (!R.t_ok) R.failures.push_back("t_side");

  // (4) quadratic scan, sector floors and the moment series
  R.insufficient_range = cfg.n_max < 50;
  const int scan_lo = std::max(cfg.n_min, std::min(opt.scan_start, cfg.n_max));
  R.u_scan = supremal_scan(g, KernelOrder::Quadratic, annuli_centers(scan_lo, cfg.n_max), opt.tol, opt.threads);
  R.u_floors_ok = true;
  for (int n = std::max(50, scan_lo); n <= cfg.n_max; ++n) {
    FloorEntry f{n, R.u_scan.values[std::size_t(n - scan_lo)], 0.9 * c2 * d2E(n) / std::numbers::pi};
    R.u_floors_ok = R.u_floors_ok && f.value >= f.floor;
    R.u_floors.push_back(f);
  }
  if (!R.insufficient_range) {
    const double j50 = R.u_scan.values[std::size_t(50 - scan_lo)];
    R.u_growth_50_to_max = R.u_scan.values.back() / j50;
  }

  std::vector<int> fn_probes;
  for (int n : probes)
    if (n >= 10) fn_probes.push_back(n);
  const auto series = parallel_map(
      fn_probes, [&](int n) { return ug_fn_norm_sq_series(n, cfg.c, 1e-12, cfg.smooth); }, opt.threads);
  R.fn_ratios_ok = fn_probes.size() >= 2;
  double lo = kInf, hi = 0.0;
  for (std::size_t i = 0; i < fn_probes.size(); ++i) {
    const int n = fn_probes[i];
    FnRatioEntry e;
    e.n = n;
    e.ug_norm_sq = series[i].norm_sq;
    e.fn_norm_sq = test_fn_norm_sq(n, cfg.c);
    e.ratio = e.ug_norm_sq / e.fn_norm_sq;
    e.floor = 0.2 * c1 * c1 * d2E(n);
    const double L = std::log(double(n));
    e.over_log_sq = e.ratio / (L * L);
    lo = std::min(lo, e.over_log_sq);
    hi = std::max(hi, e.over_log_sq);
    R.fn_ratios_ok = R.fn_ratios_ok && e.ratio >= e.floor;
    if (!R.fn_ratios.empty()) R.fn_ratios_ok = R.fn_ratios_ok && e.ratio > R.fn_ratios.back().ratio;
    R.fn_ratios.push_back(e);
  }
  R.fn_band = fn_probes.empty() ? 0.0 : hi / lo;
  R.fn_ratios_ok = R.fn_ratios_ok && R.fn_band <= 2.0;

  if (R.u_scan.verdict == ScanVerdict::Diverging) {
    try {
      R.fit = fit_divergence_rate(R.u_scan, RateModel::PowerTimesLogSquared);
      R.fit_ok = R.fit.c_lo > 0.0;
    } catch (const FitRejected&) {
      R.fit_ok = false;
    }
    try {
      const auto f = fit_divergence_rate(R.u_scan, RateModel::LogSquared);
      R.log_squared_fit = "accepted band [" + std::to_string(f.c_lo) + ", " + std::to_string(f.c_hi) + "]";
    } catch (const FitRejected& e) {
      R.log_squared_fit = std::string("rejected: ") + e.what();
    }
  }
  R.u_ok = !R.insufficient_range && R.u_scan.verdict == ScanVerdict::Diverging && R.u_floors_ok &&
           R.fn_ratios_ok && R.fit_ok;
  if (R.insufficient_range) R.failures.push_back("u_side: InsufficientRange");
  else if (!R.u_ok) R.failures.push_back("u_side");

  R.passed = R.failures.empty();
  return R;
}

}  // namespace focklab
