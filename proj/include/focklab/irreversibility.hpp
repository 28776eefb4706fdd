#pragma once

// Heat-flow irreversibility: g = sum_n A_n h_{xi_n}(z - z_n) with modulated
// Gaussians h_xi(z) = cos(Im(conj(xi) z)) e^{-|z|^2} and A_n = e^{alpha(t0)|xi_n|^2}.
// g^{(t0)} stays bounded while g^{(t1)}(z_n) grows for t1 < t0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "focklab/errors.hpp"
#include "focklab/numerics.hpp"
#include "focklab/parallel.hpp"

namespace focklab {

using cplx = std::complex<double>;

struct TimePair {
  double t0 = 0.125;
  double t1 = 0.0625;
  /// 0 < t1 <= t0; equality is allowed as a degenerate control case.
  void validate() const {
    if (!(t1 > 0.0) || !(t0 >= t1)) throw ValidationError("time pair: requires 0 < t1 <= t0");
  }
};

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 1.0;
};

inline AlphaBeta alpha_beta(double t) {
  if (!(t > 0.0)) throw ValidationError("alpha_beta: t must be positive");
  const double s = 1.0 + 4.0 * t;
  return {t / s, 1.0 / s};
}

/// Wave vector k with <k, z> = Im(conj(xi) z).
inline std::pair<double, double> wave_vector(cplx xi) { return {-xi.imag(), xi.real()}; }

/// (H_t h_xi)(z) = beta e^{-beta|z|^2} e^{-alpha|xi|^2} cos(beta Im(conj(xi) z)),
/// from completing the square in the Gaussian convolution.
inline double heat_of_modulated_gaussian(cplx xi, double t, cplx z) {
  const auto [alpha, beta] = alpha_beta(t);
  return beta * std::exp(-beta * std::norm(z) - alpha * std::norm(xi)) * std::cos(beta * (std::conj(xi) * z).imag());
}

/// ln |(H_t h_xi)(z)|
inline double log_abs_heat_of_modulated_gaussian(cplx xi, double t, cplx z) {
  const auto [alpha, beta] = alpha_beta(t);
  return std::log(beta) - beta * std::norm(z) - alpha * std::norm(xi) +
         std::log(std::abs(std::cos(beta * (std::conj(xi) * z).imag())));
}

inline double modulated_gaussian(cplx xi, cplx z) {
  return std::cos((std::conj(xi) * z).imag()) * std::exp(-std::norm(z));
}

struct Bump {
  cplx xi;
  cplx z;
  double log_amp = 0.0;  // ln A_n = alpha(t0) |xi_n|^2
};

struct BumpFamily {
  TimePair times;
  std::vector<Bump> bumps;
  double overlap_cap = 1.0;

  double eval(cplx z) const {
    KahanSum s;
    for (const auto& b : bumps) s += std::exp(b.log_amp) * modulated_gaussian(b.xi, z - b.z);
    return s.value();
  }
  double heat(double t, cplx z) const {
    KahanSum s;
    for (const auto& b : bumps) s += std::exp(b.log_amp) * heat_of_modulated_gaussian(b.xi, t, z - b.z);
    return s.value();
  }
};

struct PlacementOptions {
  double separation = 10.0;
  double overlap_cap = 1.0;
  double radius_step = 1.0;
  double max_radius = 1e6;
};

namespace detail {

/// ln sum_{j in idx} A_j |H_{t1} h_{xi_j}(z - z_j)|
inline double log_overlap(const std::vector<Bump>& bumps, const std::vector<std::size_t>& idx, double t1, cplx z) {
  LogSumAccumulator acc;
  for (auto j : idx) acc.add_log(bumps[j].log_amp + log_abs_heat_of_modulated_gaussian(bumps[j].xi, t1, z - bumps[j].z));
  return acc.log_value();
}

}  // namespace detail

/// Greedy placement on the positive real axis. For bump n the radius steps up
/// from the previous center until
///   separation:  |z_n - z_m| >= 10,
///   tail budget: A_n^2 e^{-|z_n|^2/4} <= 2^{-n},
///   overlap:     sum_{m<n} A_m |H_{t1} h_m(z_n - z_m)| <= cap/2, and for every
///                m < n the forward sum sum_{m<j<=n} A_j |H_{t1} h_j(z_m - z_j)| <= cap/2.
inline BumpFamily greedy_centers(const TimePair& times, const std::vector<cplx>& xis, const PlacementOptions& opt = {}) {
  times.validate();
  for (std::size_t i = 1; i < xis.size(); ++i)
    if (!(std::abs(xis[i]) > std::abs(xis[i - 1]))) throw ValidationError("greedy_centers: |xi_n| must be strictly increasing");
  const double a0 = alpha_beta(times.t0).alpha;
  const double log_half_cap = opt.overlap_cap > 0.0 ? std::log(0.5 * opt.overlap_cap) : -kInf;

  BumpFamily fam;
  fam.times = times;
  fam.overlap_cap = opt.overlap_cap;
  std::vector<std::size_t> earlier;
  double R = 0.0;
  for (std::size_t i = 0; i < xis.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    Bump b{xis[i], 0.0, a0 * std::norm(xis[i])};
    const double log_budget = -n * std::numbers::ln2;
    if (!earlier.empty()) R = fam.bumps.back().z.real() + opt.separation;
    bool placed = false;
    for (; R <= opt.max_radius; R += opt.radius_step) {
      b.z = R;
      if (2.0 * b.log_amp - 0.25 * R * R > log_budget) continue;
      bool ok = true;
      for (auto m : earlier)
        if (std::abs(b.z - fam.bumps[m].z) < opt.separation) ok = false;
      if (!ok) continue;
      if (!earlier.empty() && detail::log_overlap(fam.bumps, earlier, times.t1, b.z) > log_half_cap) continue;
      // forward reserve of every earlier center, including the candidate
      fam.bumps.push_back(b);
      for (auto m : earlier) {
        std::vector<std::size_t> later;
        for (std::size_t j = m + 1; j < fam.bumps.size(); ++j) later.push_back(j);
        if (detail::log_overlap(fam.bumps, later, times.t1, fam.bumps[m].z) > log_half_cap) {
          ok = false;
          break;
        }
      }
      fam.bumps.pop_back();
      if (ok) {
        placed = true;
        break;
      }
    }
    if (!placed)
      throw PlacementFailure("greedy_centers: no radius <= " + std::to_string(opt.max_radius) + " satisfies the constraints for bump " +
                             std::to_string(n));
    fam.bumps.push_back(b);
    earlier.push_back(i);
  }
  return fam;
}

struct ConstraintCheck {
  double min_separation = kInf;
  std::vector<double> tail_terms;  // A_n^2 e^{-|z_n|^2/4}
  double tail_sum = 0.0;
  std::vector<double> overlap_sums;  // sum_{m != n} A_m |H_{t1} h_m(z_n - z_m)|
  bool separation_ok = false;
  bool tail_ok = false;
  bool overlap_ok = false;
  bool all() const noexcept { return separation_ok && tail_ok && overlap_ok; }
};

/// Independent re-check of the three placement constraints with direct sums.
inline ConstraintCheck verify_constraints(const BumpFamily& fam, double separation = 10.0) {
  ConstraintCheck c;
  const auto& B = fam.bumps;
  KahanSum tail;
  c.tail_ok = true;
  for (std::size_t n = 0; n < B.size(); ++n) {
    for (std::size_t m = n + 1; m < B.size(); ++m) c.min_separation = std::min(c.min_separation, std::abs(B[n].z - B[m].z));
    const double term = std::exp(2.0 * B[n].log_amp - 0.25 * std::norm(B[n].z));
    c.tail_terms.push_back(term);
    tail += term;
    c.tail_ok = c.tail_ok && term <= std::ldexp(1.0, -static_cast<int>(n + 1)) * (1.0 + 1e-12);
    KahanSum ov;
    for (std::size_t m = 0; m < B.size(); ++m) {
      if (m == n) continue;
      ov += std::exp(B[m].log_amp) * std::abs(heat_of_modulated_gaussian(B[m].xi, fam.times.t1, B[n].z - B[m].z));
    }
    c.overlap_sums.push_back(ov.value());
  }
  c.tail_sum = tail.value();
  c.tail_ok = c.tail_ok && c.tail_sum < 1.0;
  c.separation_ok = B.size() < 2 || c.min_separation >= separation;
  c.overlap_ok = std::all_of(c.overlap_sums.begin(), c.overlap_sums.end(),
                             [&](double v) { return v <= fam.overlap_cap; });
  return c;
}

/// (1/pi) int g(z)^2 e^{-|z-a|^2} dA in closed form: every cross term is a
/// Gaussian times a cosine,
///   int e^{-gamma|z-c|^2} cos(<K,z> + phase) dA = (pi/gamma) e^{-|K|^2/(4 gamma)} cos(<K,c> + phase).
inline double coherent_norm_sq(const BumpFamily& fam, cplx a) {
  KahanSum s;
  const auto& B = fam.bumps;
  for (std::size_t n = 0; n < B.size(); ++n) {
    for (std::size_t m = 0; m < B.size(); ++m) {
      const cplx c = (B[n].z + B[m].z + a) / 3.0;
      const double log_gauss = -(std::norm(B[n].z) + std::norm(B[m].z) + std::norm(a)) + 3.0 * std::norm(c);
      const auto [kn1, kn2] = wave_vector(B[n].xi);
      const auto [km1, km2] = wave_vector(B[m].xi);
      const double pn = -(kn1 * B[n].z.real() + kn2 * B[n].z.imag());
      const double pm = -(km1 * B[m].z.real() + km2 * B[m].z.imag());
      double term = 0.0;
      for (int sgn : {-1, 1}) {
        const double K1 = kn1 + sgn * km1;
        const double K2 = kn2 + sgn * km2;
        const double phase = pn + sgn * pm;
        term += std::exp(-(K1 * K1 + K2 * K2) / 12.0) * std::cos(K1 * c.real() + K2 * c.imag() + phase);
      }
      // (1/pi) * 1/2 * A_n A_m e^{log_gauss} (pi/3) * term
      s += std::exp(B[n].log_amp + B[m].log_amp + log_gauss) * term / 6.0;
    }
  }
  return s.value();
}

struct IrreversibilityReport {
  double sup_t0 = 0.0;     // max over the grid of |g^{(t0)}|
  double ceiling_t0 = 0.0;  // beta0 (1 + max_n sum_{m != n} e^{-beta0 |z_m - z_n|^2 / 4})
  bool bounded_ok = false;
  std::vector<double> values_t1;  // g^{(t1)}(z_n)
  std::vector<double> floors_t1;  // beta1 e^{(alpha0 - alpha1)|xi_n|^2} - 1
  bool floors_ok = false;
  std::vector<cplx> probe_centers;
  std::vector<double> coherent_norms;
  bool admissible_ok = false;
  double growth_ratio = 0.0;  // g^{(t1)}(z_N) / ceiling_t0
  bool passed = false;
  std::vector<std::string> failures;
};

/// Patches around each center plus the real-axis segment through them.
inline std::vector<cplx> default_irreversibility_grid(const BumpFamily& fam, double half = 2.5, int per_side = 10) {
  std::vector<cplx> grid;
  double lo = 0.0, hi = 0.0;
  for (const auto& b : fam.bumps) {
    lo = std::min(lo, b.z.real());
    hi = std::max(hi, b.z.real());
    for (int i = -per_side; i <= per_side; ++i)
      for (int j = -per_side; j <= per_side; ++j)
        grid.push_back(b.z + cplx(half * i / per_side, half * j / per_side));
  }
  for (double x = lo - 5.0; x <= hi + 5.0; x += 0.1) grid.push_back(cplx(x, 0.0));
  return grid;
}

inline IrreversibilityReport verify_irreversibility(const BumpFamily& fam, const std::vector<cplx>& grid,
                                                    unsigned threads = 0) {
  fam.times.validate();
  IrreversibilityReport R;
  const auto ab0 = alpha_beta(fam.times.t0);
  const auto ab1 = alpha_beta(fam.times.t1);
  const auto& B = fam.bumps;

  const auto v0 = parallel_map(grid, [&](cplx z) { return std::abs(fam.heat(fam.times.t0, z)); }, threads);
  for (double v : v0) R.sup_t0 = std::max(R.sup_t0, v);
  double worst = 0.0;
  for (std::size_t n = 0; n < B.size(); ++n) {
    KahanSum s;
    for (std::size_t m = 0; m < B.size(); ++m)
      if (m != n) s += std::exp(-ab0.beta * std::norm(B[m].z - B[n].z) / 4.0);
    worst = std::max(worst, s.value());
  }
  R.ceiling_t0 = B.empty() ? 0.0 : ab0.beta * (1.0 + worst);
  R.bounded_ok = R.sup_t0 <= R.ceiling_t0 * (1.0 + 1e-12) + 1e-300;
  if (!R.bounded_ok) R.failures.push_back("t0 boundedness");

  R.floors_ok = true;
  for (const auto& b : B) {
    R.values_t1.push_back(fam.heat(fam.times.t1, b.z));
    R.floors_t1.push_back(ab1.beta * std::exp((ab0.alpha - ab1.alpha) * std::norm(b.xi)) - 1.0);
    R.floors_ok = R.floors_ok && R.values_t1.back() - R.floors_t1.back() >= -1e-9;
  }
  if (!R.floors_ok) R.failures.push_back("t1 floors");

  R.probe_centers = {0.0};
  if (!B.empty()) {
    R.probe_centers.push_back(B.front().z);
    R.probe_centers.push_back(B.back().z);
  }
  R.admissible_ok = true;
  for (auto a : R.probe_centers) {
    R.coherent_norms.push_back(coherent_norm_sq(fam, a));
    R.admissible_ok = R.admissible_ok && std::isfinite(R.coherent_norms.back()) && R.coherent_norms.back() >= -1e-12;
  }
  if (!R.admissible_ok) R.failures.push_back("coherent-state admissibility");

  if (!B.empty() && R.ceiling_t0 > 0.0) R.growth_ratio = R.values_t1.back() / R.ceiling_t0;
  R.passed = R.failures.empty();
  return R;
}

/// xi_n real with |xi_n|^2 = scale * n.
inline std::vector<cplx> default_frequencies(int count, double scale = 20.0) {
  std::vector<cplx> xs;
  for (int n = 1; n <= count; ++n) xs.emplace_back(std::sqrt(scale * n), 0.0);
  return xs;
}

}  // namespace focklab
