#pragma once

// One-dimensional radial integrals  int_0^inf K(r) g(r) dr  for the three
// positive kernels used across the toolkit:
//
//   heat(t, x):        K = (1/(2t)) r e^{-(x-r)^2/(4t)} S(xr/(2t))
//   gaussian(a):       K = 2 r e^{-(a-r)^2} S(2ar)
//   spectrum(m):       K = (2/m!) r^{2m+1} e^{-r^2}
//
// with S(u) = e^{-u} I0(u). Every kernel factors as
//   log K(r) = k ln r + log_smooth(r),   log_smooth(r) <= c0 - (r - x0)^2 / sigma,
// which gives the analytic zero-order check, the near-origin substitution and
// certified Gaussian tails for power pieces and annuli families alike.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "focklab/numerics.hpp"
#include "focklab/symbols.hpp"

namespace focklab {

struct RadialKernel {
  enum class Kind { Heat, GaussianAverage, Spectrum };
  Kind kind = Kind::Heat;
  double t = 0.25;  // heat time
  double x = 0.0;   // evaluation radius (heat) or center |a| (gaussian)
  int m = 0;        // spectral index

  double k = 1.0;       // power of r at the origin
  double c0 = 0.0;      // envelope constant
  double x0 = 0.0;      // envelope center
  double sigma = 1.0;   // envelope width: exp(-(r - x0)^2 / sigma)
  double peak = 0.0;    // where the mass sits
  double spread = 1.0;  // resolution scale

  static RadialKernel heat(double t, double x) {
    if (!(t > 0.0)) throw ValidationError("heat: t must be positive");
    if (!(x >= 0.0)) throw ValidationError("heat: x must be non-negative");
    RadialKernel K;
    K.kind = Kind::Heat;
    K.t = t;
    K.x = x;
    K.k = 1.0;
    K.c0 = -std::log(2.0 * t);
    K.x0 = x;
    K.sigma = 4.0 * t;
    K.peak = x;
    K.spread = std::sqrt(2.0 * t);
    return K;
  }

  static RadialKernel gaussian_average(double a) {
    if (!(a >= 0.0)) throw ValidationError("gaussian_average: center must be non-negative");
    RadialKernel K;
    K.kind = Kind::GaussianAverage;
    K.x = a;
    K.k = 1.0;
    K.c0 = std::numbers::ln2;
    K.x0 = a;
    K.sigma = 1.0;
    K.peak = a;
    K.spread = std::sqrt(0.5);
    return K;
  }

  static RadialKernel spectrum(int m) {
    if (m < 0) throw ValidationError("spectrum: m must be non-negative");
    RadialKernel K;
    K.kind = Kind::Spectrum;
    K.m = m;
    K.k = 2.0 * m + 1.0;
    K.c0 = std::numbers::ln2 - log_gamma(m + 1.0);
    K.x0 = 0.0;
    K.sigma = 1.0;
    K.peak = std::sqrt(m + 0.5);
    K.spread = 0.5;
    return K;
  }

  double log_smooth(double r) const {
    switch (kind) {
      case Kind::Heat: {
        const double d = x - r;
        return c0 - d * d / (4.0 * t) + std::log(bessel_i0_scaled(x * r / (2.0 * t)));
      }
      case Kind::GaussianAverage: {
        const double d = x - r;
        return std::numbers::ln2 - d * d + std::log(bessel_i0_scaled(2.0 * x * r));
      }
      case Kind::Spectrum:
        return c0 - r * r;
    }
    return -kInf;
  }

  double log_value(double r) const {
    if (r <= 0.0) return -kInf;
    return k * std::log(r) + log_smooth(r);
  }

  /// Upper bound on log K over [lo, hi].
  double log_envelope_max(double lo, double hi) const {
    const double dist = lo > x0 ? lo - x0 : (hi < x0 ? x0 - hi : 0.0);
    return c0 + k * std::log(hi) - dist * dist / sigma;
  }
};

struct RadialResult {
  double value = 0.0;
  double error = 0.0;       // quadrature error estimate
  double tail_bound = 0.0;  // certified bound on omitted contributions
  QuadratureStatus status = QuadratureStatus::Converged;

  bool divergent() const noexcept { return status == QuadratureStatus::Divergent; }
  bool converged() const noexcept { return status == QuadratureStatus::Converged; }
  double upper() const noexcept { return value + tail_bound; }

  RadialResult& operator+=(const RadialResult& o) {
    if (o.divergent() || divergent()) {
      status = QuadratureStatus::Divergent;
      value = kInf;
      error = kInf;
      return *this;
    }
    value += o.value;
    error += o.error;
    tail_bound += o.tail_bound;
    if (o.status == QuadratureStatus::MaxDepth) status = QuadratureStatus::MaxDepth;
    return *this;
  }
  static RadialResult diverged() { return {kInf, kInf, 0.0, QuadratureStatus::Divergent}; }
};

namespace detail {

inline QuadratureOptions relative_options(double tol) {
  QuadratureOptions o;
  o.abs_tol = 0.0;
  o.rel_tol = tol;
  return o;
}

inline void accumulate(RadialResult& acc, KahanSum& value, KahanSum& error, const QuadratureResult& q) {
  value += q.value;
  error += q.error_estimate;
  if (q.status == QuadratureStatus::Divergent) acc.status = QuadratureStatus::Divergent;
  else if (q.status == QuadratureStatus::MaxDepth && acc.status == QuadratureStatus::Converged)
    acc.status = QuadratureStatus::MaxDepth;
}

/// log of the certified bound on int_R^inf e^{c0} r^beta e^{-(r-x0)^2/sigma} dr, using
///   r^beta <= R^beta e^{beta+ (r-R)/R}  and  (r-x0)^2 >= (R-x0)^2 + 2(R-x0)(r-R).
inline double log_power_tail(const RadialKernel& K, double beta, double R) {
  if (!(R > K.x0)) return kInf;
  const double denom = 2.0 * (R - K.x0) / K.sigma - std::max(beta, 0.0) / R;
  if (!(denom > 0.0)) return kInf;
  return K.c0 + beta * std::log(R) - (R - K.x0) * (R - K.x0) / K.sigma - std::log(denom);
}

template <class F>
void integrate_chunks(const F& f, double lo, double hi, double width, double tol, RadialResult& acc, KahanSum& value,
                      KahanSum& error) {
  if (!(hi > lo)) return;
  const int count = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  const double step = (hi - lo) / count;
  const auto opts = relative_options(tol);
  for (int i = 0; i < count; ++i) {
    const double a = lo + i * step;
    const double b = i + 1 == count ? hi : lo + (i + 1) * step;
    accumulate(acc, value, error, integrate_interval(f, a, b, opts));
    if (acc.divergent()) return;
  }
}

}  // namespace detail

/// int K(r) A r^alpha dr over the piece's support.
inline RadialResult integrate_power(const PowerPiece& p, const RadialKernel& K, double tol) {
  RadialResult acc;
  if (p.amplitude == 0.0) return acc;
  const double gamma = K.k + p.alpha;
  if (p.lo == 0.0 && gamma <= -1.0) return RadialResult::diverged();

  const double A = p.amplitude;
  KahanSum value;
  KahanSum error;
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    return std::exp(gamma * std::log(r) + K.log_smooth(r));
  };

  double start = p.lo;
  const double initial_hi = std::max(K.peak + 10.0 * K.spread + std::abs(p.alpha), K.x0 + K.spread);
  double upper = std::min(p.hi, std::max(initial_hi, p.lo + K.spread));

  if (p.lo == 0.0 && gamma < 0.0) {
    // r = b s^{1/(gamma+1)} removes the r^gamma singularity
    const double b = std::min(upper, K.spread);
    const double q = 1.0 / (gamma + 1.0);
    auto h = [&](double s) {
      if (s <= 0.0) return std::exp(K.log_smooth(0.0));
      return std::exp(K.log_smooth(b * std::pow(s, q)));
    };
    auto r = integrate_interval(h, 0.0, 1.0, detail::relative_options(tol));
    const double scale = std::exp((gamma + 1.0) * std::log(b)) / (gamma + 1.0);
    r.value *= scale;
    r.error_estimate *= scale;
    detail::accumulate(acc, value, error, r);
    start = b;
  }
  detail::integrate_chunks(f, start, upper, K.spread, tol, acc, value, error);
  if (acc.divergent()) return RadialResult::diverged();

  if (p.hi == kInf) {
    // extend until the certified tail is negligible
    for (int guard = 0; guard < 10000; ++guard) {
      const double log_tail = detail::log_power_tail(K, gamma, upper);
      const double target = 0.01 * tol * std::abs(value.value());
      if (log_tail < std::log(std::max(target, 1e-300))) {
        acc.tail_bound = std::abs(A) * std::exp(log_tail);
        break;
      }
      const double next = upper + 4.0 * K.spread;
      detail::integrate_chunks(f, upper, next, K.spread, tol, acc, value, error);
      if (acc.divergent()) return RadialResult::diverged();
      upper = next;
    }
  }
  acc.value = A * value.value();
  acc.error = std::abs(A) * error.value();
  return acc;
}

/// int K(r) g(r) dr over one annulus, in the local coordinate r = a + rho u.
inline RadialResult integrate_annulus(const AnnulusPiece& a, const RadialKernel& K, double tol) {
  RadialResult acc;
  if (a.amplitude == 0.0) return acc;
  const double log_amp = std::log(a.amplitude) + std::log(a.half_width);
  auto f = [&](double u) {
    const double prof = a.smooth ? a.profile_power * log_smooth_bump_profile(u) : 0.0;
    if (prof == -kInf) return 0.0;
    return std::exp(log_amp + K.log_value(a.center + a.half_width * u) + prof);
  };
  const auto q = integrate_interval(f, -1.0, 1.0, detail::relative_options(tol));
  acc.value = q.value;
  acc.error = q.error_estimate;
  acc.status = q.status;
  return acc;
}

/// log of an upper bound on member n's contribution.
inline double log_member_bound(const AnnuliFamily& F, int n, const RadialKernel& K) {
  const double a = AnnuliConfig::a(n);
  const double rho = AnnuliConfig::rho(n);
  return std::log(2.0 * rho) + F.log_amplitude(n) + K.log_envelope_max(a - rho, a + rho);
}

/// Certified bound on sum_{n > N} of member contributions. The log-term bound
/// L_n has increments L_{n+1} - L_n <= p(2.5/n + 1/(n ln n)) + k/(2n) - (1 - y/a_n)/sigma,
/// y = x0 + rho_{N+1}, which decrease in n; a geometric remainder follows.
inline double family_tail_beyond(const AnnuliFamily& F, int N, const RadialKernel& K) {
  if (N >= F.last()) return 0.0;
  const int n0 = N + 1;
  const double eps = AnnuliConfig::rho(n0);
  const double y = K.x0 + eps;
  const double a0 = AnnuliConfig::a(n0);
  if (!(a0 > y)) return kInf;
  const double p = F.power;
  const double log_q = p * (2.5 / n0 + 1.0 / (n0 * std::log(double(n0)))) + K.k / (2.0 * n0) - (1.0 - y / a0) / K.sigma;
  if (!(log_q < 0.0)) return kInf;
  const double d = a0 - y;
  const double L0 =
      std::log(2.0 * eps) + F.log_amplitude(n0) + K.c0 + K.k * std::log(a0 + eps) - d * d / K.sigma;
  return std::exp(L0) / -std::expm1(log_q);
}

/// Sum of member integrals for n in [first, last] (last may be INT_MAX).
/// Members whose analytic bound is below tol * 1e-4 of the largest bound are
/// not integrated; their bounds and the remainder beyond the window go into
/// tail_bound.
inline RadialResult integrate_family(const AnnuliFamily& F, const RadialKernel& K, double tol) {
  RadialResult acc;
  const long last = F.last();
  // window edge: past the kernel's mass and far enough for a geometric remainder
  double r_edge = K.peak + 10.0 * K.spread + 2.0;
  long N = static_cast<long>(std::ceil(r_edge * r_edge));
  for (int guard = 0; guard < 200; ++guard) {
    if (N >= last) break;
    if (std::isfinite(family_tail_beyond(F, static_cast<int>(N), K))) break;
    N = N + N / 4 + 1;
  }
  N = std::min(N, last);

  KahanSum value;
  KahanSum error;
  KahanSum skipped;
  double log_bmax = -kInf;
  std::vector<double> log_bounds;

  auto process = [&](long from, long to) {
    log_bounds.clear();
    for (long n = from; n <= to; ++n) {
      log_bounds.push_back(log_member_bound(F, int(n), K));
      log_bmax = std::max(log_bmax, log_bounds.back());
    }
    const double log_skip = log_bmax + std::log(tol * 1e-4);
    for (long n = from; n <= to; ++n) {
      const double lb = log_bounds[std::size_t(n - from)];
      if (lb < log_skip) {
        skipped += std::exp(lb);
        continue;
      }
      const auto r = integrate_annulus(F.member(int(n)), K, tol);
      value += r.value;
      error += r.error;
      if (r.status != QuadratureStatus::Converged && acc.status == QuadratureStatus::Converged) acc.status = r.status;
    }
  };

  process(F.first(), N);
  double tail = family_tail_beyond(F, static_cast<int>(N), K);
  for (int guard = 0; guard < 200 && N < last; ++guard) {
    if (tail <= 0.01 * tol * std::max(value.value(), 1e-300)) break;
    const long next = std::min(last, N + std::max(16L, N / 4));
    process(N + 1, next);
    N = next;
    tail = family_tail_beyond(F, static_cast<int>(N), K);
  }
  if (!std::isfinite(tail)) throw NumericFailure("annuli family: no certified remainder for this kernel");
  acc.value = value.value();
  acc.error = error.value();
  acc.tail_bound = skipped.value() + tail;
  return acc;
}

inline RadialResult integrate_term(const SymbolTerm& term, const RadialKernel& K, double tol) {
  if (const auto* p = std::get_if<PowerPiece>(&term)) return integrate_power(*p, K, tol);
  if (const auto* a = std::get_if<AnnulusPiece>(&term)) return integrate_annulus(*a, K, tol);
  return integrate_family(std::get<AnnuliFamily>(term), K, tol);
}

/// int_0^inf K(r) g(r) dr, summed piece by piece in fixed order.
inline RadialResult integrate_symbol(const RadialSymbol& g, const RadialKernel& K, double tol) {
  RadialResult acc;
  KahanSum value;
  KahanSum error;
  KahanSum tail;
  for (const auto& term : g.terms()) {
    const auto r = integrate_term(term, K, tol);
    if (r.divergent()) return RadialResult::diverged();
    value += r.value;
    error += r.error;
    tail += r.tail_bound;
    if (r.status != QuadratureStatus::Converged && acc.status == QuadratureStatus::Converged) acc.status = r.status;
  }
  acc.value = value.value();
  acc.error = error.value();
  acc.tail_bound = tail.value();
  return acc;
}

}  // namespace focklab
