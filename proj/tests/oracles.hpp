#pragma once

// Independent reference integrators for the test suites. Nothing here calls
// the library's quadrature or radial engine: composite Gauss-Legendre on
// explicit breakpoints, trapezoid in angle for 2-D convolutions.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "focklab/irreversibility.hpp"
#include "focklab/symbols.hpp"

namespace oracle {

using focklab::RadialSymbol;

struct GaussLegendre {
  static constexpr int N = 20;
  std::array<double, N> x{}, w{};
  GaussLegendre() {
    for (int i = 0; i < N; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

inline const GaussLegendre& gl() {
  static const GaussLegendre g;
  return g;
}

template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 8) {
  const auto& q = gl();
  double s = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h, mid = lo + 0.5 * h;
    for (int i = 0; i < GaussLegendre::N; ++i) s += q.w[i] * f(mid + 0.5 * h * q.x[i]);
  }
  return s * 0.5 * h;
}

/// int_0^b r^{gamma} h(r) dr for gamma > -1 via r = b u^{1/(gamma+1)}.
template <class H>
double singular_at_zero(H&& h, double gamma, double b, int panels = 16) {
  const double e = 1.0 / (gamma + 1.0);
  return std::pow(b, gamma + 1.0) * e * gauss_legendre([&](double u) { return h(b * std::pow(u, e)); }, 0.0, 1.0, panels);
}

/// Every place where some piece of g has a kink or jump, clipped to [lo, hi].
inline std::vector<double> breakpoints(const RadialSymbol& g, double lo, double hi) {
  std::vector<double> cuts{lo, hi};
  auto add = [&](double r) {
    if (r > lo && r < hi) cuts.push_back(r);
  };
  for (const auto& t : g.terms()) {
    if (const auto* p = std::get_if<focklab::PowerPiece>(&t)) {
      add(p->lo);
      add(p->hi);
    } else if (const auto* a = std::get_if<focklab::AnnulusPiece>(&t)) {
      add(a->inner());
      add(a->center);
      add(a->outer());
    } else {
      const auto& f = std::get<focklab::AnnuliFamily>(t);
      const int n_hi = std::min<long>(f.last(), static_cast<long>((hi + 1) * (hi + 1)) + 2);
      for (int n = f.first(); n <= n_hi; ++n) {
        const auto m = f.member(n);
        add(m.inner());
        add(m.center);
        add(m.outer());
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

/// Most negative exponent among power pieces touching the origin (0 if none).
inline double origin_exponent(const RadialSymbol& g) {
  double e = 0.0;
  for (const auto& t : g.terms())
    if (const auto* p = std::get_if<focklab::PowerPiece>(&t))
      if (p->lo == 0.0 && p->amplitude != 0.0) e = std::min(e, p->alpha);
  return e;
}

/// int_lo^hi r g(r)^p w(r) dr, split at every breakpoint; the first panel
/// is desingularized when a negative power touches the origin.
template <class W>
double radial_integral(const RadialSymbol& g, W&& w, double lo, double hi, int power = 1, int panels = 8) {
  const auto cuts = breakpoints(g, lo, hi);
  const double a0 = origin_exponent(g) * power;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto f = [&](double r) { return r * std::pow(g.eval(r), power) * w(r); };
    if (cuts[i] == 0.0 && a0 < 0.0) {
      // dyadic panels toward the origin; the innermost one is desingularized
      double hi_k = cuts[i + 1];
      for (int k = 0; k < 80; ++k, hi_k *= 0.5) s += gauss_legendre(f, 0.5 * hi_k, hi_k, 2);
      s += singular_at_zero([&](double r) { return f(r) / std::pow(r, 1.0 + a0); }, 1.0 + a0, hi_k, 4);
    } else {
      s += gauss_legendre(f, cuts[i], cuts[i + 1], panels);
    }
  }
  return s;
}

/// (1/(4 pi t)) int g(|y|) e^{-|x - y|^2/(4t)} dA(y), angular integral by
/// trapezoid (spectrally accurate for the periodic integrand).
inline double heat_2d(const RadialSymbol& g, double t, double x, int angles = 2048) {
  const double reach = 40.0 * std::sqrt(t);
  const double lo = std::max(0.0, x - reach), hi = x + reach;
  auto angular = [&](double r) {
    const double u = x * r / (2.0 * t);
    double s = 0.0;
    for (int k = 0; k < angles; ++k) s += std::exp(-u * (1.0 - std::cos(2.0 * std::numbers::pi * k / angles)));
    return s / angles * std::exp(-(x - r) * (x - r) / (4.0 * t));
  };
  return radial_integral(g, angular, lo, hi, 1, 16) / (2.0 * t);
}

/// (1/pi) int e^{-|z - a|^2} g^p dA, same angular treatment.
inline double gaussian_average_2d(const RadialSymbol& g, double a, int power = 1) {
  const double lo = std::max(0.0, a - 40.0), hi = a + 40.0;
  const int angles = 2048;
  auto angular = [&](double r) {
    double s = 0.0;
    for (int k = 0; k < angles; ++k) s += std::exp(-2.0 * a * r * (1.0 - std::cos(2.0 * std::numbers::pi * k / angles)));
    return s / angles * std::exp(-(a - r) * (a - r));
  };
  return 2.0 * radial_integral(g, angular, lo, hi, power, 16);
}

// ---------------------------------------------------------------------------
// Thin sectors E_n and modulated Gaussians

/// ||f_n||^2 = (e^{a^2}/|E|) 2 phi int_{-rho}^{rho} (a+u) e^{-(a+u)^2} du, scaled exponent -2au - u^2.
inline double fn_norm_quadrature(int n, double c) {
  const double a = std::sqrt(double(n)), rho = std::pow(double(n), -4.5), phi = c / n;
  const double area = 4.0 * a * rho * phi;
  const double I = gauss_legendre([&](double u) { return (a + u) * std::exp(-2.0 * a * u - u * u); }, -rho, rho, 4);
  return 2.0 * phi * I / area;
}

/// ||U_g f_n||^2 for the indicator symbol by direct quadrature of
/// d^2 |c_n|^2 pi^{-2} int_{E x E} Re e^{xi conj(w)} e^{-|xi|^2 - |w|^2} dA dA,
/// reduced to (r, r', Delta) with angular weight (2 phi - |Delta|).
inline double ug_norm_double_integral(int n, double c) {
  const double a = std::sqrt(double(n)), rho = std::pow(double(n), -4.5), phi = c / n;
  const double d = focklab::AnnuliConfig::d(n);
  const double area = 4.0 * a * rho * phi;
  auto inner = [&](double u, double v) {
    const double r = a + u, s = a + v;
    auto ang = [&](double D) {
      const double h = std::sin(0.5 * D);
      const double expo = -a * (u + v) + u * v - u * u - v * v - 2.0 * r * s * h * h;  // + a^2 folded in
      return (2.0 * phi - std::abs(D)) * std::exp(expo) * std::cos(r * s * std::sin(D));
    };
    return r * s * (gauss_legendre(ang, -2.0 * phi, 0.0, 2) + gauss_legendre(ang, 0.0, 2.0 * phi, 2));
  };
  const double I =
      gauss_legendre([&](double u) { return gauss_legendre([&](double v) { return inner(u, v); }, -rho, rho, 2); }, -rho, rho, 2);
  // |c_n|^2 = pi e^{a^2} / |E|
  return d * d * (std::numbers::pi / area) * I / (std::numbers::pi * std::numbers::pi);
}

/// 2-D tensor Gauss-Legendre over a rectangle.
template <class F>
double integrate_rect(F&& f, double x0, double x1, double y0, double y1, int px, int py) {
  return gauss_legendre([&](double x) { return gauss_legendre([&](double y) { return f(x, y); }, y0, y1, py); }, x0, x1, px);
}

/// (1/(4 pi t)) int h_xi(y) e^{-|z - y|^2/(4t)} dA(y); h_xi carries e^{-|y|^2}, so |y| <= 7 suffices.
inline double heat_convolution(std::complex<double> xi, double t, std::complex<double> z) {
  const int panels = 40;
  const double v = integrate_rect(
      [&](double x, double y) {
        const std::complex<double> w(x, y);
        return focklab::modulated_gaussian(xi, w) * std::exp(-std::norm(z - w) / (4.0 * t));
      },
      -7.0, 7.0, -7.0, 7.0, panels, panels);
  return v / (4.0 * std::numbers::pi * t);
}

// ---------------------------------------------------------------------------
// Generators

/// Random nonnegative radial symbol with finite L1 mass: a chain of disjoint
/// compactly supported pieces (truncated powers and annuli).
inline RadialSymbol random_compact_symbol(std::mt19937_64& rng, double alpha_min = -1.8) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<focklab::SymbolTerm> terms;
  double r = 0.0;
  const int pieces = 1 + static_cast<int>(U(rng) * 4);
  for (int i = 0; i < pieces; ++i) {
    if (U(rng) < 0.5) {
      focklab::PowerPiece p;
      p.alpha = alpha_min + U(rng) * (1.5 - alpha_min);
      p.amplitude = 0.1 + 2.0 * U(rng);
      p.lo = (i == 0 && U(rng) < 0.5) ? 0.0 : r + 0.05 + U(rng);
      p.hi = p.lo + 0.2 + 2.0 * U(rng);
      r = p.hi;
      terms.emplace_back(p);
    } else {
      focklab::AnnulusPiece a;
      a.half_width = 0.02 + 0.3 * U(rng);
      a.center = r + 0.05 + a.half_width + 2.0 * U(rng);
      a.amplitude = 0.1 + 5.0 * U(rng);
      a.smooth = U(rng) < 0.5;
      r = a.outer();
      terms.emplace_back(a);
    }
  }
  return RadialSymbol("random", std::move(terms));
}

}  // namespace oracle
