#pragma once

// Radial Toeplitz operators act diagonally on monomials z^m with
//   lambda_m = (1/m!) int_0^inf g(sqrt s) s^m e^{-s} ds = (2/m!) int_0^inf g(r) r^{2m+1} e^{-r^2} dr.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "focklab/heat.hpp"
#include "focklab/parallel.hpp"
#include "focklab/radial.hpp"
#include "focklab/symbols.hpp"

namespace focklab {

struct Eigenvalue {
  double value = 0.0;
  double error = 0.0;
  double tail_bound = 0.0;
  bool divergent = false;
  LogMagnitude log() const { return divergent ? LogMagnitude::from_log(kInf) : LogMagnitude::from_value(value); }
};

inline Eigenvalue toeplitz_eigenvalue_detail(const RadialSymbol& g, int m, double tol = 1e-12) {
  const auto r = integrate_symbol(g, RadialKernel::spectrum(m), tol);
  if (r.divergent()) return {kInf, kInf, 0.0, true};
  return {r.value, r.error, r.tail_bound, false};
}

/// lambda_m; throws DivergentError when the defining integral diverges.
inline double toeplitz_eigenvalue(const RadialSymbol& g, int m, double tol = 1e-12) {
  const auto e = toeplitz_eigenvalue_detail(g, m, tol);
  if (e.divergent) throw DivergentError("lambda_" + std::to_string(m) + " diverges for symbol '" + g.name() + "'");
  return e.value;
}

/// Analytic growth exponent of lambda_m as m -> inf, from the pieces:
/// alpha/2 for powers with unbounded support, 5p/2 - 4 for an infinite annuli
/// family with amplitude power p (lambda_m ~ 4 m^{5p/2-4} ln^p m), and -inf
/// for compactly supported pieces.
inline double tail_exponent(const RadialSymbol& g) {
  double e = -kInf;
  for (const auto& t : g.terms()) {
    if (const auto* p = std::get_if<PowerPiece>(&t)) {
      if (p->amplitude != 0.0 && p->hi == kInf) e = std::max(e, p->alpha / 2.0);
    } else if (const auto* f = std::get_if<AnnuliFamily>(&t)) {
      if (f->infinite()) e = std::max(e, 2.5 * f->power - 4.0);
    }
  }
  return e;
}

enum class SpectrumMode { Form, NaturalDomain };

inline const char* to_string(SpectrumMode m) noexcept { return m == SpectrumMode::Form ? "form" : "natural-domain"; }

struct SpectralProfile {
  SpectrumMode mode = SpectrumMode::Form;
  int m_max = 0;
  std::vector<Eigenvalue> eigenvalues;
  double tail_exponent = -kInf;
  bool bounded = false;
  double sup = 0.0;
  int sup_index = -1;
  int first_divergent = -1;
  bool sup_near_horizon = false;  // argmax in the last tenth of the computed range
  std::string evidence;
};

/// Bounded iff no lambda_m diverges and the analytic tail exponent is <= 0.
/// The location of the observed sup is reported as extra evidence.
inline SpectralProfile spectrum_profile(const RadialSymbol& g, int m_max, SpectrumMode mode, double tol = 1e-12,
                                        unsigned threads = 0) {
  if (m_max < 0) throw ValidationError("spectrum_profile: m_max must be non-negative");
  const RadialSymbol h = mode == SpectrumMode::Form ? g : squared(g);
  std::vector<int> ms(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) ms[std::size_t(m)] = m;

  SpectralProfile p;
  p.mode = mode;
  p.m_max = m_max;
  p.eigenvalues = parallel_map(ms, [&](int m) { return toeplitz_eigenvalue_detail(h, m, tol); }, threads);
  p.tail_exponent = tail_exponent(h);
  for (int m = 0; m <= m_max; ++m) {
    const auto& e = p.eigenvalues[std::size_t(m)];
    if (e.divergent) {
      if (p.first_divergent < 0) p.first_divergent = m;
      continue;
    }
    if (p.sup_index < 0 || e.value > p.sup) {
      p.sup = e.value;
      p.sup_index = m;
    }
  }
  p.sup_near_horizon = p.sup_index >= 0 && m_max > 0 && p.sup_index > m_max - std::max(1, m_max / 10);
  if (p.first_divergent >= 0) {
    p.bounded = false;
    p.evidence = "lambda_" + std::to_string(p.first_divergent) + " diverges";
  } else if (p.tail_exponent > 0.0) {
    p.bounded = false;
    p.evidence = "lambda_m grows like m^" + std::to_string(p.tail_exponent);
  } else {
    p.bounded = true;
    p.evidence = "sup " + std::to_string(p.sup) + " at m=" + std::to_string(p.sup_index);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Power-symbol table

struct PowerVerdict {
  double alpha = 0.0;
  bool heat_bounded = false;
  bool t_bounded = false;
  bool u_bounded = false;
  std::string heat_evidence;
  std::string t_evidence;
  std::string u_evidence;
};

/// Heat: finiteness at the origin and no growth along x in {0, 5, 10, 20, 40}
/// (t = 1/4). T: Form profile. U: NaturalDomain profile.
inline PowerVerdict power_verdict(double alpha, int m_max, double tol = 1e-10, unsigned threads = 1) {
  PowerVerdict v;
  v.alpha = alpha;
  const RadialSymbol g = build_power_symbol(alpha);
  const double t = 0.25;
  std::vector<double> hv;
  bool finite = true;
  for (double x : {0.0, 5.0, 10.0, 20.0, 40.0}) {
    const auto r = heat_transform_detail(g, t, x, tol);
    if (r.divergent()) {
      finite = false;
      break;
    }
    hv.push_back(r.value);
  }
  if (!finite) {
    v.heat_bounded = false;
    v.heat_evidence = "g^(t)(0) diverges";
  } else {
    v.heat_bounded = hv.back() <= hv.front() * (1.0 + 1e-9);
    v.heat_evidence = "g^(t)(0)=" + std::to_string(hv.front()) + " g^(t)(40)=" + std::to_string(hv.back());
  }
  const auto T = spectrum_profile(g, m_max, SpectrumMode::Form, tol, threads);
  const auto U = spectrum_profile(g, m_max, SpectrumMode::NaturalDomain, tol, threads);
  v.t_bounded = T.bounded;
  v.t_evidence = T.evidence;
  v.u_bounded = U.bounded;
  v.u_evidence = U.evidence;
  return v;
}

inline std::vector<PowerVerdict> power_symbol_table(const std::vector<double>& alphas, int m_max, double tol = 1e-10,
                                                    unsigned threads = 0) {
  return parallel_map(alphas, [&](double a) { return power_verdict(a, m_max, tol, 1); }, threads);
}

/// max_m |lambda_m(g + h) - lambda_m(g)|, each side computed independently.
struct PerturbationReport {
  double max_difference = 0.0;
  double sup_h = 0.0;
  int argmax = 0;
};

inline PerturbationReport perturbation_check(const RadialSymbol& g, const RadialSymbol& h, int m_max,
                                             double tol = 1e-13) {
  PerturbationReport r;
  r.sup_h = h.sup_abs_bound();
  if (!std::isfinite(r.sup_h)) throw ValidationError("perturbation_check: h must be bounded");
  const RadialSymbol gh = symbol_sum(g, h);
  for (int m = 0; m <= m_max; ++m) {
    const auto a = toeplitz_eigenvalue_detail(gh, m, tol);
    const auto b = toeplitz_eigenvalue_detail(g, m, tol);
    if (a.divergent || b.divergent) throw DivergentError("perturbation_check: lambda_" + std::to_string(m) + " diverges");
    const double d = std::abs(a.value - b.value);
    if (d > r.max_difference) {
      r.max_difference = d;
      r.argmax = m;
    }
  }
  return r;
}

}  // namespace focklab
