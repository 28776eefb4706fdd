#pragma once

// Radial symbols g(|z|): power laws, annulus indicators, smooth annulus
// bumps, and the ultrathin-annuli family
//
//   a_n = sqrt(n),  rho_n = n^{-9/2},  d_n = n^{5/2} ln n,  phi_n = c / n,
//   g = sum_n d_n 1_{A_n},  A_n = { | |z| - a_n | <= rho_n }.
//
// Family members are generated on demand from their index, so a family can
// stand for the full infinite sum n >= n_min. Global quantities of such a
// family are reported as an exact partial value over n <= n_max plus an
// analytic tail bound.

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "focklab/errors.hpp"
#include "focklab/numerics.hpp"

namespace focklab {

// ---------------------------------------------------------------------------
// Smooth bump profile

/// psi(u) = exp(1 - 1/(1 - u^2)) on |u| < 1, zero outside. Peak psi(0) = 1.
inline double smooth_bump_profile(double u) noexcept {
  const double au = std::abs(u);
  if (au >= 1.0) return 0.0;
  const double w = (1.0 - au) * (1.0 + au);
  return std::exp(1.0 - 1.0 / w);
}

/// ln psi(u); -inf outside the support.
inline double log_smooth_bump_profile(double u) noexcept {
  const double au = std::abs(u);
  if (au >= 1.0) return -kInf;
  const double w = (1.0 - au) * (1.0 + au);
  return 1.0 - 1.0 / w;
}

/// int_{-1}^{1} exp(-1/(1-u^2)) du for the unnormalized standard bump.
/// Computed once with 30-digit quadrature (mpmath); re-derived in tests.
inline constexpr double kStandardBumpIntegral = 0.44399381616807943782;
/// int_{-1}^{1} psi(u) du = e * kStandardBumpIntegral.
inline constexpr double kBumpProfileIntegral = 1.2069003224378761753;
/// int_{-1}^{1} psi(u)^2 du.
inline constexpr double kBumpProfileSquaredIntegral = 0.98338081291272646363;

/// int_{-1}^{1} psi(u)^q du for q in {1, 2}.
inline double bump_profile_moment(int q) {
  if (q == 1) return kBumpProfileIntegral;
  if (q == 2) return kBumpProfileSquaredIntegral;
  throw ValidationError("bump_profile_moment: only profile powers 1 and 2 are tabulated");
}

// ---------------------------------------------------------------------------
// Pieces

/// amplitude * r^alpha on [lo, hi) (hi may be +inf).
struct PowerPiece {
  double alpha = 0.0;
  double amplitude = 1.0;
  double lo = 0.0;
  double hi = kInf;

  bool whole_plane() const noexcept { return lo == 0.0 && hi == kInf; }
  bool touches_origin() const noexcept { return lo == 0.0; }
  double eval(double r) const noexcept {
    if (r < lo || r >= hi) return 0.0;
    if (alpha == 0.0) return amplitude;
    return amplitude * std::pow(r, alpha);
  }
  friend bool operator==(const PowerPiece&, const PowerPiece&) = default;
};

/// amplitude on { | r - center | <= half_width }, or amplitude * psi((r-center)/half_width)^profile_power
/// when smooth.
struct AnnulusPiece {
  double center = 0.0;
  double half_width = 0.0;
  double amplitude = 0.0;
  bool smooth = false;
  int profile_power = 1;

  double inner() const noexcept { return center - half_width; }
  double outer() const noexcept { return center + half_width; }
  double eval(double r) const noexcept {
    const double u = (r - center) / half_width;
    if (smooth) {
      if (std::abs(u) >= 1.0) return 0.0;
      return amplitude * std::exp(profile_power * log_smooth_bump_profile(u));
    }
    return std::abs(u) <= 1.0 ? amplitude : 0.0;
  }
  /// Exact integral against dA.
  double area_mass() const {
    const double scale = smooth ? 0.5 * bump_profile_moment(profile_power) : 1.0;
    return std::abs(amplitude) * 4.0 * std::numbers::pi * center * half_width * scale;
  }
  friend bool operator==(const AnnulusPiece&, const AnnulusPiece&) = default;
};

using RadialPiece = std::variant<PowerPiece, AnnulusPiece>;

// ---------------------------------------------------------------------------
// Annuli family

struct AnnuliConfig {
  int n_min = 2;
  int n_max = 200;
  double c = 1e-3;  // sector constant, phi_n = c / n
  bool smooth = false;
  /// false: the symbol is the full family n >= n_min and n_max is the reporting
  /// horizon. true: the symbol is the finite sum over n_min..n_max.
  bool truncated = false;

  static double a(int n) { return std::sqrt(static_cast<double>(n)); }
  static double rho(int n) { return std::pow(static_cast<double>(n), -4.5); }
  static double d(int n) { return std::pow(static_cast<double>(n), 2.5) * std::log(static_cast<double>(n)); }
  static double log_d(int n) { return 2.5 * std::log(double(n)) + std::log(std::log(double(n))); }
  double phi(int n) const { return c / n; }

  void validate() const {
    if (n_min < 2) throw ValidationError("annuli: n_min must be >= 2");
    if (n_max < n_min) throw ValidationError("annuli: n_max must be >= n_min");
    if (!(c > 0.0 && c <= 1e-3)) throw ValidationError("annuli: sector constant c must lie in (0, 1e-3]");
  }
  friend bool operator==(const AnnuliConfig&, const AnnuliConfig&) = default;
};

/// The family sum_n d_n^power psi_n^power (psi_n = indicator or bump).
/// power = 2 is the squared symbol used by the quadratic tests.
struct AnnuliFamily {
  AnnuliConfig cfg;
  int power = 1;

  int first() const noexcept { return cfg.n_min; }
  /// Last member index, INT_MAX for the infinite family.
  int last() const noexcept { return cfg.truncated ? cfg.n_max : INT_MAX; }
  bool infinite() const noexcept { return !cfg.truncated; }

  AnnulusPiece member(int n) const {
    AnnulusPiece p;
    p.center = AnnuliConfig::a(n);
    p.half_width = AnnuliConfig::rho(n);
    p.amplitude = std::pow(AnnuliConfig::d(n), power);
    p.smooth = cfg.smooth;
    p.profile_power = power;
    return p;
  }
  double log_amplitude(int n) const { return power * AnnuliConfig::log_d(n); }

  /// Exact dA-mass of member n: d_n^p |A_n| (indicator) or d_n^p 2 pi a rho C_p (smooth).
  double member_mass(int n) const { return member(n).area_mass(); }

  /// Index range [lo, hi] of members whose support can meet radii [r_lo, r_hi].
  std::pair<int, int> members_meeting(double r_lo, double r_hi) const {
    const double lo_sq = std::max(r_lo - 1.0, 0.0);
    long lo = static_cast<long>(std::floor(lo_sq * lo_sq)) - 1;
    long hi = static_cast<long>(std::ceil((r_hi + 1.0) * (r_hi + 1.0))) + 1;
    lo = std::max<long>(lo, first());
    hi = std::min<long>(hi, last());
    // refine: exact support test
    while (lo <= hi && AnnuliConfig::a(int(lo)) + AnnuliConfig::rho(int(lo)) < r_lo) ++lo;
    while (hi >= lo && AnnuliConfig::a(int(hi)) - AnnuliConfig::rho(int(hi)) > r_hi) --hi;
    return {static_cast<int>(lo), static_cast<int>(hi)};
  }

  double eval(double r) const {
    if (r < 0.0) return 0.0;
    const long n0 = std::lround(r * r);
    for (long n = n0 - 1; n <= n0 + 1; ++n) {
      if (n < first() || n > last()) continue;
      const double v = member(int(n)).eval(r);
      if (v != 0.0) return v;
    }
    return 0.0;
  }
  friend bool operator==(const AnnuliFamily&, const AnnuliFamily&) = default;
};

/// Gap between annuli n and n+1: (a_{n+1} - rho_{n+1}) - (a_n + rho_n).
inline double annuli_gap(int n) {
  return (AnnuliConfig::a(n + 1) - AnnuliConfig::rho(n + 1)) - (AnnuliConfig::a(n) + AnnuliConfig::rho(n));
}

// ---------------------------------------------------------------------------
// RadialSymbol

using SymbolTerm = std::variant<PowerPiece, AnnulusPiece, AnnuliFamily>;

/// Pointwise sum of its terms. Annulus-type supports are pairwise disjoint.
/// Immutable after construction.
class RadialSymbol {
 public:
  RadialSymbol() = default;
  RadialSymbol(std::string name, std::vector<SymbolTerm> terms) : name_(std::move(name)), terms_(std::move(terms)) {
    validate();
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<SymbolTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  double eval(double r) const {
    KahanSum s;
    for (const auto& t : terms_) s += std::visit([r](const auto& x) { return x.eval(r); }, t);
    return s.value();
  }

  bool has_infinite_family() const {
    return std::any_of(terms_.begin(), terms_.end(), [](const SymbolTerm& t) {
      const auto* f = std::get_if<AnnuliFamily>(&t);
      return f && f->infinite();
    });
  }
  std::optional<AnnuliConfig> annuli_config() const {
    for (const auto& t : terms_)
      if (const auto* f = std::get_if<AnnuliFamily>(&t)) return f->cfg;
    return std::nullopt;
  }

  /// Upper bound for sup |g| from piece amplitudes (+inf when unbounded).
  double sup_abs_bound() const {
    double total = 0.0;
    for (const auto& t : terms_) {
      if (const auto* p = std::get_if<PowerPiece>(&t)) {
        const double A = std::abs(p->amplitude);
        if (A == 0.0) continue;
        if (p->alpha == 0.0)
          total += A;
        else if (p->alpha > 0.0)
          total += p->hi == kInf ? kInf : A * std::pow(p->hi, p->alpha);
        else
          total += p->lo == 0.0 ? kInf : A * std::pow(p->lo, p->alpha);
      } else if (const auto* a = std::get_if<AnnulusPiece>(&t)) {
        total += std::abs(a->amplitude);
      } else {
        const auto& f = std::get<AnnuliFamily>(t);
        total += f.infinite() ? kInf : std::pow(AnnuliConfig::d(f.cfg.n_max), f.power);
      }
    }
    return total;
  }

  RadialSymbol with_name(std::string name) const {
    RadialSymbol s = *this;
    s.name_ = std::move(name);
    return s;
  }

  friend bool operator==(const RadialSymbol&, const RadialSymbol&) = default;

 private:
  void validate() const {
    for (const auto& t : terms_) {
      if (const auto* p = std::get_if<PowerPiece>(&t)) {
        if (!std::isfinite(p->alpha) || !std::isfinite(p->amplitude))
          throw ValidationError("power piece: alpha and amplitude must be finite");
        if (!(p->lo >= 0.0) || !(p->hi > p->lo)) throw ValidationError("power piece: support must satisfy 0 <= lo < hi");
      } else if (const auto* a = std::get_if<AnnulusPiece>(&t)) {
        if (!(a->half_width > 0.0)) throw ValidationError("annulus: half_width must be positive");
        if (!(a->center >= a->half_width)) throw ValidationError("annulus: requires center >= half_width");
        if (!(a->amplitude >= 0.0) || !std::isfinite(a->amplitude))
          throw ValidationError("annulus: amplitude must be finite and non-negative");
        if (a->profile_power < 1) throw ValidationError("annulus: profile power must be >= 1");
      } else {
        const auto& f = std::get<AnnuliFamily>(t);
        f.cfg.validate();
        check_family_gaps(f);
      }
    }
    // pairwise disjointness of annulus-type supports
    for (std::size_t i = 0; i < terms_.size(); ++i)
      for (std::size_t j = i + 1; j < terms_.size(); ++j) check_disjoint(terms_[i], terms_[j]);
  }

  static void check_family_gaps(const AnnuliFamily& f) {
    // The gap exceeds 1/(2 sqrt(n+1)) - 2 n^{-9/2} > 0 for every n >= 2; checked
    // explicitly over the materialized range.
    const int hi = std::min(f.cfg.n_max, 1000000);
    for (int n = f.first(); n < hi; ++n)
      if (!(annuli_gap(n) > 0.0))
        throw DisjointnessViolation("annuli family: annuli " + std::to_string(n) + " and " + std::to_string(n + 1) +
                                    " overlap");
  }

  static bool intervals_overlap(double a0, double a1, double b0, double b1) { return a0 <= b1 && b0 <= a1; }

  static void check_disjoint(const SymbolTerm& x, const SymbolTerm& y) {
    const auto* ax = std::get_if<AnnulusPiece>(&x);
    const auto* ay = std::get_if<AnnulusPiece>(&y);
    const auto* fx = std::get_if<AnnuliFamily>(&x);
    const auto* fy = std::get_if<AnnuliFamily>(&y);
    if (ax && ay) {
      if (intervals_overlap(ax->inner(), ax->outer(), ay->inner(), ay->outer()))
        throw DisjointnessViolation("annulus pieces overlap");
    } else if ((ax && fy) || (fx && ay)) {
      const AnnulusPiece& a = ax ? *ax : *ay;
      const AnnuliFamily& f = fx ? *fx : *fy;
      const auto [lo, hi] = f.members_meeting(a.inner(), a.outer());
      if (lo <= hi) throw DisjointnessViolation("annulus piece overlaps annuli family member " + std::to_string(lo));
    } else if (fx && fy) {
      if (std::max(fx->first(), fy->first()) <= std::min(fx->last(), fy->last()))
        throw DisjointnessViolation("annuli families share member indices");
    }
  }

  std::string name_;
  std::vector<SymbolTerm> terms_;
};

// ---------------------------------------------------------------------------
// Builders

inline RadialSymbol build_power_symbol(double alpha, std::optional<std::pair<double, double>> support = std::nullopt) {
  PowerPiece p;
  p.alpha = alpha;
  if (support) {
    p.lo = support->first;
    p.hi = support->second;
  }
  return RadialSymbol("power", {p});
}

inline RadialSymbol build_annuli_symbol(const AnnuliConfig& cfg) {
  cfg.validate();
  return RadialSymbol(cfg.smooth ? "annuli-smooth" : "annuli", {AnnuliFamily{cfg, 1}});
}

inline RadialSymbol constant_symbol(double value) {
  PowerPiece p;
  p.amplitude = value;
  return RadialSymbol("constant", {p});
}

/// value * 1_{|z| < radius}
inline RadialSymbol disk_indicator(double radius = 1.0, double value = 1.0) {
  PowerPiece p;
  p.amplitude = value;
  p.hi = radius;
  return RadialSymbol("disk", {p});
}

inline RadialSymbol symbol_sum(const RadialSymbol& g, const RadialSymbol& h) {
  std::vector<SymbolTerm> terms = g.terms();
  terms.insert(terms.end(), h.terms().begin(), h.terms().end());
  return RadialSymbol(g.name() + "+" + h.name(), std::move(terms));
}

// ---------------------------------------------------------------------------
// Squared symbol

namespace detail {

inline std::optional<SymbolTerm> term_product(const SymbolTerm& x, const SymbolTerm& y, bool same) {
  const auto* px = std::get_if<PowerPiece>(&x);
  const auto* py = std::get_if<PowerPiece>(&y);
  if (px && py) {
    PowerPiece r;
    r.alpha = px->alpha + py->alpha;
    r.amplitude = px->amplitude * py->amplitude;
    r.lo = std::max(px->lo, py->lo);
    r.hi = std::min(px->hi, py->hi);
    if (!(r.lo < r.hi) || r.amplitude == 0.0) return std::nullopt;
    return r;
  }
  if (px || py) {
    const PowerPiece& p = px ? *px : *py;
    const SymbolTerm& other = px ? y : x;
    if (const auto* a = std::get_if<AnnulusPiece>(&other)) {
      if (a->outer() <= p.lo || a->inner() >= p.hi || p.amplitude == 0.0) return std::nullopt;
      if (p.alpha == 0.0 && a->inner() >= p.lo && a->outer() < p.hi) {
        AnnulusPiece r = *a;
        r.amplitude *= p.amplitude;
        return r;
      }
      throw ValidationError("squared symbol: product of a power piece and an annulus it partially covers is not representable");
    }
    const auto& f = std::get<AnnuliFamily>(other);
    const auto [lo, hi] = f.members_meeting(p.lo, p.hi == kInf ? 1e300 : p.hi);
    if (lo > hi || p.amplitude == 0.0) return std::nullopt;
    throw ValidationError("squared symbol: product of a power piece and an annuli family is not representable");
  }
  if (!same) return std::nullopt;  // distinct annulus-type supports are disjoint
  if (const auto* a = std::get_if<AnnulusPiece>(&x)) {
    AnnulusPiece r = *a;
    r.amplitude = a->amplitude * a->amplitude;
    r.profile_power = 2 * a->profile_power;
    return r;
  }
  AnnuliFamily f = std::get<AnnuliFamily>(x);
  f.power *= 2;
  return f;
}

}  // namespace detail

/// g^2 as a RadialSymbol: expands (sum_i p_i)^2 term by term.
inline RadialSymbol squared(const RadialSymbol& g) {
  std::vector<SymbolTerm> out;
  const auto& t = g.terms();
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i; j < t.size(); ++j) {
      auto prod = detail::term_product(t[i], t[j], i == j);
      if (!prod) continue;
      if (i != j) {
        std::visit(
            [](auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, AnnuliFamily>)
                throw ValidationError("squared symbol: cross term with a family");
              else
                v.amplitude *= 2.0;
            },
            *prod);
      }
      out.push_back(std::move(*prod));
    }
  }
  return RadialSymbol(g.name() + "^2", std::move(out));
}

// ---------------------------------------------------------------------------
// Area norms

/// int |g| dA as exact partial value plus a tail bound for infinite families.
struct MassEstimate {
  double partial = 0.0;
  double tail_bound = 0.0;
  double upper() const noexcept { return partial + tail_bound; }
};

/// Exact 2 pi int_lo^hi r^{alpha+1} dr; nullopt when divergent.
inline std::optional<double> power_area_mass(const PowerPiece& p) {
  const double A = std::abs(p.amplitude);
  if (A == 0.0) return 0.0;
  const double e = p.alpha + 2.0;
  if (e == 0.0) {
    if (p.lo == 0.0 || p.hi == kInf) return std::nullopt;
    return A * 2.0 * std::numbers::pi * std::log(p.hi / p.lo);
  }
  if (p.lo == 0.0 && e < 0.0) return std::nullopt;
  if (p.hi == kInf && e > 0.0) return std::nullopt;
  const double hi_term = p.hi == kInf ? 0.0 : std::pow(p.hi, e);
  const double lo_term = p.lo == 0.0 ? 0.0 : std::pow(p.lo, e);
  return A * 2.0 * std::numbers::pi * (hi_term - lo_term) / e;
}

/// Tail bound for sum_{n > N} mass_n of a power-1 family:
///   4 pi sum_{n>N} ln n n^{-3/2} <= 4 pi int_N^inf ln x x^{-3/2} dx = 8 pi (ln N + 2) / sqrt(N).
inline double annuli_l1_tail_bound(const AnnuliFamily& f, int N) {
  if (f.power != 1) return kInf;
  const double scale = f.cfg.smooth ? 0.5 * bump_profile_moment(1) : 1.0;
  return scale * 8.0 * std::numbers::pi * (std::log(double(N)) + 2.0) / std::sqrt(double(N));
}

/// int |g| dA. Power pieces are checked analytically; families report
/// partial (n <= n_max) plus the integral-comparison tail.
inline MassEstimate l1_norm_area(const RadialSymbol& g) {
  MassEstimate m;
  KahanSum partial;
  KahanSum tail;
  for (const auto& t : g.terms()) {
    if (const auto* p = std::get_if<PowerPiece>(&t)) {
      const auto v = power_area_mass(*p);
      if (!v)
        throw DivergentError("l1_norm_area: power piece r^" + std::to_string(p->alpha) +
                             " is not integrable on its support");
      partial += *v;
    } else if (const auto* a = std::get_if<AnnulusPiece>(&t)) {
      partial += a->area_mass();
    } else {
      const auto& f = std::get<AnnuliFamily>(t);
      for (int n = f.first(); n <= f.cfg.n_max; ++n) partial += f.member_mass(n);
      if (f.infinite()) {
        const double tb = annuli_l1_tail_bound(f, f.cfg.n_max);
        if (!std::isfinite(tb))
          throw DivergentError("l1_norm_area: family masses d_n^p |A_n| are not summable for p = " +
                               std::to_string(f.power));
        tail += tb;
      }
    }
  }
  m.partial = partial.value();
  m.tail_bound = tail.value();
  return m;
}

struct L2Verdict {
  bool finite = false;
  double value = 0.0;
  std::string certificate;
};

inline L2Verdict l2_norm_area_verdict(const RadialSymbol& g) {
  for (const auto& t : g.terms()) {
    const auto* f = std::get_if<AnnuliFamily>(&t);
    if (f && f->infinite())
      return {false, kInf, "terms d_n^2|A_n| = 4 pi n ln^2 n are increasing and unsummable"};
  }
  try {
    const auto m = l1_norm_area(squared(g));
    return {true, m.partial, ""};
  } catch (const DivergentError& e) {
    return {false, kInf, e.what()};
  }
}

inline double eval(const RadialSymbol& g, double r) {
  if (!(r >= 0.0)) throw ValidationError("eval: radius must be non-negative");
  return g.eval(r);
}

}  // namespace focklab
