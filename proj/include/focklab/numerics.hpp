#pragma once

// Special functions and adaptive quadrature shared by every other module.
//
// All routines are pure and reentrant. Summations run in a fixed order with
// Neumaier-compensated accumulation so results are bit-reproducible across
// runs and thread counts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

#include "focklab/errors.hpp"

namespace focklab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Compensated summation

/// Neumaier variant of Kahan summation.
class KahanSum {
 public:
  KahanSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// LogMagnitude

/// A real number stored as sign and natural log of its magnitude. Used where
/// values span hundreds of orders of magnitude (e^{a_n^2}, |c_n|^2, ...).
struct LogMagnitude {
  double log_abs = -kInf;
  int sign = 0;

  static LogMagnitude zero() noexcept { return {}; }
  static LogMagnitude from_log(double log_abs, int sign = 1) noexcept {
    if (sign == 0 || log_abs == -kInf) return {};
    return {log_abs, sign > 0 ? 1 : -1};
  }
  static LogMagnitude from_value(double v) noexcept {
    if (v == 0.0) return {};
    return {std::log(std::abs(v)), v > 0 ? 1 : -1};
  }

  bool is_zero() const noexcept { return sign == 0; }
  double value() const noexcept { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

  friend LogMagnitude operator*(LogMagnitude a, LogMagnitude b) noexcept {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.log_abs + b.log_abs, a.sign * b.sign};
  }
  friend LogMagnitude operator/(LogMagnitude a, LogMagnitude b) {
    if (b.sign == 0) throw NumericFailure("LogMagnitude: division by zero");
    if (a.sign == 0) return {};
    return {a.log_abs - b.log_abs, a.sign * b.sign};
  }
  friend LogMagnitude operator+(LogMagnitude a, LogMagnitude b) noexcept {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.log_abs < b.log_abs) std::swap(a, b);
    const double r = std::exp(b.log_abs - a.log_abs);
    if (a.sign == b.sign) return {a.log_abs + std::log1p(r), a.sign};
    if (r == 1.0) return {};
    return {a.log_abs + std::log1p(-r), a.sign};
  }
};

/// Sums positive terms given by their logarithms, in index order.
class LogSumAccumulator {
 public:
  void add_log(double log_term) {
    if (log_term == -kInf) return;
    if (log_term > shift_) {
      // rescale the running sum to the new reference
      const double factor = shift_ == -kInf ? 0.0 : std::exp(shift_ - log_term);
      KahanSum rescaled;
      rescaled += sum_.value() * factor;
      sum_ = rescaled;
      shift_ = log_term;
    }
    sum_ += std::exp(log_term - shift_);
  }
  double log_value() const noexcept {
    const double s = sum_.value();
    return s > 0 ? shift_ + std::log(s) : -kInf;
  }

 private:
  double shift_ = -kInf;
  KahanSum sum_;
};

// ---------------------------------------------------------------------------
// Special functions

/// ln Gamma(x) for x > 0. Stirling series after upward recurrence to x >= 15.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("log_gamma: argument must be positive and finite");
  if (x == 1.0 || x == 2.0) return 0.0;
  double shift_log = 0.0;
  if (x < 15.0) {
    double prod = 1.0;
    while (x < 15.0) {
      prod *= x;
      x += 1.0;
    }
    shift_log = std::log(prod);
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli coefficients B_{2k} / (2k (2k-1))
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360360.0 + inv2 * (1.0 / 156.0)))))));
  constexpr double half_log_two_pi = 0.91893853320467274178032973640562;
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - shift_log;
}

/// e^{-x} I_0(x) for x >= 0. Power series below 25, Hankel asymptotic series above.
inline double bessel_i0_scaled(double x) {
  if (!(x >= 0.0)) throw ValidationError("bessel_i0_scaled: argument must be non-negative");
  if (x == kInf) return 0.0;
  if (x <= 25.0) {
    const double q = 0.25 * x * x;
    KahanSum sum;
    double term = 1.0;
    sum += term;
    for (int k = 1; k < 500; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < 1e-17 * sum.value()) break;
    }
    return std::exp(-x) * sum.value();
  }
  // sum_k ((2k-1)!!)^2 / (k! (8x)^k); terms decrease until k ~ 2x
  KahanSum sum;
  double term = 1.0;
  sum += term;
  const double inv8x = 1.0 / (8.0 * x);
  for (int k = 1; k < 200; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) * inv8x / k;
    if (next >= term) break;
    term = next;
    sum += term;
    if (term < 1e-17) break;
  }
  return sum.value() / std::sqrt(2.0 * std::numbers::pi * x);
}

// ---------------------------------------------------------------------------
// Adaptive quadrature

enum class QuadratureStatus { Converged, Divergent, MaxDepth };

inline const char* to_string(QuadratureStatus s) noexcept {
  switch (s) {
    case QuadratureStatus::Converged: return "Converged";
    case QuadratureStatus::Divergent: return "Divergent";
    case QuadratureStatus::MaxDepth: return "MaxDepth";
  }
  return "?";
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // absolute
  QuadratureStatus status = QuadratureStatus::Converged;
  std::size_t panels = 0;

  bool converged() const noexcept { return status == QuadratureStatus::Converged; }
};

/// A panel sum is accepted when the total error is at most
/// max(abs_tol, rel_tol * |value|).
struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 60;
  std::size_t max_panels = 200000;
  bool detect_divergence = true;

  static QuadratureOptions with_tol(double tol) {
    QuadratureOptions o;
    o.abs_tol = tol;
    o.rel_tol = tol;
    return o;
  }
  double tolerance_for(double value) const noexcept { return std::max(abs_tol, rel_tol * std::abs(value)); }
};

namespace detail {

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  double error = 0.0;
  int depth = 0;
  bool finite = true;
};

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights at kKronrodNodes[1], [3], [5], [7]
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// 7-point Gauss / 15-point Kronrod panel; error is |K15 - G7|.
template <class F>
Panel gauss_kronrod_panel(const F& f, double lo, double hi, int depth) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = static_cast<double>(f(center));
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  bool finite = std::isfinite(fc);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double f1 = static_cast<double>(f(center - dx));
    const double f2 = static_cast<double>(f(center + dx));
    finite = finite && std::isfinite(f1) && std::isfinite(f2);
    kronrod += kKronrodWeights[i] * (f1 + f2);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
  }
  Panel p;
  p.lo = lo;
  p.hi = hi;
  p.depth = depth;
  p.value = kronrod * half;
  p.error = std::abs((kronrod - gauss) * half);
  p.finite = finite;
  if (!finite && std::isnan(p.value)) throw NumericFailure("quadrature: integrand returned NaN");
  return p;
}

/// History of estimates on the panel touching one endpoint, used for the
/// divergence certificate.
struct EndpointHistory {
  std::vector<double> values;
  std::vector<double> widths;
};

inline double region_sum(const std::vector<Panel>& panels, double a, double b) {
  KahanSum s;
  for (const auto& p : panels)
    if (p.lo >= a && p.hi <= b) s += p.value;
  return s.value();
}

/// Divergence certificate: over the last 8 refinements of the endpoint panel
/// the estimates kept one sign and never shrank (|e_{k+1}| >= 0.999 |e_k|),
/// and the integral over the region covered 8 refinements ago grew by >= 1.5x.
inline bool endpoint_diverges(const EndpointHistory& h, const std::vector<Panel>& panels, double endpoint,
                              bool at_low_end) {
  constexpr std::size_t kWindow = 8;
  const std::size_t n = h.values.size();
  if (n < kWindow + 1) return false;
  const std::size_t first = n - kWindow - 1;
  const double v0 = h.values[first];
  if (v0 == 0.0) return false;
  for (std::size_t i = first; i + 1 < n; ++i) {
    const double a = h.values[i];
    const double b = h.values[i + 1];
    if (a * b <= 0.0) return false;
    if (std::abs(b) < 0.999 * std::abs(a)) return false;
  }
  const double w = h.widths[first];
  const double grown = at_low_end ? region_sum(panels, endpoint, endpoint + w) : region_sum(panels, endpoint - w, endpoint);
  return grown / v0 >= 1.5;
}

}  // namespace detail

/// Globally adaptive bisection with 7/15-point Gauss-Kronrod panels.
///
/// Converged: total error <= opts.tolerance_for(value).
/// Divergent: a panel touching an endpoint produced monotonically growing
///   partial magnitudes across >= 8 successive refinements, or the integrand
///   returned an infinite value.
/// MaxDepth: a panel reached opts.max_depth (or max_panels was exhausted)
///   without either certificate.
template <class F>
QuadratureResult integrate_interval(const F& f, double lo, double hi, const QuadratureOptions& opts) {
  if (!(lo < hi)) {
    if (lo == hi) return {0.0, 0.0, QuadratureStatus::Converged, 0};
    throw ValidationError("integrate_interval: requires lo < hi");
  }
  std::vector<detail::Panel> panels;
  panels.reserve(64);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> queue;

  KahanSum total_value;
  KahanSum total_error;
  auto push = [&](const detail::Panel& p) {
    panels.push_back(p);
    queue.emplace(p.error, panels.size() - 1);
    total_value += p.value;
    total_error += p.error;
  };

  auto finish = [&](QuadratureStatus status) {
    std::vector<std::size_t> order;
    order.reserve(queue.size());
    // live panels are exactly those still in the queue
    std::vector<bool> live(panels.size(), false);
    auto q = queue;
    while (!q.empty()) {
      live[q.top().second] = true;
      q.pop();
    }
    for (std::size_t i = 0; i < panels.size(); ++i)
      if (live[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return panels[a].lo < panels[b].lo; });
    KahanSum v;
    KahanSum e;
    for (auto i : order) {
      v += panels[i].value;
      e += panels[i].error;
    }
    QuadratureResult r{v.value(), e.value(), status, order.size()};
    if (status == QuadratureStatus::Divergent) r.error_estimate = kInf;
    return r;
  };

  detail::EndpointHistory low_history;
  detail::EndpointHistory high_history;
  // live-panel view for region sums in the divergence check
  std::vector<detail::Panel> live_view;

  push(detail::gauss_kronrod_panel(f, lo, hi, 0));
  if (!panels.back().finite) return finish(QuadratureStatus::Divergent);

  while (true) {
    const double value = total_value.value();
    const double error = total_error.value();
    if (error <= opts.tolerance_for(value)) return finish(QuadratureStatus::Converged);
    if (queue.size() >= opts.max_panels) return finish(QuadratureStatus::MaxDepth);

    const auto [err, index] = queue.top();
    queue.pop();
    const detail::Panel parent = panels[index];
    if (parent.depth >= opts.max_depth) {
      queue.emplace(err, index);
      return finish(QuadratureStatus::MaxDepth);
    }
    const double mid = 0.5 * (parent.lo + parent.hi);
    if (!(mid > parent.lo && mid < parent.hi)) {
      queue.emplace(err, index);
      return finish(QuadratureStatus::MaxDepth);
    }
    total_value += -parent.value;
    total_error += -parent.error;
    push(detail::gauss_kronrod_panel(f, parent.lo, mid, parent.depth + 1));
    const bool left_finite = panels.back().finite;
    push(detail::gauss_kronrod_panel(f, mid, parent.hi, parent.depth + 1));
    const bool right_finite = panels.back().finite;
    if (!left_finite || !right_finite) return finish(QuadratureStatus::Divergent);

    if (opts.detect_divergence && (parent.lo == lo || parent.hi == hi)) {
      const bool at_low = parent.lo == lo;
      auto& hist = at_low ? low_history : high_history;
      hist.values.push_back(parent.value);
      hist.widths.push_back(parent.hi - parent.lo);
      if (hist.values.size() >= 9) {
        live_view.clear();
        auto q = queue;
        while (!q.empty()) {
          live_view.push_back(panels[q.top().second]);
          q.pop();
        }
        if (detail::endpoint_diverges(hist, live_view, at_low ? lo : hi, at_low))
          return finish(QuadratureStatus::Divergent);
      }
    }
  }
}

template <class F>
QuadratureResult integrate_interval(const F& f, double lo, double hi, double tol) {
  return integrate_interval(f, lo, hi, QuadratureOptions::with_tol(tol));
}

/// Certified decay of |f| beyond `start`:
///   Gaussian:    |f(r)| <= e^{log_magnitude} e^{-(r - start)^2 / scale}
///   Exponential: |f(r)| <= e^{log_magnitude} e^{-(r - start) / scale}
struct TailEnvelope {
  enum class Shape { Gaussian, Exponential };
  Shape shape = Shape::Gaussian;
  double start = 0.0;
  double log_magnitude = 0.0;
  double scale = 1.0;

  /// Bound on the integral of |f| over [r, inf), r >= start.
  double tail_beyond(double r) const {
    const double x = std::max(r - start, 0.0);
    if (shape == Shape::Gaussian) {
      const double s = std::sqrt(scale);
      return std::exp(log_magnitude) * 0.5 * std::sqrt(std::numbers::pi) * s * std::erfc(x / s);
    }
    return std::exp(log_magnitude - x / scale) * scale;
  }
};

/// Integrates f over [lo, inf): truncates where the certified tail drops
/// below a tenth of the tolerance and adds that tail to the error estimate.
template <class F>
QuadratureResult integrate_semi_infinite(const F& f, double lo, const TailEnvelope& env,
                                         const QuadratureOptions& opts) {
  if (!(env.scale > 0.0)) throw ValidationError("integrate_semi_infinite: decay scale must be positive");
  const double base = std::max(lo, env.start);
  const double step = env.shape == TailEnvelope::Shape::Gaussian ? std::sqrt(env.scale) : env.scale;
  auto cutoff_for = [&](double target) {
    double r = base;
    for (int k = 0; k < 4000 && env.tail_beyond(r) > target; ++k) r += 0.5 * step;
    return r;
  };
  double target = opts.abs_tol > 0.0 ? opts.abs_tol / 10.0 : kInf;
  double cutoff = target == kInf ? base + 8.0 * step : cutoff_for(target);
  QuadratureResult result;
  for (int attempt = 0; attempt < 12; ++attempt) {
    result = integrate_interval(f, lo, cutoff, opts);
    if (result.status != QuadratureStatus::Converged) return result;
    const double tail = env.tail_beyond(cutoff);
    const double wanted = opts.tolerance_for(result.value) / 10.0;
    if (tail <= wanted || tail == 0.0) {
      result.error_estimate += tail;
      return result;
    }
    cutoff = cutoff_for(wanted);
  }
  result.error_estimate += env.tail_beyond(cutoff);
  result.status = QuadratureStatus::MaxDepth;
  return result;
}

/// Gaussian-tail convenience form: |f(r)| <= e^{-(r - lo)^2 / decay_scale}.
template <class F>
QuadratureResult integrate_semi_infinite(const F& f, double lo, double decay_scale, double tol) {
  TailEnvelope env;
  env.start = lo;
  env.scale = decay_scale;
  return integrate_semi_infinite(f, lo, env, QuadratureOptions::with_tol(tol));
}

}  // namespace focklab
